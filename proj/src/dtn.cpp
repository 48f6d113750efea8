#include "pcast/dtn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <unordered_set>

#include "json.hpp"
#include "pcast/errors.hpp"
#include "pcast/format.hpp"

namespace pcast::dtn {

ProfileSummary make_summary(const std::string& origin, const profiling::BehavioralProfile& p) {
  ProfileSummary s;
  s.origin = origin;
  s.weight = p.weights(0);
  s.component = p.components.row(0);
  // 8-bit quantization: the summary is a deliberately coarse disclosure.
  for (Eigen::Index i = 0; i < s.component.size(); ++i)
    s.component(i) = std::round(s.component(i) * 127.0) / 127.0;
  return s;
}

PeerReply Protocol::peer_reply(const Message& msg, const ProtocolState& carrier_state,
                               const NodeView& peer) const {
  (void)msg;
  (void)carrier_state;
  PeerReply r;
  r.has_copy = peer.has_copy();
  r.has_payload = peer.has_payload();
  r.opted_out = peer.opted_out();
  r.accepts = peer.accepts();
  return r;
}

std::map<std::string, std::set<std::string>> ground_truth_receivers(
    const std::vector<Message>& workload,
    const std::map<std::string, profiling::BehavioralProfile>& profiles, double delta,
    const std::map<std::string, std::string>& node_interests) {
  std::map<std::string, std::set<std::string>> truth;
  for (const auto& msg : workload) {
    auto& receivers = truth[msg.id];
    if (msg.target.mode == profiling::TargetMode::mobility_coupled) {
      if (!msg.target.profile) throw ValidationError("mobility_coupled message without TP: " + msg.id);
      for (const auto& [node, profile] : profiles) {
        if (node == msg.source) continue;
        auto [tp, p] = profiling::align_profiles(*msg.target.profile, profile);
        if (profiling::similarity(tp, p) >= delta) receivers.insert(node);
      }
    } else {
      if (!msg.target.interest_tag)
        throw ValidationError("mobility_independent message without interest tag: " + msg.id);
      for (const auto& [node, tag] : node_interests) {
        if (node != msg.source && tag == *msg.target.interest_tag) receivers.insert(node);
      }
    }
  }
  return truth;
}

namespace {

const char* kind_name(LogRecord::Kind k) {
  switch (k) {
    case LogRecord::Kind::inject: return "inject";
    case LogRecord::Kind::transmit: return "transmit";
    case LogRecord::Kind::deliver: return "deliver";
    case LogRecord::Kind::drop: return "drop";
    case LogRecord::Kind::control: return "control";
  }
  return "?";
}

}  // namespace

std::string log_record_to_json(const LogRecord& r) {
  nlohmann::json j;
  j["t"] = r.t;
  j["kind"] = kind_name(r.kind);
  j["from"] = r.from;
  j["to"] = r.to;
  j["message"] = r.message;
  j["units"] = r.units;
  if (r.kind == LogRecord::Kind::transmit) j["stored"] = r.stored;
  return j.dump();
}

void write_event_log(std::ostream& out, const EventLog& log, const std::string& manifest_digest) {
  if (!manifest_digest.empty())
    out << "{\"kind\":\"manifest\",\"digest\":\"" << manifest_digest << "\"}\n";
  for (const auto& r : log) out << log_record_to_json(r) << "\n";
}

// ---------------------------------------------------------------------------
// engine
// ---------------------------------------------------------------------------

namespace {

struct Contact {
  int u, v;
  double start, end;
};

class Engine;

class EngineNodeView final : public NodeView {
public:
  EngineNodeView(const Engine& eng, int node, int msg) : eng_(eng), node_(node), msg_(msg) {}
  const std::string& id() const override;
  bool has_copy() const override;
  bool has_payload() const override;
  bool opted_out() const override;
  bool accepts() const override;
  double distance_to_target() const override;
  double similarity_to_summary(const ProfileSummary& s) const override;
  std::optional<ProfileSummary> own_summary() const override;

private:
  const Engine& eng_;
  int node_;
  int msg_;
};

struct Copy {
  int hops = 0;
  double acquired = 0.0;
  ProtocolState state;
};

class Engine {
public:
  Engine(const tvc::ContactTrace& contacts, const Protocol& protocol,
         std::vector<Message> workload,
         const std::map<std::string, profiling::BehavioralProfile>& profiles,
         const SimConfig& config)
      : protocol_(protocol), config_(config), rng_(Rng::split(config.seed, 0xdec1de)) {
    build_universe(contacts, workload, profiles);
    index_contacts(contacts);
    prepare_workload(std::move(workload));
  }

  SimResult run();

  // NodeView backing
  const std::string& node_name(int i) const { return node_ids_[static_cast<std::size_t>(i)]; }
  bool node_has_copy(int node, int msg) const {
    return copies_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)].has_value();
  }
  bool node_has_payload(int node, int msg) const {
    return payload_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)] != 0;
  }
  bool node_opted_out(int node) const { return opted_[static_cast<std::size_t>(node)] != 0; }
  bool node_accepts(int node, int msg) const {
    return accepts_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)] != 0;
  }
  double node_distance_to_tp(int node, int msg) const {
    return dist_tp_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)];
  }
  double summary_similarity(int node, const ProfileSummary& s) const;
  std::optional<ProfileSummary> node_summary(int node) const {
    const auto& s = summaries_[static_cast<std::size_t>(node)];
    return s ? std::optional<ProfileSummary>(*s) : std::nullopt;
  }

private:
  void build_universe(const tvc::ContactTrace& contacts, const std::vector<Message>& workload,
                      const std::map<std::string, profiling::BehavioralProfile>& profiles);
  void index_contacts(const tvc::ContactTrace& contacts);
  void prepare_workload(std::vector<Message> workload);

  void inject(int msg, double t);
  void expire(int msg, double t);
  void evaluate(int carrier, int peer, int contact, int msg, double t);
  void acquire_copy(int node, int msg, double t, int hops, ProtocolState state, int from);
  void release_copy(int node, int msg);
  void payload_arrived(int from, int node, int msg, double t, bool stored);
  void schedule_reevals(int node, int msg, int arrived_via_contact, double t);
  bool alive(int msg, double t) const {
    const auto& m = msgs_[static_cast<std::size_t>(msg)];
    return t >= m.created && t < m.created + m.ttl;
  }
  std::uint64_t transfer_key(int contact, int msg) const {
    return static_cast<std::uint64_t>(contact) * msgs_.size() + static_cast<std::uint64_t>(msg);
  }

  const Protocol& protocol_;
  SimConfig config_;
  Rng rng_;

  std::vector<std::string> node_ids_;
  std::map<std::string, int> node_index_;
  std::vector<Contact> contacts_;
  std::vector<Message> msgs_;  // sorted by id, TPs aligned
  double horizon_ = 0.0;

  std::vector<std::optional<profiling::BehavioralProfile>> profile_;  // aligned, by node
  std::vector<char> opted_;
  std::vector<std::string> interest_;
  std::vector<std::optional<ProfileSummary>> summaries_;

  std::vector<std::vector<double>> dist_tp_;  // [msg][node]
  std::vector<std::vector<char>> accepts_;    // [msg][node] protocol-side acceptance
  mutable std::vector<std::vector<double>> summary_sim_;  // [node][origin], NaN = unset

  std::vector<std::vector<std::optional<Copy>>> copies_;  // [msg][node]
  std::vector<std::vector<char>> payload_;
  std::vector<std::vector<char>> delivered_;
  std::vector<std::vector<char>> accepted_;
  std::vector<std::vector<int>> carried_;  // node -> message indices
  std::vector<int> copies_alive_;
  std::vector<std::vector<int>> active_;  // node -> active contact indices

  std::map<std::string, std::set<std::string>> truth_;
  std::vector<const std::set<std::string>*> truth_by_idx_;

  struct Event {
    double t;
    int rank;  // 0 expire, 1 inject, 2 contact_start, 3 reeval
    int a, b, contact, msg;
    std::uint64_t serial;
    bool operator>(const Event& o) const {
      return std::tie(t, rank, a, b, msg, serial) > std::tie(o.t, o.rank, o.a, o.b, o.msg, o.serial);
    }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::uint64_t serial_ = 0;
  std::unordered_set<std::uint64_t> transfer_done_;

  EventLog log_;
  ControlTotals control_;
  std::int64_t violations_ = 0;
};

const std::string& EngineNodeView::id() const { return eng_.node_name(node_); }
bool EngineNodeView::has_copy() const { return eng_.node_has_copy(node_, msg_); }
bool EngineNodeView::has_payload() const { return eng_.node_has_payload(node_, msg_); }
bool EngineNodeView::opted_out() const { return eng_.node_opted_out(node_); }
bool EngineNodeView::accepts() const { return eng_.node_accepts(node_, msg_); }
double EngineNodeView::distance_to_target() const { return eng_.node_distance_to_tp(node_, msg_); }
double EngineNodeView::similarity_to_summary(const ProfileSummary& s) const {
  return eng_.summary_similarity(node_, s);
}
std::optional<ProfileSummary> EngineNodeView::own_summary() const {
  return eng_.node_summary(node_);
}

void Engine::build_universe(const tvc::ContactTrace& contacts,
                            const std::vector<Message>& workload,
                            const std::map<std::string, profiling::BehavioralProfile>& profiles) {
  node_ids_ = contacts.node_ids;
  std::sort(node_ids_.begin(), node_ids_.end());
  node_ids_.erase(std::unique(node_ids_.begin(), node_ids_.end()), node_ids_.end());
  for (std::size_t i = 0; i < node_ids_.size(); ++i)
    node_index_[node_ids_[i]] = static_cast<int>(i);
  for (const auto& m : workload) {
    if (!node_index_.count(m.source))
      throw ValidationError("workload message " + m.id + " has unknown source node " + m.source);
  }

  // Common location universe across node profiles and message TPs.
  std::set<std::string> universe;
  for (const auto& [node, p] : profiles) {
    (void)node;
    universe.insert(p.locations.begin(), p.locations.end());
  }
  for (const auto& m : workload) {
    if (m.target.profile)
      universe.insert(m.target.profile->locations.begin(), m.target.profile->locations.end());
  }
  profiling::BehavioralProfile anchor;  // rank-0 probe used only for padding
  anchor.locations.assign(universe.begin(), universe.end());
  anchor.components = Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(anchor.locations.size()));
  anchor.weights = Eigen::VectorXd::Zero(0);

  const std::size_t n = node_ids_.size();
  profile_.resize(n);
  opted_.assign(n, 0);
  interest_.assign(n, "");
  summaries_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = profiles.find(node_ids_[i]);
    if (it != profiles.end()) {
      profile_[i] = profiling::align_profiles(it->second, anchor).first;
      summaries_[i] = make_summary(node_ids_[i], *profile_[i]);
    }
    if (config_.opted_out.count(node_ids_[i])) opted_[i] = 1;
    auto tag = config_.node_interests.find(node_ids_[i]);
    if (tag != config_.node_interests.end()) interest_[i] = tag->second;
  }
  summary_sim_.assign(n, {});
}

void Engine::index_contacts(const tvc::ContactTrace& contacts) {
  contacts_.reserve(contacts.contacts.size());
  double last_start = -std::numeric_limits<double>::infinity();
  double max_end = 0.0;
  for (const auto& c : contacts.contacts) {
    if (c.start < last_start) throw ValidationError("contact trace is not sorted by start time");
    last_start = c.start;
    contacts_.push_back({node_index_.at(c.u), node_index_.at(c.v), c.start, c.end});
    max_end = std::max(max_end, c.end);
  }
  horizon_ = config_.horizon.value_or(max_end);
}

void Engine::prepare_workload(std::vector<Message> workload) {
  std::sort(workload.begin(), workload.end(),
            [](const Message& a, const Message& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < workload.size(); ++i) {
    if (workload[i].id == workload[i - 1].id)
      throw ValidationError("duplicate message id: " + workload[i].id);
  }
  // Align TPs onto the node-profile universe.
  std::optional<profiling::BehavioralProfile> any;
  for (const auto& p : profile_) {
    if (p) {
      any = *p;
      break;
    }
  }
  for (auto& m : workload) {
    if (m.target.profile && any)
      m.target.profile = profiling::align_profiles(*m.target.profile, *any).first;
    if (!(m.ttl > 0)) throw ValidationError("message " + m.id + " needs ttl > 0");
    if (m.budgets.max_hops < 1 || m.budgets.max_copies < 1)
      throw ValidationError("message " + m.id + " budgets must be >= 1");
  }
  msgs_ = std::move(workload);

  std::map<std::string, profiling::BehavioralProfile> aligned_profiles;
  std::map<std::string, std::string> interests;
  for (std::size_t i = 0; i < node_ids_.size(); ++i) {
    if (profile_[i]) aligned_profiles.emplace(node_ids_[i], *profile_[i]);
    if (!interest_[i].empty()) interests.emplace(node_ids_[i], interest_[i]);
  }
  truth_ = ground_truth_receivers(msgs_, aligned_profiles, config_.delta, interests);

  const double pdelta = config_.protocol_delta.value_or(config_.delta);
  const std::size_t n = node_ids_.size();
  dist_tp_.assign(msgs_.size(), std::vector<double>(n, 1.0));
  accepts_.assign(msgs_.size(), std::vector<char>(n, 0));
  truth_by_idx_.resize(msgs_.size());
  for (std::size_t j = 0; j < msgs_.size(); ++j) {
    const auto& m = msgs_[j];
    truth_by_idx_[j] = &truth_.at(m.id);
    for (std::size_t i = 0; i < n; ++i) {
      if (m.target.mode == profiling::TargetMode::mobility_coupled) {
        if (profile_[i] && m.target.profile) {
          const double sim = profiling::similarity(*profile_[i], *m.target.profile);
          dist_tp_[j][i] = 1.0 - sim;
          accepts_[j][i] = sim >= pdelta ? 1 : 0;
        }
      } else {
        accepts_[j][i] = (!interest_[i].empty() && m.target.interest_tag &&
                          interest_[i] == *m.target.interest_tag)
                             ? 1
                             : 0;
      }
    }
  }

  copies_.assign(msgs_.size(), std::vector<std::optional<Copy>>(n));
  payload_.assign(msgs_.size(), std::vector<char>(n, 0));
  delivered_.assign(msgs_.size(), std::vector<char>(n, 0));
  accepted_.assign(msgs_.size(), std::vector<char>(n, 0));
  carried_.assign(n, {});
  copies_alive_.assign(msgs_.size(), 0);
  active_.assign(n, {});
}

double Engine::summary_similarity(int node, const ProfileSummary& s) const {
  const auto& p = profile_[static_cast<std::size_t>(node)];
  if (!p) return 0.0;
  auto origin = node_index_.find(s.origin);
  if (origin != node_index_.end()) {
    auto& row = summary_sim_[static_cast<std::size_t>(node)];
    if (row.empty()) row.assign(node_ids_.size(), std::numeric_limits<double>::quiet_NaN());
    double& slot = row[static_cast<std::size_t>(origin->second)];
    if (!std::isnan(slot)) return slot;
    double sim = 0.0;
    for (Eigen::Index i = 0; i < p->components.rows(); ++i)
      sim += p->weights(i) * s.weight * std::abs(p->components.row(i).dot(s.component));
    slot = sim;
    return sim;
  }
  double sim = 0.0;
  for (Eigen::Index i = 0; i < p->components.rows(); ++i)
    sim += p->weights(i) * s.weight * std::abs(p->components.row(i).dot(s.component));
  return sim;
}

void Engine::schedule_reevals(int node, int msg, int arrived_via_contact, double t) {
  auto& act = active_[static_cast<std::size_t>(node)];
  std::erase_if(act, [&](int c) { return contacts_[static_cast<std::size_t>(c)].end < t; });
  for (int c : act) {
    if (c == arrived_via_contact) continue;
    if (transfer_done_.count(transfer_key(c, msg))) continue;
    const auto& ct = contacts_[static_cast<std::size_t>(c)];
    const int peer = ct.u == node ? ct.v : ct.u;
    queue_.push({t, 3, node, peer, c, msg, serial_++});
  }
}

void Engine::acquire_copy(int node, int msg, double t, int hops, ProtocolState state, int from) {
  auto& slot = copies_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)];
  slot = Copy{hops, t, std::move(state)};
  carried_[static_cast<std::size_t>(node)].push_back(msg);
  ++copies_alive_[static_cast<std::size_t>(msg)];

  if (config_.buffer_capacity &&
      carried_[static_cast<std::size_t>(node)].size() > *config_.buffer_capacity) {
    // Oldest-first drop to make room.
    auto& held = carried_[static_cast<std::size_t>(node)];
    int victim = held.front();
    for (int j : held) {
      const auto& a = copies_[static_cast<std::size_t>(j)][static_cast<std::size_t>(node)];
      const auto& b = copies_[static_cast<std::size_t>(victim)][static_cast<std::size_t>(node)];
      if (a->acquired < b->acquired || (a->acquired == b->acquired && j < victim)) victim = j;
    }
    log_.push_back({t, LogRecord::Kind::drop, node_name(node), node_name(node),
                    msgs_[static_cast<std::size_t>(victim)].id, 0.0, false});
    release_copy(node, victim);
  }
  (void)from;
}

void Engine::release_copy(int node, int msg) {
  copies_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)].reset();
  auto& held = carried_[static_cast<std::size_t>(node)];
  held.erase(std::find(held.begin(), held.end(), msg));
  --copies_alive_[static_cast<std::size_t>(msg)];
}

void Engine::payload_arrived(int from, int node, int msg, double t, bool stored) {
  auto& have = payload_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)];
  const bool first = have == 0;
  have = 1;
  log_.push_back({t, LogRecord::Kind::transmit, node_name(from), node_name(node),
                  msgs_[static_cast<std::size_t>(msg)].id, 1.0, stored});
  if (!first) return;
  if (accepts_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)])
    accepted_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)] = 1;
  if (truth_by_idx_[static_cast<std::size_t>(msg)]->count(node_name(node)) &&
      !delivered_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)]) {
    delivered_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(node)] = 1;
    log_.push_back({t, LogRecord::Kind::deliver, node_name(from), node_name(node),
                    msgs_[static_cast<std::size_t>(msg)].id, 0.0, false});
  }
}

void Engine::inject(int msg, double t) {
  const auto& m = msgs_[static_cast<std::size_t>(msg)];
  const int src = node_index_.at(m.source);
  log_.push_back({t, LogRecord::Kind::inject, m.source, m.source, m.id, 0.0, true});
  EngineNodeView view(*this, src, msg);
  acquire_copy(src, msg, t, 0, protocol_.initial_state(m, view), src);
  payload_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(src)] = 1;
  schedule_reevals(src, msg, -1, t);
}

void Engine::expire(int msg, double t) {
  for (std::size_t i = 0; i < node_ids_.size(); ++i) {
    if (copies_[static_cast<std::size_t>(msg)][i]) {
      log_.push_back({t, LogRecord::Kind::drop, node_ids_[i], node_ids_[i],
                      msgs_[static_cast<std::size_t>(msg)].id, 0.0, false});
      release_copy(static_cast<int>(i), msg);
    }
  }
}

void Engine::evaluate(int carrier, int peer, int contact, int msg, double t) {
  if (transfer_done_.count(transfer_key(contact, msg))) return;
  if (!alive(msg, t)) return;
  auto& slot = copies_[static_cast<std::size_t>(msg)][static_cast<std::size_t>(carrier)];
  if (!slot) return;
  // Nothing left to decide once the peer stores both copy and payload; the
  // per-contact summary exchange already told the carrier.
  if (node_has_copy(peer, msg) && node_has_payload(peer, msg)) return;

  const auto& m = msgs_[static_cast<std::size_t>(msg)];
  control_.messages[m.id] += 2;  // query + reply
  const double qunits = protocol_.query_units(m, slot->state);
  control_.units[m.id] += qunits + 1.0;
  if (config_.log_control) {
    log_.push_back({t, LogRecord::Kind::control, node_name(carrier), node_name(peer), m.id,
                    qunits, false});
    log_.push_back({t, LogRecord::Kind::control, node_name(peer), node_name(carrier), m.id, 1.0,
                    false});
  }

  EngineNodeView peer_view(*this, peer, msg);
  const PeerReply reply = protocol_.peer_reply(m, slot->state, peer_view);
  BudgetStatus budget{slot->hops, copies_alive_[static_cast<std::size_t>(msg)], m.budgets};
  Decision decision = protocol_.on_contact(m, slot->state, reply, budget, rng_);

  bool transferred = false;
  switch (decision.kind) {
    case ActionKind::skip:
      slot->state = std::move(decision.next_state);
      break;
    case ActionKind::replicate:
    case ActionKind::add_holder: {
      if (node_has_copy(peer, msg) || node_opted_out(peer) || !budget.copy_allowed() ||
          !budget.hop_allowed()) {
        ++violations_;
        break;
      }
      slot->state = std::move(decision.next_state);
      const int hops = slot->hops + 1;
      acquire_copy(peer, msg, t, hops, std::move(decision.transferred_state), carrier);
      payload_arrived(carrier, peer, msg, t, true);
      transferred = true;
      transfer_done_.insert(transfer_key(contact, msg));
      schedule_reevals(peer, msg, contact, t);
      break;
    }
    case ActionKind::handoff: {
      if (node_has_copy(peer, msg) || node_opted_out(peer) || !budget.hop_allowed()) {
        ++violations_;
        break;
      }
      const int hops = slot->hops + 1;
      release_copy(carrier, msg);
      log_.push_back({t, LogRecord::Kind::drop, node_name(carrier), node_name(carrier), m.id,
                      0.0, false});
      acquire_copy(peer, msg, t, hops, std::move(decision.transferred_state), carrier);
      payload_arrived(carrier, peer, msg, t, true);
      transferred = true;
      transfer_done_.insert(transfer_key(contact, msg));
      schedule_reevals(peer, msg, contact, t);
      break;
    }
  }

  // Delivery receipt: a peer whose local check accepts the message always
  // receives the payload, whether or not the protocol relays through it.
  if (!transferred && reply.accepts && !node_has_payload(peer, msg)) {
    payload_arrived(carrier, peer, msg, t, false);
    transfer_done_.insert(transfer_key(contact, msg));
  }
}

SimResult Engine::run() {
  for (std::size_t j = 0; j < msgs_.size(); ++j) {
    const auto& m = msgs_[j];
    if (m.created < 0 || m.created > horizon_)
      throw ValidationError("message " + m.id + " created outside the simulated horizon");
    queue_.push({m.created, 1, 0, 0, -1, static_cast<int>(j), serial_++});
    const double expiry = m.created + m.ttl;
    if (expiry <= horizon_) queue_.push({expiry, 0, 0, 0, -1, static_cast<int>(j), serial_++});
  }
  for (std::size_t c = 0; c < contacts_.size(); ++c) {
    if (contacts_[c].start <= horizon_)
      queue_.push({contacts_[c].start, 2, contacts_[c].u, contacts_[c].v, static_cast<int>(c), -1,
                   serial_++});
  }

  while (!queue_.empty()) {
    const Event ev = queue_.top();
    queue_.pop();
    if (ev.t > horizon_) break;
    switch (ev.rank) {
      case 0:
        expire(ev.msg, ev.t);
        break;
      case 1:
        inject(ev.msg, ev.t);
        break;
      case 2: {
        const auto& c = contacts_[static_cast<std::size_t>(ev.contact)];
        active_[static_cast<std::size_t>(c.u)].push_back(ev.contact);
        active_[static_cast<std::size_t>(c.v)].push_back(ev.contact);
        control_.contact_sync_messages += 2;  // who-has-what summary exchange
        for (int j = 0; j < static_cast<int>(msgs_.size()); ++j) {
          if (!alive(j, ev.t)) continue;
          if (node_has_copy(c.u, j)) evaluate(c.u, c.v, ev.contact, j, ev.t);
          if (node_has_copy(c.v, j)) evaluate(c.v, c.u, ev.contact, j, ev.t);
        }
        break;
      }
      case 3:
        evaluate(ev.a, ev.b, ev.contact, ev.msg, ev.t);
        break;
    }
  }

  SimResult result;
  result.budget_violations = violations_;
  result.control = std::move(control_);
  result.log = std::move(log_);
  result.metrics = compute_metrics(result.log, truth_, msgs_, horizon_, result.control);
  for (auto& mm : result.metrics.per_message) {
    for (std::size_t j = 0; j < msgs_.size(); ++j) {
      if (msgs_[j].id != mm.message_id) continue;
      std::size_t n_accepted = 0;
      for (char a : accepted_[j]) n_accepted += a ? 1 : 0;
      mm.accepted_self = n_accepted;
      break;
    }
  }
  return result;
}

}  // namespace

SimResult run_simulation(const tvc::ContactTrace& contacts, const Protocol& protocol,
                         const std::vector<Message>& workload,
                         const std::map<std::string, profiling::BehavioralProfile>& profiles,
                         const SimConfig& config) {
  Engine engine(contacts, protocol, workload, profiles, config);
  return engine.run();
}

MetricsReport compute_metrics(const EventLog& log,
                              const std::map<std::string, std::set<std::string>>& truth,
                              const std::vector<Message>& workload, double horizon,
                              const ControlTotals& control) {
  std::map<std::string, const Message*> by_id;
  for (const auto& m : workload) by_id[m.id] = &m;

  struct Accum {
    std::set<std::string> delivered;
    std::vector<double> delays;
    std::int64_t transmissions = 0;
    std::int64_t control_messages = 0;
    double control_units = 0.0;
    double copy_seconds = 0.0;
    int live = 0, peak = 0;
    std::map<std::string, double> open;  // node -> copy acquisition time
    std::size_t accepted = 0;
  };
  std::map<std::string, Accum> acc;
  for (const auto& m : workload) acc[m.id];

  auto open_copy = [](Accum& a, const std::string& node, double t) {
    a.open[node] = t;
    ++a.live;
    a.peak = std::max(a.peak, a.live);
  };
  auto close_copy = [](Accum& a, const std::string& node, double t) {
    auto it = a.open.find(node);
    if (it == a.open.end()) return;
    a.copy_seconds += t - it->second;
    a.open.erase(it);
    --a.live;
  };

  for (const auto& r : log) {
    auto it = acc.find(r.message);
    if (it == acc.end()) continue;
    Accum& a = it->second;
    switch (r.kind) {
      case LogRecord::Kind::inject:
        open_copy(a, r.to, r.t);
        break;
      case LogRecord::Kind::transmit:
        ++a.transmissions;
        if (r.stored) open_copy(a, r.to, r.t);
        break;
      case LogRecord::Kind::drop:
        close_copy(a, r.from, r.t);
        break;
      case LogRecord::Kind::deliver:
        a.delivered.insert(r.to);
        a.delays.push_back(r.t - by_id.at(r.message)->created);
        break;
      case LogRecord::Kind::control:
        ++a.control_messages;
        a.control_units += r.units;
        break;
    }
  }

  MetricsReport report;
  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;
  double delay_sum = 0.0;
  std::size_t delay_count = 0;
  for (const auto& m : workload) {
    Accum& a = acc.at(m.id);
    // Copies still live at the end persist until ttl or the horizon.
    const double close_at = std::min(m.created + m.ttl, horizon);
    for (const auto& [node, t0] : a.open) a.copy_seconds += std::max(0.0, close_at - t0);
    a.open.clear();

    MessageMetrics mm;
    mm.message_id = m.id;
    auto t = truth.find(m.id);
    mm.truth_size = t == truth.end() ? 0 : t->second.size();
    mm.delivered = a.delivered.size();
    mm.transmissions = a.transmissions;
    mm.copy_seconds = a.copy_seconds;
    mm.peak_copies = a.peak;
    if (!a.delays.empty()) {
      double s = 0.0;
      for (double d : a.delays) s += d;
      mm.mean_delay = s / static_cast<double>(a.delays.size());
      delay_sum += s;
      delay_count += a.delays.size();
    }
    auto cm = control.messages.find(m.id);
    mm.control_messages = cm != control.messages.end() ? cm->second : a.control_messages;
    auto cu = control.units.find(m.id);
    mm.control_units = cu != control.units.end() ? cu->second : a.control_units;
    if (mm.truth_size > 0) {
      mm.delivery_ratio = static_cast<double>(mm.delivered) / static_cast<double>(mm.truth_size);
      ratio_sum += *mm.delivery_ratio;
      ++ratio_count;
    } else {
      report.empty_truth_messages.push_back(m.id);
    }
    report.transmissions += mm.transmissions;
    report.control_messages += mm.control_messages;
    report.control_units += mm.control_units;
    report.copy_seconds += mm.copy_seconds;
    report.per_message.push_back(std::move(mm));
  }
  std::sort(report.per_message.begin(), report.per_message.end(),
            [](const MessageMetrics& a, const MessageMetrics& b) {
              return a.message_id < b.message_id;
            });
  report.delivery_ratio = ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
  if (delay_count) report.mean_delay = delay_sum / static_cast<double>(delay_count);
  return report;
}

LogAudit audit_log(const EventLog& log, const std::vector<Message>& workload) {
  LogAudit audit;
  std::map<std::string, std::set<std::string>> holders;   // message -> nodes with stored copy
  std::map<std::string, std::set<std::string>> payload;   // message -> nodes with payload
  std::map<std::string, int> live;
  std::map<std::string, std::string> source;
  for (const auto& m : workload) source[m.id] = m.source;

  double last_t = -std::numeric_limits<double>::infinity();
  for (const auto& r : log) {
    if (r.t < last_t) {
      audit.conservation_ok = false;
      audit.violations.push_back("log timestamps decrease at t=" + format_number(r.t));
    }
    last_t = r.t;
    switch (r.kind) {
      case LogRecord::Kind::inject:
        if (source[r.message] != r.to) {
          audit.conservation_ok = false;
          audit.violations.push_back("inject of " + r.message + " at non-source " + r.to);
        }
        holders[r.message].insert(r.to);
        payload[r.message].insert(r.to);
        live[r.message] += 1;
        break;
      case LogRecord::Kind::transmit:
        if (!holders[r.message].count(r.from)) {
          audit.conservation_ok = false;
          audit.violations.push_back("transmit of " + r.message + " from non-holder " + r.from);
        }
        payload[r.message].insert(r.to);
        if (r.stored) {
          holders[r.message].insert(r.to);
          live[r.message] += 1;
        }
        break;
      case LogRecord::Kind::drop:
        if (holders[r.message].erase(r.from)) live[r.message] -= 1;
        break;
      case LogRecord::Kind::deliver:
        if (!payload[r.message].count(r.to)) {
          audit.conservation_ok = false;
          audit.violations.push_back("deliver of " + r.message + " to " + r.to +
                                     " without payload transfer");
        }
        break;
      case LogRecord::Kind::control:
        break;
    }
    auto& peak = audit.peak_copies[r.message];
    peak = std::max(peak, live[r.message]);
  }
  return audit;
}

std::vector<Message> workload_from_json(
    const std::string& json_text,
    const std::map<std::string, profiling::BehavioralProfile>& profiles) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("workload JSON: ") + e.what());
  }
  if (!j.is_array()) throw ParseError("workload JSON must be an array of messages");

  std::vector<std::string> universe;
  if (!profiles.empty()) universe = profiles.begin()->second.locations;

  std::vector<Message> out;
  for (const auto& mj : j) {
    Message m;
    try {
      m.id = mj.at("message_id").get<std::string>();
      m.source = mj.at("source").get<std::string>();
      m.created = mj.at("created").get<double>();
      m.ttl = mj.at("ttl").get<double>();
      if (mj.contains("max_hops")) m.budgets.max_hops = mj.at("max_hops").get<int>();
      if (mj.contains("max_copies")) m.budgets.max_copies = mj.at("max_copies").get<int>();
      const auto mode = mj.at("mode").get<std::string>();
      if (mode == "mobility_coupled") {
        m.target.mode = profiling::TargetMode::mobility_coupled;
        if (mj.value("tp_self", false)) {
          auto it = profiles.find(m.source);
          if (it == profiles.end())
            throw ConfigError("message " + m.id + ": tp_self requires a profile for " + m.source);
          m.target.profile = it->second;
        } else if (mj.contains("tp_spec")) {
          std::map<std::string, double> weights;
          for (const auto& [loc, w] : mj.at("tp_spec").items()) weights[loc] = w.get<double>();
          m.target = profiling::target_profile_from_spec(weights, universe);
        } else {
          throw ConfigError("message " + m.id + ": mobility_coupled needs tp_self or tp_spec");
        }
      } else if (mode == "mobility_independent") {
        m.target.mode = profiling::TargetMode::mobility_independent;
        m.target.interest_tag = mj.at("interest_tag").get<std::string>();
      } else {
        throw ConfigError("message " + m.id + ": unknown mode '" + mode + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("workload JSON: ") + e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report, const std::string& protocol,
                       std::uint64_t seed, const std::string& manifest_digest) {
  if (!manifest_digest.empty()) out << "# manifest: " << manifest_digest << "\n";
  out << "row,protocol,seed,message_id,truth_size,delivered,delivery_ratio,mean_delay,"
         "transmissions,control_messages,control_units,copy_seconds,peak_copies,accepted_self\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& m : report.per_message) {
    out << "message," << protocol << ',' << seed << ',' << m.message_id << ',' << m.truth_size
        << ',' << m.delivered << ',' << opt(m.delivery_ratio) << ',' << opt(m.mean_delay) << ','
        << m.transmissions << ',' << m.control_messages << ',' << format_number(m.control_units)
        << ',' << format_number(m.copy_seconds) << ',' << m.peak_copies << ',' << m.accepted_self
        << "\n";
  }
  std::size_t truth_total = 0, delivered_total = 0, accepted_total = 0;
  int peak = 0;
  for (const auto& m : report.per_message) {
    truth_total += m.truth_size;
    delivered_total += m.delivered;
    accepted_total += m.accepted_self;
    peak = std::max(peak, m.peak_copies);
  }
  out << "aggregate," << protocol << ',' << seed << ",ALL," << truth_total << ','
      << delivered_total << ',' << format_number(report.delivery_ratio) << ','
      << opt(report.mean_delay) << ',' << report.transmissions << ',' << report.control_messages
      << ',' << format_number(report.control_units) << ',' << format_number(report.copy_seconds)
      << ',' << peak << ',' << accepted_total << "\n";
  if (!report.empty_truth_messages.empty()) {
    out << "# empty_truth:";
    for (const auto& id : report.empty_truth_messages) out << ' ' << id;
    out << "\n";
  }
}

}  // namespace pcast::dtn
