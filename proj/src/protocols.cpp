#include "pcast/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "pcast/errors.hpp"

namespace pcast::protocols {

using dtn::ActionKind;
using dtn::Decision;
using dtn::PeerReply;

Decision Epidemic::on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                              const PeerReply& reply, const dtn::BudgetStatus& budget,
                              Rng& rng) const {
  (void)msg;
  (void)state;
  (void)rng;
  if (!reply.has_copy && !reply.opted_out && budget.copy_allowed() && budget.hop_allowed())
    return {ActionKind::replicate, {}, {}};
  return {};
}

Decision RandomWalk::on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                                const PeerReply& reply, const dtn::BudgetStatus& budget,
                                Rng& rng) const {
  (void)msg;
  (void)state;
  if (reply.has_copy || reply.opted_out || !budget.hop_allowed()) return {};
  if (rng.bernoulli(p_hand_)) return {ActionKind::handoff, {}, {}};
  return {};
}

dtn::ProtocolState PCastT::initial_state(const dtn::Message& msg,
                                         const dtn::NodeView& source) const {
  (void)msg;
  dtn::PCastTState st;
  st.best_distance = source.distance_to_target();
  st.spray = st.best_distance <= 1.0 - delta_;
  return st;
}

double PCastT::query_units(const dtn::Message& msg, const dtn::ProtocolState& state) const {
  (void)state;
  // TP component matrix plus the gradient distance.
  if (msg.target.profile)
    return static_cast<double>(msg.target.profile->components.size()) + 1.0;
  return 1.0;
}

PeerReply PCastT::peer_reply(const dtn::Message& msg, const dtn::ProtocolState& carrier_state,
                             const dtn::NodeView& peer) const {
  PeerReply r = Protocol::peer_reply(msg, carrier_state, peer);
  r.distance_to_tp = peer.distance_to_target();
  return r;
}

Decision PCastT::on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                            const PeerReply& reply, const dtn::BudgetStatus& budget,
                            Rng& rng) const {
  (void)msg;
  (void)rng;
  const auto& st = std::get<dtn::PCastTState>(state);
  if (reply.has_copy || reply.opted_out) return {ActionKind::skip, st, {}};

  const double neighborhood = 1.0 - delta_;
  if (st.spray) {
    if (reply.distance_to_tp <= neighborhood && budget.copy_allowed() && budget.hop_allowed()) {
      dtn::PCastTState peer_state{std::min(st.best_distance, reply.distance_to_tp), true};
      return {ActionKind::replicate, st, peer_state};
    }
    return {ActionKind::skip, st, {}};
  }
  // Ascent: strict improvement only, so equal distances never ping-pong.
  if (reply.distance_to_tp < st.best_distance && budget.hop_allowed()) {
    dtn::PCastTState next{reply.distance_to_tp, reply.distance_to_tp <= neighborhood};
    return {ActionKind::handoff, st, next};
  }
  return {ActionKind::skip, st, {}};
}

dtn::ProtocolState PCastD::initial_state(const dtn::Message& msg,
                                         const dtn::NodeView& source) const {
  (void)msg;
  dtn::PCastDState st;
  if (auto s = source.own_summary()) st.holders.push_back(std::move(*s));
  return st;
}

double PCastD::query_units(const dtn::Message& msg, const dtn::ProtocolState& state) const {
  (void)msg;
  const auto& st = std::get<dtn::PCastDState>(state);
  double units = 0.0;
  for (const auto& h : st.holders) units += static_cast<double>(h.component.size()) + 1.0;
  return std::max(units, 1.0);
}

PeerReply PCastD::peer_reply(const dtn::Message& msg, const dtn::ProtocolState& carrier_state,
                             const dtn::NodeView& peer) const {
  PeerReply r = Protocol::peer_reply(msg, carrier_state, peer);
  const auto& st = std::get<dtn::PCastDState>(carrier_state);
  double max_sim = 0.0;
  for (const auto& h : st.holders) max_sim = std::max(max_sim, peer.similarity_to_summary(h));
  r.max_sim_to_holders = max_sim;
  // The peer's own summary is revealed only once it qualifies as a holder.
  if (max_sim <= epsilon_) r.holder_candidate = peer.own_summary();
  return r;
}

Decision PCastD::on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                            const PeerReply& reply, const dtn::BudgetStatus& budget,
                            Rng& rng) const {
  (void)msg;
  (void)rng;
  const auto& st = std::get<dtn::PCastDState>(state);
  if (!reply.has_copy && !reply.opted_out && reply.max_sim_to_holders <= epsilon_ &&
      static_cast<int>(st.holders.size()) < max_holders_ && reply.holder_candidate &&
      budget.copy_allowed() && budget.hop_allowed()) {
    dtn::PCastDState next = st;
    next.holders.push_back(*reply.holder_candidate);
    return {ActionKind::add_holder, next, next};
  }
  return {ActionKind::skip, st, {}};
}

std::unique_ptr<dtn::Protocol> make_protocol(const std::string& name,
                                             const ProtocolParams& params) {
  if (name == "epidemic") return std::make_unique<Epidemic>();
  if (name == "random_walk") {
    if (!params.p_hand) throw ConfigError("random_walk requires p_hand");
    if (*params.p_hand < 0 || *params.p_hand > 1)
      throw ConfigError("p_hand must be in [0,1]");
    return std::make_unique<RandomWalk>(*params.p_hand);
  }
  if (name == "pcast_t") {
    if (!params.delta) throw ConfigError("pcast_t requires delta");
    return std::make_unique<PCastT>(*params.delta);
  }
  if (name == "pcast_d") {
    if (!params.epsilon) throw ConfigError("pcast_d requires epsilon");
    return std::make_unique<PCastD>(*params.epsilon, params.max_holders.value_or(8));
  }
  throw ConfigError("unknown protocol: " + name);
}

std::map<std::string, double> earliest_arrival(const tvc::ContactTrace& contacts,
                                               const std::string& source, double created) {
  std::map<std::string, int> index;
  for (const auto& id : contacts.node_ids) index.emplace(id, static_cast<int>(index.size()));
  if (!index.count(source)) return {{source, created}};

  struct Edge {
    int peer;
    double start, end;
  };
  std::vector<std::vector<Edge>> adj(index.size());
  for (const auto& c : contacts.contacts) {
    const int u = index.at(c.u), v = index.at(c.v);
    adj[static_cast<std::size_t>(u)].push_back({v, c.start, c.end});
    adj[static_cast<std::size_t>(v)].push_back({u, c.start, c.end});
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> reach(index.size(), inf);
  reach[static_cast<std::size_t>(index.at(source))] = created;

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({created, index.at(source)});
  std::vector<char> settled(index.size(), 0);
  while (!heap.empty()) {
    auto [t, x] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(x)]) continue;
    settled[static_cast<std::size_t>(x)] = 1;
    for (const auto& e : adj[static_cast<std::size_t>(x)]) {
      if (e.end < t) continue;  // contact over before the copy arrives
      const double arrival = std::max(e.start, t);
      if (arrival < reach[static_cast<std::size_t>(e.peer)]) {
        reach[static_cast<std::size_t>(e.peer)] = arrival;
        heap.push({arrival, e.peer});
      }
    }
  }

  std::map<std::string, double> out;
  for (const auto& [id, i] : index) {
    if (reach[static_cast<std::size_t>(i)] < inf) out[id] = reach[static_cast<std::size_t>(i)];
  }
  return out;
}

OracleResult oracle_delays(const tvc::ContactTrace& contacts,
                           const std::vector<dtn::Message>& workload,
                           const std::map<std::string, std::set<std::string>>& truth,
                           double horizon) {
  OracleResult result;
  for (const auto& msg : workload) {
    OracleMessageResult r;
    const auto reach = earliest_arrival(contacts, msg.source, msg.created);
    for (const auto& [node, t] : reach) {
      if (node == msg.source || t > horizon) continue;
      ++r.flood_transmissions;
      r.flood_copy_seconds += horizon - t;
    }
    if (reach.count(msg.source)) r.flood_copy_seconds += horizon - msg.created;
    auto tr = truth.find(msg.id);
    if (tr != truth.end()) {
      for (const auto& receiver : tr->second) {
        auto it = reach.find(receiver);
        if (it != reach.end() && it->second <= horizon)
          r.earliest_delivery[receiver] = it->second;
      }
    }
    result.per_message[msg.id] = std::move(r);
  }
  return result;
}

dtn::MetricsReport oracle_metrics(const OracleResult& oracle,
                                  const std::vector<dtn::Message>& workload,
                                  const std::map<std::string, std::set<std::string>>& truth) {
  dtn::MetricsReport report;
  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;
  double delay_sum = 0.0;
  std::size_t delay_count = 0;
  for (const auto& msg : workload) {
    const auto& r = oracle.per_message.at(msg.id);
    dtn::MessageMetrics mm;
    mm.message_id = msg.id;
    auto t = truth.find(msg.id);
    mm.truth_size = t == truth.end() ? 0 : t->second.size();
    mm.delivered = r.earliest_delivery.size();
    mm.transmissions = r.flood_transmissions;
    mm.copy_seconds = r.flood_copy_seconds;
    mm.peak_copies = static_cast<int>(r.flood_transmissions) + 1;
    if (!r.earliest_delivery.empty()) {
      double s = 0.0;
      for (const auto& [node, at] : r.earliest_delivery) {
        (void)node;
        s += at - msg.created;
      }
      mm.mean_delay = s / static_cast<double>(r.earliest_delivery.size());
      delay_sum += s;
      delay_count += r.earliest_delivery.size();
    }
    if (mm.truth_size > 0) {
      mm.delivery_ratio = static_cast<double>(mm.delivered) / static_cast<double>(mm.truth_size);
      ratio_sum += *mm.delivery_ratio;
      ++ratio_count;
    } else {
      report.empty_truth_messages.push_back(msg.id);
    }
    report.transmissions += mm.transmissions;
    report.copy_seconds += mm.copy_seconds;
    report.per_message.push_back(std::move(mm));
  }
  std::sort(report.per_message.begin(), report.per_message.end(),
            [](const dtn::MessageMetrics& a, const dtn::MessageMetrics& b) {
              return a.message_id < b.message_id;
            });
  report.delivery_ratio = ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
  if (delay_count) report.mean_delay = delay_sum / static_cast<double>(delay_count);
  return report;
}

}  // namespace pcast::protocols
