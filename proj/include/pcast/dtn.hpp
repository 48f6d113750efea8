#ifndef PCAST_DTN_HPP
#define PCAST_DTN_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pcast/profiling.hpp"
#include "pcast/rng.hpp"
#include "pcast/tvc.hpp"

namespace pcast::dtn {

struct Budgets {
  int max_hops = std::numeric_limits<int>::max();
  int max_copies = std::numeric_limits<int>::max();
};

struct Message {
  std::string id;
  std::string source;
  double created = 0.0;
  double ttl = 0.0;
  profiling::TargetProfile target;
  Budgets budgets;
};

// Compact profile disclosure: the top-1 component (8-bit quantized) and its
// weight. `origin` names the node it summarizes, which also keys engine-side
// similarity caching.
struct ProfileSummary {
  std::string origin;
  Eigen::VectorXd component;
  double weight = 1.0;
};

ProfileSummary make_summary(const std::string& origin, const profiling::BehavioralProfile& p);

// --- per-copy protocol state ---------------------------------------------

struct PCastTState {
  double best_distance = 1.0;  // 1 - best similarity-to-TP along the custody chain
  bool spray = false;          // ascent -> spray, never back
};

struct PCastDState {
  std::vector<ProfileSummary> holders;
};

using ProtocolState = std::variant<std::monostate, PCastTState, PCastDState>;

// --- contact-time exchange -------------------------------------------------

// Everything a peer reveals in its control reply. Forwarding decisions see
// only this record, never the peer's profile.
struct PeerReply {
  bool has_copy = false;
  bool has_payload = false;
  bool opted_out = false;
  bool accepts = false;              // peer's local acceptance check
  double distance_to_tp = 1.0;       // 1 - sim(peer profile, TP), peer-computed
  double max_sim_to_holders = 0.0;   // against the carrier's holder summaries
  std::optional<ProfileSummary> holder_candidate;  // revealed only when qualified
};

struct BudgetStatus {
  int copy_hops = 0;      // hop count of the carrier's copy
  int copies_alive = 1;   // live copies of this message, engine census
  Budgets budgets;

  bool hop_allowed() const { return copy_hops + 1 <= budgets.max_hops; }
  bool copy_allowed() const { return copies_alive + 1 <= budgets.max_copies; }
};

enum class ActionKind { skip, replicate, handoff, add_holder };

struct Decision {
  ActionKind kind = ActionKind::skip;
  ProtocolState next_state;         // carrier's state after the exchange
  ProtocolState transferred_state;  // state handed to the peer, when any
};

// The engine's view of one node, handed to peer-side reply computation only.
class NodeView {
public:
  virtual ~NodeView() = default;
  virtual const std::string& id() const = 0;
  virtual bool has_copy() const = 0;
  virtual bool has_payload() const = 0;
  virtual bool opted_out() const = 0;
  virtual bool accepts() const = 0;
  // 1 - similarity(own profile, message TP); 1 when either side is absent.
  virtual double distance_to_target() const = 0;
  virtual double similarity_to_summary(const ProfileSummary& s) const = 0;
  virtual std::optional<ProfileSummary> own_summary() const = 0;
};

// A forwarding strategy: pure decision logic, all state engine-owned. The
// peer-side reply runs with the peer's local view; the carrier-side decision
// runs on the reply record alone.
class Protocol {
public:
  virtual ~Protocol() = default;
  virtual std::string name() const = 0;

  virtual ProtocolState initial_state(const Message& msg, const NodeView& source) const {
    (void)msg;
    (void)source;
    return std::monostate{};
  }

  // Bytes-equivalent of the carrier's control query for one probe.
  virtual double query_units(const Message& msg, const ProtocolState& state) const {
    (void)msg;
    (void)state;
    return 1.0;
  }

  virtual PeerReply peer_reply(const Message& msg, const ProtocolState& carrier_state,
                               const NodeView& peer) const;

  virtual Decision on_contact(const Message& msg, const ProtocolState& state,
                              const PeerReply& reply, const BudgetStatus& budget,
                              Rng& rng) const = 0;
};

// --- simulation ------------------------------------------------------------

struct SimConfig {
  double delta = 0.5;                    // ground-truth similarity threshold
  std::optional<double> protocol_delta;  // node-side acceptance threshold; delta when absent
  std::map<std::string, std::string> node_interests;
  std::set<std::string> opted_out;
  std::optional<double> horizon;               // default: end of contact trace
  std::optional<std::size_t> buffer_capacity;  // copies per node; unlimited when absent
  std::uint64_t seed = 0;
  bool log_control = false;  // individual control records in the event log
};

struct LogRecord {
  double t = 0.0;
  enum class Kind { inject, transmit, deliver, drop, control } kind = Kind::inject;
  std::string from;
  std::string to;
  std::string message;
  double units = 0.0;
  bool stored = false;  // transmit only: payload entered the peer's buffer
};

using EventLog = std::vector<LogRecord>;

std::string log_record_to_json(const LogRecord& r);
void write_event_log(std::ostream& out, const EventLog& log,
                     const std::string& manifest_digest = "");

struct ControlTotals {
  std::map<std::string, std::int64_t> messages;  // per message id
  std::map<std::string, double> units;
  std::int64_t contact_sync_messages = 0;  // per-contact summary exchange, pair level
};

struct MessageMetrics {
  std::string message_id;
  std::size_t truth_size = 0;
  std::size_t delivered = 0;
  std::optional<double> delivery_ratio;  // absent when truth is empty
  std::optional<double> mean_delay;
  std::int64_t transmissions = 0;
  std::int64_t control_messages = 0;
  double control_units = 0.0;
  double copy_seconds = 0.0;
  int peak_copies = 0;
  std::size_t accepted_self = 0;  // nodes whose local check accepted the payload
};

struct MetricsReport {
  std::vector<MessageMetrics> per_message;  // ordered by message id
  double delivery_ratio = 0.0;              // mean over messages with receivers
  std::optional<double> mean_delay;         // over all delivered pairs
  std::int64_t transmissions = 0;
  std::int64_t control_messages = 0;
  double control_units = 0.0;
  double copy_seconds = 0.0;
  std::vector<std::string> empty_truth_messages;
};

// Receiver sets under evaluator-side global knowledge: nodes whose profile
// matches the TP at threshold delta (mobility_coupled) or whose interest tag
// matches (mobility_independent); the source never counts.
std::map<std::string, std::set<std::string>> ground_truth_receivers(
    const std::vector<Message>& workload,
    const std::map<std::string, profiling::BehavioralProfile>& profiles, double delta,
    const std::map<std::string, std::string>& node_interests = {});

struct SimResult {
  EventLog log;
  MetricsReport metrics;
  ControlTotals control;
  std::int64_t budget_violations = 0;  // protocol decisions the engine had to veto
};

// Deterministic store-carry-forward replay of a contact trace. Transfers are
// instantaneous and may happen at contact start or the moment a copy reaches a
// node whose contact is still active. Event ties are broken by
// (kind, u, v, message id), so identical inputs give identical logs.
SimResult run_simulation(const tvc::ContactTrace& contacts, const Protocol& protocol,
                         const std::vector<Message>& workload,
                         const std::map<std::string, profiling::BehavioralProfile>& profiles,
                         const SimConfig& config);

MetricsReport compute_metrics(const EventLog& log,
                              const std::map<std::string, std::set<std::string>>& truth,
                              const std::vector<Message>& workload, double horizon,
                              const ControlTotals& control = {});

// Log audit used by tests: payload custody chains trace back to the source
// and per-message concurrent copies never exceed the census the log implies.
struct LogAudit {
  bool conservation_ok = true;
  std::map<std::string, int> peak_copies;
  std::vector<std::string> violations;
};
LogAudit audit_log(const EventLog& log, const std::vector<Message>& workload);

// Workload JSON: array of {message_id, source, created, ttl, mode,
// tp_self | tp_spec | interest_tag, max_hops?, max_copies?}. TP profiles are
// resolved against `profiles` (tp_self) or built from tp_spec weights on the
// profiles' location universe.
std::vector<Message> workload_from_json(
    const std::string& json_text,
    const std::map<std::string, profiling::BehavioralProfile>& profiles);

void write_metrics_csv(std::ostream& out, const MetricsReport& report,
                       const std::string& protocol, std::uint64_t seed,
                       const std::string& manifest_digest = "");

}  // namespace pcast::dtn

#endif
