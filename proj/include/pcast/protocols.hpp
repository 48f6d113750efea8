#ifndef PCAST_PROTOCOLS_HPP
#define PCAST_PROTOCOLS_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "pcast/dtn.hpp"

namespace pcast::protocols {

// Replicate to every encountered peer that lacks the message; never delete.
class Epidemic final : public dtn::Protocol {
public:
  std::string name() const override { return "epidemic"; }
  dtn::Decision on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                           const dtn::PeerReply& reply, const dtn::BudgetStatus& budget,
                           Rng& rng) const override;
};

// Single custody copy handed to the encountered peer with probability p_hand.
class RandomWalk final : public dtn::Protocol {
public:
  explicit RandomWalk(double p_hand) : p_hand_(p_hand) {}
  std::string name() const override { return "random_walk"; }
  dtn::Decision on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                           const dtn::PeerReply& reply, const dtn::BudgetStatus& budget,
                           Rng& rng) const override;

private:
  double p_hand_;
};

// Target mode: single-copy gradient ascent in the behavioral space (hand the
// custody copy to any peer strictly closer to the TP), switching to spray
// (replication restricted to the TP neighborhood, distance <= 1 - delta) once
// the custody chain reaches a similar node.
class PCastT final : public dtn::Protocol {
public:
  explicit PCastT(double delta) : delta_(delta) {}
  std::string name() const override { return "pcast_t"; }
  dtn::ProtocolState initial_state(const dtn::Message& msg,
                                   const dtn::NodeView& source) const override;
  double query_units(const dtn::Message& msg, const dtn::ProtocolState& state) const override;
  dtn::PeerReply peer_reply(const dtn::Message& msg, const dtn::ProtocolState& carrier_state,
                            const dtn::NodeView& peer) const override;
  dtn::Decision on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                           const dtn::PeerReply& reply, const dtn::BudgetStatus& budget,
                           Rng& rng) const override;

private:
  double delta_;
};

// Dissemination mode: recruit up to K message holders that are mutually
// dissimilar (pairwise summary similarity <= epsilon) so they cover the
// behavioral space; interested nodes receive the payload on contact with any
// holder.
class PCastD final : public dtn::Protocol {
public:
  PCastD(double epsilon, int max_holders) : epsilon_(epsilon), max_holders_(max_holders) {}
  std::string name() const override { return "pcast_d"; }
  dtn::ProtocolState initial_state(const dtn::Message& msg,
                                   const dtn::NodeView& source) const override;
  double query_units(const dtn::Message& msg, const dtn::ProtocolState& state) const override;
  dtn::PeerReply peer_reply(const dtn::Message& msg, const dtn::ProtocolState& carrier_state,
                            const dtn::NodeView& peer) const override;
  dtn::Decision on_contact(const dtn::Message& msg, const dtn::ProtocolState& state,
                           const dtn::PeerReply& reply, const dtn::BudgetStatus& budget,
                           Rng& rng) const override;

private:
  double epsilon_;
  int max_holders_;
};

struct ProtocolParams {
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<int> max_holders;
  std::optional<double> p_hand;
};

// Factory for the simulate config's protocol names. Throws ConfigError when a
// required parameter is missing.
std::unique_ptr<dtn::Protocol> make_protocol(const std::string& name, const ProtocolParams& params);

// --- delay-optimal oracle ----------------------------------------------------

// Earliest time-respecting arrival from (source, created) to every node: a
// contact (u,v,[s,e]) with reach(u) <= e propagates reach(v) <- min(reach(v),
// max(s, reach(u))). Unreached nodes are absent.
std::map<std::string, double> earliest_arrival(const tvc::ContactTrace& contacts,
                                               const std::string& source, double created);

struct OracleMessageResult {
  std::map<std::string, double> earliest_delivery;  // receiver -> time; absent = unreachable
  std::int64_t flood_transmissions = 0;             // full-flood reference overhead
  double flood_copy_seconds = 0.0;
};

struct OracleResult {
  std::map<std::string, OracleMessageResult> per_message;
};

OracleResult oracle_delays(const tvc::ContactTrace& contacts,
                           const std::vector<dtn::Message>& workload,
                           const std::map<std::string, std::set<std::string>>& truth,
                           double horizon);

// Oracle result in MetricsReport form so it can flow through the same CSV and
// comparison paths as real protocols.
dtn::MetricsReport oracle_metrics(const OracleResult& oracle,
                                  const std::vector<dtn::Message>& workload,
                                  const std::map<std::string, std::set<std::string>>& truth);

}  // namespace pcast::protocols

#endif
