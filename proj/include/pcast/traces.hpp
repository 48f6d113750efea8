#ifndef PCAST_TRACES_HPP
#define PCAST_TRACES_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace pcast::traces {

// One login session: a user online at a location over [start,end), seconds.
struct SessionEvent {
  std::string user;
  std::string location;
  double start = 0.0;
  double end = 0.0;
};

struct TraceDataset {
  std::vector<SessionEvent> events;  // sorted by (user, start, location)
  std::set<std::string> users;
  std::set<std::string> locations;
  // Absent for an empty dataset.
  std::optional<std::pair<double, double>> span;
};

// Validates events (end > start, non-empty ids), sorts them and fills the
// id sets and span.
TraceDataset make_dataset(std::vector<SessionEvent> events);

// CSV rows `user_id,location_id,start,end`; `#` starts a comment; an optional
// header is detected by a non-numeric third field. Throws ParseError with the
// line number on malformed rows, ValidationError on end <= start.
TraceDataset parse_session_trace(std::istream& in);

void write_session_csv(std::ostream& out, const TraceDataset& dataset,
                       const std::string& manifest_digest = "");

// Merges, per user+location, consecutive sessions whose separating gap is
// strictly below gap_threshold. Idempotent.
TraceDataset merge_pingpong(const TraceDataset& dataset, double gap_threshold);

// Overlapping presence of two users at one location. u < v lexicographically,
// end > start.
struct EncounterEvent {
  std::string u;
  std::string v;
  std::string location;
  double start = 0.0;
  double end = 0.0;
};

// One event per maximal interval during which both users are online at the
// same location. Result sorted by (start, u, v, location).
std::vector<EncounterEvent> extract_encounters(const TraceDataset& dataset);

void write_encounter_csv(std::ostream& out, const std::vector<EncounterEvent>& encounters,
                         const std::string& manifest_digest = "");

struct EdgeStats {
  std::int64_t count = 0;
  double total_duration = 0.0;
};

struct EncounterGraph {
  std::set<std::string> nodes;
  // One entry per unordered pair, keyed (u,v) with u < v.
  std::map<std::pair<std::string, std::string>, EdgeStats> edges;
};

// Aggregates encounters whose start lies in [window.first, window.second) into
// edges. `nodes` is the node universe; when empty, the users appearing in
// `encounters` are used.
EncounterGraph build_encounter_graph(const std::vector<EncounterEvent>& encounters,
                                     std::pair<double, double> window,
                                     const std::set<std::string>& nodes = {});

struct SmallWorldMetrics {
  double clustering_coefficient = 0.0;
  double avg_path_length = 0.0;
  double random_cc = 0.0;
  double random_pl = 0.0;
};

// Mean local clustering coefficient and mean shortest-path hop count over the
// largest connected component, plus the same metrics on a degree-preserving
// randomization of the graph (double-edge swaps, seeded). Components larger
// than 2000 nodes are sampled with 1000 BFS sources. Throws on < 3 nodes.
SmallWorldMetrics small_world_metrics(const EncounterGraph& graph, std::uint64_t seed);

struct UserEncounterStats {
  double unique_fraction = 0.0;         // distinct peers / (|users| - 1)
  std::vector<double> inter_meeting;    // gaps between consecutive encounters, per pair
  std::vector<double> durations;        // encounter lengths
};

std::map<std::string, UserEncounterStats> encounter_stats(
    const std::vector<EncounterEvent>& encounters, const TraceDataset& dataset);

}  // namespace pcast::traces

#endif
