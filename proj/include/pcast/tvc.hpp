#ifndef PCAST_TVC_HPP
#define PCAST_TVC_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pcast/geometry.hpp"
#include "pcast/traces.hpp"

namespace pcast::tvc {

// One slot of the periodic schedule. Nodes belong to fixed groups (node index
// modulo group count, groups named by the sorted community_assignment keys);
// each group gets one community rectangle per period.
struct TimePeriod {
  double start = 0.0;  // seconds within [0, cycle_length)
  double end = 0.0;
  std::map<std::string, Rect> community_assignment;  // group -> community
  double p_local = 1.0;  // probability an epoch stays in the own community
};

struct Config {
  Rect field;
  int node_count = 0;
  double cycle_length = 0.0;
  std::vector<TimePeriod> periods;  // must tile [0, cycle_length) exactly
  std::pair<double, double> speed_range{0.0, 0.0};  // m/s
  std::pair<double, double> pause_range{0.0, 0.0};  // seconds
  double radio_range = 0.0;  // metres
  double cell_size = 0.0;    // metres, session discretization grid
};

// Returns the config unchanged or throws ConfigError listing every violation
// (period tiling, ranges, geometry, group consistency).
Config validate_config(Config config);

Config config_from_json(const std::string& json_text);  // parses and validates
std::string config_to_json(const Config& config);

std::vector<std::string> group_names(const Config& config);
int group_index(const Config& config, int node);
const TimePeriod& period_at(const Config& config, double t);

std::string node_id(const Config& config, int node);
std::string cell_id(const Config& config, const Point& p);

struct Waypoint {
  double t = 0.0;
  Point pos;
};

// Piecewise-linear motion between waypoints; two consecutive waypoints at the
// same position are a pause. Clipped to [0, duration].
struct MovementTrace {
  std::vector<std::vector<Waypoint>> nodes;  // strictly increasing t per node
  double duration = 0.0;

  Point position_at(int node, double t) const;
};

// Epoch-based generation: per epoch draw local-vs-roaming by the current
// period's p_local, pick a uniform waypoint in the community rectangle (local)
// or the whole field (roaming), move at a uniform speed, then pause. A period
// change takes effect at the next epoch. Per-node streams split from the
// master seed, so adding nodes never reshuffles existing ones.
MovementTrace generate_mobility(const Config& config, std::uint64_t seed, double duration);

// Square-grid discretization of the field: a session is a maximal interval a
// node spends in one cell; cell ids become location ids.
traces::TraceDataset movement_to_sessions(const MovementTrace& trace, const Config& config);

struct ContactEvent {
  std::string u;  // u < v
  std::string v;
  double start = 0.0;
  double end = 0.0;
};

struct ContactTrace {
  std::vector<ContactEvent> contacts;  // sorted by (start, u, v)
  std::vector<std::string> node_ids;   // sorted universe
};

// Fixed-step proximity sampling: a contact is a maximal run of samples with
// pairwise distance <= radio_range; endpoints are the first/last sample times
// (a single-sample run is given one step of duration).
ContactTrace movement_to_contacts(const MovementTrace& trace, const Config& config, double step);

void write_movement_csv(std::ostream& out, const MovementTrace& trace, const Config& config,
                        const std::string& manifest_digest = "");
void write_contact_csv(std::ostream& out, const ContactTrace& contacts,
                       const std::string& manifest_digest = "");
ContactTrace read_contact_csv(std::istream& in);

struct CensoredSample {
  double value = 0.0;
  bool censored = false;  // event not observed within the trace; value = duration
};

struct EmpiricalStats {
  // node id -> cell -> fraction of total time (sums to 1 per node)
  std::map<std::string, std::map<std::string, double>> location_preference;
  double reappearance = 0.0;  // occupancy autocorrelation at lag = cycle_length
  std::vector<CensoredSample> hitting_time;  // per (node, cell of interest)
  std::vector<CensoredSample> meeting_time;  // per node pair
};

EmpiricalStats empirical_statistics(const MovementTrace& trace, const Config& config,
                                    const std::vector<std::string>& cells_of_interest,
                                    double step = 1.0);

// P(node occupies the same cell at t and t+lag), averaged over nodes and t.
double occupancy_autocorrelation(const MovementTrace& trace, const Config& config, double lag,
                                 double step);

}  // namespace pcast::tvc

#endif
