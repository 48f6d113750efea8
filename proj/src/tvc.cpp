#include "pcast/tvc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "pcast/errors.hpp"
#include "pcast/format.hpp"
#include "pcast/rng.hpp"

namespace pcast::tvc {

namespace {
constexpr double kEps = 1e-9;
}

Config validate_config(Config config) {
  std::vector<std::string> violations;
  auto complain = [&](const std::string& msg) { violations.push_back(msg); };

  if (!config.field.valid()) complain("field rectangle is degenerate");
  if (config.node_count < 1) complain("node_count must be >= 1");
  if (!(config.cycle_length > 0)) complain("cycle_length must be > 0");
  if (!(config.speed_range.first > 0) || config.speed_range.first > config.speed_range.second)
    complain("speed_range requires 0 < v_min <= v_max");
  if (config.pause_range.first < 0 || config.pause_range.first > config.pause_range.second)
    complain("pause_range requires 0 <= p_min <= p_max");
  if (!(config.radio_range > 0)) complain("radio_range must be > 0");
  if (!(config.cell_size > 0)) complain("cell_size must be > 0");

  if (config.periods.empty()) {
    complain("periods must be non-empty");
  } else {
    auto sorted = config.periods;
    std::sort(sorted.begin(), sorted.end(),
              [](const TimePeriod& a, const TimePeriod& b) { return a.start < b.start; });
    if (std::abs(sorted.front().start) > kEps) complain("periods must start at 0");
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const auto& p = sorted[i];
      if (!(p.end > p.start)) complain("period with end <= start");
      if (p.p_local < 0 || p.p_local > 1) complain("p_local must be in [0,1]");
      if (i + 1 < sorted.size()) {
        const double gap = sorted[i + 1].start - p.end;
        if (gap > kEps) complain("periods leave a gap in the cycle");
        if (gap < -kEps) complain("periods overlap");
      }
    }
    if (std::abs(sorted.back().end - config.cycle_length) > kEps)
      complain("periods must tile [0, cycle_length) exactly");

    std::set<std::string> groups;
    for (const auto& [g, rect] : sorted.front().community_assignment) groups.insert(g);
    if (groups.empty()) complain("community_assignment must name at least one group");
    for (const auto& p : sorted) {
      std::set<std::string> here;
      for (const auto& [g, rect] : p.community_assignment) {
        here.insert(g);
        if (!rect.valid()) complain("community rectangle for group " + g + " is degenerate");
        if (!config.field.contains(rect))
          complain("community rectangle for group " + g + " lies outside the field");
      }
      if (here != groups) complain("all periods must assign the same group set");
    }
    config.periods = std::move(sorted);
  }

  if (!violations.empty()) {
    std::string msg = "invalid TVC config:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  return config;
}

namespace {

Rect rect_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("rectangle must be [x0,y0,x1,y1]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

nlohmann::json rect_to_json(const Rect& r) {
  return nlohmann::json::array({r.x0, r.y0, r.x1, r.y1});
}

}  // namespace

Config config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  Config c;
  try {
    c.field = rect_from_json(j.at("field"));
    c.node_count = j.at("node_count").get<int>();
    c.cycle_length = j.at("cycle_length").get<double>();
    for (const auto& pj : j.at("periods")) {
      TimePeriod p;
      const auto& span = pj.at("span");
      p.start = span.at(0).get<double>();
      p.end = span.at(1).get<double>();
      p.p_local = pj.at("p_local").get<double>();
      for (const auto& [group, rj] : pj.at("community_assignment").items())
        p.community_assignment[group] = rect_from_json(rj);
      c.periods.push_back(std::move(p));
    }
    const auto& sp = j.at("speed_range");
    c.speed_range = {sp.at(0).get<double>(), sp.at(1).get<double>()};
    const auto& pa = j.at("pause_range");
    c.pause_range = {pa.at(0).get<double>(), pa.at(1).get<double>()};
    c.radio_range = j.at("radio_range").get<double>();
    c.cell_size = j.at("cell_size").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  return validate_config(std::move(c));
}

std::string config_to_json(const Config& config) {
  nlohmann::json j;
  j["field"] = rect_to_json(config.field);
  j["node_count"] = config.node_count;
  j["cycle_length"] = config.cycle_length;
  auto periods = nlohmann::json::array();
  for (const auto& p : config.periods) {
    nlohmann::json pj;
    pj["span"] = nlohmann::json::array({p.start, p.end});
    pj["p_local"] = p.p_local;
    nlohmann::json ca;
    for (const auto& [g, r] : p.community_assignment) ca[g] = rect_to_json(r);
    pj["community_assignment"] = std::move(ca);
    periods.push_back(std::move(pj));
  }
  j["periods"] = std::move(periods);
  j["speed_range"] = nlohmann::json::array({config.speed_range.first, config.speed_range.second});
  j["pause_range"] = nlohmann::json::array({config.pause_range.first, config.pause_range.second});
  j["radio_range"] = config.radio_range;
  j["cell_size"] = config.cell_size;
  return j.dump(2) + "\n";
}

std::vector<std::string> group_names(const Config& config) {
  std::vector<std::string> names;
  for (const auto& [g, rect] : config.periods.front().community_assignment) names.push_back(g);
  return names;  // map iteration is already sorted
}

int group_index(const Config& config, int node) {
  return node % static_cast<int>(config.periods.front().community_assignment.size());
}

const TimePeriod& period_at(const Config& config, double t) {
  double tau = std::fmod(t, config.cycle_length);
  if (tau < 0) tau += config.cycle_length;
  for (const auto& p : config.periods) {
    if (tau >= p.start - kEps && tau < p.end - kEps) return p;
  }
  return config.periods.back();
}

std::string node_id(const Config& config, int node) {
  int width = 1;
  for (int v = config.node_count - 1; v >= 10; v /= 10) ++width;
  width = std::max(width, 3);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "n%0*d", width, node);
  return buf;
}

namespace {

std::pair<int, int> cell_of(const Config& config, const Point& p) {
  const double cs = config.cell_size;
  auto idx = [&](double v, double lo, double hi) {
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / cs - kEps)));
    int i = static_cast<int>(std::floor((v - lo) / cs));
    return std::clamp(i, 0, n - 1);
  };
  return {idx(p.x, config.field.x0, config.field.x1), idx(p.y, config.field.y0, config.field.y1)};
}

std::string cell_name(int ix, int iy) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%03d_%03d", ix, iy);
  return buf;
}

}  // namespace

std::string cell_id(const Config& config, const Point& p) {
  auto [ix, iy] = cell_of(config, p);
  return cell_name(ix, iy);
}

Point MovementTrace::position_at(int node, double t) const {
  const auto& wps = nodes.at(static_cast<std::size_t>(node));
  if (wps.empty()) return {};
  if (t <= wps.front().t) return wps.front().pos;
  if (t >= wps.back().t) return wps.back().pos;
  auto it = std::upper_bound(wps.begin(), wps.end(), t,
                             [](double x, const Waypoint& w) { return x < w.t; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return lerp(a.pos, b.pos, f);
}

MovementTrace generate_mobility(const Config& config, std::uint64_t seed, double duration) {
  if (!(duration > 0)) throw ValidationError("duration must be > 0");
  MovementTrace trace;
  trace.duration = duration;
  trace.nodes.resize(static_cast<std::size_t>(config.node_count));

  const auto groups = group_names(config);
  for (int node = 0; node < config.node_count; ++node) {
    Rng rng(Rng::split(seed, static_cast<std::uint64_t>(node)));
    auto& wps = trace.nodes[static_cast<std::size_t>(node)];
    const std::string& group = groups[static_cast<std::size_t>(group_index(config, node))];

    auto draw_in = [&](const Rect& r) -> Point {
      return {rng.uniform(r.x0, r.x1), rng.uniform(r.y0, r.y1)};
    };
    auto epoch_area = [&](double t) -> const Rect& {
      const TimePeriod& p = period_at(config, t);
      return rng.bernoulli(p.p_local) ? p.community_assignment.at(group) : config.field;
    };

    double t = 0.0;
    Point pos = draw_in(epoch_area(0.0));
    wps.push_back({0.0, pos});

    while (t < duration) {
      const Rect& area = epoch_area(t);
      const Point dest = draw_in(area);
      const double speed = rng.uniform(config.speed_range.first, config.speed_range.second);
      const double pause = rng.uniform(config.pause_range.first, config.pause_range.second);

      const double travel = distance(pos, dest) / speed;
      if (travel > 0) {
        if (t + travel >= duration) {
          wps.push_back({duration, lerp(pos, dest, (duration - t) / travel)});
          break;
        }
        t += travel;
        pos = dest;
        wps.push_back({t, pos});
      }
      if (pause > 0) {
        if (t + pause >= duration) {
          wps.push_back({duration, pos});
          break;
        }
        t += pause;
        wps.push_back({t, pos});
      }
    }
    if (wps.back().t < duration) wps.push_back({duration, wps.back().pos});
  }
  return trace;
}

namespace {

// Times within segment (t0,p0)->(t1,p1) at which the node crosses a grid
// line, plus both endpoints; consecutive midpoints identify the cell.
std::vector<double> segment_breakpoints(const Config& config, double t0, const Point& p0,
                                        double t1, const Point& p1) {
  std::vector<double> ts{t0, t1};
  const double cs = config.cell_size;
  auto add_axis = [&](double a0, double a1, double lo) {
    if (a0 == a1) return;
    const double amin = std::min(a0, a1), amax = std::max(a0, a1);
    int k = static_cast<int>(std::ceil((amin - lo) / cs - kEps));
    for (;; ++k) {
      const double line = lo + k * cs;
      if (line >= amax - kEps) break;
      if (line > amin + kEps) {
        const double f = (line - a0) / (a1 - a0);
        ts.push_back(t0 + f * (t1 - t0));
      }
    }
  };
  add_axis(p0.x, p1.x, config.field.x0);
  add_axis(p0.y, p1.y, config.field.y0);
  std::sort(ts.begin(), ts.end());
  return ts;
}

}  // namespace

traces::TraceDataset movement_to_sessions(const MovementTrace& trace, const Config& config) {
  std::vector<traces::SessionEvent> sessions;
  for (int node = 0; node < static_cast<int>(trace.nodes.size()); ++node) {
    const auto& wps = trace.nodes[static_cast<std::size_t>(node)];
    if (wps.size() < 2) continue;
    const std::string id = node_id(config, node);

    std::string cur_cell;
    double cur_start = 0.0;
    auto visit = [&](double lo, double hi, const std::string& cell) {
      if (cell == cur_cell) return;
      (void)hi;
      if (!cur_cell.empty() && lo > cur_start)
        sessions.push_back({id, cur_cell, cur_start, lo});
      cur_cell = cell;
      cur_start = lo;
    };

    for (std::size_t s = 0; s + 1 < wps.size(); ++s) {
      const auto& a = wps[s];
      const auto& b = wps[s + 1];
      if (a.pos.x == b.pos.x && a.pos.y == b.pos.y) {
        visit(a.t, b.t, cell_id(config, a.pos));
        continue;
      }
      const auto ts = segment_breakpoints(config, a.t, a.pos, b.t, b.pos);
      for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        if (ts[i + 1] - ts[i] <= 0) continue;
        const double mid = 0.5 * (ts[i] + ts[i + 1]);
        const double f = (mid - a.t) / (b.t - a.t);
        visit(ts[i], ts[i + 1], cell_id(config, lerp(a.pos, b.pos, f)));
      }
    }
    if (!cur_cell.empty() && trace.duration > cur_start)
      sessions.push_back({id, cur_cell, cur_start, trace.duration});
  }
  return traces::make_dataset(std::move(sessions));
}

ContactTrace movement_to_contacts(const MovementTrace& trace, const Config& config, double step) {
  if (!(step > 0)) throw ValidationError("step must be > 0");
  const int n = static_cast<int>(trace.nodes.size());
  ContactTrace out;
  for (int i = 0; i < n; ++i) out.node_ids.push_back(node_id(config, i));

  const double range2 = config.radio_range * config.radio_range;
  const double bucket = config.radio_range;
  auto bucket_key = [&](int bx, int by) {
    return (static_cast<std::int64_t>(bx) << 24) ^ static_cast<std::int64_t>(by);
  };

  // pair -> (first sample time, last sample time) of the current run
  std::unordered_map<std::int64_t, std::pair<double, double>> active;
  auto pair_key = [](int u, int v) {
    return (static_cast<std::int64_t>(u) << 24) | static_cast<std::int64_t>(v);
  };
  auto flush = [&](std::int64_t key, const std::pair<double, double>& run) {
    const int u = static_cast<int>(key >> 24);
    const int v = static_cast<int>(key & 0xffffff);
    const double end = run.second > run.first ? run.second : run.first + step;
    out.contacts.push_back({out.node_ids[static_cast<std::size_t>(u)],
                            out.node_ids[static_cast<std::size_t>(v)], run.first, end});
  };

  std::vector<Point> pos(static_cast<std::size_t>(n));
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  const std::int64_t steps = static_cast<std::int64_t>(std::floor(trace.duration / step + kEps));
  for (std::int64_t si = 0; si <= steps; ++si) {
    const double t = static_cast<double>(si) * step;
    grid.clear();
    for (int i = 0; i < n; ++i) {
      pos[static_cast<std::size_t>(i)] = trace.position_at(i, t);
      const auto& p = pos[static_cast<std::size_t>(i)];
      grid[bucket_key(static_cast<int>(std::floor(p.x / bucket)),
                      static_cast<int>(std::floor(p.y / bucket)))]
          .push_back(i);
    }
    std::vector<std::int64_t> in_range;
    for (int i = 0; i < n; ++i) {
      const auto& p = pos[static_cast<std::size_t>(i)];
      const int bx = static_cast<int>(std::floor(p.x / bucket));
      const int by = static_cast<int>(std::floor(p.y / bucket));
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          auto it = grid.find(bucket_key(bx + dx, by + dy));
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j <= i) continue;
            const auto& q = pos[static_cast<std::size_t>(j)];
            const double ddx = p.x - q.x, ddy = p.y - q.y;
            if (ddx * ddx + ddy * ddy <= range2) in_range.push_back(pair_key(i, j));
          }
        }
      }
    }
    std::sort(in_range.begin(), in_range.end());
    in_range.erase(std::unique(in_range.begin(), in_range.end()), in_range.end());

    for (auto key : in_range) {
      auto it = active.find(key);
      if (it == active.end())
        active.emplace(key, std::pair<double, double>{t, t});
      else
        it->second.second = t;
    }
    for (auto it = active.begin(); it != active.end();) {
      if (it->second.second < t && !std::binary_search(in_range.begin(), in_range.end(), it->first)) {
        flush(it->first, it->second);
        it = active.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (const auto& [key, run] : active) flush(key, run);

  std::sort(out.contacts.begin(), out.contacts.end(),
            [](const ContactEvent& a, const ContactEvent& b) {
              return std::tie(a.start, a.u, a.v) < std::tie(b.start, b.u, b.v);
            });
  return out;
}

void write_movement_csv(std::ostream& out, const MovementTrace& trace, const Config& config,
                        const std::string& manifest_digest) {
  if (!manifest_digest.empty()) out << "# manifest: " << manifest_digest << "\n";
  for (int node = 0; node < static_cast<int>(trace.nodes.size()); ++node) {
    const std::string id = node_id(config, node);
    for (const auto& w : trace.nodes[static_cast<std::size_t>(node)])
      out << id << ',' << format_number(w.t) << ',' << format_number(w.pos.x) << ','
          << format_number(w.pos.y) << "\n";
  }
}

void write_contact_csv(std::ostream& out, const ContactTrace& contacts,
                       const std::string& manifest_digest) {
  if (!manifest_digest.empty()) out << "# manifest: " << manifest_digest << "\n";
  for (const auto& c : contacts.contacts)
    out << c.u << ',' << c.v << ',' << format_number(c.start) << ',' << format_number(c.end)
        << "\n";
}

ContactTrace read_contact_csv(std::istream& in) {
  ContactTrace trace;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t p = 0;
    while (true) {
      auto c = line.find(',', p);
      if (c == std::string::npos) {
        fields.push_back(line.substr(p));
        break;
      }
      fields.push_back(line.substr(p, c - p));
      p = c + 1;
    }
    if (fields.size() != 4) throw ParseError("contact row needs 4 fields", line_no);
    ContactEvent e;
    e.u = fields[0];
    e.v = fields[1];
    try {
      e.start = std::stod(fields[2]);
      e.end = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw ParseError("non-numeric contact time", line_no);
    }
    if (e.u == e.v) throw ValidationError("contact with u == v at line " + std::to_string(line_no));
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!(e.end > e.start))
      throw ValidationError("contact with end <= start at line " + std::to_string(line_no));
    ids.insert(e.u);
    ids.insert(e.v);
    trace.contacts.push_back(std::move(e));
  }
  std::sort(trace.contacts.begin(), trace.contacts.end(),
            [](const ContactEvent& a, const ContactEvent& b) {
              return std::tie(a.start, a.u, a.v) < std::tie(b.start, b.u, b.v);
            });
  trace.node_ids.assign(ids.begin(), ids.end());
  return trace;
}

EmpiricalStats empirical_statistics(const MovementTrace& trace, const Config& config,
                                    const std::vector<std::string>& cells_of_interest,
                                    double step) {
  EmpiricalStats stats;
  const auto sessions = movement_to_sessions(trace, config);

  std::map<std::string, std::map<std::string, double>> time_in_cell;
  std::map<std::string, std::map<std::string, double>> first_entry;
  for (const auto& e : sessions.events) {
    time_in_cell[e.user][e.location] += e.end - e.start;
    auto& fe = first_entry[e.user];
    if (!fe.count(e.location)) fe[e.location] = e.start;
  }
  for (auto& [node, cells] : time_in_cell) {
    double total = 0.0;
    for (const auto& [cell, t] : cells) total += t;
    for (auto& [cell, t] : cells) t /= total;
    stats.location_preference[node] = cells;
  }

  for (const auto& [node, cells] : time_in_cell) {
    (void)cells;
    for (const auto& target : cells_of_interest) {
      auto it = first_entry[node].find(target);
      if (it != first_entry[node].end())
        stats.hitting_time.push_back({it->second, false});
      else
        stats.hitting_time.push_back({trace.duration, true});
    }
  }

  const auto contacts = movement_to_contacts(trace, config, step);
  std::map<std::pair<std::string, std::string>, double> first_contact;
  for (const auto& c : contacts.contacts) {
    auto key = std::make_pair(c.u, c.v);
    if (!first_contact.count(key)) first_contact[key] = c.start;
  }
  const int n = static_cast<int>(trace.nodes.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      auto key = std::make_pair(node_id(config, i), node_id(config, j));
      auto it = first_contact.find(key);
      if (it != first_contact.end())
        stats.meeting_time.push_back({it->second, false});
      else
        stats.meeting_time.push_back({trace.duration, true});
    }
  }

  stats.reappearance = occupancy_autocorrelation(trace, config, config.cycle_length, step);
  return stats;
}

double occupancy_autocorrelation(const MovementTrace& trace, const Config& config, double lag,
                                 double step) {
  if (!(step > 0) || lag <= 0 || lag >= trace.duration) return 0.0;
  std::int64_t same = 0, total = 0;
  const int n = static_cast<int>(trace.nodes.size());
  for (int node = 0; node < n; ++node) {
    for (double t = 0.0; t + lag <= trace.duration + kEps; t += step) {
      const auto a = cell_of(config, trace.position_at(node, t));
      const auto b = cell_of(config, trace.position_at(node, t + lag));
      same += (a == b) ? 1 : 0;
      ++total;
    }
  }
  return total ? static_cast<double>(same) / static_cast<double>(total) : 0.0;
}

}  // namespace pcast::tvc
