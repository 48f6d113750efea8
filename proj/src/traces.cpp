#include "pcast/traces.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <queue>
#include <unordered_set>

#include "pcast/errors.hpp"
#include "pcast/format.hpp"
#include "pcast/rng.hpp"

namespace pcast::traces {

namespace {

void check_event(const SessionEvent& e) {
  if (e.user.empty() || e.location.empty())
    throw ValidationError("session event with empty user or location id");
  if (!(e.end > e.start))
    throw ValidationError("session event with end <= start (user " + e.user + ")");
}

bool event_less(const SessionEvent& a, const SessionEvent& b) {
  return std::tie(a.user, a.start, a.location, a.end) <
         std::tie(b.user, b.start, b.location, b.end);
}

}  // namespace

TraceDataset make_dataset(std::vector<SessionEvent> events) {
  TraceDataset ds;
  for (const auto& e : events) check_event(e);
  std::sort(events.begin(), events.end(), event_less);
  for (const auto& e : events) {
    ds.users.insert(e.user);
    ds.locations.insert(e.location);
    if (!ds.span) {
      ds.span = {e.start, e.end};
    } else {
      ds.span->first = std::min(ds.span->first, e.start);
      ds.span->second = std::max(ds.span->second, e.end);
    }
  }
  ds.events = std::move(events);
  return ds;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.pop_back();
  }
  return fields;
}

bool parse_time(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

TraceDataset parse_session_trace(std::istream& in) {
  std::vector<SessionEvent> events;
  std::string line;
  std::size_t line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv(line);
    if (fields.size() != 4)
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
    double start = 0.0, end = 0.0;
    if (!parse_time(fields[2], start)) {
      // A non-numeric third field on the first data line is a header.
      if (first_data_line) {
        first_data_line = false;
        continue;
      }
      throw ParseError("non-numeric start time '" + fields[2] + "'", line_no);
    }
    first_data_line = false;
    if (!parse_time(fields[3], end))
      throw ParseError("non-numeric end time '" + fields[3] + "'", line_no);
    if (fields[0].empty() || fields[1].empty())
      throw ParseError("empty user or location id", line_no);
    if (!(end > start))
      throw ValidationError("line " + std::to_string(line_no) + ": end <= start (" +
                            fields[2] + " .. " + fields[3] + ")");
    events.push_back({fields[0], fields[1], start, end});
  }
  return make_dataset(std::move(events));
}

void write_session_csv(std::ostream& out, const TraceDataset& dataset,
                       const std::string& manifest_digest) {
  if (!manifest_digest.empty()) out << "# manifest: " << manifest_digest << "\n";
  for (const auto& e : dataset.events)
    out << e.user << ',' << e.location << ',' << format_number(e.start) << ','
        << format_number(e.end) << "\n";
}

TraceDataset merge_pingpong(const TraceDataset& dataset, double gap_threshold) {
  if (gap_threshold < 0) throw ValidationError("gap_threshold must be >= 0");
  // Events are sorted by (user, start); scan runs per user+location.
  std::map<std::pair<std::string, std::string>, std::vector<SessionEvent>> streams;
  for (const auto& e : dataset.events) streams[{e.user, e.location}].push_back(e);
  std::vector<SessionEvent> merged;
  for (auto& [key, sessions] : streams) {
    std::sort(sessions.begin(), sessions.end(),
              [](const SessionEvent& a, const SessionEvent& b) { return a.start < b.start; });
    SessionEvent cur = sessions.front();
    for (std::size_t i = 1; i < sessions.size(); ++i) {
      const auto& next = sessions[i];
      if (next.start - cur.end < gap_threshold) {
        cur.end = std::max(cur.end, next.end);
      } else {
        merged.push_back(cur);
        cur = next;
      }
    }
    merged.push_back(cur);
  }
  return make_dataset(std::move(merged));
}

namespace {

using Interval = std::pair<double, double>;

// Union of possibly overlapping intervals; touching intervals are joined
// (continuous presence).
std::vector<Interval> interval_union(std::vector<Interval> xs) {
  std::sort(xs.begin(), xs.end());
  std::vector<Interval> out;
  for (const auto& iv : xs) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// Intersection of two disjoint-sorted interval lists; strictly positive
// overlaps only.
std::vector<Interval> interval_intersection(const std::vector<Interval>& a,
                                            const std::vector<Interval>& b) {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].first, b[j].first);
    const double hi = std::min(a[i].second, b[j].second);
    if (hi > lo) out.push_back({lo, hi});
    if (a[i].second < b[j].second)
      ++i;
    else
      ++j;
  }
  return out;
}

}  // namespace

std::vector<EncounterEvent> extract_encounters(const TraceDataset& dataset) {
  // location -> user -> merged presence intervals
  std::map<std::string, std::map<std::string, std::vector<Interval>>> presence;
  for (const auto& e : dataset.events)
    presence[e.location][e.user].push_back({e.start, e.end});

  std::vector<EncounterEvent> encounters;
  for (auto& [location, by_user] : presence) {
    std::vector<std::pair<std::string, std::vector<Interval>>> users;
    users.reserve(by_user.size());
    for (auto& [user, ivs] : by_user) users.push_back({user, interval_union(std::move(ivs))});
    for (std::size_t i = 0; i < users.size(); ++i) {
      for (std::size_t j = i + 1; j < users.size(); ++j) {
        for (const auto& iv : interval_intersection(users[i].second, users[j].second))
          encounters.push_back({users[i].first, users[j].first, location, iv.first, iv.second});
      }
    }
  }
  std::sort(encounters.begin(), encounters.end(),
            [](const EncounterEvent& a, const EncounterEvent& b) {
              return std::tie(a.start, a.u, a.v, a.location, a.end) <
                     std::tie(b.start, b.u, b.v, b.location, b.end);
            });
  return encounters;
}

void write_encounter_csv(std::ostream& out, const std::vector<EncounterEvent>& encounters,
                         const std::string& manifest_digest) {
  if (!manifest_digest.empty()) out << "# manifest: " << manifest_digest << "\n";
  for (const auto& e : encounters)
    out << e.u << ',' << e.v << ',' << e.location << ',' << format_number(e.start) << ','
        << format_number(e.end) << "\n";
}

EncounterGraph build_encounter_graph(const std::vector<EncounterEvent>& encounters,
                                     std::pair<double, double> window,
                                     const std::set<std::string>& nodes) {
  EncounterGraph g;
  g.nodes = nodes;
  for (const auto& e : encounters) {
    if (nodes.empty()) {
      g.nodes.insert(e.u);
      g.nodes.insert(e.v);
    }
    if (e.start < window.first || e.start >= window.second) continue;
    auto& stats = g.edges[{e.u, e.v}];
    stats.count += 1;
    stats.total_duration += e.end - e.start;
  }
  return g;
}

namespace {

struct IndexedGraph {
  std::vector<std::vector<int>> adj;           // sorted neighbor lists
  std::vector<std::pair<int, int>> edge_list;  // u < v
};

IndexedGraph index_graph(const EncounterGraph& g) {
  std::map<std::string, int> id;
  for (const auto& n : g.nodes) id.emplace(n, static_cast<int>(id.size()));
  IndexedGraph ig;
  ig.adj.resize(id.size());
  for (const auto& [pair, stats] : g.edges) {
    (void)stats;
    auto iu = id.find(pair.first), iv = id.find(pair.second);
    if (iu == id.end() || iv == id.end())
      throw ValidationError("edge endpoint not in node set: " + pair.first + "," + pair.second);
    ig.edge_list.push_back({iu->second, iv->second});
    ig.adj[iu->second].push_back(iv->second);
    ig.adj[iv->second].push_back(iu->second);
  }
  for (auto& nbrs : ig.adj) std::sort(nbrs.begin(), nbrs.end());
  return ig;
}

double mean_local_clustering(const IndexedGraph& g) {
  const int n = static_cast<int>(g.adj.size());
  if (n == 0) return 0.0;
  double total = 0.0;
  for (int v = 0; v < n; ++v) {
    const auto& nbrs = g.adj[v];
    const std::size_t k = nbrs.size();
    if (k < 2) continue;
    std::int64_t links = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        if (std::binary_search(g.adj[nbrs[i]].begin(), g.adj[nbrs[i]].end(), nbrs[j])) ++links;
      }
    }
    total += 2.0 * static_cast<double>(links) / (static_cast<double>(k) * (k - 1));
  }
  return total / n;
}

std::vector<int> largest_component(const IndexedGraph& g) {
  const int n = static_cast<int>(g.adj.size());
  std::vector<int> comp(n, -1);
  std::vector<int> best;
  for (int s = 0; s < n; ++s) {
    if (comp[s] != -1) continue;
    std::vector<int> members;
    std::deque<int> queue{s};
    comp[s] = s;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      members.push_back(v);
      for (int w : g.adj[v]) {
        if (comp[w] == -1) {
          comp[w] = s;
          queue.push_back(w);
        }
      }
    }
    if (members.size() > best.size()) best = std::move(members);
  }
  std::sort(best.begin(), best.end());
  return best;
}

// Mean BFS hop count over reachable pairs of the largest component. Components
// above 2000 nodes are estimated from 1000 seeded sample sources.
double avg_path_length(const IndexedGraph& g, std::uint64_t seed) {
  auto comp = largest_component(g);
  if (comp.size() < 2) return 0.0;

  std::vector<int> sources = comp;
  if (comp.size() > 2000) {
    Rng rng(Rng::split(seed, 0x70617468));
    std::vector<int> pool = comp;
    sources.clear();
    for (int i = 0; i < 1000; ++i) {
      std::size_t k = rng.uniform_int(pool.size());
      sources.push_back(pool[k]);
      pool[k] = pool.back();
      pool.pop_back();
    }
    std::sort(sources.begin(), sources.end());
  }

  const int n = static_cast<int>(g.adj.size());
  std::vector<int> dist(n);
  double total = 0.0;
  std::int64_t pairs = 0;
  for (int s : sources) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : g.adj[v]) {
        if (dist[w] == -1) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    for (int v : comp) {
      if (v != s && dist[v] > 0) {
        total += dist[v];
        ++pairs;
      }
    }
  }
  return pairs ? total / static_cast<double>(pairs) : 0.0;
}

// Degree-preserving randomization: 10|E| double-edge swap attempts.
IndexedGraph rewire(const IndexedGraph& g, std::uint64_t seed) {
  IndexedGraph r = g;
  auto& edges = r.edge_list;
  if (edges.size() < 2) return r;

  std::unordered_set<std::uint64_t> edge_keys;
  auto key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };
  for (const auto& [u, v] : edges) edge_keys.insert(key(u, v));

  Rng rng(Rng::split(seed, 0x72657769));
  const std::size_t attempts = edges.size() * 10;
  for (std::size_t it = 0; it < attempts; ++it) {
    std::size_t i = rng.uniform_int(edges.size());
    std::size_t j = rng.uniform_int(edges.size());
    if (i == j) continue;
    auto [a, b] = edges[i];
    auto [c, d] = edges[j];
    // Swap to (a,d),(c,b); flip one edge half the time so both pairings occur.
    if (rng.bernoulli(0.5)) std::swap(c, d);
    if (a == d || c == b || a == c || b == d) continue;
    if (edge_keys.count(key(a, d)) || edge_keys.count(key(c, b))) continue;
    edge_keys.erase(key(a, b));
    edge_keys.erase(key(c, d));
    edge_keys.insert(key(a, d));
    edge_keys.insert(key(c, b));
    edges[i] = {std::min(a, d), std::max(a, d)};
    edges[j] = {std::min(c, b), std::max(c, b)};
  }

  for (auto& nbrs : r.adj) nbrs.clear();
  for (const auto& [u, v] : edges) {
    r.adj[u].push_back(v);
    r.adj[v].push_back(u);
  }
  for (auto& nbrs : r.adj) std::sort(nbrs.begin(), nbrs.end());
  return r;
}

}  // namespace

SmallWorldMetrics small_world_metrics(const EncounterGraph& graph, std::uint64_t seed) {
  if (graph.nodes.size() < 3)
    throw ValidationError("small_world_metrics requires at least 3 nodes");
  IndexedGraph ig = index_graph(graph);
  SmallWorldMetrics m;
  m.clustering_coefficient = mean_local_clustering(ig);
  m.avg_path_length = avg_path_length(ig, seed);
  IndexedGraph rg = rewire(ig, seed);
  m.random_cc = mean_local_clustering(rg);
  m.random_pl = avg_path_length(rg, seed);
  return m;
}

std::map<std::string, UserEncounterStats> encounter_stats(
    const std::vector<EncounterEvent>& encounters, const TraceDataset& dataset) {
  std::map<std::string, UserEncounterStats> stats;
  for (const auto& u : dataset.users) stats[u];

  std::map<std::string, std::set<std::string>> peers;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> by_pair;
  for (const auto& e : encounters) {
    peers[e.u].insert(e.v);
    peers[e.v].insert(e.u);
    by_pair[{e.u, e.v}].push_back({e.start, e.end});
    const double d = e.end - e.start;
    stats[e.u].durations.push_back(d);
    stats[e.v].durations.push_back(d);
  }

  for (auto& [pair, ivs] : by_pair) {
    std::sort(ivs.begin(), ivs.end());
    for (std::size_t i = 1; i < ivs.size(); ++i) {
      const double gap = ivs[i].first - ivs[i - 1].second;
      stats[pair.first].inter_meeting.push_back(gap);
      stats[pair.second].inter_meeting.push_back(gap);
    }
  }

  const std::size_t population = dataset.users.size();
  for (auto& [user, s] : stats) {
    if (population > 1)
      s.unique_fraction =
          static_cast<double>(peers[user].size()) / static_cast<double>(population - 1);
  }
  return stats;
}

}  // namespace pcast::traces
