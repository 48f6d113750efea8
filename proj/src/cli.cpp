#include "pcast/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcast/dtn.hpp"
#include "pcast/errors.hpp"
#include "pcast/format.hpp"
#include "pcast/manifest.hpp"
#include "pcast/profiling.hpp"
#include "pcast/protocols.hpp"
#include "pcast/traces.hpp"
#include "pcast/tvc.hpp"

namespace pcast::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct OutputSink {
  RunManifest manifest;
  fs::path dir;

  void add_input(const std::string& path) {
    manifest.inputs.push_back({path, digest_of_file(path)});
  }
  std::string run_digest() const { return manifest.digest(); }
  void write(const std::string& name, const std::string& content) {
    const auto path = dir / name;
    write_text_file(path.string(), content);
    manifest.outputs.push_back({path.string(), digest_hex(fnv1a64(content))});
  }
  void finalize() {
    std::sort(manifest.outputs.begin(), manifest.outputs.end());
    write_text_file((dir / "manifest.json").string(), manifest.to_json());
  }
};

OutputSink make_sink(const std::string& command, const std::vector<std::string>& args,
                     std::uint64_t seed, const std::string& out_dir) {
  OutputSink sink;
  sink.manifest.command = command;
  sink.manifest.args = args;
  sink.manifest.seed = seed;
  sink.dir = out_dir;
  fs::create_directories(sink.dir);
  return sink;
}

traces::TraceDataset load_sessions(const std::string& path, double merge_gap) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace: " + path);
  auto ds = traces::parse_session_trace(in);
  if (merge_gap > 0) ds = traces::merge_pingpong(ds, merge_gap);
  return ds;
}

std::vector<std::pair<std::string, profiling::BehavioralProfile>> build_profiles(
    const traces::TraceDataset& ds, double start, int days, double power) {
  std::vector<std::pair<std::string, profiling::BehavioralProfile>> out;
  for (const auto& user : ds.users) {
    auto m = profiling::build_association_matrix(ds, user, start, days);
    if (m.cells.isZero(0)) continue;  // fully offline in the window
    out.push_back({user, profiling::eigen_profile(m, power)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

int cmd_gen(const std::string& config_path, std::uint64_t seed, double duration, double step,
            const std::string& out_dir) {
  auto sink = make_sink("gen",
                        {config_path, format_number(duration), format_number(step)}, seed,
                        out_dir);
  sink.add_input(config_path);
  const auto config = tvc::config_from_json(read_text_file(config_path));
  const std::string digest = sink.run_digest();

  const auto movement = tvc::generate_mobility(config, seed, duration);
  {
    std::ostringstream os;
    tvc::write_movement_csv(os, movement, config, digest);
    sink.write("movement.csv", os.str());
  }
  {
    std::ostringstream os;
    traces::write_session_csv(os, tvc::movement_to_sessions(movement, config), digest);
    sink.write("sessions.csv", os.str());
  }
  {
    std::ostringstream os;
    tvc::write_contact_csv(os, tvc::movement_to_contacts(movement, config, step), digest);
    sink.write("contacts.csv", os.str());
  }
  sink.finalize();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeParams {
  std::string trace_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double merge_gap = 60.0;
  int days = 5;
  double power = 0.9;
  double tz_offset = 0.0;
  std::optional<double> window_start;
  std::vector<double> gaps{7, 14, 21};
  double cluster_threshold = 0.5;
  std::optional<std::pair<double, double>> window;
};

double profile_window_start(const traces::TraceDataset& ds, const AnalyzeParams& p) {
  if (p.window_start) return *p.window_start;
  if (!ds.span) throw ValidationError("empty trace");
  // Align to the first local midnight at the configured offset.
  const double day = 86400.0;
  return std::floor((ds.span->first - p.tz_offset) / day) * day + p.tz_offset;
}

int cmd_analyze_profiles(const AnalyzeParams& p, OutputSink& sink) {
  const auto ds = load_sessions(p.trace_path, p.merge_gap);
  const auto profiles = build_profiles(ds, profile_window_start(ds, p), p.days, p.power);
  sink.write("profiles.json", profiling::profiles_to_json(profiles, sink.run_digest()));
  sink.finalize();
  return kExitOk;
}

int cmd_analyze_encounters(const AnalyzeParams& p, OutputSink& sink) {
  const auto ds = load_sessions(p.trace_path, p.merge_gap);
  const auto encounters = traces::extract_encounters(ds);
  const std::string digest = sink.run_digest();
  {
    std::ostringstream os;
    traces::write_encounter_csv(os, encounters, digest);
    sink.write("encounters.csv", os.str());
  }
  const auto window =
      p.window.value_or(ds.span.value_or(std::pair<double, double>{0.0, 0.0}));
  const auto graph =
      traces::build_encounter_graph(encounters, {window.first, window.second + 1.0}, ds.users);
  nlohmann::json sw;
  sw["manifest"] = digest;
  sw["nodes"] = graph.nodes.size();
  sw["edges"] = graph.edges.size();
  if (graph.nodes.size() >= 3) {
    const auto m = traces::small_world_metrics(graph, p.seed);
    sw["clustering_coefficient"] = m.clustering_coefficient;
    sw["avg_path_length"] = m.avg_path_length;
    sw["random_cc"] = m.random_cc;
    sw["random_pl"] = m.random_pl;
  }
  sink.write("smallworld.json", sw.dump(2) + "\n");
  {
    const auto stats = traces::encounter_stats(encounters, ds);
    std::ostringstream os;
    os << "# manifest: " << digest << "\n";
    os << "user,unique_fraction,encounters,mean_duration,mean_inter_meeting\n";
    for (const auto& [user, s] : stats) {
      double dsum = 0.0, gsum = 0.0;
      for (double d : s.durations) dsum += d;
      for (double g : s.inter_meeting) gsum += g;
      os << user << ',' << format_number(s.unique_fraction) << ',' << s.durations.size() << ',';
      if (!s.durations.empty()) os << format_number(dsum / static_cast<double>(s.durations.size()));
      os << ',';
      if (!s.inter_meeting.empty())
        os << format_number(gsum / static_cast<double>(s.inter_meeting.size()));
      os << "\n";
    }
    sink.write("encounter_stats.csv", os.str());
  }
  sink.finalize();
  return kExitOk;
}

int cmd_analyze_stability(const AnalyzeParams& p, OutputSink& sink) {
  const auto ds = load_sessions(p.trace_path, p.merge_gap);
  std::ostringstream os;
  os << "# manifest: " << sink.run_digest() << "\n";
  os << "user,gap_days,score\n";
  const double start = profile_window_start(ds, p);
  for (const auto& user : ds.users) {
    const auto result = profiling::stability_series(ds, user, p.days, p.gaps, p.power, start);
    for (const auto& pt : result.series)
      os << user << ',' << format_number(pt.gap_days) << ',' << format_number(pt.score) << "\n";
    for (const auto& notice : result.notices) os << "# notice " << user << ": " << notice << "\n";
  }
  sink.write("stability.csv", os.str());
  sink.finalize();
  return kExitOk;
}

int cmd_analyze_cluster(const AnalyzeParams& p, OutputSink& sink) {
  const auto ds = load_sessions(p.trace_path, p.merge_gap);
  const auto profiles = build_profiles(ds, profile_window_start(ds, p), p.days, p.power);
  const auto clustering = profiling::cluster_users(profiles, p.cluster_threshold);
  const std::string digest = sink.run_digest();
  nlohmann::json cj;
  cj["manifest"] = digest;
  cj["clusters"] = clustering.clusters;
  sink.write("clusters.json", cj.dump(2) + "\n");
  std::ostringstream os;
  os << "# manifest: " << digest << "\n";
  os << "merge_index,cluster_a,cluster_b,distance\n";
  for (std::size_t i = 0; i < clustering.merges.size(); ++i) {
    const auto& m = clustering.merges[i];
    os << i << ',' << m.a << ',' << m.b << ',' << format_number(m.distance) << "\n";
  }
  sink.write("dendrogram.csv", os.str());
  sink.finalize();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateSpec {
  std::vector<std::string> protocol_names;
  protocols::ProtocolParams params;
  std::vector<std::uint64_t> seeds{0};
  dtn::SimConfig base;
  std::optional<double> opt_out_fraction;
  bool include_oracle = true;
  bool write_events = true;
};

SimulateSpec simulate_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("simulate config: ") + e.what());
  }
  SimulateSpec spec;
  if (j.contains("protocol")) spec.protocol_names.push_back(j.at("protocol").get<std::string>());
  if (j.contains("protocols"))
    for (const auto& p : j.at("protocols")) spec.protocol_names.push_back(p.get<std::string>());
  if (spec.protocol_names.empty()) throw ConfigError("simulate config names no protocol");
  if (j.contains("delta")) {
    spec.params.delta = j.at("delta").get<double>();
    spec.base.delta = *spec.params.delta;
  }
  if (j.contains("epsilon")) spec.params.epsilon = j.at("epsilon").get<double>();
  if (j.contains("max_holders")) spec.params.max_holders = j.at("max_holders").get<int>();
  if (j.contains("p_hand")) spec.params.p_hand = j.at("p_hand").get<double>();
  if (j.contains("seeds")) {
    spec.seeds.clear();
    for (const auto& s : j.at("seeds")) spec.seeds.push_back(s.get<std::uint64_t>());
  }
  if (j.contains("protocol_delta")) spec.base.protocol_delta = j.at("protocol_delta").get<double>();
  if (j.contains("node_interests"))
    for (const auto& [node, tag] : j.at("node_interests").items())
      spec.base.node_interests[node] = tag.get<std::string>();
  if (j.contains("opt_out"))
    for (const auto& n : j.at("opt_out")) spec.base.opted_out.insert(n.get<std::string>());
  if (j.contains("opt_out_fraction")) spec.opt_out_fraction = j.at("opt_out_fraction").get<double>();
  if (j.contains("horizon")) spec.base.horizon = j.at("horizon").get<double>();
  if (j.contains("buffer_capacity"))
    spec.base.buffer_capacity = j.at("buffer_capacity").get<std::size_t>();
  if (j.contains("log_control")) spec.base.log_control = j.at("log_control").get<bool>();
  if (j.contains("include_oracle")) spec.include_oracle = j.at("include_oracle").get<bool>();
  if (j.contains("write_events")) spec.write_events = j.at("write_events").get<bool>();
  return spec;
}

std::set<std::string> sample_opt_out(const std::vector<std::string>& nodes, double fraction,
                                     std::uint64_t seed) {
  std::vector<std::string> pool = nodes;
  std::sort(pool.begin(), pool.end());
  Rng rng(Rng::split(seed, 0x0b7007));
  std::set<std::string> out;
  const auto k = static_cast<std::size_t>(fraction * static_cast<double>(pool.size()));
  for (std::size_t i = 0; i < k && !pool.empty(); ++i) {
    const auto pick = rng.uniform_int(pool.size());
    out.insert(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

int cmd_simulate(const std::string& contacts_path, const std::string& workload_path,
                 const std::string& config_path, const std::string& profiles_path,
                 const std::string& out_dir, unsigned jobs) {
  auto sink = make_sink("simulate", {contacts_path, workload_path, config_path, profiles_path},
                        0, out_dir);
  sink.add_input(contacts_path);
  sink.add_input(workload_path);
  sink.add_input(config_path);
  if (!profiles_path.empty()) sink.add_input(profiles_path);

  std::ifstream cin_(contacts_path);
  if (!cin_) throw ConfigError("cannot open contacts: " + contacts_path);
  const auto contacts = tvc::read_contact_csv(cin_);

  std::map<std::string, profiling::BehavioralProfile> profiles;
  if (!profiles_path.empty()) {
    for (auto& [user, p] : profiling::profiles_from_json(read_text_file(profiles_path)))
      profiles.emplace(user, std::move(p));
  }
  const auto workload = dtn::workload_from_json(read_text_file(workload_path), profiles);
  auto spec = simulate_spec_from_json(read_text_file(config_path));

  // Node-universe consistency: sources and interest nodes must exist in the trace.
  {
    std::set<std::string> nodes(contacts.node_ids.begin(), contacts.node_ids.end());
    std::vector<std::string> offenders;
    for (const auto& m : workload)
      if (!nodes.count(m.source)) offenders.push_back("source " + m.source + " (" + m.id + ")");
    for (const auto& [node, tag] : spec.base.node_interests) {
      (void)tag;
      if (!nodes.count(node)) offenders.push_back("interest node " + node);
    }
    if (!offenders.empty()) {
      std::string msg = "node universe mismatch between workload and contact trace:";
      for (const auto& o : offenders) msg += "\n  - " + o;
      throw ConfigError(msg);
    }
  }

  const std::string digest = sink.run_digest();

  struct Run {
    std::string protocol;
    std::uint64_t seed;
  };
  std::vector<Run> runs;
  for (const auto& name : spec.protocol_names)
    for (auto seed : spec.seeds) runs.push_back({name, seed});

  struct RunOutput {
    std::string metrics_name, metrics_content;
    std::string events_name, events_content;
  };
  std::vector<RunOutput> outputs(runs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size() || failed.load()) return;
      try {
        const auto& run = runs[i];
        auto protocol = protocols::make_protocol(run.protocol, spec.params);
        dtn::SimConfig cfg = spec.base;
        cfg.seed = run.seed;
        if (spec.opt_out_fraction)
          cfg.opted_out = sample_opt_out(contacts.node_ids, *spec.opt_out_fraction, run.seed);
        const auto result = dtn::run_simulation(contacts, *protocol, workload, profiles, cfg);

        std::ostringstream ms;
        dtn::write_metrics_csv(ms, result.metrics, run.protocol, run.seed, digest);
        outputs[i].metrics_name = "metrics_" + run.protocol + "_s" + std::to_string(run.seed) + ".csv";
        outputs[i].metrics_content = ms.str();
        if (spec.write_events) {
          std::ostringstream es;
          dtn::write_event_log(es, result.log, digest);
          outputs[i].events_name =
              "events_" + run.protocol + "_s" + std::to_string(run.seed) + ".ndjson";
          outputs[i].events_content = es.str();
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed = true;
        failure = e.what();
        return;
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(runs.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed) throw ValidationError("simulation failed: " + failure);

  for (const auto& out : outputs) {
    sink.write(out.metrics_name, out.metrics_content);
    if (!out.events_name.empty()) sink.write(out.events_name, out.events_content);
  }

  if (spec.include_oracle) {
    const auto truth = dtn::ground_truth_receivers(workload, profiles, spec.base.delta,
                                                   spec.base.node_interests);
    double horizon = spec.base.horizon.value_or(0.0);
    if (!spec.base.horizon)
      for (const auto& c : contacts.contacts) horizon = std::max(horizon, c.end);
    const auto oracle = protocols::oracle_delays(contacts, workload, truth, horizon);
    std::ostringstream ms;
    dtn::write_metrics_csv(ms, protocols::oracle_metrics(oracle, workload, truth), "oracle", 0,
                           digest);
    sink.write("metrics_oracle.csv", ms.str());
  }
  sink.finalize();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct AggregateRow {
  std::string protocol;
  std::uint64_t seed = 0;
  double delivery_ratio = 0.0;
  std::optional<double> mean_delay;
  double transmissions = 0.0;
  double copy_seconds = 0.0;
  std::set<std::string> message_ids;
};

AggregateRow parse_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open metrics: " + path);
  AggregateRow row;
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("row,", 0) == 0) continue;
    std::vector<std::string> f;
    std::size_t p = 0;
    while (true) {
      auto c = line.find(',', p);
      if (c == std::string::npos) {
        f.push_back(line.substr(p));
        break;
      }
      f.push_back(line.substr(p, c - p));
      p = c + 1;
    }
    if (f.size() < 13) throw ParseError("bad metrics row in " + path);
    if (f[0] == "message") row.message_ids.insert(f[3]);
    if (f[0] == "aggregate") {
      row.protocol = f[1];
      row.seed = std::stoull(f[2]);
      row.delivery_ratio = std::stod(f[6]);
      if (!f[7].empty()) row.mean_delay = std::stod(f[7]);
      row.transmissions = std::stod(f[8]);
      row.copy_seconds = std::stod(f[11]);
      found = true;
    }
  }
  if (!found) throw ParseError("no aggregate row in " + path);
  return row;
}

int cmd_compare(const std::vector<std::string>& metrics_paths, const std::string& out_dir) {
  if (metrics_paths.size() < 2) throw ConfigError("compare needs at least 2 metrics files");
  auto sink = make_sink("compare", metrics_paths, 0, out_dir);
  for (const auto& p : metrics_paths) sink.add_input(p);

  std::vector<AggregateRow> rows;
  for (const auto& p : metrics_paths) rows.push_back(parse_metrics_csv(p));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].message_ids != rows[0].message_ids)
      throw ConfigError("metrics files cover different workloads: " + metrics_paths[i]);
  }

  // Mean aggregates per protocol over seeds.
  struct Mean {
    double delivery = 0, delay = 0, tx = 0, storage = 0;
    int n = 0, n_delay = 0;
  };
  std::map<std::string, Mean> by_protocol;
  for (const auto& r : rows) {
    auto& m = by_protocol[r.protocol];
    m.delivery += r.delivery_ratio;
    m.tx += r.transmissions;
    m.storage += r.copy_seconds;
    if (r.mean_delay) {
      m.delay += *r.mean_delay;
      ++m.n_delay;
    }
    ++m.n;
  }
  for (auto& [name, m] : by_protocol) {
    (void)name;
    m.delivery /= m.n;
    m.tx /= m.n;
    m.storage /= m.n;
    if (m.n_delay) m.delay /= m.n_delay;
  }

  const Mean* oracle = by_protocol.count("oracle") ? &by_protocol.at("oracle") : nullptr;
  const Mean* epidemic = by_protocol.count("epidemic") ? &by_protocol.at("epidemic") : nullptr;

  std::ostringstream os;
  os << "# manifest: " << sink.run_digest() << "\n";
  os << "protocol,runs,delivery_ratio,mean_delay,transmissions,copy_seconds,"
        "delivery_vs_oracle,delay_vs_oracle,delivery_vs_epidemic,tx_vs_epidemic,"
        "storage_vs_epidemic\n";
  auto ratio = [](double num, double den) -> std::string {
    return den > 0 ? format_number(num / den) : std::string();
  };
  for (const auto& [name, m] : by_protocol) {
    os << name << ',' << m.n << ',' << format_number(m.delivery) << ','
       << (m.n_delay ? format_number(m.delay) : std::string()) << ',' << format_number(m.tx)
       << ',' << format_number(m.storage) << ',';
    os << (oracle ? ratio(m.delivery, oracle->delivery) : std::string()) << ','
       << (oracle && m.n_delay ? ratio(m.delay, oracle->delay) : std::string()) << ','
       << (epidemic ? ratio(m.delivery, epidemic->delivery) : std::string()) << ','
       << (epidemic ? ratio(m.tx, epidemic->tx) : std::string()) << ','
       << (epidemic ? ratio(m.storage, epidemic->storage) : std::string()) << "\n";
  }
  const std::string table = os.str();
  sink.write("comparison.csv", table);
  sink.finalize();

  // Human-readable echo.
  std::cout << "comparison over " << rows[0].message_ids.size() << " messages\n";
  for (const auto& [name, m] : by_protocol) {
    std::cout << "  " << name << ": delivery " << m.delivery << ", delay "
              << (m.n_delay ? format_number(m.delay) : "-") << ", tx " << m.tx << ", storage "
              << m.storage << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"profile-cast mobility and DTN toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "master random seed");
  app.add_option("--jobs", jobs, "parallel independent runs");
  app.add_option("--out", out_dir, "output directory");

  // gen
  auto* gen = app.add_subcommand("gen", "generate TVC movement/session/contact traces");
  std::string gen_config;
  double gen_duration = 0.0, gen_step = 1.0;
  gen->add_option("--config", gen_config, "TVC config JSON")->required();
  gen->add_option("--duration", gen_duration, "simulated seconds")->required();
  gen->add_option("--step", gen_step, "contact sampling step, seconds");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "behavioral analysis of a session trace");
  analyze->require_subcommand(1);
  AnalyzeParams ap;
  double window_start_opt = 0.0;
  bool has_window_start = false;
  std::vector<double> window_opt;
  for (auto* sub : {analyze->add_subcommand("profiles", "per-user eigen-behavior profiles"),
                    analyze->add_subcommand("encounters", "encounter extraction + small-world metrics"),
                    analyze->add_subcommand("stability", "profile stability over time gaps"),
                    analyze->add_subcommand("cluster", "agglomerative user clustering")}) {
    sub->add_option("--trace", ap.trace_path, "session CSV")->required();
    sub->add_option("--merge-gap", ap.merge_gap, "ping-pong merge threshold, seconds");
    sub->add_option("--days", ap.days, "history window length d, days");
    sub->add_option("--power", ap.power, "SVD power threshold");
    sub->add_option("--tz-offset", ap.tz_offset, "day-boundary offset, seconds");
    sub->add_option("--start", window_start_opt, "window start, absolute seconds")
        ->each([&](const std::string&) { has_window_start = true; });
    if (sub->get_name() == "stability")
      sub->add_option("--gaps", ap.gaps, "gaps T in days")->delimiter(',');
    if (sub->get_name() == "cluster")
      sub->add_option("--threshold", ap.cluster_threshold, "stop distance");
    if (sub->get_name() == "encounters")
      sub->add_option("--window", window_opt, "graph window [start end]")->expected(2);
  }

  // simulate
  auto* simulate = app.add_subcommand("simulate", "replay contacts under a forwarding protocol");
  std::string sim_contacts, sim_workload, sim_config, sim_profiles;
  simulate->add_option("--contacts", sim_contacts, "contact CSV")->required();
  simulate->add_option("--workload", sim_workload, "workload JSON")->required();
  simulate->add_option("--config", sim_config, "simulate config JSON")->required();
  simulate->add_option("--profiles", sim_profiles, "profiles JSON (needed for TP matching)");

  // compare
  auto* compare = app.add_subcommand("compare", "cross-protocol comparison table");
  std::vector<std::string> cmp_metrics;
  compare->add_option("--metrics", cmp_metrics, "metrics CSV files")->required()->expected(-2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_config, seed, gen_duration, gen_step, out_dir);
    if (analyze->parsed()) {
      ap.out_dir = out_dir;
      ap.seed = seed;
      if (has_window_start) ap.window_start = window_start_opt;
      if (window_opt.size() == 2) ap.window = {{window_opt[0], window_opt[1]}};
      auto* sub = analyze->get_subcommands().front();
      std::vector<std::string> args{sub->get_name(), ap.trace_path};
      auto sink = make_sink("analyze", args, seed, out_dir);
      sink.add_input(ap.trace_path);
      if (sub->get_name() == "profiles") return cmd_analyze_profiles(ap, sink);
      if (sub->get_name() == "encounters") return cmd_analyze_encounters(ap, sink);
      if (sub->get_name() == "stability") return cmd_analyze_stability(ap, sink);
      if (sub->get_name() == "cluster") return cmd_analyze_cluster(ap, sink);
    }
    if (simulate->parsed())
      return cmd_simulate(sim_contacts, sim_workload, sim_config, sim_profiles, out_dir, jobs);
    if (compare->parsed()) return cmd_compare(cmp_metrics, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace pcast::cli
