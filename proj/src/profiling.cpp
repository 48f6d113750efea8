#include "pcast/profiling.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "json.hpp"
#include "pcast/errors.hpp"

namespace pcast::profiling {

namespace {
constexpr double kDay = 86400.0;
constexpr double kTieTol = 1e-9;  // relative singular-value tie tolerance
}  // namespace

AssociationMatrix build_association_matrix(const traces::TraceDataset& dataset,
                                           const std::string& user, double window_start,
                                           int days) {
  if (days < 1) throw ValidationError("association matrix needs at least 1 day");
  if (!dataset.users.count(user)) throw ValidationError("unknown user: " + user);

  AssociationMatrix m;
  m.user = user;
  m.window_start = window_start;
  m.locations.assign(dataset.locations.begin(), dataset.locations.end());
  m.cells = Eigen::MatrixXd::Zero(days, static_cast<Eigen::Index>(m.locations.size()));

  std::map<std::string, Eigen::Index> col;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m.locations.size()); ++j)
    col[m.locations[j]] = j;

  // Accumulate per-day online time per location, then normalize each row by
  // that day's total online time.
  for (const auto& e : dataset.events) {
    if (e.user != user) continue;
    const int k_lo = std::max(0, static_cast<int>(std::floor((e.start - window_start) / kDay)));
    const int k_hi = std::min(days - 1, static_cast<int>(std::floor((e.end - window_start) / kDay)));
    for (int k = k_lo; k <= k_hi; ++k) {
      const double day_start = window_start + k * kDay;
      const double lo = std::max(e.start, day_start);
      const double hi = std::min(e.end, day_start + kDay);
      if (hi > lo) m.cells(k, col[e.location]) += hi - lo;
    }
  }
  for (Eigen::Index k = 0; k < m.cells.rows(); ++k) {
    const double online = m.cells.row(k).sum();
    if (online > 0) m.cells.row(k) /= online;
  }
  return m;
}

BehavioralProfile eigen_profile(const AssociationMatrix& matrix, double power_threshold) {
  if (!(power_threshold > 0.0 && power_threshold <= 1.0))
    throw ValidationError("power_threshold must be in (0,1]");
  if (matrix.cells.size() == 0 || matrix.cells.isZero(0))
    throw ValidationError("empty behavior: association matrix is all-zero");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix.cells, Eigen::ComputeThinV);
  const Eigen::VectorXd sigma = svd.singularValues();

  const double total_power = sigma.squaredNorm();
  const double sigma_floor = sigma(0) * 1e-12;  // numerical rank cutoff
  Eigen::Index numerical_rank = 0;
  while (numerical_rank < sigma.size() && sigma(numerical_rank) > sigma_floor) ++numerical_rank;

  Eigen::Index r = 0;
  double cum = 0.0;
  while (r < numerical_rank) {
    cum += sigma(r) * sigma(r);
    ++r;
    if (cum >= power_threshold * total_power) break;
  }
  // Never split a degenerate (tied) subspace.
  while (r < numerical_rank && std::abs(sigma(r) - sigma(r - 1)) <= kTieTol * sigma(0)) ++r;

  BehavioralProfile p;
  p.locations = matrix.locations;
  p.components = svd.matrixV().leftCols(r).transpose();
  p.weights = sigma.head(r).array().square();
  p.weights /= p.weights.sum();
  return p;
}

double similarity(const BehavioralProfile& a, const BehavioralProfile& b) {
  if (a.locations != b.locations)
    throw ValidationError("similarity requires profiles on the same location universe");
  const Eigen::MatrixXd dots = a.components * b.components.transpose();
  return a.weights.dot(dots.cwiseAbs() * b.weights);
}

namespace {

BehavioralProfile pad_to(const BehavioralProfile& p, const std::vector<std::string>& universe) {
  std::map<std::string, Eigen::Index> col;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(universe.size()); ++j) col[universe[j]] = j;
  BehavioralProfile out;
  out.locations = universe;
  out.weights = p.weights;
  out.components =
      Eigen::MatrixXd::Zero(p.components.rows(), static_cast<Eigen::Index>(universe.size()));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p.locations.size()); ++j)
    out.components.col(col.at(p.locations[j])) = p.components.col(j);
  return out;
}

}  // namespace

std::pair<BehavioralProfile, BehavioralProfile> align_profiles(const BehavioralProfile& a,
                                                               const BehavioralProfile& b) {
  if (a.locations == b.locations) return {a, b};
  std::set<std::string> uni(a.locations.begin(), a.locations.end());
  uni.insert(b.locations.begin(), b.locations.end());
  const std::vector<std::string> universe(uni.begin(), uni.end());
  return {pad_to(a, universe), pad_to(b, universe)};
}

TargetProfile target_profile_from_spec(const std::map<std::string, double>& location_weights,
                                       const std::vector<std::string>& location_index) {
  if (location_weights.empty()) throw ValidationError("target profile needs at least one location");
  double sum = 0.0;
  for (const auto& [loc, w] : location_weights) {
    if (w < 0) throw ValidationError("negative weight for location " + loc);
    if (std::find(location_index.begin(), location_index.end(), loc) == location_index.end())
      throw ValidationError("target location not in location universe: " + loc);
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("target weights must sum to 1");

  AssociationMatrix m;
  m.user = "(virtual)";
  m.locations = location_index;
  m.cells = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(location_index.size()));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(location_index.size()); ++j) {
    auto it = location_weights.find(location_index[j]);
    if (it != location_weights.end()) m.cells(0, j) = it->second;
  }

  TargetProfile tp;
  tp.mode = TargetMode::mobility_coupled;
  tp.profile = eigen_profile(m, 0.9);
  return tp;
}

StabilityResult stability_series(const traces::TraceDataset& dataset, const std::string& user,
                                 int d, const std::vector<double>& gaps_days,
                                 double power_threshold, std::optional<double> window_start) {
  StabilityResult result;
  if (!dataset.span) {
    result.notices.push_back("dataset is empty");
    return result;
  }
  const double t1 = window_start.value_or(dataset.span->first);

  auto profile_at = [&](double start) -> std::optional<BehavioralProfile> {
    auto m = build_association_matrix(dataset, user, start, d);
    if (m.cells.isZero(0)) return std::nullopt;
    return eigen_profile(m, power_threshold);
  };

  for (double gap : gaps_days) {
    const double second_start = t1 + gap * kDay;
    if (second_start + d * kDay > dataset.span->second + 1e-9 || t1 + d * kDay > dataset.span->second + 1e-9) {
      result.notices.push_back("gap " + std::to_string(gap) + ": window exceeds dataset span, omitted");
      continue;
    }
    auto p1 = profile_at(t1);
    auto p2 = profile_at(second_start);
    if (!p1 || !p2) {
      result.notices.push_back("gap " + std::to_string(gap) + ": empty behavior in a window, omitted");
      continue;
    }
    result.series.push_back({gap, similarity(*p1, *p2)});
  }
  return result;
}

UserClustering cluster_users(const std::vector<std::pair<std::string, BehavioralProfile>>& profiles,
                             double distance_threshold) {
  if (profiles.empty()) throw ValidationError("cluster_users: empty input");
  const int n = static_cast<int>(profiles.size());
  for (int i = 1; i < n; ++i) {
    if (profiles[i].second.locations != profiles[0].second.locations)
      throw ValidationError("cluster_users: profiles must be aligned to one location universe");
  }

  Eigen::MatrixXd dist(n, n);
  for (int i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = std::max(0.0, 1.0 - similarity(profiles[i].second, profiles[j].second));
      dist(i, j) = dist(j, i) = d;
    }
  }

  // Active clusters keyed by dendrogram id; average linkage over leaf pairs.
  struct Cluster {
    int id;
    std::vector<int> leaves;
  };
  std::vector<Cluster> active;
  for (int i = 0; i < n; ++i) active.push_back({i, {i}});

  UserClustering out;
  int next_id = n;
  while (active.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        double sum = 0.0;
        for (int a : active[i].leaves)
          for (int b : active[j].leaves) sum += dist(a, b);
        const double d = sum / (static_cast<double>(active[i].leaves.size()) *
                                static_cast<double>(active[j].leaves.size()));
        if (d < best - 1e-15) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (best > distance_threshold) break;
    out.merges.push_back({active[bi].id, active[bj].id, best});
    Cluster merged{next_id++, active[bi].leaves};
    merged.leaves.insert(merged.leaves.end(), active[bj].leaves.begin(), active[bj].leaves.end());
    std::sort(merged.leaves.begin(), merged.leaves.end());
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.push_back(std::move(merged));
  }

  for (const auto& c : active) {
    std::vector<std::string> members;
    members.reserve(c.leaves.size());
    for (int leaf : c.leaves) members.push_back(profiles[leaf].first);
    std::sort(members.begin(), members.end());
    out.clusters.push_back(std::move(members));
  }
  std::sort(out.clusters.begin(), out.clusters.end());
  return out;
}

namespace {

nlohmann::json profile_json(const std::string& user, const BehavioralProfile& p) {
  nlohmann::json j;
  j["user"] = user;
  j["locations"] = p.locations;
  auto comps = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.components.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < p.components.cols(); ++c) row.push_back(p.components(i, c));
    comps.push_back(std::move(row));
  }
  j["components"] = std::move(comps);
  auto w = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.weights.size(); ++i) w.push_back(p.weights(i));
  j["weights"] = std::move(w);
  j["rank"] = p.rank();
  return j;
}

std::pair<std::string, BehavioralProfile> profile_from(const nlohmann::json& j) {
  BehavioralProfile p;
  p.locations = j.at("locations").get<std::vector<std::string>>();
  const auto& comps = j.at("components");
  const auto rank = static_cast<Eigen::Index>(comps.size());
  p.components = Eigen::MatrixXd::Zero(rank, static_cast<Eigen::Index>(p.locations.size()));
  for (Eigen::Index i = 0; i < rank; ++i) {
    const auto& row = comps[static_cast<std::size_t>(i)];
    if (row.size() != p.locations.size())
      throw ParseError("profile component length does not match location count");
    for (Eigen::Index c = 0; c < p.components.cols(); ++c)
      p.components(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  const auto& w = j.at("weights");
  if (static_cast<Eigen::Index>(w.size()) != rank)
    throw ParseError("profile weights length does not match rank");
  p.weights = Eigen::VectorXd(rank);
  for (Eigen::Index i = 0; i < rank; ++i) p.weights(i) = w[static_cast<std::size_t>(i)].get<double>();
  return {j.at("user").get<std::string>(), std::move(p)};
}

}  // namespace

std::string profile_to_json(const std::string& user, const BehavioralProfile& profile) {
  return profile_json(user, profile).dump();
}

std::pair<std::string, BehavioralProfile> profile_from_json(const std::string& json_text) {
  return profile_from(nlohmann::json::parse(json_text));
}

std::string profiles_to_json(const std::vector<std::pair<std::string, BehavioralProfile>>& profiles,
                             const std::string& manifest_digest) {
  auto sorted = profiles;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  nlohmann::json j;
  if (!manifest_digest.empty()) j["manifest"] = manifest_digest;
  auto arr = nlohmann::json::array();
  for (const auto& [user, p] : sorted) arr.push_back(profile_json(user, p));
  j["profiles"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, BehavioralProfile>> profiles_from_json(
    const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  std::vector<std::pair<std::string, BehavioralProfile>> out;
  for (const auto& pj : j.at("profiles")) out.push_back(profile_from(pj));
  return out;
}

}  // namespace pcast::profiling
