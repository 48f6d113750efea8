#ifndef PCAST_PROFILING_HPP
#define PCAST_PROFILING_HPP

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcast/traces.hpp"

namespace pcast::profiling {

// Per-user day x location matrix; cell (k,j) is the fraction of day k's online
// time spent at location j. A fully offline day is a zero row.
struct AssociationMatrix {
  std::string user;
  std::vector<std::string> locations;  // ordered column universe
  Eigen::MatrixXd cells;               // days x locations
  double window_start = 0.0;

  Eigen::Index days() const { return cells.rows(); }
};

// Rows of `cells` cover days [window_start + k*86400, window_start + (k+1)*86400).
// Columns are the dataset's locations in lexicographic order.
AssociationMatrix build_association_matrix(const traces::TraceDataset& dataset,
                                           const std::string& user, double window_start,
                                           int days);

// Rank-reduced summary of an association matrix: top right singular vectors
// plus weights proportional to squared singular values, renormalized over the
// retained rank.
struct BehavioralProfile {
  Eigen::MatrixXd components;  // rank x locations, rows orthonormal
  Eigen::VectorXd weights;     // descending, sums to 1
  std::vector<std::string> locations;

  Eigen::Index rank() const { return components.rows(); }
};

// Retains the smallest rank whose cumulative squared-singular-value share
// reaches power_threshold; a tie in trailing singular values extends the rank
// so degenerate subspaces are never split. Throws on an all-zero matrix.
BehavioralProfile eigen_profile(const AssociationMatrix& matrix, double power_threshold);

// Weighted cosine similarity between two component sets:
//   sum_i sum_j w_a[i] * w_b[j] * |a_i . b_j|
// Symmetric, in [0,1] for weight-normalized profiles. Requires both profiles
// on the same location universe.
double similarity(const BehavioralProfile& a, const BehavioralProfile& b);

// Zero-pads both profiles onto the union of their location universes,
// preserving component norms and all pairwise dot products.
std::pair<BehavioralProfile, BehavioralProfile> align_profiles(const BehavioralProfile& a,
                                                               const BehavioralProfile& b);

enum class TargetMode { mobility_coupled, mobility_independent };

// Message addressing descriptor: either a behavioral profile to match against
// (mobility_coupled) or an opaque interest tag (mobility_independent).
struct TargetProfile {
  TargetMode mode = TargetMode::mobility_coupled;
  std::optional<BehavioralProfile> profile;
  std::optional<std::string> interest_tag;
};

// Profile of a virtual user that splits its time over the given locations;
// weights must be nonnegative and sum to 1.
TargetProfile target_profile_from_spec(const std::map<std::string, double>& location_weights,
                                       const std::vector<std::string>& location_index);

struct StabilityPoint {
  double gap_days = 0.0;
  double score = 0.0;
};

struct StabilityResult {
  std::vector<StabilityPoint> series;
  std::vector<std::string> notices;  // omitted gaps and why
};

// Similarity between the profiles built from two d-day windows T days apart,
// for each T in gaps_days. Windows that overflow the dataset span or contain
// no activity are omitted with a notice. The first window starts at
// window_start (dataset start when absent).
StabilityResult stability_series(const traces::TraceDataset& dataset, const std::string& user,
                                 int d, const std::vector<double>& gaps_days,
                                 double power_threshold = 0.9,
                                 std::optional<double> window_start = std::nullopt);

struct UserClustering {
  std::vector<std::vector<std::string>> clusters;  // partition, deterministic order
  // Dendrogram merge (a,b,distance); leaf ids 0..n-1 in input order, the k-th
  // merge creates cluster id n+k.
  struct Merge {
    int a = 0;
    int b = 0;
    double distance = 0.0;
  };
  std::vector<Merge> merges;
};

// Average-linkage agglomerative clustering under distance 1 - similarity;
// merging stops once the closest pair of clusters is farther apart than
// distance_threshold. Profiles must share one location universe.
UserClustering cluster_users(const std::vector<std::pair<std::string, BehavioralProfile>>& profiles,
                             double distance_threshold);

// JSON export/import: {"user","locations","components","weights","rank"}.
std::string profile_to_json(const std::string& user, const BehavioralProfile& profile);
std::pair<std::string, BehavioralProfile> profile_from_json(const std::string& json_text);

// Whole-file form: {"manifest": digest, "profiles": [...]} ordered by user id.
std::string profiles_to_json(const std::vector<std::pair<std::string, BehavioralProfile>>& profiles,
                             const std::string& manifest_digest = "");
std::vector<std::pair<std::string, BehavioralProfile>> profiles_from_json(
    const std::string& json_text);

}  // namespace pcast::profiling

#endif
