#include "pcast/profiling.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "pcast/errors.hpp"
#include "pcast/rng.hpp"

using namespace pcast;
using namespace pcast::profiling;

namespace {

constexpr double kDay = 86400.0;

AssociationMatrix matrix_of(Eigen::MatrixXd cells) {
  AssociationMatrix m;
  m.user = "u";
  for (Eigen::Index j = 0; j < cells.cols(); ++j)
    m.locations.push_back("L" + std::to_string(j));
  m.cells = std::move(cells);
  return m;
}

BehavioralProfile rank1(const Eigen::VectorXd& v, const std::vector<std::string>& locations) {
  BehavioralProfile p;
  p.locations = locations;
  p.components = v.normalized().transpose();
  p.weights = Eigen::VectorXd::Ones(1);
  return p;
}

BehavioralProfile profile_of(const std::vector<Eigen::VectorXd>& comps,
                             const std::vector<double>& weights,
                             const std::vector<std::string>& locations) {
  BehavioralProfile p;
  p.locations = locations;
  p.components.resize(static_cast<Eigen::Index>(comps.size()),
                      static_cast<Eigen::Index>(locations.size()));
  for (std::size_t i = 0; i < comps.size(); ++i)
    p.components.row(static_cast<Eigen::Index>(i)) = comps[i].normalized().transpose();
  p.weights.resize(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i)
    p.weights(static_cast<Eigen::Index>(i)) = weights[i];
  return p;
}

// Test-side SVD oracle, independent of Eigen's SVD: cyclic Jacobi
// eigendecomposition of A^T A gives sigma^2 and the right singular vectors.
void jacobi_eigen(Eigen::MatrixXd s, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = s.rows();
  vectors = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(s(p, q)) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * s(p, q), s(q, q) - s(p, p));
        const double c = std::cos(theta), t = std::sin(theta);
        Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = t;
        rot(q, p) = -t;
        s = rot.transpose() * s * rot;
        vectors = vectors * rot;
      }
    }
  }
  values = s.diagonal();
}

struct OracleProfile {
  Eigen::MatrixXd components;  // r x n
  Eigen::VectorXd weights;
};

OracleProfile oracle_profile(const Eigen::MatrixXd& cells, double threshold) {
  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;
  jacobi_eigen(cells.transpose() * cells, evals, evecs);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(evals.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return evals(a) > evals(b); });

  const double total = std::max(evals.sum(), 0.0);
  const double floor = evals(order[0]) * 1e-24;  // sigma^2 cutoff
  Eigen::Index numerical_rank = 0;
  while (numerical_rank < evals.size() && evals(order[static_cast<std::size_t>(numerical_rank)]) > floor)
    ++numerical_rank;
  Eigen::Index r = 0;
  double cum = 0.0;
  while (r < numerical_rank) {
    cum += evals(order[static_cast<std::size_t>(r)]);
    ++r;
    if (cum >= threshold * total) break;
  }
  const double sigma0 = std::sqrt(evals(order[0]));
  while (r < numerical_rank &&
         std::abs(std::sqrt(evals(order[static_cast<std::size_t>(r)])) -
                  std::sqrt(evals(order[static_cast<std::size_t>(r - 1)]))) <= 1e-9 * sigma0)
    ++r;

  OracleProfile out;
  out.components.resize(r, cells.cols());
  out.weights.resize(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    out.components.row(i) = evecs.col(order[static_cast<std::size_t>(i)]).transpose();
    out.weights(i) = evals(order[static_cast<std::size_t>(i)]);
  }
  out.weights /= out.weights.sum();
  return out;
}

// Frobenius norm of the oracle components' residual outside the production
// subspace; ~ sin of the largest principal angle for small angles.
double subspace_residual(const Eigen::MatrixXd& prod, const Eigen::MatrixXd& oracle) {
  const Eigen::MatrixXd proj = (oracle * prod.transpose()) * prod;
  return (oracle - proj).norm();
}

traces::TraceDataset periodic_user_dataset(int weeks) {
  // One location on weekdays 0..4 of each week, another on days 5..6.
  std::vector<traces::SessionEvent> events;
  for (int week = 0; week < weeks; ++week) {
    for (int day = 0; day < 7; ++day) {
      const double t0 = (week * 7 + day) * kDay;
      events.push_back({"u1", day < 5 ? "office" : "cafe", t0 + 9 * 3600, t0 + 17 * 3600});
    }
  }
  return traces::make_dataset(std::move(events));
}

}  // namespace

TEST_CASE("association matrix: one-hot day") {
  const auto ds = traces::make_dataset({{"u1", "L", 0, kDay}});
  const auto m = build_association_matrix(ds, "u1", 0, 1);
  REQUIRE(m.cells.rows() == 1);
  CHECK(m.cells(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("association matrix: forced arithmetic 6h/2h") {
  const auto ds = traces::make_dataset(
      {{"u1", "L1", 0, 6 * 3600.0}, {"u1", "L2", 7 * 3600.0, 9 * 3600.0}});
  const auto m = build_association_matrix(ds, "u1", 0, 1);
  REQUIRE(m.locations == std::vector<std::string>{"L1", "L2"});
  CHECK(m.cells(0, 0) == doctest::Approx(0.75));
  CHECK(m.cells(0, 1) == doctest::Approx(0.25));
}

TEST_CASE("association matrix: offline day is a zero row") {
  const auto ds = traces::make_dataset({{"u1", "L", 0, 3600}});
  const auto m = build_association_matrix(ds, "u1", 0, 3);
  CHECK(m.cells.row(1).isZero(0));
  CHECK(m.cells.row(2).isZero(0));
}

TEST_CASE("association matrix: unknown user") {
  const auto ds = traces::make_dataset({{"u1", "L", 0, 3600}});
  CHECK_THROWS_AS(build_association_matrix(ds, "nobody", 0, 1), ValidationError);
}

TEST_CASE("association matrix: sessions spanning day boundaries are split") {
  const auto ds = traces::make_dataset({{"u1", "L", kDay - 3600, kDay + 3600}});
  const auto m = build_association_matrix(ds, "u1", 0, 2);
  CHECK(m.cells(0, 0) == doctest::Approx(1.0));
  CHECK(m.cells(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("eigen_profile: rank-1 identity") {
  Eigen::VectorXd v(3);
  v << 0.6, 0.8, 0.0;
  Eigen::MatrixXd cells(4, 3);
  for (int i = 0; i < 4; ++i) cells.row(i) = v.transpose();
  const auto p = eigen_profile(matrix_of(cells), 0.9);
  REQUIRE(p.rank() == 1);
  CHECK(p.weights(0) == doctest::Approx(1.0));
  CHECK(std::abs(p.components.row(0).dot(v.normalized())) == doctest::Approx(1.0));
}

TEST_CASE("eigen_profile: alternating orthogonal days give an even rank-2 split") {
  Eigen::MatrixXd cells = Eigen::MatrixXd::Zero(6, 4);
  for (int i = 0; i < 6; ++i) cells(i, i % 2) = 1.0;
  const auto p = eigen_profile(matrix_of(cells), 0.9);
  REQUIRE(p.rank() == 2);
  CHECK(p.weights(0) == doctest::Approx(0.5));
  CHECK(p.weights(1) == doctest::Approx(0.5));
}

TEST_CASE("eigen_profile: all-zero matrix is empty behavior") {
  CHECK_THROWS_AS(eigen_profile(matrix_of(Eigen::MatrixXd::Zero(3, 3)), 0.9), ValidationError);
}

TEST_CASE("eigen_profile: planted 3-behavior matrices stay at rank <= 7") {
  Rng rng(101);
  for (int it = 0; it < 20; ++it) {
    // 3 orthogonal behaviors over 50 locations.
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(3, 50);
    for (int b = 0; b < 3; ++b)
      for (int j = 0; j < 16; ++j) basis(b, b * 16 + j) = rng.uniform(0.2, 1.0);
    for (int b = 0; b < 3; ++b) basis.row(b).normalize();
    Eigen::MatrixXd cells(28, 50);
    for (int d = 0; d < 28; ++d)
      cells.row(d) = basis.row(static_cast<Eigen::Index>(rng.uniform_int(3)));
    // noise at ~1% of signal power
    const double signal = cells.squaredNorm();
    Eigen::MatrixXd noise(28, 50);
    for (int i = 0; i < 28; ++i)
      for (int j = 0; j < 50; ++j) noise(i, j) = rng.uniform(-1.0, 1.0);
    noise *= std::sqrt(0.01 * signal / noise.squaredNorm());
    cells += noise;
    cells = cells.cwiseMax(0.0);

    const auto p = eigen_profile(matrix_of(cells), 0.9);
    CHECK(p.rank() <= 7);
  }
}

TEST_CASE("eigen_profile components are orthonormal and capture the power share") {
  Rng rng(7);
  for (int it = 0; it < 50; ++it) {
    const int d = 2 + static_cast<int>(rng.uniform_int(5));
    const int n = 2 + static_cast<int>(rng.uniform_int(5));
    Eigen::MatrixXd cells(d, n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < n; ++j) cells(i, j) = rng.uniform();
    const auto p = eigen_profile(matrix_of(cells), 0.9);

    const Eigen::MatrixXd gram = p.components * p.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(p.rank(), p.rank())).norm() < 1e-9);
    CHECK(std::abs(p.weights.sum() - 1.0) < 1e-9);
    for (Eigen::Index i = 1; i < p.rank(); ++i) CHECK(p.weights(i) <= p.weights(i - 1) + 1e-12);

    // Projection onto the retained components keeps >= 90% of the energy.
    const Eigen::MatrixXd projected = (cells * p.components.transpose()) * p.components;
    CHECK(projected.squaredNorm() >= 0.9 * cells.squaredNorm() - 1e-9);
  }
}

TEST_CASE("eigen_profile matches the dense Jacobi oracle on small matrices") {
  Rng rng(31337);
  int compared = 0;
  for (int it = 0; it < 300; ++it) {
    const int d = 1 + static_cast<int>(rng.uniform_int(6));
    const int n = 2 + static_cast<int>(rng.uniform_int(5));
    Eigen::MatrixXd cells(d, n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < n; ++j) cells(i, j) = rng.uniform();
    const auto p = eigen_profile(matrix_of(cells), 0.9);
    const auto o = oracle_profile(cells, 0.9);

    // Skip samples whose power cut falls inside a near-tie; the retained rank
    // is then legitimately ambiguous between two correct implementations.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cells);
    const auto& sv = svd.singularValues();
    if (p.rank() < sv.size()) {
      const double gap = sv(p.rank() - 1) * sv(p.rank() - 1) - sv(p.rank()) * sv(p.rank());
      if (gap < 1e-6 * sv(0) * sv(0)) continue;
    }
    ++compared;
    REQUIRE(p.rank() == o.components.rows());
    CHECK(subspace_residual(p.components, o.components) < 1e-8);
    CHECK((p.weights - o.weights).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK(compared > 200);
}

TEST_CASE("similarity: identical rank-1 profiles score 1") {
  Eigen::VectorXd v(3);
  v << 1, 0, 0;
  const auto p = rank1(v, {"a", "b", "c"});
  CHECK(similarity(p, p) == doctest::Approx(1.0));
}

TEST_CASE("similarity: orthogonal rank-1 profiles score 0") {
  Eigen::VectorXd e1(3), e2(3);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  CHECK(similarity(rank1(e1, {"a", "b", "c"}), rank1(e2, {"a", "b", "c"})) ==
        doctest::Approx(0.0));
}

TEST_CASE("similarity: weighted double sum, hand-evaluated") {
  Eigen::VectorXd e1(3), e2(3);
  e1 << 1, 0, 0;
  e2 << 0, 1, 0;
  const auto a = profile_of({e1, e2}, {0.6, 0.4}, {"a", "b", "c"});
  const auto b = profile_of({e1}, {1.0}, {"a", "b", "c"});
  CHECK(similarity(a, b) == doctest::Approx(0.6));
}

TEST_CASE("similarity: mismatched universes are rejected") {
  Eigen::VectorXd v(2);
  v << 1, 0;
  CHECK_THROWS_AS(similarity(rank1(v, {"a", "b"}), rank1(v, {"a", "c"})), ValidationError);
}

namespace {

BehavioralProfile random_profile(Rng& rng, const std::vector<std::string>& locations) {
  const int n = static_cast<int>(locations.size());
  const int r = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(std::min(3, n))));
  Eigen::MatrixXd raw(r, n);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
  // Orthonormalize rows.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw.transpose());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  BehavioralProfile p;
  p.locations = locations;
  p.components = q.transpose();
  Eigen::VectorXd w(r);
  for (int i = 0; i < r; ++i) w(i) = rng.uniform(0.05, 1.0);
  std::sort(w.data(), w.data() + r, std::greater<double>());
  p.weights = w / w.sum();
  return p;
}

}  // namespace

TEST_CASE("similarity properties over random profiles") {
  Rng rng(77);
  const std::vector<std::string> locs{"a", "b", "c", "d", "e"};
  for (int it = 0; it < 500; ++it) {
    const auto a = random_profile(rng, locs);
    const auto b = random_profile(rng, locs);
    const double s_ab = similarity(a, b);
    const double s_ba = similarity(b, a);
    CHECK(std::abs(s_ab - s_ba) < 1e-12);
    CHECK(s_ab >= 0.0);
    CHECK(s_ab <= 1.0 + 1e-12);

    // self-similarity = sum of squared weights
    CHECK(similarity(a, a) == doctest::Approx(a.weights.squaredNorm()).epsilon(1e-9));

    // sign invariance
    auto flipped = b;
    flipped.components.row(0) *= -1.0;
    CHECK(similarity(a, flipped) == doctest::Approx(s_ab).epsilon(1e-12));
  }
}

TEST_CASE("row permutation leaves subspace and similarity unchanged") {
  Rng rng(13);
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd cells(5, 4);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 4; ++j) cells(i, j) = rng.uniform();
    Eigen::MatrixXd shuffled = cells;
    shuffled.row(0).swap(shuffled.row(3));
    shuffled.row(1).swap(shuffled.row(4));
    const auto p1 = eigen_profile(matrix_of(cells), 0.9);
    const auto p2 = eigen_profile(matrix_of(shuffled), 0.9);
    REQUIRE(p1.rank() == p2.rank());
    CHECK(subspace_residual(p1.components, p2.components) < 1e-9);
    const auto probe = random_profile(rng, p1.locations);
    CHECK(similarity(p1, probe) == doctest::Approx(similarity(p2, probe)).epsilon(1e-9));
  }
}

TEST_CASE("align_profiles: identical universes unchanged") {
  Eigen::VectorXd v(2);
  v << 1, 0;
  const auto a = rank1(v, {"a", "b"});
  const auto [a2, b2] = align_profiles(a, a);
  CHECK(a2.locations == a.locations);
  CHECK(similarity(a2, b2) == doctest::Approx(1.0));
}

TEST_CASE("align_profiles: disjoint universes give zero similarity") {
  Eigen::VectorXd v(2);
  v << 0.6, 0.8;
  const auto a = rank1(v, {"a", "b"});
  const auto b = rank1(v, {"c", "d"});
  const auto [a2, b2] = align_profiles(a, b);
  CHECK(a2.components.row(0).norm() == doctest::Approx(1.0));
  CHECK(b2.components.row(0).norm() == doctest::Approx(1.0));
  CHECK(similarity(a2, b2) == doctest::Approx(0.0));
}

TEST_CASE("align_profiles: overlapping universes preserve shared dot products") {
  // Hand-check on a 3-location overlap: components meet only on "b".
  Eigen::VectorXd va(2), vb(2);
  va << 0.6, 0.8;  // over {a,b}
  vb << 0.8, 0.6;  // over {b,c}
  const auto a = rank1(va, {"a", "b"});
  const auto b = rank1(vb, {"b", "c"});
  const auto [a2, b2] = align_profiles(a, b);
  REQUIRE(a2.locations == std::vector<std::string>{"a", "b", "c"});
  // shared column is "b": dot = 0.8 * 0.8
  CHECK(a2.components.row(0).dot(b2.components.row(0)) == doctest::Approx(0.64));
  CHECK(similarity(a2, b2) == doctest::Approx(0.64));
}

TEST_CASE("stability_series: periodic user repeats its profile weekly") {
  const auto ds = periodic_user_dataset(5);
  const auto result = stability_series(ds, "u1", 5, {0, 7, 14, 21});
  REQUIRE(result.series.size() == 4);
  const auto m = build_association_matrix(ds, "u1", 0, 5);
  const auto p = eigen_profile(m, 0.9);
  const double self_sim = p.weights.squaredNorm();
  for (const auto& pt : result.series)
    CHECK(pt.score == doctest::Approx(self_sim).epsilon(1e-9));
}

TEST_CASE("stability_series: window overflow is omitted with a notice") {
  const auto ds = periodic_user_dataset(1);  // 7 days
  const auto result = stability_series(ds, "u1", 5, {7});
  CHECK(result.series.empty());
  REQUIRE(result.notices.size() == 1);
  CHECK(result.notices[0].find("omitted") != std::string::npos);
}

TEST_CASE("stability_series: empty window is omitted") {
  std::vector<traces::SessionEvent> events{{"u1", "L", 0, 3600}};
  // Activity exists only on day 0, but the span is stretched by another user.
  events.push_back({"u2", "L", 0, 30 * kDay});
  const auto ds = traces::make_dataset(std::move(events));
  const auto result = stability_series(ds, "u1", 5, {14});
  CHECK(result.series.empty());
  CHECK(result.notices.size() == 1);
}

TEST_CASE("cluster_users: two tight groups separate") {
  Eigen::VectorXd e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  std::vector<std::pair<std::string, BehavioralProfile>> profiles;
  for (int i = 0; i < 3; ++i) profiles.push_back({"a" + std::to_string(i), rank1(e1, {"x", "y"})});
  for (int i = 0; i < 3; ++i) profiles.push_back({"b" + std::to_string(i), rank1(e2, {"x", "y"})});
  const auto clustering = cluster_users(profiles, 0.5);
  REQUIRE(clustering.clusters.size() == 2);
  CHECK(clustering.clusters[0] == std::vector<std::string>{"a0", "a1", "a2"});
  CHECK(clustering.clusters[1] == std::vector<std::string>{"b0", "b1", "b2"});
}

TEST_CASE("cluster_users: single profile is a singleton") {
  Eigen::VectorXd v(2);
  v << 1, 0;
  const auto clustering = cluster_users({{"solo", rank1(v, {"x", "y"})}}, 0.5);
  REQUIRE(clustering.clusters.size() == 1);
  CHECK(clustering.clusters[0] == std::vector<std::string>{"solo"});
  CHECK(clustering.merges.empty());
}

TEST_CASE("cluster_users: average linkage merges the 0.9/0.9/0.8 triangle") {
  // Three unit vectors with pairwise |cos| = 0.9, 0.9, 0.8.
  Eigen::VectorXd v1(3), v2(3), v3(3);
  v1 << 1, 0, 0;
  v2 << 0.9, std::sqrt(1 - 0.81), 0;
  const double c = (0.8 - 0.81) / std::sqrt(1 - 0.81);
  v3 << 0.9, c, std::sqrt(1 - 0.81 - c * c);
  const std::vector<std::string> locs{"x", "y", "z"};
  const auto p1 = rank1(v1, locs), p2 = rank1(v2, locs), p3 = rank1(v3, locs);
  CHECK(similarity(p1, p2) == doctest::Approx(0.9));
  CHECK(similarity(p1, p3) == doctest::Approx(0.9));
  CHECK(similarity(p2, p3) == doctest::Approx(0.8));
  const auto clustering = cluster_users({{"u1", p1}, {"u2", p2}, {"u3", p3}}, 0.3);
  CHECK(clustering.clusters.size() == 1);
  REQUIRE(clustering.merges.size() == 2);
  CHECK(clustering.merges[0].distance == doctest::Approx(0.1));
  CHECK(clustering.merges[1].distance == doctest::Approx(0.15));
}

TEST_CASE("cluster_users: empty input") {
  CHECK_THROWS_AS(cluster_users({}, 0.5), ValidationError);
}

TEST_CASE("target profile: single location is a one-hot component") {
  const std::vector<std::string> locs{"L1", "L2", "L3"};
  const auto tp = target_profile_from_spec({{"L3", 1.0}}, locs);
  REQUIRE(tp.profile.has_value());
  CHECK(tp.profile->rank() == 1);
  CHECK(std::abs(tp.profile->components(0, 2)) == doctest::Approx(1.0));
}

TEST_CASE("target profile: split weights normalize into one component") {
  const std::vector<std::string> locs{"L1", "L2", "L3"};
  const auto tp = target_profile_from_spec({{"L1", 0.5}, {"L2", 0.5}}, locs);
  REQUIRE(tp.profile.has_value());
  const double x = std::abs(tp.profile->components(0, 0));
  CHECK(x == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(tp.profile->components(0, 1)) == doctest::Approx(x));
}

TEST_CASE("target profile composes with similarity") {
  const auto ds = traces::make_dataset({{"u1", "L3", 0, kDay}, {"u2", "L1", 0, kDay}});
  const auto user_matrix = build_association_matrix(ds, "u1", 0, 1);
  const auto user_profile = eigen_profile(user_matrix, 0.9);
  const auto tp = target_profile_from_spec({{"L3", 1.0}}, user_profile.locations);
  CHECK(similarity(*tp.profile, user_profile) == doctest::Approx(1.0));
}

TEST_CASE("target profile input validation") {
  CHECK_THROWS_AS(target_profile_from_spec({}, {"L1"}), ValidationError);
  CHECK_THROWS_AS(target_profile_from_spec({{"L1", 0.4}}, {"L1"}), ValidationError);
  CHECK_THROWS_AS(target_profile_from_spec({{"L9", 1.0}}, {"L1"}), ValidationError);
}

TEST_CASE("profile JSON round-trip") {
  Rng rng(5);
  const std::vector<std::string> locs{"a", "b", "c", "d"};
  const auto p = random_profile(rng, locs);
  const auto [user, q] = profile_from_json(profile_to_json("u9", p));
  CHECK(user == "u9");
  CHECK(q.locations == p.locations);
  CHECK((q.components - p.components).norm() < 1e-15);
  CHECK((q.weights - p.weights).norm() < 1e-15);
}
