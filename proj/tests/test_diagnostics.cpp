#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <posenc/corpus.hpp>
#include <posenc/diagnostics.hpp>
#include <posenc/encodings.hpp>
#include <posenc/geometry.hpp>
#include <posenc/rng.hpp>

using namespace posenc;

namespace {

Encoding points_1d(std::initializer_list<double> xs) {
  Encoding e;
  e.points = Matrix(xs.size(), 1);
  std::size_t i = 0;
  for (double x : xs) e.points(i++, 0) = x;
  return e;
}

SquaredDistanceMatrix planted(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Matrix p(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < dim; ++k) p(i, k) = rng.normal();
  double far = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) far = std::max(far, row_distance(p, i, j));
  p = (1.4 / far) * p;
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d(i, j) = row_distance(p, i, j) * row_distance(p, i, j);
  return make_squared_distance(d);
}

// direct transcription of the stress formula, no shared code with the library
double naive_stress(const Matrix& dist, const Matrix& sq) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < dist.rows(); ++i)
    for (std::size_t j = i + 1; j < dist.rows(); ++j) {
      double diff = dist(i, j) - std::sqrt(sq(i, j));
      num += diff * diff;
      den += sq(i, j);
    }
  return num / den;
}

} // namespace

TEST_CASE("stress matches the two-point hand value") {
  Matrix d{{0.0, 1.0}, {1.0, 0.0}};
  SquaredDistanceMatrix sq = make_squared_distance(d);
  Encoding e = points_1d({0.0, 2.0});
  StressReport r = stress(e, sq);
  REQUIRE(r.stress == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(r.numerator == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(r.denominator == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(r.pair_count == 1);
}

TEST_CASE("stress agrees with a naive double loop on random inputs") {
  Rng rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 3 + rng.below(10);
    SquaredDistanceMatrix sq = planted(n, 2 + rng.below(3), 1000 + trial);
    Encoding e = random_encoding(n, 4, 1.0, 2000 + trial);
    double expected = naive_stress(pairwise_distances(e), sq.d);
    REQUIRE(stress(e, sq).stress == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("stress is invariant under rigid motions") {
  std::size_t n = 10, d = 4;
  SquaredDistanceMatrix sq = planted(n, 3, 89);
  Encoding e = random_encoding(n, d, 1.0, 91);
  double base = stress(e, sq).stress;

  // orthogonal matrix from the eigenvectors of a random symmetric matrix
  Rng rng(97);
  Matrix sym(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) sym(i, j) = sym(j, i) = rng.normal();
  Matrix q = eigendecompose_symmetric(sym).vectors;

  Encoding moved = e;
  moved.points = e.points * q;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) moved.points(i, k) += 3.25; // translation
  REQUIRE(stress(moved, sq).stress == Catch::Approx(base).margin(1e-9));
}

TEST_CASE("stress rejects degenerate metrics") {
  Matrix zero(4, 4);
  SquaredDistanceMatrix sq = make_squared_distance(zero);
  Encoding e = random_encoding(4, 2, 1.0, 5);
  REQUIRE_THROWS_AS(stress(e, sq), Error);
}

TEST_CASE("distance-only stress equals the point path on matching distances") {
  SquaredDistanceMatrix sq = planted(6, 2, 101);
  Encoding e = random_encoding(6, 3, 1.0, 103);
  DistanceOnlyEncoding d;
  d.delta = pairwise_distances(e);
  REQUIRE(stress(d, sq).stress == stress(e, sq).stress);
  REQUIRE(monotonicity_violation_rate(d).violation_rate ==
          monotonicity_violation_rate(e).violation_rate);
}

TEST_CASE("monotonicity counts ordered triples with strict comparisons") {
  // i=0 checks (j=1, k=2); i=2 checks (j=1, k=0); i=1 has only tied pairs
  MonotonicityReport ok = monotonicity_violation_rate(points_1d({0.0, 0.4, 0.5}));
  REQUIRE(ok.triples_checked == 2);
  REQUIRE(ok.violations == 0);
  REQUIRE(ok.violation_rate == 0.0);

  MonotonicityReport bad = monotonicity_violation_rate(points_1d({0.0, 0.6, 0.5}));
  REQUIRE(bad.triples_checked == 2);
  REQUIRE(bad.violations == 1);
  REQUIRE(bad.violation_rate == 0.5);

  // both anchors 0 and 2 see their nearer neighbour farther away
  MonotonicityReport fold = monotonicity_violation_rate(points_1d({0.0, 1.0, 0.0}));
  REQUIRE(fold.violations == 2);
  // exact distance ties are not violations under the strict comparison
  REQUIRE(monotonicity_violation_rate(points_1d({0.0, 0.0, 0.0})).violations == 0);

  REQUIRE_THROWS_AS(monotonicity_violation_rate(points_1d({0.0, 1.0})), Error);
}

TEST_CASE("equally spaced colinear points are perfectly monotone") {
  Encoding e;
  e.points = Matrix(12, 3);
  for (std::size_t i = 0; i < 12; ++i) e.points(i, 0) = static_cast<double>(i);
  MonotonicityReport r = monotonicity_violation_rate(e);
  REQUIRE(r.violations == 0);
  REQUIRE(r.triples_checked > 0);
}

TEST_CASE("monotonicity triple count matches brute force") {
  for (std::size_t n : {3u, 5u, 8u, 10u}) {
    Encoding e = random_encoding(n, 3, 1.0, 400 + n);
    Matrix dist = pairwise_distances(e);
    std::size_t triples = 0, violations = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          if (j == i || k == i || k == j) continue;
          auto gap = [i](std::size_t x) { return x > i ? x - i : i - x; };
          if (gap(j) >= gap(k)) continue;
          ++triples;
          if (dist(i, j) > dist(i, k)) ++violations;
        }
    MonotonicityReport r = monotonicity_violation_rate(e);
    REQUIRE(r.triples_checked == triples);
    REQUIRE(r.violations == violations);
  }
}

TEST_CASE("gaussian encodings violate monotonicity about half the time") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Encoding e = random_encoding(64, 8, 1.0, seed);
    double rate = monotonicity_violation_rate(e).violation_rate;
    REQUIRE(rate > 0.45);
    REQUIRE(rate < 0.55);
  }
}

TEST_CASE("min separation reports the argmin pair and exact zeros") {
  Encoding e = random_encoding(8, 4, 1.0, 111);
  for (std::size_t k = 0; k < 4; ++k) e.points(5, k) = e.points(2, k); // plant a duplicate
  SeparationReport r = min_separation(e);
  REQUIRE(r.min_separation == 0.0);
  REQUIRE(r.argmin_i == 2);
  REQUIRE(r.argmin_j == 5);

  Encoding line = points_1d({0.0, 3.0, 4.0});
  SeparationReport lr = min_separation(line);
  REQUIRE(lr.min_separation == 1.0);
  REQUIRE(lr.argmin_i == 1);
  REQUIRE(lr.argmin_j == 2);

  REQUIRE_THROWS_AS(min_separation(points_1d({1.0})), Error);
}

TEST_CASE("correlation is exact for affinely related distances") {
  SquaredDistanceMatrix sq = planted(10, 4, 113);
  Encoding full = mds_encoding(eigendecompose(double_center(sq)), 10);
  double corr = hellinger_correlation(full, sq);
  REQUIRE(corr == Catch::Approx(1.0).margin(1e-9));

  Encoding doubled = full;
  doubled.points = 2.0 * full.points;
  REQUIRE(hellinger_correlation(doubled, sq) == Catch::Approx(1.0).margin(1e-9));

  Encoding constant;
  constant.points = Matrix(10, 2);
  REQUIRE_THROWS_AS(hellinger_correlation(constant, sq), Error);
}

TEST_CASE("projected stress reduces to stress for the identity and to one for zero") {
  SquaredDistanceMatrix sq = planted(8, 3, 127);
  Encoding e = random_encoding(8, 5, 1.0, 131);
  double plain = stress(e, sq).stress;
  REQUIRE(projected_stress(e, Matrix::identity(5), sq).stress ==
          Catch::Approx(plain).margin(1e-12));
  REQUIRE(projected_stress(e, Matrix(5, 5), sq).stress == Catch::Approx(1.0).margin(1e-12));
  REQUIRE_THROWS_AS(projected_stress(e, Matrix(4, 4), sq), Error);
}

TEST_CASE("rank tradeoff table reports exact counts and savings") {
  SquaredDistanceMatrix sq = planted(32, 5, 137);
  EigenDecomposition eig = eigendecompose(double_center(sq));
  auto rows = rank_tradeoff_table(eig, sq, 128, {1, 2, 3, 7});
  REQUIRE(rows.size() == 4);
  REQUIRE(rows[2].r == 3);
  REQUIRE(rows[2].parameters == 480);
  REQUIRE(rows[2].saving_vs_free == Catch::Approx(1.0 - 480.0 / 4096.0).margin(1e-15));
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    REQUIRE(rows[k + 1].stress <= rows[k].stress + 1e-12);
}
