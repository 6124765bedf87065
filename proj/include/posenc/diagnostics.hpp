#pragma once

// Audit metrics: stress, monotonicity violations, minimum separation,
// Hellinger correlation, projected stress, rank trade-off table.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "encodings.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "matrix.hpp"

namespace posenc {

inline Matrix pairwise_distances(const Encoding& e) {
  std::size_t n = e.n();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = row_distance(e.points, i, j);
  return d;
}

struct StressReport {
  double stress = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  std::size_t pair_count = 0;
};

struct MonotonicityReport {
  double violation_rate = 0.0;
  std::size_t triples_checked = 0;
  std::size_t violations = 0;
};

struct SeparationReport {
  double min_separation = 0.0;
  std::size_t argmin_i = 0, argmin_j = 0;
};

struct TradeoffRow {
  std::size_t r = 0;
  double stress = 0.0;
  std::size_t parameters = 0;
  double saving_vs_free = 0.0;
};

namespace detail {

inline StressReport stress_from_distances(const Matrix& dist, const SquaredDistanceMatrix& sq) {
  std::size_t n = sq.n();
  require(dist.rows() == n && dist.cols() == n, errc::dimension_mismatch,
          "stress: encoding and distance matrix disagree on n");
  KahanSum num, den;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double diff = dist(i, j) - sq.distance(i, j);
      num.add(diff * diff);
      den.add(sq.d(i, j));
      ++pairs;
    }
  StressReport r;
  r.numerator = num.value();
  r.denominator = den.value();
  r.pair_count = pairs;
  require(r.denominator > 0.0, errc::degenerate_metric,
          "stress undefined: all pairwise distances are zero");
  r.stress = r.numerator / r.denominator;
  return r;
}

// Ordered triples of distinct i, j, k with |i-j| < |i-k| strictly; a
// violation needs dist(i,j) > dist(i,k) strictly, so exact ties in the
// embedding never count.
inline MonotonicityReport monotonicity_from_distances(const Matrix& dist) {
  std::size_t n = dist.rows();
  require(n >= 3, errc::invalid_argument, "monotonicity: n must be at least 3");
  MonotonicityReport r;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::size_t dj = i > j ? i - j : j - i;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        std::size_t dk = i > k ? i - k : k - i;
        if (dj >= dk) continue;
        ++r.triples_checked;
        if (dist(i, j) > dist(i, k)) ++r.violations;
      }
    }
  r.violation_rate = static_cast<double>(r.violations) / static_cast<double>(r.triples_checked);
  return r;
}

inline double correlation_from_distances(const Matrix& dist, const SquaredDistanceMatrix& sq) {
  std::size_t n = sq.n();
  require(n >= 3, errc::invalid_argument, "correlation: n must be at least 3");
  require(dist.rows() == n && dist.cols() == n, errc::dimension_mismatch,
          "correlation: encoding and distance matrix disagree on n");
  std::vector<double> x, y;
  x.reserve(n * (n - 1) / 2);
  y.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      x.push_back(dist(i, j));
      y.push_back(sq.distance(i, j));
    }
  auto mean = [](const std::vector<double>& v) {
    KahanSum s;
    for (double t : v) s.add(t);
    return s.value() / static_cast<double>(v.size());
  };
  double mx = mean(x), my = mean(y);
  KahanSum sxy, sxx, syy;
  for (std::size_t p = 0; p < x.size(); ++p) {
    sxy.add((x[p] - mx) * (y[p] - my));
    sxx.add((x[p] - mx) * (x[p] - mx));
    syy.add((y[p] - my) * (y[p] - my));
  }
  require(sxx.value() > 0.0 && syy.value() > 0.0, errc::zero_variance,
          "correlation undefined: constant distances");
  return sxy.value() / std::sqrt(sxx.value() * syy.value());
}

} // namespace detail

inline StressReport stress(const Encoding& e, const SquaredDistanceMatrix& sq) {
  return detail::stress_from_distances(pairwise_distances(e), sq);
}

inline StressReport stress(const DistanceOnlyEncoding& e, const SquaredDistanceMatrix& sq) {
  return detail::stress_from_distances(e.delta, sq);
}

inline MonotonicityReport monotonicity_violation_rate(const Encoding& e) {
  return detail::monotonicity_from_distances(pairwise_distances(e));
}

inline MonotonicityReport monotonicity_violation_rate(const DistanceOnlyEncoding& e) {
  return detail::monotonicity_from_distances(e.delta);
}

inline SeparationReport min_separation(const Encoding& e) {
  std::size_t n = e.n();
  require(n >= 2, errc::invalid_argument, "min_separation: n must be at least 2");
  SeparationReport r;
  r.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = row_distance(e.points, i, j);
      if (d < r.min_separation) {
        r.min_separation = d;
        r.argmin_i = i;
        r.argmin_j = j;
      }
    }
  return r;
}

inline double hellinger_correlation(const Encoding& e, const SquaredDistanceMatrix& sq) {
  return detail::correlation_from_distances(pairwise_distances(e), sq);
}

inline double hellinger_correlation(const DistanceOnlyEncoding& e,
                                    const SquaredDistanceMatrix& sq) {
  return detail::correlation_from_distances(e.delta, sq);
}

inline StressReport projected_stress(const Encoding& e, const Matrix& m,
                                     const SquaredDistanceMatrix& sq) {
  require(m.rows() == e.dim() && m.cols() == e.dim(), errc::dimension_mismatch,
          "projected_stress: projection must be d x d");
  require(m.all_finite(), errc::non_finite, "projected_stress: non-finite projection");
  Encoding projected;
  projected.kind = e.kind;
  projected.points = e.points * m;
  return stress(projected, sq);
}

inline std::vector<TradeoffRow> rank_tradeoff_table(const EigenDecomposition& eig,
                                                    const SquaredDistanceMatrix& sq,
                                                    std::size_t d,
                                                    const std::vector<std::size_t>& ranks) {
  require(!ranks.empty(), errc::invalid_argument, "tradeoff: rank list is empty");
  std::size_t n = eig.vectors.rows();
  std::vector<TradeoffRow> rows;
  rows.reserve(ranks.size());
  for (std::size_t r : ranks) {
    auto [factors, enc] = low_rank_mds(eig, r, d);
    TradeoffRow row;
    row.r = r;
    row.stress = stress(enc, sq).stress;
    row.parameters = factors.parameter_count();
    row.saving_vs_free =
        1.0 - static_cast<double>(row.parameters) / static_cast<double>(n * d);
    rows.push_back(row);
  }
  return rows;
}

} // namespace posenc
