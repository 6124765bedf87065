#pragma once

// Hellinger geometry, double centering, and a deterministic symmetric
// eigensolver (cyclic Jacobi).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "corpus.hpp"
#include "errors.hpp"
#include "matrix.hpp"

namespace posenc {

inline double hellinger_distance(std::span<const double> mu, std::span<const double> nu) {
  require(mu.size() == nu.size(), errc::dimension_mismatch, "hellinger: size mismatch");
  require(!mu.empty(), errc::empty_input, "hellinger: empty distributions");
  KahanSum s, sum_mu, sum_nu;
  for (std::size_t v = 0; v < mu.size(); ++v) {
    require(mu[v] >= 0.0 && nu[v] >= 0.0, errc::invalid_argument, "hellinger: negative mass");
    sum_mu.add(mu[v]);
    sum_nu.add(nu[v]);
    double d = std::sqrt(mu[v]) - std::sqrt(nu[v]);
    s.add(d * d);
  }
  require(std::fabs(sum_mu.value() - 1.0) <= 1e-9 && std::fabs(sum_nu.value() - 1.0) <= 1e-9,
          errc::invalid_argument, "hellinger: inputs must sum to 1");
  return std::sqrt(s.value());
}

struct SquaredDistanceMatrix {
  Matrix d; // n x n, zero diagonal, symmetric, entries in [0, 2]

  std::size_t n() const { return d.rows(); }
  double distance(std::size_t i, std::size_t j) const { return std::sqrt(d(i, j)); }
};

inline SquaredDistanceMatrix make_squared_distance(Matrix m) {
  require(m.rows() == m.cols() && m.rows() >= 1, errc::dimension_mismatch,
          "squared distances must be square");
  require(m.all_finite(), errc::non_finite, "non-finite squared distance");
  require(is_symmetric(m, 1e-12), errc::invalid_argument, "squared distances must be symmetric");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    require(m(i, i) == 0.0, errc::invalid_argument, "squared distances need a zero diagonal");
    for (std::size_t j = 0; j < m.cols(); ++j)
      require(m(i, j) >= 0.0 && m(i, j) <= 2.0 + 1e-12, errc::invalid_argument,
              "squared distance outside [0, 2]");
  }
  return SquaredDistanceMatrix{std::move(m)};
}

inline SquaredDistanceMatrix squared_distance_matrix(const PositionalMarginals& m) {
  m.validate();
  std::size_t n = m.n(), v = m.vocab();
  Matrix s(n, v);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < v; ++k) s(i, k) = std::sqrt(m.mu(i, k));
  SquaredDistanceMatrix out;
  out.d = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      KahanSum acc;
      for (std::size_t k = 0; k < v; ++k) {
        double diff = s(i, k) - s(j, k);
        acc.add(diff * diff);
      }
      out.d(i, j) = out.d(j, i) = acc.value();
    }
  return out;
}

struct GramMatrix {
  Matrix b; // -1/2 H D H, symmetric, rows sum to ~0
};

inline GramMatrix double_center(const SquaredDistanceMatrix& sq) {
  const Matrix& d = sq.d;
  require(d.rows() == d.cols() && d.rows() >= 1, errc::dimension_mismatch,
          "double_center: square matrix required");
  require(is_symmetric(d, 1e-12), errc::invalid_argument, "double_center: asymmetric input");
  std::size_t n = d.rows();
  std::vector<double> row_mean(n);
  KahanSum grand;
  for (std::size_t i = 0; i < n; ++i) {
    KahanSum r;
    for (std::size_t j = 0; j < n; ++j) r.add(d(i, j));
    row_mean[i] = r.value() / static_cast<double>(n);
    grand.add(row_mean[i]);
  }
  double grand_mean = grand.value() / static_cast<double>(n);
  GramMatrix g;
  g.b = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = -0.5 * (d(i, j) - row_mean[i] - row_mean[j] + grand_mean);
      g.b(i, j) = g.b(j, i) = v;
    }
  return g;
}

struct EigenDecomposition {
  std::vector<double> values; // descending
  Matrix vectors;             // column k is the eigenvector for values[k]
};

// Cyclic Jacobi. Deterministic contract:
//   - fixed sweep order (p < q, row major), at most 100 sweeps
//   - converged when off-diagonal Frobenius norm <= 1e-12 * ||A||_F
//   - eigenvalues sorted descending, stable on exact ties
//   - each eigenvector's largest-magnitude entry is positive; among equal
//     magnitudes the lowest index decides
inline EigenDecomposition eigendecompose_symmetric(const Matrix& input, double symmetry_tol = 1e-10) {
  require(input.rows() == input.cols() && input.rows() >= 1, errc::dimension_mismatch,
          "eigendecompose: square matrix required");
  require(input.all_finite(), errc::non_finite, "eigendecompose: non-finite entry");
  require(is_symmetric(input, symmetry_tol), errc::invalid_argument,
          "eigendecompose: matrix is not symmetric");

  std::size_t n = input.rows();
  Matrix a = input;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);
  Matrix v = Matrix::identity(n);
  double norm_a = frobenius_norm(a);

  auto off_norm = [&]() {
    KahanSum s;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s.add(2.0 * a(i, j) * a(i, j));
    return std::sqrt(s.value());
  };

  bool converged = off_norm() <= 1e-12 * norm_a;
  for (std::size_t sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    converged = off_norm() <= 1e-12 * norm_a;
  }
  require(converged, errc::no_convergence, "jacobi did not converge in 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  EigenDecomposition e;
  e.values.resize(n);
  e.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t src = order[k];
    e.values[k] = a(src, src);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mag = std::fabs(v(i, src));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) e.vectors(i, k) = sign * v(i, src);
  }
  return e;
}

inline EigenDecomposition eigendecompose(const GramMatrix& g) {
  return eigendecompose_symmetric(g.b);
}

// Count of eigenvalues above tol * largest eigenvalue (0 if none positive).
inline std::size_t effective_rank(const EigenDecomposition& e, double tol = 1e-9) {
  if (e.values.empty() || e.values.front() <= 0.0) return 0;
  double threshold = tol * e.values.front();
  return static_cast<std::size_t>(
      std::count_if(e.values.begin(), e.values.end(), [&](double l) { return l > threshold; }));
}

// Fraction of positive eigenvalue mass captured by the top k.
inline double cumulative_variance(const EigenDecomposition& e, std::size_t k) {
  KahanSum total, top;
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    if (e.values[i] <= 0.0) continue;
    total.add(e.values[i]);
    if (i < k) top.add(e.values[i]);
  }
  require(total.value() > 0.0, errc::degenerate_metric,
          "cumulative_variance: no positive eigenvalues");
  return top.value() / total.value();
}

} // namespace posenc
