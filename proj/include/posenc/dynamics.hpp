#pragma once

// NTK gradient flow on position vectors: Hellinger-monotone kernel, compatible
// forcing, explicit-Euler integration, closed-form fixed point, and the
// quantitative monotonicity bound checked at that fixed point.
//
// The certificate rests on four hypotheses, referred to as A1-A4 throughout:
//   A1  the kernel alpha is symmetric positive definite;
//   A2  alpha_ij = f(d_H(mu_i, mu_j)) with f increasing and Lipschitz;
//   A3  the corpus metric is monotone in sequence distance, i.e.
//       |i-j| <= |i-k| implies d_H(mu_i, mu_j) <= d_H(mu_i, mu_k)
//       (strict A3: strict on the left implies strict on the right);
//   A4  the forcing rows satisfy ||b_i - b_j|| <= C_b d_H(mu_i, mu_j).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "diagnostics.hpp"
#include "encodings.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace posenc {

inline constexpr double kHellingerMax = 1.4142135623730951; // sqrt(2)

struct KernelSpec {
  enum class Kind { affine, exponential };

  Kind kind = Kind::affine;
  double a = 0.5;                    // affine: f(t) = a + c t; exponential: f(t) = a e^{c t}
  double c = 1.0;
  std::optional<double> ridge;       // absent: adaptive 1.1 * max(0, -lambda_min(f(d_H)))

  static KernelSpec affine(double a, double c, std::optional<double> ridge = {}) {
    return KernelSpec{Kind::affine, a, c, ridge};
  }
  static KernelSpec exponential(double a, double c, std::optional<double> ridge = {}) {
    return KernelSpec{Kind::exponential, a, c, ridge};
  }

  void validate() const {
    require(c > 0.0, errc::invalid_argument, "kernel: c must be positive (f strictly increasing)");
    if (kind == Kind::affine)
      require(a >= 0.0, errc::invalid_argument, "kernel: affine offset must be non-negative");
    else
      require(a > 0.0, errc::invalid_argument, "kernel: exponential amplitude must be positive");
    if (ridge) require(*ridge >= 0.0, errc::invalid_argument, "kernel: ridge must be non-negative");
  }

  double eval(double t) const {
    return kind == Kind::affine ? a + c * t : a * std::exp(c * t);
  }
  // Lipschitz constant of f on [0, sqrt(2)]
  double lipschitz() const {
    return kind == Kind::affine ? c : a * c * std::exp(c * kHellingerMax);
  }
  // sup of f on [0, sqrt(2)] (f increasing, so the right endpoint)
  double sup() const { return eval(kHellingerMax); }
};

struct KernelBuild {
  Matrix alpha;
  double lambda_min = 0.0, lambda_max = 0.0;
  double ridge_used = 0.0;
};

inline KernelBuild build_kernel(const SquaredDistanceMatrix& sq, const KernelSpec& spec) {
  spec.validate();
  std::size_t n = sq.n();
  Matrix base(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) base(i, j) = spec.eval(sq.distance(i, j));

  EigenDecomposition eig = eigendecompose_symmetric(base);
  double base_min = eig.values.back();
  KernelBuild kb;
  kb.ridge_used = spec.ridge ? *spec.ridge : 1.1 * std::max(0.0, -base_min);
  kb.lambda_min = base_min + kb.ridge_used;
  kb.lambda_max = eig.values.front() + kb.ridge_used;
  require(kb.lambda_min > 0.0, errc::not_positive_definite,
          "kernel not positive definite: lambda_min = " + format_double(kb.lambda_min) +
              " at ridge " + format_double(kb.ridge_used));
  kb.alpha = base;
  for (std::size_t i = 0; i < n; ++i) kb.alpha(i, i) += kb.ridge_used;
  return kb;
}

namespace detail {

// Seeded Gaussian matrix orthonormalized column by column; degenerate columns
// are redrawn, so the result is deterministic per seed. Requires rows >= cols.
inline Matrix orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix q(rows, cols);
  for (std::size_t k = 0; k < cols; ++k) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (std::size_t i = 0; i < rows; ++i) q(i, k) = rng.normal();
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t p = 0; p < k; ++p) {
          double proj = 0.0;
          for (std::size_t i = 0; i < rows; ++i) proj += q(i, p) * q(i, k);
          for (std::size_t i = 0; i < rows; ++i) q(i, k) -= proj * q(i, p);
        }
      double nrm = 0.0;
      for (std::size_t i = 0; i < rows; ++i) nrm += q(i, k) * q(i, k);
      nrm = std::sqrt(nrm);
      if (nrm > 1e-8) {
        for (std::size_t i = 0; i < rows; ++i) q(i, k) /= nrm;
        break;
      }
      require(attempt + 1 < 64, errc::singular_system, "orthonormalization failed to converge");
    }
  }
  return q;
}

} // namespace detail

struct ForcingBuild {
  Matrix b;                  // n x d
  double c_b = 0.0;          // compatibility constant (= scale)
  double max_pair_ratio = 0.0;
};

// b_i = scale * sqrt(mu_i) * Pi with Pi orthonormal in the wide direction, so
// ||b_i - b_j|| <= scale * d_H(mu_i, mu_j); verified exhaustively.
inline ForcingBuild build_forcing(const PositionalMarginals& marginals, std::size_t d,
                                  double scale, std::uint64_t seed) {
  marginals.validate();
  require(d >= 1, errc::invalid_argument, "forcing: d must be positive");
  require(scale > 0.0, errc::invalid_argument, "forcing: scale must be positive");
  std::size_t n = marginals.n(), v = marginals.vocab();

  Rng rng(seed);
  Matrix pi = v >= d ? detail::orthonormal_columns(v, d, rng)
                     : transpose(detail::orthonormal_columns(d, v, rng));

  Matrix sqrt_mu(n, v);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < v; ++k) sqrt_mu(i, k) = std::sqrt(marginals.mu(i, k));

  ForcingBuild fb;
  fb.b = scale * (sqrt_mu * pi);
  fb.c_b = scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dh = hellinger_distance(marginals.mu.row(i), marginals.mu.row(j));
      double diff = row_distance(fb.b, i, j);
      if (dh == 0.0) {
        require(diff == 0.0, errc::verification_failure,
                "forcing differs across identical marginals");
        continue;
      }
      double ratio = diff / dh;
      require(ratio <= fb.c_b * (1.0 + 1e-9), errc::verification_failure,
              "forcing compatibility violated: ratio " + format_double(ratio));
      fb.max_pair_ratio = std::max(fb.max_pair_ratio, ratio);
    }
  return fb;
}

struct FlowSystem {
  Matrix alpha; // n x n positive definite kernel
  Matrix b;     // n x d forcing
  double lambda_min = 0.0, lambda_max = 0.0;
  double ridge = 0.0;
  double c_b = 0.0;   // forcing compatibility constant
  double l_f = 0.0;   // kernel Lipschitz constant on [0, sqrt(2)]
  double f_sup = 0.0; // kernel sup on [0, sqrt(2)]
};

inline FlowSystem assemble_flow(const PositionalMarginals& marginals,
                                const SquaredDistanceMatrix& sq, const KernelSpec& spec,
                                std::size_t d, double scale, std::uint64_t seed) {
  KernelBuild kb = build_kernel(sq, spec);
  ForcingBuild fb = build_forcing(marginals, d, scale, seed);
  FlowSystem sys;
  sys.alpha = std::move(kb.alpha);
  sys.b = std::move(fb.b);
  sys.lambda_min = kb.lambda_min;
  sys.lambda_max = kb.lambda_max;
  sys.ridge = kb.ridge_used;
  sys.c_b = fb.c_b;
  sys.l_f = spec.lipschitz();
  sys.f_sup = spec.sup();
  return sys;
}

struct FlowSummary {
  Matrix p;
  double residual_norm = 0.0; // ||alpha P - b||_F at the final state
  std::size_t steps = 0;
  std::vector<double> residual_checkpoints;       // 8 evenly spaced checkpoints
  std::vector<double> min_separation_checkpoints; // same checkpoints
  double trajectory_max_row_norm = 0.0;
};

// Explicit Euler P <- P - dt (alpha P - b). Stability requires
// dt * lambda_max < 2; divergence is detected as 10 consecutive residual
// increases above the initial residual.
inline FlowSummary integrate_flow(const Matrix& alpha, const Matrix& b, Matrix p0, double dt,
                                  std::size_t steps) {
  std::size_t n = alpha.rows();
  require(alpha.cols() == n, errc::dimension_mismatch, "flow: alpha must be square");
  require(b.rows() == n && p0.rows() == n && p0.cols() == b.cols(), errc::dimension_mismatch,
          "flow: shape mismatch between alpha, b, p0");
  require(dt > 0.0 && std::isfinite(dt), errc::invalid_argument, "flow: dt must be positive");
  require(steps >= 1, errc::invalid_argument, "flow: steps must be at least 1");

  FlowSummary out;
  out.p = std::move(p0);
  double initial_residual = std::numeric_limits<double>::quiet_NaN();
  double prev_residual = std::numeric_limits<double>::infinity();
  int rising = 0;

  std::vector<std::size_t> checkpoints;
  std::size_t marks = std::min<std::size_t>(8, steps);
  for (std::size_t k = 1; k <= marks; ++k) checkpoints.push_back(k * steps / marks);

  for (std::size_t s = 0; s < steps; ++s) {
    Matrix residual = alpha * out.p - b;
    double rnorm = frobenius_norm(residual);
    require(std::isfinite(rnorm), errc::step_too_large, "flow diverged to non-finite values");
    if (s == 0) initial_residual = rnorm;
    rising = rnorm > prev_residual ? rising + 1 : 0;
    require(rising < 10 || rnorm <= initial_residual, errc::step_too_large,
            "flow residual growing: dt too large for this kernel");
    prev_residual = rnorm;

    out.p = out.p - dt * residual;
    out.trajectory_max_row_norm = std::max(out.trajectory_max_row_norm, max_row_norm(out.p));
    ++out.steps;
    if (std::find(checkpoints.begin(), checkpoints.end(), s + 1) != checkpoints.end()) {
      out.residual_checkpoints.push_back(frobenius_norm(alpha * out.p - b));
      if (n >= 2) {
        Encoding snapshot;
        snapshot.points = out.p;
        out.min_separation_checkpoints.push_back(min_separation(snapshot).min_separation);
      } else {
        out.min_separation_checkpoints.push_back(0.0);
      }
    }
  }
  out.residual_norm = frobenius_norm(alpha * out.p - b);
  return out;
}

namespace detail {

inline Matrix cholesky_factor(const Matrix& a) {
  std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      KahanSum s;
      s.add(a(i, j));
      for (std::size_t k = 0; k < j; ++k) s.add(-l(i, k) * l(j, k));
      if (i == j) {
        require(s.value() > 0.0, errc::singular_system,
                "matrix not positive definite within working precision");
        l(i, i) = std::sqrt(s.value());
      } else {
        l(i, j) = s.value() / l(j, j);
      }
    }
  }
  return l;
}

inline Matrix cholesky_solve(const Matrix& l, const Matrix& rhs) {
  std::size_t n = l.rows(), d = rhs.cols();
  Matrix y(n, d), x(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      KahanSum s;
      s.add(rhs(i, c));
      for (std::size_t k = 0; k < i; ++k) s.add(-l(i, k) * y(k, c));
      y(i, c) = s.value() / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      KahanSum s;
      s.add(y(ii, c));
      for (std::size_t k = ii + 1; k < n; ++k) s.add(-l(k, ii) * x(k, c));
      x(ii, c) = s.value() / l(ii, ii);
    }
  }
  return x;
}

} // namespace detail

// Direct solve of alpha P = b (Cholesky plus iterative refinement).
inline Matrix fixed_point(const Matrix& alpha, const Matrix& b) {
  require(alpha.rows() == alpha.cols(), errc::dimension_mismatch, "fixed_point: alpha not square");
  require(b.rows() == alpha.rows(), errc::dimension_mismatch, "fixed_point: b row mismatch");
  Matrix l = detail::cholesky_factor(alpha);
  Matrix x = detail::cholesky_solve(l, b);
  double bnorm = frobenius_norm(b);
  for (int iter = 0; iter < 50; ++iter) {
    Matrix residual = b - alpha * x;
    double rel = bnorm > 0.0 ? frobenius_norm(residual) / bnorm : frobenius_norm(residual);
    if (rel <= 1e-12) return x;
    x = x + detail::cholesky_solve(l, residual);
  }
  double rel = bnorm > 0.0 ? frobenius_norm(alpha * x - b) / bnorm : frobenius_norm(alpha * x - b);
  require(rel <= 1e-10, errc::no_convergence,
          "fixed point refinement stalled at relative residual " + format_double(rel));
  return x;
}

struct FixedPointReport {
  Matrix p_star;
  double residual_rel = 0.0;

  double lambda_min = 0.0;
  double c_b = 0.0;
  double l_f = 0.0;
  double f_sup = 0.0;
  double orbit_radius = 0.0;   // R = 1.05 * max_i ||p_i*||
  double bound_constant = 0.0; // C = (C_b + 2 R L_f n f_sup) / lambda_min
  double max_ratio = 0.0;      // max over pairs of ||p_i* - p_j*|| / d_H

  std::size_t violations = 0; // strict monotonicity violations at P*
  std::size_t triples_checked = 0;
  double max_tie_asymmetry = 0.0;       // max |dist(i,i-m) - dist(i,i+m)| at P*
  double max_duplicate_deviation = 0.0; // max ||p_i*-p_j*|| over pairs with d_H = 0

  std::size_t a3_violations = 0; // weak-convention failures of hypothesis A3
  bool a3_strict = false;        // d_H strictly increasing in |i-j| per anchor
  bool bound_ok = false;
  bool monotone_ok = false;
};

// Checks hypothesis A3 on the corpus metric, solves for the fixed point, and
// evaluates the quantitative bound and the monotonicity claim there. When A3
// fails, the flags still report the measurements but no claim is implied.
inline FixedPointReport verify_monotone_fixed_point(const FlowSystem& sys,
                                                    const SquaredDistanceMatrix& sq,
                                                    double a3_tol = 1e-9) {
  std::size_t n = sq.n();
  require(sys.alpha.rows() == n, errc::dimension_mismatch, "verify: system/metric size mismatch");

  FixedPointReport r;
  r.lambda_min = sys.lambda_min;
  r.c_b = sys.c_b;
  r.l_f = sys.l_f;
  r.f_sup = sys.f_sup;

  r.a3_strict = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::size_t dj = i > j ? i - j : j - i;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        std::size_t dk = i > k ? i - k : k - i;
        if (dj > dk) continue;
        double near = sq.distance(i, j), far = sq.distance(i, k);
        if (dj < dk && near >= far) r.a3_strict = false;
        if (near > far + a3_tol) ++r.a3_violations;
      }
    }

  r.p_star = fixed_point(sys.alpha, sys.b);
  double bnorm = frobenius_norm(sys.b);
  double res = frobenius_norm(sys.alpha * r.p_star - sys.b);
  r.residual_rel = bnorm > 0.0 ? res / bnorm : res;
  require(r.residual_rel <= 1e-9, errc::verification_failure,
          "fixed point residual above tolerance");

  Encoding star;
  star.points = r.p_star;
  Matrix dist = pairwise_distances(star);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dh = sq.distance(i, j);
      if (dh == 0.0)
        r.max_duplicate_deviation = std::max(r.max_duplicate_deviation, dist(i, j));
      else
        r.max_ratio = std::max(r.max_ratio, dist(i, j) / dh);
    }

  r.orbit_radius = 1.05 * max_row_norm(r.p_star);
  r.bound_constant = (r.c_b + 2.0 * r.orbit_radius * r.l_f * static_cast<double>(n) * r.f_sup) /
                     r.lambda_min;
  r.bound_ok = r.max_ratio <= r.bound_constant;

  if (n >= 3) {
    MonotonicityReport mono = detail::monotonicity_from_distances(dist);
    r.violations = mono.violations;
    r.triples_checked = mono.triples_checked;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 1; i >= m && i + m < n; ++m)
        r.max_tie_asymmetry =
            std::max(r.max_tie_asymmetry, std::fabs(dist(i, i - m) - dist(i, i + m)));
  }
  r.monotone_ok = r.violations == 0;
  return r;
}

struct KlHellingerReport {
  double kl = 0.0;
  double hellinger = 0.0;
  bool lower_ok = false;        // kl >= d_H^2 / 2 - 1e-12
  bool upper_applicable = false; // all entries >= floor and kl finite
  bool upper_ok = false;        // kl <= 2 sqrt(2) d_H, evaluated only if applicable
};

// Natural logarithm; 0 ln 0 = 0; infinite KL when nu vanishes where mu does not.
inline double kl_divergence(std::span<const double> mu, std::span<const double> nu) {
  require(mu.size() == nu.size(), errc::dimension_mismatch, "kl: size mismatch");
  KahanSum s;
  for (std::size_t v = 0; v < mu.size(); ++v) {
    require(mu[v] >= 0.0 && nu[v] >= 0.0, errc::invalid_argument, "kl: negative mass");
    if (mu[v] == 0.0) continue;
    if (nu[v] == 0.0) return std::numeric_limits<double>::infinity();
    s.add(mu[v] * std::log(mu[v] / nu[v]));
  }
  return s.value();
}

inline KlHellingerReport kl_hellinger_inequality_check(std::span<const double> mu,
                                                       std::span<const double> nu,
                                                       double epsilon_floor) {
  require(epsilon_floor >= 0.0, errc::invalid_argument, "floor must be non-negative");
  KlHellingerReport r;
  r.hellinger = hellinger_distance(mu, nu);
  r.kl = kl_divergence(mu, nu);
  r.lower_ok = r.kl >= r.hellinger * r.hellinger / 2.0 - 1e-12;
  double lo = std::numeric_limits<double>::infinity();
  for (double x : mu) lo = std::min(lo, x);
  for (double x : nu) lo = std::min(lo, x);
  r.upper_applicable = epsilon_floor > 0.0 && lo >= epsilon_floor && std::isfinite(r.kl);
  if (r.upper_applicable) r.upper_ok = r.kl <= 2.0 * kHellingerMax * r.hellinger;
  return r;
}

} // namespace posenc
