#pragma once

// The encoding families under comparison: MDS-optimal, low-rank MDS,
// sinusoidal, RoPE-derived, ALiBi-derived (distance-only), and random.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "errors.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace posenc {

enum class EncodingKind { mds, low_rank_mds, sinusoidal, rope, random, file };

inline const char* encoding_kind_name(EncodingKind k) {
  switch (k) {
    case EncodingKind::mds: return "mds";
    case EncodingKind::low_rank_mds: return "low_rank_mds";
    case EncodingKind::sinusoidal: return "sinusoidal";
    case EncodingKind::rope: return "rope";
    case EncodingKind::random: return "random";
    case EncodingKind::file: return "file";
  }
  return "unknown";
}

struct Encoding {
  EncodingKind kind = EncodingKind::file;
  Matrix points; // n x d, rows are position vectors

  // kind-specific metadata
  std::size_t rank = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string source;

  std::size_t n() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
};

struct DistanceOnlyEncoding {
  Matrix delta; // n x n symmetric, zero diagonal, non-negative
  double slope = 0.0;

  std::size_t n() const { return delta.rows(); }
};

struct LowRankFactors {
  Matrix a;    // n x r
  Matrix bfac; // d x r, leading columns of the identity
  std::size_t r = 0;

  std::size_t parameter_count() const { return r * (a.rows() + bfac.rows()); }
};

inline double sinusoid_frequency(std::size_t k, std::size_t d) {
  return std::pow(10000.0, -2.0 * static_cast<double>(k) / static_cast<double>(d));
}

inline Encoding sinusoidal_encoding(std::size_t n, std::size_t d) {
  require(n >= 1, errc::invalid_argument, "sinusoidal: n must be positive");
  require(d >= 2 && d % 2 == 0, errc::invalid_argument, "sinusoidal: d must be even");
  Encoding e;
  e.kind = EncodingKind::sinusoidal;
  e.points = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d / 2; ++k) {
      double angle = sinusoid_frequency(k, d) * static_cast<double>(i);
      e.points(i, 2 * k) = std::sin(angle);
      e.points(i, 2 * k + 1) = std::cos(angle);
    }
  return e;
}

// Rows i of the spectral embedding U diag(sqrt(max(lambda, 0))), truncated or
// zero-padded to d columns.
inline Encoding mds_encoding(const EigenDecomposition& eig, std::size_t d) {
  require(d >= 1, errc::invalid_argument, "mds: d must be positive");
  std::size_t n = eig.vectors.rows();
  Encoding e;
  e.kind = EncodingKind::mds;
  e.points = Matrix(n, d);
  std::size_t cols = std::min(d, eig.values.size());
  for (std::size_t k = 0; k < cols; ++k) {
    double scale = std::sqrt(std::max(eig.values[k], 0.0));
    for (std::size_t i = 0; i < n; ++i) e.points(i, k) = scale * eig.vectors(i, k);
  }
  return e;
}

inline std::pair<LowRankFactors, Encoding> low_rank_mds(const EigenDecomposition& eig,
                                                        std::size_t r, std::size_t d) {
  std::size_t n = eig.vectors.rows();
  require(r >= 1 && r <= n, errc::invalid_argument, "low_rank_mds: r must be in [1, n]");
  require(d >= r, errc::invalid_argument, "low_rank_mds: d must be at least r");
  LowRankFactors f;
  f.r = r;
  f.a = Matrix(n, r);
  for (std::size_t k = 0; k < r; ++k) {
    double scale = std::sqrt(std::max(eig.values[k], 0.0));
    for (std::size_t i = 0; i < n; ++i) f.a(i, k) = scale * eig.vectors(i, k);
  }
  f.bfac = Matrix(d, r);
  for (std::size_t k = 0; k < r; ++k) f.bfac(k, k) = 1.0;

  Encoding e;
  e.kind = EncodingKind::low_rank_mds;
  e.rank = r;
  e.points = f.a * transpose(f.bfac);
  return {std::move(f), std::move(e)};
}

// Block rotations of the reference vector (1,0,1,0,...) by angles omega_k * i;
// pairwise distances depend only on i - j.
inline Encoding rope_distances(std::size_t n, std::size_t d) {
  require(n >= 1, errc::invalid_argument, "rope: n must be positive");
  require(d >= 2 && d % 2 == 0, errc::invalid_argument, "rope: d must be even");
  Encoding e;
  e.kind = EncodingKind::rope;
  e.points = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d / 2; ++k) {
      double angle = sinusoid_frequency(k, d) * static_cast<double>(i);
      e.points(i, 2 * k) = std::cos(angle);
      e.points(i, 2 * k + 1) = std::sin(angle);
    }
  return e;
}

inline DistanceOnlyEncoding alibi_distances(std::size_t n, double slope) {
  require(n >= 2, errc::invalid_argument, "alibi: n must be at least 2");
  require(slope > 0.0, errc::invalid_argument, "alibi: slope must be positive");
  DistanceOnlyEncoding e;
  e.slope = slope;
  e.delta = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      e.delta(i, j) = slope * std::fabs(static_cast<double>(i) - static_cast<double>(j));
  return e;
}

// Least-squares scale of m|i-j| against the Hellinger distances:
// m = sum |i-j| d_H / sum (i-j)^2 over i < j.
inline double alibi_auto_slope(const SquaredDistanceMatrix& sq) {
  std::size_t n = sq.n();
  require(n >= 2, errc::invalid_argument, "alibi: n must be at least 2");
  KahanSum num, den;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double gap = static_cast<double>(j - i);
      num.add(gap * sq.distance(i, j));
      den.add(gap * gap);
    }
  double m = num.value() / den.value();
  require(m > 0.0, errc::degenerate_metric, "alibi auto slope degenerate (all distances zero)");
  return m;
}

inline DistanceOnlyEncoding alibi_distances(const SquaredDistanceMatrix& sq) {
  return alibi_distances(sq.n(), alibi_auto_slope(sq));
}

// i.i.d. Gaussian entries drawn row-major; sigma is a standard deviation.
inline Encoding random_encoding(std::size_t n, std::size_t d, double sigma, std::uint64_t seed) {
  require(n >= 1 && d >= 1, errc::invalid_argument, "random: n, d must be positive");
  require(sigma > 0.0, errc::invalid_argument, "random: sigma must be positive");
  Rng rng(seed);
  Encoding e;
  e.kind = EncodingKind::random;
  e.sigma = sigma;
  e.seed = seed;
  e.points = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) e.points(i, k) = rng.normal(sigma);
  return e;
}

inline Encoding load_encoding(const std::filesystem::path& path) {
  Encoding e;
  e.kind = EncodingKind::file;
  e.source = path.string();
  e.points = load_matrix(path);
  return e;
}

inline void save_encoding(const Encoding& e, const std::filesystem::path& path) {
  save_matrix(e.points, path);
}

} // namespace posenc
