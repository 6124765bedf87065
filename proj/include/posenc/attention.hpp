#pragma once

// Single-head attention at desk scale: permutation-equivariance checks and
// the mean-embedding Lipschitz bound.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "corpus.hpp"
#include "encodings.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace posenc {

struct EmbeddingTable {
  Matrix e; // vocab x d

  std::size_t vocab() const { return e.rows(); }
  std::size_t dim() const { return e.cols(); }
  double infinity_norm() const { return max_row_norm(e); } // max row 2-norm
};

inline EmbeddingTable random_embedding_table(std::size_t vocab, std::size_t d, double sigma,
                                             std::uint64_t seed) {
  require(vocab >= 1 && d >= 1, errc::invalid_argument, "embedding: vocab, d must be positive");
  Rng rng(seed);
  EmbeddingTable t;
  t.e = Matrix(vocab, d);
  for (std::size_t v = 0; v < vocab; ++v)
    for (std::size_t k = 0; k < d; ++k) t.e(v, k) = rng.normal(sigma);
  return t;
}

struct AttentionLayer {
  Matrix score; // M = Wq Wk^T, d x d
  Matrix value; // W_V, d x d_v
  std::size_t d_k = 0; // key dimension for the 1/sqrt(d_k) scaling

  void validate(std::size_t d) const {
    require(score.rows() == d && score.cols() == d, errc::dimension_mismatch,
            "attention: score matrix must be d x d");
    require(value.rows() == d, errc::dimension_mismatch, "attention: value rows must match d");
    require(d_k >= 1, errc::invalid_argument, "attention: d_k must be at least 1");
    require(score.all_finite() && value.all_finite(), errc::non_finite,
            "attention: non-finite layer weights");
  }
};

inline AttentionLayer random_attention_layer(std::size_t d, std::size_t d_v, double sigma,
                                             std::uint64_t seed) {
  Rng rng(seed);
  AttentionLayer l;
  l.score = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) l.score(i, j) = rng.normal(sigma);
  l.value = Matrix(d, d_v);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d_v; ++j) l.value(i, j) = rng.normal(sigma);
  l.d_k = d;
  return l;
}

// Scores L = (X+P) M (X+P)^T / sqrt(d_k), row-wise softmax, output A (X+P) W_V.
inline Matrix attention_forward(const Matrix& hidden, const AttentionLayer& layer,
                                const Matrix* pe = nullptr) {
  std::size_t n = hidden.rows(), d = hidden.cols();
  layer.validate(d);
  Matrix x = hidden;
  if (pe) {
    require(pe->rows() == n && pe->cols() == d, errc::dimension_mismatch,
            "attention: positional encoding shape mismatch");
    x = hidden + *pe;
  }
  Matrix scores = x * layer.score * transpose(x);
  double inv_scale = 1.0 / std::sqrt(static_cast<double>(layer.d_k));
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double hi = scores(i, 0) * inv_scale;
    for (std::size_t j = 1; j < n; ++j) hi = std::max(hi, scores(i, j) * inv_scale);
    KahanSum z;
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = std::exp(scores(i, j) * inv_scale - hi);
      z.add(a(i, j));
    }
    for (std::size_t j = 0; j < n; ++j) a(i, j) /= z.value();
  }
  return a * (x * layer.value);
}

inline Matrix embed_tokens(std::span<const std::uint32_t> tokens, const EmbeddingTable& table) {
  Matrix x(tokens.size(), table.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    require(tokens[i] < table.vocab(), errc::invalid_argument, "token id outside embedding table");
    for (std::size_t k = 0; k < table.dim(); ++k) x(i, k) = table.e(tokens[i], k);
  }
  return x;
}

inline Matrix attention_forward(std::span<const std::uint32_t> tokens, const EmbeddingTable& table,
                                const AttentionLayer& layer, const Encoding* pe = nullptr) {
  require(!tokens.empty(), errc::empty_input, "attention: empty token sequence");
  Matrix x = embed_tokens(tokens, table);
  return attention_forward(x, layer, pe ? &pe->points : nullptr);
}

struct EquivarianceReport {
  double max_deviation_without_pe = 0.0;
  double max_deviation_with_pe = 0.0;
};

inline void check_permutation(std::span<const std::size_t> sigma, std::size_t n) {
  require(sigma.size() == n, errc::invalid_argument, "permutation length mismatch");
  std::vector<bool> seen(n, false);
  for (std::size_t v : sigma) {
    require(v < n && !seen[v], errc::invalid_argument, "not a permutation of [0, n)");
    seen[v] = true;
  }
}

// Scatter convention: the permuted sequence places token i at slot sigma(i),
// so row sigma(i) of the permuted output is compared with row i of the
// original.
inline EquivarianceReport equivariance_check(std::span<const std::uint32_t> tokens,
                                             std::span<const std::size_t> sigma,
                                             const EmbeddingTable& table,
                                             const AttentionLayer& layer, const Encoding& pe) {
  std::size_t n = tokens.size();
  check_permutation(sigma, n);
  require(pe.n() == n && pe.dim() == table.dim(), errc::dimension_mismatch,
          "equivariance: encoding shape mismatch");
  std::vector<std::uint32_t> permuted(n);
  for (std::size_t i = 0; i < n; ++i) permuted[sigma[i]] = tokens[i];

  EquivarianceReport r;
  for (int with_pe = 0; with_pe < 2; ++with_pe) {
    const Encoding* p = with_pe ? &pe : nullptr;
    Matrix orig = attention_forward(tokens, table, layer, p);
    Matrix perm = attention_forward(std::span<const std::uint32_t>(permuted), table, layer, p);
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      KahanSum s;
      for (std::size_t k = 0; k < orig.cols(); ++k) {
        double diff = perm(sigma[i], k) - orig(i, k);
        s.add(diff * diff);
      }
      dev = std::max(dev, std::sqrt(s.value()));
    }
    (with_pe ? r.max_deviation_with_pe : r.max_deviation_without_pe) = dev;
  }
  return r;
}

struct LipschitzReport {
  double max_ratio = 0.0;
  double bound = 0.0; // L_e = ||E||_inf * sqrt(2 vocab)
  std::size_t pairs_checked = 0;
};

// Mean embeddings e_bar(i) = sum_v mu_i(v) E(v); ratios against d_H.
inline LipschitzReport mean_embedding_lipschitz_check(const EmbeddingTable& table,
                                                      const PositionalMarginals& marginals) {
  marginals.validate();
  require(table.vocab() == marginals.vocab(), errc::dimension_mismatch,
          "lipschitz: embedding vocab mismatch");
  require(table.e.all_finite(), errc::non_finite, "lipschitz: non-finite embedding");
  std::size_t n = marginals.n();
  Matrix ebar = marginals.mu * table.e;

  LipschitzReport r;
  r.bound = table.infinity_norm() * std::sqrt(2.0 * static_cast<double>(table.vocab()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dh = hellinger_distance(marginals.mu.row(i), marginals.mu.row(j));
      if (dh == 0.0) continue;
      r.max_ratio = std::max(r.max_ratio, row_distance(ebar, i, j) / dh);
      ++r.pairs_checked;
    }
  require(r.pairs_checked > 0, errc::all_degenerate,
          "lipschitz: every pair has zero Hellinger distance");
  return r;
}

} // namespace posenc
