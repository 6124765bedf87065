#pragma once

// Token corpora: synthetic generation, text I/O, positional marginals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace posenc {

struct Corpus {
  std::size_t n = 0;       // sequence length
  std::uint32_t vocab = 0; // token ids live in [0, vocab)
  std::vector<std::uint32_t> tokens; // row-major, count() * n

  std::size_t count() const { return n == 0 ? 0 : tokens.size() / n; }

  std::uint32_t at(std::size_t seq, std::size_t pos) const { return tokens[seq * n + pos]; }

  void validate() const {
    require(n >= 1, errc::empty_input, "corpus has zero sequence length");
    require(!tokens.empty(), errc::empty_input, "corpus has no sequences");
    require(tokens.size() % n == 0, errc::ragged_rows, "token buffer not a multiple of n");
    require(vocab >= 1, errc::invalid_argument, "vocab must be positive");
    for (std::uint32_t t : tokens)
      require(t < vocab, errc::parse_failure,
              "token id " + std::to_string(t) + " outside vocab " + std::to_string(vocab));
  }
};

struct Regime {
  std::size_t pos_begin = 0, pos_end = 0;   // positions [pos_begin, pos_end)
  std::uint32_t tok_begin = 0, tok_end = 0; // preferred tokens [tok_begin, tok_end)
  double concentration = 0.0;               // probability of drawing from the preferred range
};

struct SyntheticSpec {
  std::size_t n = 32;
  std::uint32_t vocab = 200;
  std::size_t count = 5000;
  std::uint64_t seed = 1;
  std::vector<Regime> regimes;

  // Three equal-thirds position blocks with disjoint token ranges of size
  // floor(vocab / 3), all at the same concentration.
  static SyntheticSpec three_regimes(std::size_t n = 32, std::uint32_t vocab = 200,
                                     std::size_t count = 5000, std::uint64_t seed = 1,
                                     double concentration = 0.9) {
    SyntheticSpec s;
    s.n = n;
    s.vocab = vocab;
    s.count = count;
    s.seed = seed;
    std::uint32_t block = vocab / 3;
    for (std::size_t r = 0; r < 3; ++r) {
      Regime g;
      g.pos_begin = (n * r + 2) / 3;
      g.pos_end = (n * (r + 1) + 2) / 3;
      g.tok_begin = static_cast<std::uint32_t>(r) * block;
      g.tok_end = g.tok_begin + block;
      g.concentration = concentration;
      s.regimes.push_back(g);
    }
    return s;
  }

  void validate() const {
    require(n >= 1, errc::invalid_argument, "n must be positive");
    require(vocab >= 2, errc::invalid_argument, "vocab must be at least 2");
    require(count >= 1, errc::invalid_argument, "count must be positive");
    require(!regimes.empty(), errc::invalid_argument, "at least one regime required");
    std::vector<bool> covered(n, false);
    for (const auto& g : regimes) {
      require(g.pos_begin < g.pos_end && g.pos_end <= n, errc::invalid_argument,
              "regime position range out of bounds");
      require(g.tok_begin < g.tok_end && g.tok_end <= vocab, errc::invalid_argument,
              "regime token range out of bounds");
      require(g.concentration >= 0.0 && g.concentration <= 1.0, errc::invalid_argument,
              "concentration outside [0, 1]");
      for (std::size_t i = g.pos_begin; i < g.pos_end; ++i) {
        require(!covered[i], errc::invalid_argument, "regimes overlap at position " + std::to_string(i));
        covered[i] = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      require(covered[i], errc::invalid_argument, "position " + std::to_string(i) + " not covered");
  }
};

// Draw order, fixed for reproducibility: sequences outermost, positions inner;
// per token one uniform for the mixture choice, then one bounded draw.
inline Corpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<const Regime*> of_pos(spec.n, nullptr);
  for (const auto& g : spec.regimes)
    for (std::size_t i = g.pos_begin; i < g.pos_end; ++i) of_pos[i] = &g;

  Rng rng(spec.seed);
  Corpus c;
  c.n = spec.n;
  c.vocab = spec.vocab;
  c.tokens.resize(spec.count * spec.n);
  for (std::size_t s = 0; s < spec.count; ++s)
    for (std::size_t i = 0; i < spec.n; ++i) {
      const Regime& g = *of_pos[i];
      double u = rng.uniform();
      std::uint32_t tok;
      if (u < g.concentration)
        tok = g.tok_begin + static_cast<std::uint32_t>(rng.below(g.tok_end - g.tok_begin));
      else
        tok = static_cast<std::uint32_t>(rng.below(spec.vocab));
      c.tokens[s * spec.n + i] = tok;
    }
  return c;
}

struct PositionalMarginals {
  Matrix mu; // n x vocab, row-stochastic
  std::vector<std::size_t> support_counts; // raw kept-token counts per position

  std::size_t n() const { return mu.rows(); }
  std::size_t vocab() const { return mu.cols(); }

  void validate(double tol = 1e-12) const {
    require(mu.rows() >= 1 && mu.cols() >= 1, errc::empty_input, "empty marginals");
    require(mu.all_finite(), errc::non_finite, "non-finite marginal entry");
    for (std::size_t i = 0; i < mu.rows(); ++i) {
      KahanSum s;
      for (std::size_t v = 0; v < mu.cols(); ++v) {
        require(mu(i, v) >= 0.0, errc::invalid_argument,
                "negative marginal at position " + std::to_string(i));
        s.add(mu(i, v));
      }
      require(std::fabs(s.value() - 1.0) <= tol, errc::invalid_argument,
              "marginal row " + std::to_string(i) + " does not sum to 1");
    }
  }
};

// Per-position histograms over tokens not in `exclude`, renormalized.
inline PositionalMarginals estimate_marginals(const Corpus& c,
                                              const std::vector<std::uint32_t>& exclude = {}) {
  c.validate();
  std::vector<bool> keep(c.vocab, true);
  for (std::uint32_t t : exclude) {
    require(t < c.vocab, errc::invalid_argument,
            "excluded token " + std::to_string(t) + " outside vocab");
    keep[t] = false;
  }

  Matrix counts(c.n, c.vocab);
  for (std::size_t s = 0; s < c.count(); ++s)
    for (std::size_t i = 0; i < c.n; ++i) {
      std::uint32_t t = c.at(s, i);
      if (keep[t]) counts(i, t) += 1.0;
    }

  PositionalMarginals m;
  m.mu = Matrix(c.n, c.vocab);
  m.support_counts.resize(c.n);
  for (std::size_t i = 0; i < c.n; ++i) {
    KahanSum total;
    for (std::size_t v = 0; v < c.vocab; ++v) total.add(counts(i, v));
    require(total.value() > 0.0, errc::degenerate_position,
            "position " + std::to_string(i) + " has no mass after exclusions");
    m.support_counts[i] = static_cast<std::size_t>(total.value());
    for (std::size_t v = 0; v < c.vocab; ++v) m.mu(i, v) = counts(i, v) / total.value();
  }
  m.validate();
  return m;
}

// Two-token geodesic: mu_i = (cos^2, sin^2) of theta0 + delta*i, all angles
// inside (0, pi/2). Hellinger distances are 2 sin(delta |i-j| / 2), strictly
// increasing in |i-j|.
inline PositionalMarginals line_marginals(std::size_t n, double theta0, double delta) {
  require(n >= 1, errc::invalid_argument, "n must be positive");
  require(delta > 0.0, errc::invalid_argument, "delta must be positive");
  require(theta0 > 0.0 && theta0 + delta * static_cast<double>(n - 1) < std::numbers::pi / 2,
          errc::invalid_argument, "angles must stay inside (0, pi/2)");
  PositionalMarginals m;
  m.mu = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    double th = theta0 + delta * static_cast<double>(i);
    double c = std::cos(th), s = std::sin(th);
    m.mu(i, 0) = c * c;
    m.mu(i, 1) = s * s;
  }
  m.validate();
  return m;
}

// Deterministic two-token staircase corpus whose estimated marginals track
// line_marginals: position i carries token 1 in exactly round(count * sin^2)
// sequences. Requires counts strictly increasing across positions so the
// sampled angles stay strictly ordered.
inline Corpus line_corpus(std::size_t n, std::size_t count, double theta0, double delta) {
  PositionalMarginals target = line_marginals(n, theta0, delta);
  std::vector<std::size_t> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = static_cast<std::size_t>(std::llround(static_cast<double>(count) * target.mu(i, 1)));
    require(k[i] > 0 && k[i] < count, errc::invalid_argument,
            "count too small: degenerate marginal at position " + std::to_string(i));
    if (i > 0)
      require(k[i] > k[i - 1], errc::invalid_argument,
              "count too small to keep the staircase strictly increasing");
  }
  Corpus c;
  c.n = n;
  c.vocab = 2;
  c.tokens.resize(count * n);
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t i = 0; i < n; ++i) c.tokens[s * n + i] = s < k[i] ? 1u : 0u;
  return c;
}

enum class CorpusFormat { auto_detect, token_id_lines, csv };

inline void save_corpus(const Corpus& c, const std::filesystem::path& path,
                        CorpusFormat format = CorpusFormat::token_id_lines) {
  c.validate();
  std::ofstream out(path);
  require(out.good(), errc::invalid_argument, "cannot open for writing: " + path.string());
  char sep = format == CorpusFormat::csv ? ',' : ' ';
  out << "# n=" << c.n << " v=" << c.vocab << '\n';
  for (std::size_t s = 0; s < c.count(); ++s) {
    for (std::size_t i = 0; i < c.n; ++i) {
      if (i) out << sep;
      out << c.at(s, i);
    }
    out << '\n';
  }
  require(out.good(), errc::invalid_argument, "write failed: " + path.string());
}

// Both formats share the row semantics: one sequence per line, ids separated
// by spaces (token_id_lines) or commas (csv), optional "# n=<n> v=<V>" header.
inline Corpus load_corpus(const std::filesystem::path& path,
                          CorpusFormat format = CorpusFormat::auto_detect) {
  std::ifstream in(path);
  require(in.good(), errc::parse_failure, "cannot open: " + path.string());
  const std::string name = path.string();

  Corpus c;
  bool have_header = false;
  std::size_t header_n = 0;
  std::uint32_t header_v = 0;
  std::string line;
  while (std::getline(in, line)) {
    auto at = line.find_first_not_of(" \t\r");
    if (at == std::string::npos) continue;
    if (line[at] == '#') {
      std::size_t np = line.find("n=");
      std::size_t vp = line.find("v=");
      if (np != std::string::npos && vp != std::string::npos) {
        header_n = std::strtoull(line.c_str() + np + 2, nullptr, 10);
        header_v = static_cast<std::uint32_t>(std::strtoul(line.c_str() + vp + 2, nullptr, 10));
        have_header = true;
      }
      continue;
    }
    if (format == CorpusFormat::auto_detect)
      format = line.find(',') != std::string::npos ? CorpusFormat::csv
                                                   : CorpusFormat::token_id_lines;
    if (format == CorpusFormat::csv) {
      require(line.find(",,") == std::string::npos && line[at] != ',' &&
                  line[line.find_last_not_of(" \t\r")] != ',',
              errc::parse_failure, "empty csv field in " + name);
      std::replace(line.begin(), line.end(), ',', ' ');
    }
    std::istringstream row(line);
    std::size_t len = 0;
    long long t;
    while (row >> t) {
      require(t >= 0, errc::parse_failure, "negative token id in " + name);
      c.tokens.push_back(static_cast<std::uint32_t>(t));
      ++len;
    }
    row.clear();
    std::string rest;
    if (row >> rest) fail(errc::parse_failure, "non-numeric token '" + rest + "' in " + name);
    if (c.n == 0)
      c.n = len;
    else
      require(len == c.n, errc::ragged_rows, "ragged row in " + name);
  }
  require(!c.tokens.empty(), errc::empty_input, "no sequences in " + name);
  if (have_header) {
    require(header_n == c.n, errc::parse_failure, "header n mismatch in " + name);
    c.vocab = header_v;
  } else {
    c.vocab = *std::max_element(c.tokens.begin(), c.tokens.end()) + 1;
  }
  c.validate();
  return c;
}

} // namespace posenc
