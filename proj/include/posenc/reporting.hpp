#pragma once

// Full diagnostic report over a corpus: stress ranking of the standard
// encodings, rank trade-off table, and spectrum summary, rendered as an
// aligned text table or as CSV with identical values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "diagnostics.hpp"
#include "encodings.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "matrix.hpp"

namespace posenc {

struct ReportOptions {
  std::size_t dim = 16;
  std::size_t tradeoff_dim = 128;
  std::vector<std::size_t> ranks = {1, 2, 3, 7, 31};
  double sigma = 1.0;
  std::uint64_t seed = 1;
};

struct EncodingRow {
  std::string name;
  double stress = 0.0;
  double violation_rate = 0.0;
  double min_sep = 0.0;
  double correlation = 0.0; // NaN when the encoding distances are constant
};

struct Report {
  std::size_t n = 0, vocab = 0, dim = 0, tradeoff_dim = 0;
  std::size_t rank_b = 0;
  double cumulative_variance_at_dim = 0.0;
  std::vector<EncodingRow> rows; // sorted by stress ascending
  std::vector<TradeoffRow> tradeoff;
};

// Values printed with %.12g in both renderings so table and CSV agree.
inline std::string format_g12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace detail {

inline EncodingRow make_row(const std::string& name, const Matrix& dist,
                            const SquaredDistanceMatrix& sq) {
  EncodingRow row;
  row.name = name;
  row.stress = stress_from_distances(dist, sq).stress;
  row.violation_rate =
      dist.rows() >= 3 ? monotonicity_from_distances(dist).violation_rate : 0.0;
  row.min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dist.rows(); ++i)
    for (std::size_t j = i + 1; j < dist.rows(); ++j) row.min_sep = std::min(row.min_sep, dist(i, j));
  if (!std::isfinite(row.min_sep)) row.min_sep = 0.0;
  try {
    row.correlation = correlation_from_distances(dist, sq);
  } catch (const Error& e) {
    if (e.code() != errc::zero_variance) throw;
    row.correlation = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

} // namespace detail

inline Report build_report(const PositionalMarginals& marginals, const ReportOptions& opt) {
  require(opt.dim >= 2 && opt.dim % 2 == 0, errc::invalid_argument,
          "report: dim must be even and at least 2");
  std::size_t n = marginals.n();
  SquaredDistanceMatrix sq = squared_distance_matrix(marginals);
  GramMatrix gram = double_center(sq);
  EigenDecomposition eig = eigendecompose(gram);

  Report rep;
  rep.n = n;
  rep.vocab = marginals.vocab();
  rep.dim = opt.dim;
  rep.tradeoff_dim = opt.tradeoff_dim;
  rep.rank_b = effective_rank(eig);
  rep.cumulative_variance_at_dim = cumulative_variance(eig, std::min(opt.dim, n));

  rep.rows.push_back(detail::make_row("mds", pairwise_distances(mds_encoding(eig, opt.dim)), sq));
  rep.rows.push_back(
      detail::make_row("sinusoidal", pairwise_distances(sinusoidal_encoding(n, opt.dim)), sq));
  rep.rows.push_back(detail::make_row("rope", pairwise_distances(rope_distances(n, opt.dim)), sq));
  rep.rows.push_back(detail::make_row("alibi", alibi_distances(sq).delta, sq));
  rep.rows.push_back(detail::make_row(
      "random", pairwise_distances(random_encoding(n, opt.dim, opt.sigma, opt.seed)), sq));
  std::stable_sort(rep.rows.begin(), rep.rows.end(),
                   [](const EncodingRow& a, const EncodingRow& b) { return a.stress < b.stress; });

  std::vector<std::size_t> ranks;
  for (std::size_t r : opt.ranks)
    if (r >= 1 && r <= n && r <= opt.tradeoff_dim) ranks.push_back(r);
  if (!ranks.empty()) rep.tradeoff = rank_tradeoff_table(eig, sq, opt.tradeoff_dim, ranks);
  return rep;
}

inline std::string render_table(const Report& rep) {
  std::string out;
  auto line = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  line("corpus: n=" + std::to_string(rep.n) + " vocab=" + std::to_string(rep.vocab));
  line("rank(B): " + std::to_string(rep.rank_b));
  line("cumulative variance at d=" + std::to_string(std::min(rep.dim, rep.n)) + ": " +
       format_g12(rep.cumulative_variance_at_dim));
  line("");
  line("encodings at d=" + std::to_string(rep.dim) + " (ascending stress)");

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"encoding", "stress", "violation_rate", "min_separation", "correlation"});
  for (const EncodingRow& r : rep.rows)
    cells.push_back({r.name, format_g12(r.stress), format_g12(r.violation_rate),
                     format_g12(r.min_sep), format_g12(r.correlation)});
  if (!rep.tradeoff.empty()) {
    cells.push_back({});
    cells.push_back({"rank tradeoff at d=" + std::to_string(rep.tradeoff_dim)});
    cells.push_back({"r", "stress", "parameters", "saving_vs_free"});
    for (const TradeoffRow& t : rep.tradeoff)
      cells.push_back({std::to_string(t.r), format_g12(t.stress), std::to_string(t.parameters),
                       format_g12(t.saving_vs_free)});
  }
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (row.size() < 2) continue;
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& row : cells) {
    if (row.empty()) {
      line("");
      continue;
    }
    if (row.size() == 1) {
      line(row[0]);
      continue;
    }
    std::string text;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      cell.resize(width[c], ' ');
      if (c) text += "  ";
      text += cell;
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    line(text);
  }
  return out;
}

inline std::string render_csv(const Report& rep) {
  std::string out = "metric,encoding,value\n";
  auto row = [&out](const std::string& metric, const std::string& enc, const std::string& value) {
    out += metric + "," + enc + "," + value + "\n";
  };
  row("n", "", std::to_string(rep.n));
  row("vocab", "", std::to_string(rep.vocab));
  row("rank_b", "", std::to_string(rep.rank_b));
  row("cumulative_variance", "d=" + std::to_string(std::min(rep.dim, rep.n)),
      format_g12(rep.cumulative_variance_at_dim));
  for (const EncodingRow& r : rep.rows) {
    row("stress", r.name, format_g12(r.stress));
    row("violation_rate", r.name, format_g12(r.violation_rate));
    row("min_separation", r.name, format_g12(r.min_sep));
    row("correlation", r.name, format_g12(r.correlation));
  }
  for (const TradeoffRow& t : rep.tradeoff) {
    std::string enc = "r=" + std::to_string(t.r);
    row("tradeoff_stress", enc, format_g12(t.stress));
    row("tradeoff_parameters", enc, std::to_string(t.parameters));
    row("tradeoff_saving", enc, format_g12(t.saving_vs_free));
  }
  return out;
}

} // namespace posenc
