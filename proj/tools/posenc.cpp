// posenc: positional-encoding analysis toolkit.
//
// Subcommands: synth, estimate, encode, stress, compare, monotonicity, ntk,
// report. Exit codes: 0 ok, 2 usage/config, 3 data/parse, 4 numeric or
// verification failure.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <posenc/posenc.hpp>

namespace {

using namespace posenc;

struct GlobalOpts {
  std::uint64_t seed = 1;
  bool csv = false;
  double tol = 1e-9;
};

// One value stream rendered either as an aligned key/value listing or as
// "metric,encoding,value" CSV. Both use %.12g so the numbers agree digit for
// digit across the two modes.
struct Emitter {
  bool csv = false;
  explicit Emitter(bool use_csv) : csv(use_csv) {
    if (csv) std::fputs("metric,encoding,value\n", stdout);
  }
  void value(const std::string& metric, const std::string& enc, const std::string& v) const {
    if (csv)
      std::printf("%s,%s,%s\n", metric.c_str(), enc.c_str(), v.c_str());
    else if (enc.empty())
      std::printf("%s %s\n", metric.c_str(), v.c_str());
    else
      std::printf("%s[%s] %s\n", metric.c_str(), enc.c_str(), v.c_str());
  }
  void num(const std::string& metric, const std::string& enc, double v) const {
    value(metric, enc, format_g12(v));
  }
  void count(const std::string& metric, const std::string& enc, std::size_t v) const {
    value(metric, enc, std::to_string(v));
  }
};

struct SourceOpts {
  std::string corpus_path;
  std::string marginals_path;
  bool line = false;
  std::size_t n = 16;
  double theta0 = 0.3;
  double delta = 0.04;
  std::vector<std::uint32_t> exclude;

  void attach(CLI::App* sub, bool with_line = true) {
    sub->add_option("--corpus", corpus_path, "corpus file (token-id lines or CSV)");
    sub->add_option("--marginals", marginals_path, "positional marginals as a matrix file");
    if (with_line) {
      sub->add_flag("--line", line, "use exact two-token line marginals");
      sub->add_option("--n", n, "positions for --line")->capture_default_str();
      sub->add_option("--theta0", theta0, "line start angle")->capture_default_str();
      sub->add_option("--delta", delta, "line angle step")->capture_default_str();
    }
    sub->add_option("--exclude", exclude, "token ids dropped before estimation");
  }

  PositionalMarginals resolve() const {
    int given = (corpus_path.empty() ? 0 : 1) + (marginals_path.empty() ? 0 : 1) + (line ? 1 : 0);
    require(given == 1, errc::invalid_argument,
            "exactly one of --corpus, --marginals, --line is required");
    if (!corpus_path.empty()) return estimate_marginals(load_corpus(corpus_path), exclude);
    if (!marginals_path.empty()) {
      PositionalMarginals m;
      m.mu = load_matrix(marginals_path);
      m.validate(1e-9);
      return m;
    }
    return line_marginals(n, theta0, delta);
  }
};

struct EncodingOpts {
  std::string file;
  std::string kind;
  std::size_t n = 0; // 0: take n from the metric source
  std::size_t dim = 16;
  std::size_t rank = 0;
  double sigma = 1.0;
  double slope = 0.0; // 0: fit from the metric

  void attach(CLI::App* sub) {
    sub->add_option("--encoding", file, "point matrix file produced by encode or external tools");
    sub->add_option("--kind", kind, "built-in encoding")
        ->check(CLI::IsMember({"mds", "lowrank", "sinusoidal", "rope", "alibi", "random"}));
    sub->add_option("--dim", dim, "embedding dimension")->capture_default_str();
    sub->add_option("--rank", rank, "rank for --kind lowrank");
    sub->add_option("--sigma", sigma, "std dev for --kind random")->capture_default_str();
    sub->add_option("--slope", slope, "ALiBi slope (default: fitted)");
  }

  // Returns points (first) or a distance-only encoding (second, for alibi).
  std::pair<std::optional<Encoding>, std::optional<DistanceOnlyEncoding>> resolve(
      const std::optional<PositionalMarginals>& marginals, std::uint64_t seed) const {
    require(file.empty() != kind.empty(), errc::invalid_argument,
            "exactly one of --encoding, --kind is required");
    if (!file.empty()) return {load_encoding(file), std::nullopt};

    auto metric = [&]() -> SquaredDistanceMatrix {
      require(marginals.has_value(), errc::invalid_argument,
              "--kind " + kind + " needs --corpus, --marginals, or --line");
      return squared_distance_matrix(*marginals);
    };
    std::size_t rows = n;
    if (rows == 0) {
      require(marginals.has_value(), errc::invalid_argument,
              "--kind " + kind + " needs --n or a corpus source");
      rows = marginals->n();
    }
    if (kind == "mds") return {mds_encoding(eigendecompose(double_center(metric())), dim), {}};
    if (kind == "lowrank") {
      require(rank >= 1, errc::invalid_argument, "--kind lowrank needs --rank");
      return {low_rank_mds(eigendecompose(double_center(metric())), rank, dim).second, {}};
    }
    if (kind == "sinusoidal") return {sinusoidal_encoding(rows, dim), {}};
    if (kind == "rope") return {rope_distances(rows, dim), {}};
    if (kind == "random") return {random_encoding(rows, dim, sigma, seed), {}};
    if (slope > 0.0) return {{}, alibi_distances(rows, slope)};
    return {{}, alibi_distances(metric())};
  }
};

struct SynthOpts {
  std::size_t n = 32;
  std::uint32_t vocab = 200;
  std::size_t count = 5000;
  double concentration = 0.9;
  std::string out;
  std::string format = "lines";
  bool line = false;
  double theta0 = 0.3, delta = 0.04;
};

void register_synth(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("synth", "generate a synthetic corpus");
  sub->fallthrough();
  auto o = std::make_shared<SynthOpts>();
  sub->add_option("--n", o->n, "sequence length")->capture_default_str();
  sub->add_option("--v,--vocab", o->vocab, "vocabulary size")->capture_default_str();
  sub->add_option("--count", o->count, "number of sequences")->capture_default_str();
  sub->add_option("--concentration", o->concentration, "regime concentration")
      ->capture_default_str();
  sub->add_option("-o,--output", o->out, "output corpus file")->required();
  sub->add_option("--format", o->format, "output format")
      ->check(CLI::IsMember({"lines", "csv"}))
      ->capture_default_str();
  sub->add_flag("--line", o->line, "two-token staircase corpus on a Hellinger line");
  sub->add_option("--theta0", o->theta0, "line start angle")->capture_default_str();
  sub->add_option("--delta", o->delta, "line angle step")->capture_default_str();

  sub->callback([o, &g] {
    Corpus c = o->line
                   ? line_corpus(o->n, o->count, o->theta0, o->delta)
                   : generate_synthetic(
                         SyntheticSpec::three_regimes(o->n, o->vocab, o->count, g.seed,
                                                      o->concentration));
    save_corpus(c, o->out,
                o->format == "csv" ? CorpusFormat::csv : CorpusFormat::token_id_lines);
    Emitter e(g.csv);
    e.count("n", "", c.n);
    e.count("vocab", "", c.vocab);
    e.count("count", "", c.count());
  });
}

void register_estimate(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("estimate", "estimate positional marginals from a corpus");
  sub->fallthrough();
  auto src = std::make_shared<SourceOpts>();
  auto out = std::make_shared<std::string>();
  sub->add_option("corpus", src->corpus_path, "corpus file")->required();
  sub->add_option("--exclude", src->exclude, "token ids dropped before estimation");
  sub->add_option("-o,--output", *out, "output marginals matrix file")->required();
  sub->callback([src, out, &g] {
    PositionalMarginals m = src->resolve();
    save_matrix(m.mu, *out);
    Emitter e(g.csv);
    e.count("n", "", m.n());
    e.count("vocab", "", m.vocab());
  });
}

void register_encode(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("encode", "construct an encoding and write it to a file");
  sub->fallthrough();
  auto src = std::make_shared<SourceOpts>();
  auto enc = std::make_shared<EncodingOpts>();
  auto out = std::make_shared<std::string>();
  src->attach(sub);
  enc->attach(sub);
  sub->add_option("--rows", enc->n, "positions when no corpus source is given");
  sub->add_option("-o,--output", *out, "output matrix file")->required();
  sub->callback([src, enc, out, &g] {
    require(!enc->kind.empty(), errc::invalid_argument, "encode requires --kind");
    std::optional<PositionalMarginals> m;
    if (!src->corpus_path.empty() || !src->marginals_path.empty() || src->line) {
      PositionalMarginals got = src->resolve();
      enc->n = enc->n ? enc->n : got.n();
      m = std::move(got);
    }
    auto [points, distances] = enc->resolve(m, g.seed);
    Emitter e(g.csv);
    if (points) {
      save_encoding(*points, *out);
      e.count("n", enc->kind, points->n());
      e.count("dim", enc->kind, points->dim());
      if (enc->kind == "lowrank")
        e.count("parameters", enc->kind, enc->rank * (points->n() + points->dim()));
    } else {
      save_matrix(distances->delta, *out);
      e.count("n", enc->kind, distances->n());
      e.num("slope", enc->kind, distances->slope);
    }
  });
}

void run_metric_audit(const GlobalOpts& g, const SourceOpts& src, const EncodingOpts& enc,
                      const std::string& projection, bool with_stress) {
  std::optional<PositionalMarginals> m;
  if (!src.corpus_path.empty() || !src.marginals_path.empty() || src.line) m = src.resolve();
  auto [points, distances] = enc.resolve(m, g.seed);
  std::string name = enc.kind.empty() ? "file" : enc.kind;

  Emitter e(g.csv);
  if (with_stress) {
    require(m.has_value(), errc::invalid_argument, "stress needs --corpus, --marginals, or --line");
    SquaredDistanceMatrix sq = squared_distance_matrix(*m);
    StressReport sr;
    if (!projection.empty()) {
      require(points.has_value(), errc::invalid_argument,
              "--projection applies to point encodings only");
      sr = projected_stress(*points, load_matrix(projection), sq);
    } else {
      sr = points ? stress(*points, sq) : stress(*distances, sq);
    }
    e.num("stress", name, sr.stress);
    e.num("stress_numerator", name, sr.numerator);
    e.num("stress_denominator", name, sr.denominator);
    e.count("pairs", name, sr.pair_count);
    double corr = points ? hellinger_correlation(*points, sq) : hellinger_correlation(*distances, sq);
    e.num("correlation", name, corr);
  }
  MonotonicityReport mr =
      points ? monotonicity_violation_rate(*points) : monotonicity_violation_rate(*distances);
  e.num("violation_rate", name, mr.violation_rate);
  e.count("violations", name, mr.violations);
  e.count("triples", name, mr.triples_checked);
  if (points) {
    SeparationReport sep = min_separation(*points);
    e.num("min_separation", name, sep.min_separation);
    e.count("argmin_i", name, sep.argmin_i);
    e.count("argmin_j", name, sep.argmin_j);
  }
}

void register_stress(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("stress", "stress of an encoding against the corpus metric");
  sub->fallthrough();
  auto src = std::make_shared<SourceOpts>();
  auto enc = std::make_shared<EncodingOpts>();
  auto projection = std::make_shared<std::string>();
  src->attach(sub);
  enc->attach(sub);
  sub->add_option("--rows", enc->n, "positions when no corpus source is given");
  sub->add_option("--projection", *projection, "d x d layer matrix for projected stress");
  sub->callback([src, enc, projection, &g] { run_metric_audit(g, *src, *enc, *projection, true); });
}

void register_monotonicity(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("monotonicity", "monotonicity violation rate of an encoding");
  sub->fallthrough();
  auto src = std::make_shared<SourceOpts>();
  auto enc = std::make_shared<EncodingOpts>();
  src->attach(sub);
  enc->attach(sub);
  sub->add_option("--rows", enc->n, "positions when no corpus source is given");
  sub->callback([src, enc, &g] { run_metric_audit(g, *src, *enc, "", false); });
}

void register_compare(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("compare", "stress ranking of the standard encodings");
  sub->fallthrough();
  auto src = std::make_shared<SourceOpts>();
  auto opt = std::make_shared<ReportOptions>();
  src->attach(sub);
  sub->add_option("--dim", opt->dim, "embedding dimension")->capture_default_str();
  sub->add_option("--sigma", opt->sigma, "random-encoding std dev")->capture_default_str();
  sub->callback([src, opt, &g] {
    opt->seed = g.seed;
    opt->ranks.clear();
    Report rep = build_report(src->resolve(), *opt);
    std::fputs((g.csv ? render_csv(rep) : render_table(rep)).c_str(), stdout);
  });
}

void register_report(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("report", "full diagnostic report");
  sub->fallthrough();
  auto src = std::make_shared<SourceOpts>();
  auto opt = std::make_shared<ReportOptions>();
  src->attach(sub);
  sub->add_option("--dim", opt->dim, "embedding dimension")->capture_default_str();
  sub->add_option("--tradeoff-dim", opt->tradeoff_dim, "dimension for the rank table")
      ->capture_default_str();
  sub->add_option("--ranks", opt->ranks, "ranks for the trade-off table")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--sigma", opt->sigma, "random-encoding std dev")->capture_default_str();
  sub->callback([src, opt, &g] {
    opt->seed = g.seed;
    Report rep = build_report(src->resolve(), *opt);
    std::fputs((g.csv ? render_csv(rep) : render_table(rep)).c_str(), stdout);
  });
}

struct NtkOpts {
  std::string kernel = "affine";
  double a = 0.5, c = 1.0;
  double ridge = 0.0;
  std::string ridge_policy = "dominant";
  std::size_t dim = 4;
  double scale = 1.0;
  double dt = 0.0;
  std::size_t steps = 2000;
  std::string dump;
};

void register_ntk(CLI::App& app, GlobalOpts& g) {
  auto* sub = app.add_subcommand("ntk", "kernel gradient flow and fixed-point verification");
  sub->fallthrough();
  auto src = std::make_shared<SourceOpts>();
  src->attach(sub);
  auto o = std::make_shared<NtkOpts>();
  sub->add_option("--kernel", o->kernel, "kernel family")
      ->check(CLI::IsMember({"affine", "exponential"}))
      ->capture_default_str();
  sub->add_option("--a", o->a, "kernel offset / amplitude")->capture_default_str();
  sub->add_option("--c", o->c, "kernel growth rate")->capture_default_str();
  auto* ridge_opt = sub->add_option("--ridge", o->ridge, "explicit ridge (overrides policy)");
  sub->add_option("--ridge-policy", o->ridge_policy,
                  "dominant: n*sup f (diagonally dominant); adaptive: 1.1*max(0,-lambda_min)")
      ->check(CLI::IsMember({"dominant", "adaptive"}))
      ->capture_default_str();
  sub->add_option("--dim", o->dim, "embedding dimension")->capture_default_str();
  sub->add_option("--scale", o->scale, "forcing compatibility constant")->capture_default_str();
  sub->add_option("--dt", o->dt, "Euler step (default 1/(2 lambda_max))");
  sub->add_option("--steps", o->steps, "Euler steps")->capture_default_str();
  sub->add_option("--dump", o->dump, "prefix for alpha/b/p_star matrix dumps");

  sub->callback([src, o, ridge_opt, &g] {
    PositionalMarginals m = src->resolve();
    SquaredDistanceMatrix sq = squared_distance_matrix(m);
    KernelSpec spec = o->kernel == "affine" ? KernelSpec::affine(o->a, o->c)
                                            : KernelSpec::exponential(o->a, o->c);
    if (ridge_opt->count())
      spec.ridge = o->ridge;
    else if (o->ridge_policy == "dominant")
      spec.ridge = static_cast<double>(m.n()) * spec.sup();
    FlowSystem sys = assemble_flow(m, sq, spec, o->dim, o->scale, g.seed);
    FixedPointReport fr = verify_monotone_fixed_point(sys, sq, g.tol);

    double dt = o->dt > 0.0 ? o->dt : 1.0 / (2.0 * sys.lambda_max);
    FlowSummary fs = integrate_flow(sys.alpha, sys.b, Matrix(m.n(), o->dim), dt, o->steps);
    double final_diff = max_abs(fs.p - fr.p_star);

    if (!o->dump.empty()) {
      save_matrix(sys.alpha, o->dump + ".alpha.txt");
      save_matrix(sys.b, o->dump + ".b.txt");
      save_matrix(fr.p_star, o->dump + ".pstar.txt");
    }

    Emitter e(g.csv);
    if (g.csv) {
      e.num("lambda_min", "ntk", fr.lambda_min);
      e.num("C_b", "ntk", fr.c_b);
      e.num("L_f", "ntk", fr.l_f);
      e.num("f_sup", "ntk", fr.f_sup);
      e.num("R", "ntk", fr.orbit_radius);
      e.num("C", "ntk", fr.bound_constant);
      e.num("max_ratio", "ntk", fr.max_ratio);
      e.count("violations", "ntk", fr.violations);
    } else {
      std::printf("lambda_min %s C_b %s L_f %s f_sup %s R %s C %s max_ratio %s violations %zu\n",
                  format_g12(fr.lambda_min).c_str(), format_g12(fr.c_b).c_str(),
                  format_g12(fr.l_f).c_str(), format_g12(fr.f_sup).c_str(),
                  format_g12(fr.orbit_radius).c_str(), format_g12(fr.bound_constant).c_str(),
                  format_g12(fr.max_ratio).c_str(), fr.violations);
    }
    e.count("triples", "ntk", fr.triples_checked);
    e.num("ridge", "ntk", sys.ridge);
    e.num("lambda_max", "ntk", sys.lambda_max);
    e.count("a3_violations", "ntk", fr.a3_violations);
    e.count("a3_strict", "ntk", fr.a3_strict ? 1 : 0);
    e.count("bound_ok", "ntk", fr.bound_ok ? 1 : 0);
    e.count("monotone_ok", "ntk", fr.monotone_ok ? 1 : 0);
    e.num("tie_asymmetry", "ntk", fr.max_tie_asymmetry);
    e.num("duplicate_deviation", "ntk", fr.max_duplicate_deviation);
    e.num("residual_rel", "ntk", fr.residual_rel);
    e.num("dt", "flow", dt);
    e.count("steps", "flow", fs.steps);
    e.num("flow_residual", "flow", fs.residual_norm);
    e.num("flow_vs_fixed_point", "flow", final_diff);
    e.num("trajectory_max", "flow", fs.trajectory_max_row_norm);
    for (std::size_t k = 0; k < fs.residual_checkpoints.size(); ++k) {
      std::string tag = "checkpoint_" + std::to_string(k + 1);
      e.num("residual", tag, fs.residual_checkpoints[k]);
      e.num("min_separation", tag, fs.min_separation_checkpoints[k]);
    }
  });
}

} // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  CLI::App app{"positional encoding analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_flag("--csv", g.csv, "machine-readable CSV output");
  app.add_option("--tol", g.tol, "tolerance for tie and A3 comparisons")->capture_default_str();

  register_synth(app, g);
  register_estimate(app, g);
  register_encode(app, g);
  register_stress(app, g);
  register_compare(app, g);
  register_monotonicity(app, g);
  register_ntk(app, g);
  register_report(app, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
