// End-to-end checks for the posenc binary. Every case shells out to the real
// executable so argument parsing, exit codes, output formats, and file I/O are
// exercised the way a user hits them. Usage: cli_tests <path-to-posenc>.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;
std::string binary;
std::string scratch;

void check(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAIL: " << what << '\n';
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args) {
  const std::string out_path = scratch + "/stdout.txt";
  const std::string err_path = scratch + "/stderr.txt";
  const std::string cmd =
      '"' + binary + "\" " + args + " >\"" + out_path + "\" 2>\"" + err_path + '"';
  int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

void usage_and_errors() {
  check(run("--help").code == 0, "--help exits 0");
  check(run("synth --help").code == 0, "subcommand --help exits 0");
  check(run("").code == 2, "missing subcommand exits 2");
  check(run("synth --bogus -o " + scratch + "/x.txt").code == 2, "unknown flag exits 2");
  check(run("synth --n 6 --v 9 --count 40").code == 2, "synth without -o exits 2");
  check(run("encode --kind lowrank --line --n 8 --dim 4 -o " + scratch + "/x.txt").code == 2,
        "lowrank without --rank exits 2");
  check(run("estimate " + scratch + "/missing.txt -o " + scratch + "/mu.txt").code == 3,
        "missing corpus exits 3");
  RunResult bad = run("ntk --line --n 8 --dim 2 --ridge 0");
  check(bad.code == 4, "ridge 0 on an indefinite base kernel exits 4");
  check(contains(bad.err, "not_positive_definite"), "the failure names its cause on stderr");
}

void synth_estimate_round_trip() {
  const std::string c1 = scratch + "/c1.txt";
  const std::string c2 = scratch + "/c2.txt";
  const std::string c3 = scratch + "/c3.txt";
  check(run("--seed 7 synth --n 6 --v 9 --count 40 -o " + c1).code == 0, "synth exits 0");
  run("--seed 7 synth --n 6 --v 9 --count 40 -o " + c2);
  run("--seed 8 synth --n 6 --v 9 --count 40 -o " + c3);
  const std::string bytes = slurp(c1);
  check(!bytes.empty(), "synth wrote a corpus");
  check(bytes == slurp(c2), "same seed reproduces the corpus byte for byte");
  check(bytes != slurp(c3), "a different seed changes the corpus");

  const std::string mu = scratch + "/mu.txt";
  check(run("estimate " + c1 + " -o " + mu).code == 0, "estimate exits 0");
  std::ifstream in(mu);
  std::size_t rows = 0, cols = 0;
  in >> rows >> cols;
  check(rows == 6 && cols == 9, "marginal matrix shape matches the corpus");

  check(run("stress --marginals " + mu + " --kind sinusoidal --dim 8").code == 0,
        "stress accepts estimated marginals");
}

void encode_and_audit() {
  const std::string enc = scratch + "/enc.txt";
  check(run("encode --kind sinusoidal --rows 10 --dim 8 -o " + enc).code == 0, "encode exits 0");
  RunResult audit = run("stress --line --n 10 --encoding " + enc);
  check(audit.code == 0, "stress on a saved encoding exits 0");
  check(contains(audit.out, "stress[file]"), "stress reports under the file label");
  check(contains(audit.out, "min_separation[file]"), "the audit includes min separation");
  check(contains(audit.out, "violation_rate[file]"), "the audit includes the violation rate");

  RunResult mono = run("monotonicity --line --n 10 --kind sinusoidal --dim 8");
  check(mono.code == 0, "monotonicity exits 0");
  check(contains(mono.out, "triples[sinusoidal]"), "monotonicity reports the triple count");
}

// The table and CSV renderings must agree digit for digit, so every numeric
// CSV value has to appear verbatim somewhere in the table output.
void csv_matches_table() {
  const std::string args = "report --line --n 12 --dim 8 --ranks 1,2,3";
  RunResult table = run("--seed 3 " + args);
  RunResult csv = run("--seed 3 --csv " + args);
  check(table.code == 0 && csv.code == 0, "report exits 0 in both modes");
  check(csv.out.rfind("metric,encoding,value\n", 0) == 0, "csv starts with its header");
  for (const char* name : {"mds", "sinusoidal", "rope", "alibi", "random"}) {
    check(contains(table.out, name), std::string("table lists ") + name);
    check(contains(csv.out, name), std::string("csv lists ") + name);
  }

  std::istringstream lines(csv.out);
  std::string line;
  std::getline(lines, line);
  std::size_t compared = 0;
  while (std::getline(lines, line)) {
    auto p1 = line.find(',');
    auto p2 = line.rfind(',');
    if (p1 == std::string::npos || p2 <= p1) continue;
    const std::string metric = line.substr(0, p1);
    const std::string value = line.substr(p2 + 1);
    if (metric == "stress" || metric == "tradeoff_stress" || metric == "cumulative_variance") {
      ++compared;
      check(contains(table.out, value), "table repeats csv value " + value + " for " + metric);
    }
  }
  check(compared == 9, "csv carries five stress rows, three trade-off rows, and cumvar");
}

void ntk_flow() {
  RunResult r = run("ntk --line --n 16 --dim 4");
  check(r.code == 0, "ntk exits 0");
  check(contains(r.out, "lambda_min "), "ntk prints its summary line");
  check(contains(r.out, " violations 0"), "the dominant ridge keeps the line corpus monotone");
  check(contains(r.out, "a3_strict[ntk] 1"), "the line corpus satisfies strict A3");
  check(contains(r.out, "bound_ok[ntk] 1"), "the ratio bound holds");
  check(contains(r.out, "monotone_ok[ntk] 1"), "the fixed point is monotone");
  check(contains(r.out, "min_separation[checkpoint_8]"), "the flow reports its checkpoints");

  const std::string prefix = scratch + "/nt";
  check(run("ntk --line --n 12 --dim 3 --dump " + prefix).code == 0, "ntk --dump exits 0");
  for (const char* suffix : {".alpha.txt", ".b.txt", ".pstar.txt"}) {
    check(!slurp(prefix + suffix).empty(), std::string("dump writes ") + suffix);
  }
}

} // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: cli_tests <posenc-binary>\n";
    return 64;
  }
  binary = argv[1];
  std::error_code ec;
  auto dir = std::filesystem::temp_directory_path(ec) /
             ("posenc_cli_" + std::to_string(static_cast<long>(getpid())));
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "cannot create scratch dir: " << ec.message() << '\n';
    return 64;
  }
  scratch = dir.string();

  usage_and_errors();
  synth_estimate_round_trip();
  encode_and_audit();
  csv_matches_table();
  ntk_flow();

  std::filesystem::remove_all(dir, ec);
  if (failures == 0) std::cout << "cli_tests: all checks passed\n";
  return failures;
}
