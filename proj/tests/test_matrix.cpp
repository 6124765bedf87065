#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <posenc/matrix.hpp>
#include <posenc/rng.hpp>

using namespace posenc;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_text(const std::filesystem::path& p, const char* text) {
  std::ofstream out(p);
  out << text;
}

} // namespace

TEST_CASE("matrix construction and access") {
  Matrix a(2, 3);
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(a(i, j) == 0.0);

  Matrix b{{1.0, 2.0}, {3.0, 4.0}};
  REQUIRE(b(0, 1) == 2.0);
  REQUIRE(b(1, 0) == 3.0);

  REQUIRE_THROWS_AS((Matrix{{1.0, 2.0}, {3.0}}), Error);

  Matrix id = Matrix::identity(3);
  REQUIRE(id(0, 0) == 1.0);
  REQUIRE(id(0, 1) == 0.0);
}

TEST_CASE("matrix arithmetic") {
  Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  Matrix b{{5.0, 6.0}, {7.0, 8.0}};

  Matrix sum = a + b;
  REQUIRE(sum(0, 0) == 6.0);
  REQUIRE(sum(1, 1) == 12.0);

  Matrix diff = b - a;
  REQUIRE(diff(0, 0) == 4.0);

  Matrix scaled = 2.0 * a;
  REQUIRE(scaled(1, 0) == 6.0);

  Matrix prod = a * b;
  REQUIRE(prod(0, 0) == 19.0);
  REQUIRE(prod(0, 1) == 22.0);
  REQUIRE(prod(1, 0) == 43.0);
  REQUIRE(prod(1, 1) == 50.0);

  Matrix t = transpose(a);
  REQUIRE(t(0, 1) == 3.0);
  REQUIRE(t(1, 0) == 2.0);

  REQUIRE_THROWS_AS(a + Matrix(3, 2), Error);
  REQUIRE_THROWS_AS(a * Matrix(3, 2), Error);
}

TEST_CASE("matrix norms") {
  Matrix a{{3.0, 4.0}};
  REQUIRE(frobenius_norm(a) == 5.0);
  REQUIRE(max_abs(a) == 4.0);

  Matrix b{{0.0, 0.0}, {3.0, 4.0}};
  REQUIRE(row_distance(b, 0, 1) == 5.0);
  REQUIRE(max_row_norm(b) == 5.0);

  Matrix sym{{2.0, 1.0}, {1.0, 2.0}};
  REQUIRE(is_symmetric(sym, 0.0));
  Matrix asym{{2.0, 1.0}, {1.5, 2.0}};
  REQUIRE_FALSE(is_symmetric(asym, 1e-12));
}

TEST_CASE("kahan summation compensates cancellation") {
  KahanSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  REQUIRE(s.value() == 1.0);

  KahanSum tenths;
  for (int i = 0; i < 16; ++i) tenths.add(0.1);
  REQUIRE(std::fabs(tenths.value() - 1.6) < 1e-15);
}

TEST_CASE("matrix file round trip is exact") {
  Rng rng(404);
  Matrix a(7, 5);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = rng.normal() * std::pow(10.0, (int)j - 2);

  auto path = temp_file("posenc_matrix_roundtrip.txt");
  save_matrix(a, path);
  Matrix back = load_matrix(path);
  REQUIRE(back.rows() == a.rows());
  REQUIRE(back.cols() == a.cols());
  REQUIRE(back == a); // %.17g preserves doubles exactly
  std::filesystem::remove(path);
}

TEST_CASE("matrix load rejects malformed input") {
  auto path = temp_file("posenc_matrix_bad.txt");

  write_text(path, "");
  REQUIRE_THROWS_MATCHES(load_matrix(path), Error, Catch::Matchers::MessageMatches(
                                                       Catch::Matchers::ContainsSubstring("empty")));

  write_text(path, "2 2\n1 2\n3\n");
  REQUIRE_THROWS_AS(load_matrix(path), Error);

  write_text(path, "1 2\n1 2 3\n");
  REQUIRE_THROWS_AS(load_matrix(path), Error);

  write_text(path, "1 2\n1 abc\n");
  REQUIRE_THROWS_AS(load_matrix(path), Error);

  write_text(path, "1 2\n1 inf\n");
  REQUIRE_THROWS_AS(load_matrix(path), Error);

  std::filesystem::remove(path);
}

TEST_CASE("load error codes map to data exit code") {
  auto path = temp_file("posenc_matrix_code.txt");
  write_text(path, "2 2\n1 2\n3\n");
  try {
    load_matrix(path);
    FAIL("expected throw");
  } catch (const Error& e) {
    REQUIRE(e.code() == errc::ragged_rows);
    REQUIRE(e.exit_code() == 3);
  }
  std::filesystem::remove(path);
}
