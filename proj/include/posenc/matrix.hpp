#pragma once

// Dense row-major double matrix with exact text round-trip.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace posenc {

class Matrix {
public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
      require(r.size() == cols_, errc::ragged_rows, "initializer rows differ in length");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Compensated accumulator for long reductions (Kahan with the Neumaier
// correction, which also survives summands larger than the running total).
class KahanSum {
public:
  void add(double v) {
    double t = s_ + v;
    if (std::fabs(s_) >= std::fabs(v))
      c_ += (s_ - t) + v;
    else
      c_ += (v - t) + s_;
    s_ = t;
  }
  double value() const noexcept { return s_ + c_; }

private:
  double s_ = 0.0, c_ = 0.0;
};

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), errc::dimension_mismatch, "matrix add");
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), errc::dimension_mismatch, "matrix sub");
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
  return r;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), errc::dimension_mismatch, "matrix multiply");
  Matrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

inline Matrix transpose(const Matrix& a) {
  Matrix r(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
  return r;
}

inline double frobenius_norm(const Matrix& a) {
  KahanSum s;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s.add(a(i, j) * a(i, j));
  return std::sqrt(s.value());
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::fabs(a(i, j)));
  return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double row_distance(const Matrix& m, std::size_t i, std::size_t j) {
  KahanSum s;
  for (std::size_t k = 0; k < m.cols(); ++k) {
    double d = m(i, k) - m(j, k);
    s.add(d * d);
  }
  return std::sqrt(s.value());
}

inline double max_row_norm(const Matrix& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) r = std::max(r, norm(m.row(i)));
  return r;
}

inline bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

// %.17g round-trips IEEE doubles exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), errc::invalid_argument, "cannot open for writing: " + path.string());
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  require(out.good(), errc::invalid_argument, "write failed: " + path.string());
}

inline Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), errc::parse_failure, "cannot open: " + path.string());
  in >> std::ws;
  require(!in.eof(), errc::empty_input, "empty matrix file " + path.string());
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) fail(errc::parse_failure, "bad header in " + path.string());
  require(rows > 0 && cols > 0, errc::empty_input, "empty matrix in " + path.string());
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (!(in >> m(i, j)))
        fail(errc::ragged_rows, "short row " + std::to_string(i) + " in " + path.string());
  double extra;
  if (in >> extra) fail(errc::ragged_rows, "trailing values in " + path.string());
  require(m.all_finite(), errc::non_finite, "non-finite entry in " + path.string());
  return m;
}

} // namespace posenc
