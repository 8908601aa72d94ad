#include "qa/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "qa/error.hpp"
#include "qa/rng.hpp"

namespace qa {

namespace {

#ifndef NDEBUG
constexpr bool kCheckOps = true;
#else
constexpr bool kCheckOps = false;
#endif

std::string shape_of(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw Error("numeric", "non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw Error("shape", "matrix " + shape_of(rows, cols) + " given " +
                             std::to_string(values_.size()) + " values");
  }
  require_finite("matrix construction");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error("shape", "ragged matrix literal");
    values_.insert(values_.end(), r.begin(), r.end());
  }
  require_finite("matrix construction");
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::row(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

std::string Matrix::shape_string() const { return shape_of(rows_, cols_); }

void Matrix::require_finite(const char* what) const {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error("numeric", std::string("non-finite value in ") + what);
    }
  }
}

Matrix affine_broadcast(const Matrix& w, const Matrix& x, std::span<const double> b) {
  if (w.cols() != x.rows() || b.size() != w.rows()) {
    throw Error("shape", "affine: W " + w.shape_string() + ", X " + x.shape_string() +
                             ", b " + std::to_string(b.size()));
  }
  Matrix out(w.rows(), x.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = b[i];
    for (std::size_t t = 0; t < w.cols(); ++t) {
      const double wit = w(i, t);
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += wit * x(t, j);
    }
  }
  if (kCheckOps) out.require_finite("affine");
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  std::vector<double> zeros(a.rows(), 0.0);
  if (a.cols() != b.rows()) {
    throw Error("shape", "matmul: " + a.shape_string() + " x " + b.shape_string());
  }
  return affine_broadcast(a, b, zeros);
}

Matrix tanh_map(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = std::tanh(v);
  return out;
}

Matrix relu_map(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

std::vector<double> softmax_row(std::span<const double> x) {
  if (x.empty()) throw Error("shape", "softmax of an empty vector");
  const double mx = *std::max_element(x.begin(), x.end());
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double cross_entropy(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw Error("shape", "cross_entropy: target " + std::to_string(target) +
                             " out of range for " + std::to_string(logits.size()) +
                             " logits");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - mx);
  return std::log(total) + mx - logits[target];
}

Matrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-limit, limit);
  return m;
}

}  // namespace qa
