#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qa {

/// Dense row-major matrix of doubles. Zero-sized dimensions are allowed so a
/// candidate with no retrieved documents can still be represented; every stored
/// value must be finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix column(std::span<const double> values);
  static Matrix row(std::span<const double> values);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row_span(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols_, cols_);
  }

  void fill(double v);
  Matrix transposed() const;
  std::string shape_string() const;

  /// Throws qa::Error if any value is NaN or infinite.
  void require_finite(const char* what) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// W·X ⊕ b: the bias is added to every column of the product.
Matrix affine_broadcast(const Matrix& w, const Matrix& x, std::span<const double> b);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix tanh_map(const Matrix& x);
Matrix relu_map(const Matrix& x);

/// Numerically stable softmax (max-subtraction). Throws on empty input.
std::vector<double> softmax_row(std::span<const double> x);

/// -log softmax(logits)[target], computed with log-sum-exp.
double cross_entropy(std::span<const double> logits, std::size_t target);

/// Glorot/Xavier uniform initialization in ±sqrt(6 / (fan_in + fan_out)),
/// with fan_in = cols and fan_out = rows.
Matrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace qa
