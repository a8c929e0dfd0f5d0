#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace offlang {

// Dense row-major matrix of doubles. All model arithmetic is double
// precision; the sizes here are desk-scale, so plain loops are plenty.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> d;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), d(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return d[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return d[r * cols + c];
  }

  double* row(std::size_t r) { return d.data() + r * cols; }
  const double* row(std::size_t r) const { return d.data() + r * cols; }

  bool empty() const { return d.empty(); }
};

// out[m x n] = a[m x k] * b[k x n]
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = a(i, k);
      if (av == 0.0) continue;
      const double* brow = b.row(k);
      double* orow = out.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

// out[m x n] = a[m x k] * b[n x k]^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) {
    throw std::invalid_argument("matmul_nt shape mismatch");
  }
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      const double* ar = a.row(i);
      const double* br = b.row(j);
      for (std::size_t k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
      out(i, j) = acc;
    }
  }
  return out;
}

// out[k x n] = a[m x k]^T * b[m x n]
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) {
    throw std::invalid_argument("matmul_tn shape mismatch");
  }
  Matrix out(a.cols, b.cols);
  for (std::size_t m = 0; m < a.rows; ++m) {
    const double* ar = a.row(m);
    const double* br = b.row(m);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double av = ar[i];
      if (av == 0.0) continue;
      double* orow = out.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += av * br[j];
    }
  }
  return out;
}

inline void add_inplace(Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument("add shape mismatch");
  }
  for (std::size_t i = 0; i < a.d.size(); ++i) a.d[i] += b.d[i];
}

}  // namespace offlang
