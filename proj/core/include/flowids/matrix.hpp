#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace flowids {

/// Dense row-major matrix of doubles. The only tensor type the numerical
/// core needs: flow inputs are (steps x features), LSTM state blocks are
/// (steps x hidden).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> d;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), d(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) {
    assert(r < rows && c < cols);
    return d[r * cols + c];
  }
  double at(std::size_t r, std::size_t c) const {
    assert(r < rows && c < cols);
    return d[r * cols + c];
  }

  double* row(std::size_t r) { return d.data() + r * cols; }
  const double* row(std::size_t r) const { return d.data() + r * cols; }

  std::size_t size() const { return d.size(); }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && d == o.d;
  }
};

}  // namespace flowids
