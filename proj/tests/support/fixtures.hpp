#pragma once

#include <cstdint>
#include <random>

#include "fastmm/matrix.hpp"
#include "fastmm/reference.hpp"

namespace fastmm::testing {

template <Scalar T>
Matrix<T> random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, bool integer = false) {
  Matrix<T> m(rows, cols);
  fill_random(m, seed, integer);
  return m;
}

template <Scalar T>
bool bitwise_equal(const Matrix<T>& x, const Matrix<T>& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t i = 0; i < x.rows(); ++i)
      if (x(i, j) != y(i, j)) return false;
  return true;
}

// Plain textbook product into a fresh matrix, in T arithmetic.
template <Scalar T>
Matrix<T> naive_product(const Matrix<T>& A, const Matrix<T>& B) {
  Matrix<T> C(A.rows(), B.cols());
  for (std::size_t j = 0; j < B.cols(); ++j)
    for (std::size_t p = 0; p < A.cols(); ++p)
      for (std::size_t i = 0; i < A.rows(); ++i) C(i, j) += A(i, p) * B(p, j);
  return C;
}

}  // namespace fastmm::testing
