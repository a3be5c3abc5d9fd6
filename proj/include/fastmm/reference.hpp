#pragma once

// Naive oracle, random fixtures and the scale-relative error metric used by
// verification.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "fastmm/matrix.hpp"

namespace fastmm {

/// C += A B with a plain triple loop, accumulating in long double.
template <Scalar T>
void reference_gemm(MatrixView<const T> A, MatrixView<const T> B, MatrixView<T> C) {
  if (A.cols() != B.rows() || A.rows() != C.rows() || B.cols() != C.cols())
    throw std::invalid_argument("reference_gemm: nonconformant A, B, C");
  for (std::size_t j = 0; j < C.cols(); ++j)
    for (std::size_t i = 0; i < C.rows(); ++i) {
      long double acc = C.read_padded(i, j);
      for (std::size_t p = 0; p < A.cols(); ++p)
        acc += static_cast<long double>(A.read_padded(i, p)) * B.read_padded(p, j);
      C.write_clipped(i, j, static_cast<T>(acc));
    }
}

/// Uniform [-1, 1], or integers in [-4, 4] when `integer` is set.
template <Scalar T>
void fill_random(Matrix<T>& M, std::uint64_t seed, bool integer = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<T> real(T{-1}, T{1});
  std::uniform_int_distribution<int> small(-4, 4);
  for (std::size_t j = 0; j < M.cols(); ++j)
    for (std::size_t i = 0; i < M.rows(); ++i)
      M(i, j) = integer ? static_cast<T>(small(rng)) : real(rng);
}

/// Maximum absolute row sum.
template <class T>
double norm_inf(MatrixView<const T> M) {
  double best = 0;
  for (std::size_t i = 0; i < M.phys_rows(); ++i) {
    double row = 0;
    for (std::size_t j = 0; j < M.phys_cols(); ++j) row += std::abs(double(M.read_padded(i, j)));
    best = std::max(best, row);
  }
  return best;
}

struct ErrorReport {
  double max_abs = 0;   // max |C - C_ref|
  double scale = 0;     // ||A||_inf ||B||_inf
  double relative = 0;  // max_abs / scale (0 / 0 = 0)
  double tolerance = 0;
  bool pass = false;
};

/// f32: 2 k eps. f64: 1e-12.
template <Scalar T>
double default_tolerance(std::size_t k) noexcept {
  if constexpr (std::is_same_v<T, float>)
    return 2.0 * double(std::max<std::size_t>(k, 1)) * std::numeric_limits<float>::epsilon();
  else
    return 1e-12;
}

/// Compares C against the oracle. A zero scale demands an exact match.
template <Scalar T>
ErrorReport compare(MatrixView<const T> A, MatrixView<const T> B, MatrixView<const T> C,
                    MatrixView<const T> C_ref, double tolerance) {
  ErrorReport r;
  r.tolerance = tolerance;
  for (std::size_t j = 0; j < C.cols(); ++j)
    for (std::size_t i = 0; i < C.rows(); ++i)
      r.max_abs = std::max(r.max_abs, std::abs(double(C.read_padded(i, j)) - double(C_ref.read_padded(i, j))));
  r.scale = norm_inf(A) * norm_inf(B);
  if (r.scale == 0) {
    r.relative = r.max_abs == 0 ? 0 : std::numeric_limits<double>::infinity();
    r.pass = r.max_abs == 0;
  } else {
    r.relative = r.max_abs / r.scale;
    r.pass = r.relative <= tolerance;
  }
  return r;
}

}  // namespace fastmm
