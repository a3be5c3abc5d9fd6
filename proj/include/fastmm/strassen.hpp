#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fastmm/kernel.hpp"
#include "fastmm/matrix.hpp"

namespace fastmm {

/// Nested quadrant address; empty means the whole matrix.
using QuadrantPath = std::vector<Quadrant>;

struct SignedPath {
  int sign = 1;
  QuadrantPath path;
  friend bool operator==(const SignedPath&, const SignedPath&) = default;
};

/// One fused primitive M = (sum a)(sum b), C_k += gamma_k M, over quadrant
/// addresses of A, B and C.
struct StrassenOp {
  std::size_t id = 0;
  std::string name;
  std::vector<SignedPath> a, b, c;

  std::size_t level() const noexcept { return a.empty() ? 0 : a.front().path.size(); }
};

/// Operand counts (W_A, W_B, W_C) of a primitive.
struct VariantClass {
  std::size_t w_a = 1, w_b = 1, w_c = 1;
  friend auto operator<=>(const VariantClass&, const VariantClass&) = default;
  std::string to_string() const;  // "2-2-2"
};

/// Single whole-matrix op: plain C += A B.
std::vector<StrassenOp> gemm_ops();
/// The seven classical Strassen products M1..M7.
std::vector<StrassenOp> one_level_ops();
/// Self-composition of the one-level list: 49 ops over length-2 paths.
std::vector<StrassenOp> two_level_ops();
/// levels 0, 1 or 2; throws std::invalid_argument otherwise.
std::vector<StrassenOp> ops_for_level(int levels);

VariantClass classify(const StrassenOp& op);

/// Labels used in the literature where they are known: (1,1,1) = "gemm",
/// (2,2,2) = "Var#0".
std::optional<std::string_view> variant_alias(const VariantClass& cls);

/// "M3: A[00] * (B[01] - B[11]) -> +C[01] +C[11]"; nested paths print as 00.11.
std::string format_op(const StrassenOp& op);
std::string dump_ops(std::span<const StrassenOp> ops);

/// True when the two paths address overlapping regions (one is a prefix of the other).
bool paths_overlap(const QuadrantPath& x, const QuadrantPath& y) noexcept;
/// True when the destination sets of two ops overlap.
bool destinations_conflict(const StrassenOp& x, const StrassenOp& y) noexcept;

template <class T>
MatrixView<T> resolve_path(MatrixView<T> v, const QuadrantPath& path) {
  for (Quadrant q : path) v = quadrant(v, q);
  return v;
}

template <Scalar T>
struct ResolvedOp {
  FusedOperand<T> a;
  FusedOperand<T> b;
  FusedDestination<T> c;
};

/// Binds an op's quadrant paths to concrete (padded) views of A, B and C.
template <Scalar T>
ResolvedOp<T> resolve(const StrassenOp& op, MatrixView<const T> A, MatrixView<const T> B,
                      MatrixView<T> C, WriteMode mode = WriteMode::Plain,
                      LockTable* locks = nullptr) {
  if (A.cols() != B.rows() || A.rows() != C.rows() || B.cols() != C.cols())
    throw std::invalid_argument("resolve: nonconformant A, B, C");
  std::vector<OperandTerm<T>> a, b;
  std::vector<DestinationTerm<T>> c;
  for (const auto& t : op.a) a.push_back({static_cast<T>(t.sign), resolve_path(A, t.path)});
  for (const auto& t : op.b) b.push_back({static_cast<T>(t.sign), resolve_path(B, t.path)});
  for (const auto& t : op.c) c.push_back({static_cast<T>(t.sign), resolve_path(C, t.path)});
  return {FusedOperand<T>(std::move(a)), FusedOperand<T>(std::move(b)),
          FusedDestination<T>(std::move(c), mode, locks)};
}

}  // namespace fastmm
