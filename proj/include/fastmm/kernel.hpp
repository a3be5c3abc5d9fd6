#pragma once

// Blocked multiply primitive with fused operands.
//
// One call computes   dest_k += gamma_k * (sum_i alpha_i X_i) (sum_j beta_j V_j)
// for up to four terms on each side. The operand sums are formed while packing
// the A/B tiles and the destination updates happen while writing the
// accumulator back, so no temporary matrix is ever materialized: the only
// auxiliary memory is one A tile, one B tile and one accumulator per worker.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fastmm/blocking.hpp"
#include "fastmm/matrix.hpp"

namespace fastmm {

inline constexpr std::size_t kMaxFusedTerms = 4;

enum class WriteMode { Plain, ElementAtomic, BlockAtomic };

template <Scalar T>
struct OperandTerm {
  T coeff;
  MatrixView<const T> view;
};

template <Scalar T>
struct DestinationTerm {
  T coeff;
  MatrixView<T> view;
};

namespace detail {

template <class Term>
void validate_terms(const std::vector<Term>& terms, const char* what) {
  if (terms.empty() || terms.size() > kMaxFusedTerms)
    throw std::invalid_argument(std::string(what) + ": needs 1 to 4 terms");
  for (const auto& t : terms) {
    if (t.coeff != 1 && t.coeff != -1)
      throw std::invalid_argument(std::string(what) + ": coefficients must be +1 or -1");
    if (t.view.rows() != terms.front().view.rows() || t.view.cols() != terms.front().view.cols())
      throw std::invalid_argument(std::string(what) + ": term extents differ");
  }
}

}  // namespace detail

/// Signed sum of same-shaped views consumed as a single multiply input.
template <Scalar T>
class FusedOperand {
 public:
  FusedOperand() = default;
  explicit FusedOperand(std::vector<OperandTerm<T>> terms) : terms_(std::move(terms)) {
    detail::validate_terms(terms_, "FusedOperand");
  }
  explicit FusedOperand(MatrixView<const T> v) : FusedOperand({OperandTerm<T>{T{1}, v}}) {}

  std::size_t rows() const noexcept { return terms_.empty() ? 0 : terms_.front().view.rows(); }
  std::size_t cols() const noexcept { return terms_.empty() ? 0 : terms_.front().view.cols(); }
  std::size_t count() const noexcept { return terms_.size(); }
  const std::vector<OperandTerm<T>>& terms() const noexcept { return terms_; }

 private:
  std::vector<OperandTerm<T>> terms_;
};

/// Lock words for m_R x n_R blocks of a destination matrix. Blocks share a
/// fixed pool of at most kStripes words (block index modulo the pool size), so
/// the table does not grow with the matrix. Lock/unlock mirror a CAS acquire
/// and an exchange release.
class LockTable {
 public:
  static constexpr std::size_t kStripes = 1024;

  LockTable(std::size_t base_rows, std::size_t base_cols, std::size_t m_R, std::size_t n_R)
      : rows_((base_rows + m_R - 1) / m_R), cols_((base_cols + n_R - 1) / n_R), m_R_(m_R),
        n_R_(n_R), cells_(std::clamp<std::size_t>(rows_ * cols_, 1, kStripes)) {}

  std::size_t block_rows() const noexcept { return m_R_; }
  std::size_t block_cols() const noexcept { return n_R_; }
  std::size_t size() const noexcept { return cells_.size(); }

  std::size_t cell(std::size_t base_row, std::size_t base_col) const noexcept {
    return ((base_row / m_R_) + (base_col / n_R_) * rows_) % cells_.size();
  }

  void lock(std::size_t id) noexcept {
    auto& w = cells_[id];
    std::uint32_t expected = 0;
    unsigned spins = 0;
    while (!w.compare_exchange_weak(expected, 1u, std::memory_order_acquire,
                                    std::memory_order_relaxed)) {
      expected = 0;
      if (++spins % 64 == 0) std::this_thread::yield();
    }
  }
  void unlock(std::size_t id) noexcept { cells_[id].exchange(0u, std::memory_order_release); }

 private:
  std::size_t rows_, cols_, m_R_, n_R_;
  std::vector<std::atomic<std::uint32_t>> cells_;
};

/// Signed destinations receiving the accumulator, plus how the update is
/// synchronized. BlockAtomic needs a LockTable covering the destination base.
template <Scalar T>
class FusedDestination {
 public:
  FusedDestination() = default;
  FusedDestination(std::vector<DestinationTerm<T>> terms, WriteMode mode = WriteMode::Plain,
                   LockTable* locks = nullptr)
      : terms_(std::move(terms)), mode_(mode), locks_(locks) {
    detail::validate_terms(terms_, "FusedDestination");
    if (mode_ == WriteMode::BlockAtomic && locks_ == nullptr)
      throw std::invalid_argument("FusedDestination: BlockAtomic requires a lock table");
  }
  explicit FusedDestination(MatrixView<T> v) : FusedDestination({DestinationTerm<T>{T{1}, v}}) {}

  std::size_t rows() const noexcept { return terms_.empty() ? 0 : terms_.front().view.rows(); }
  std::size_t cols() const noexcept { return terms_.empty() ? 0 : terms_.front().view.cols(); }
  std::size_t count() const noexcept { return terms_.size(); }
  const std::vector<DestinationTerm<T>>& terms() const noexcept { return terms_; }
  WriteMode mode() const noexcept { return mode_; }
  LockTable* locks() const noexcept { return locks_; }

 private:
  std::vector<DestinationTerm<T>> terms_;
  WriteMode mode_ = WriteMode::Plain;
  LockTable* locks_ = nullptr;
};

/// Work attributed to kernel calls, in the same units as the performance
/// model: words moved and flops.
struct KernelCounters {
  std::uint64_t reads_a = 0;      // source words read while packing A (all terms)
  std::uint64_t reads_b = 0;
  std::uint64_t updates_c = 0;    // destination words updated (all terms)
  std::uint64_t flop_mul = 0;     // 2 per multiply-add in the micro-kernel
  std::uint64_t flop_add_a = 0;   // extra additions fusing A terms
  std::uint64_t flop_add_b = 0;
  std::uint64_t flop_add_c = 0;   // accumulations into destinations
  std::uint64_t micro_kernels = 0;
  std::uint64_t tiles = 0;
  std::uint64_t atomic_ops = 0;   // element atomics or lock acquisitions

  KernelCounters& operator+=(const KernelCounters& o) noexcept {
    reads_a += o.reads_a;
    reads_b += o.reads_b;
    updates_c += o.updates_c;
    flop_mul += o.flop_mul;
    flop_add_a += o.flop_add_a;
    flop_add_b += o.flop_add_b;
    flop_add_c += o.flop_add_c;
    micro_kernels += o.micro_kernels;
    tiles += o.tiles;
    atomic_ops += o.atomic_ops;
    return *this;
  }
  std::uint64_t flops() const noexcept { return flop_mul + flop_add_a + flop_add_b + flop_add_c; }
};

// --- workspace accounting -------------------------------------------------

/// Process-wide record of workspace allocations (in scalars, not bytes).
struct WorkspaceStats {
  std::atomic<std::uint64_t> live{0};
  std::atomic<std::uint64_t> peak_live{0};
  std::atomic<std::uint64_t> instances{0};
  std::atomic<std::uint64_t> max_instance{0};
  std::atomic<std::uint64_t> min_instance{UINT64_MAX};

  // Live workspaces stay counted; the peak restarts from the current level.
  void reset() noexcept {
    peak_live = live.load();
    instances = 0;
    max_instance = 0;
    min_instance = UINT64_MAX;
  }
  void on_allocate(std::uint64_t n) noexcept;
  void on_deallocate(std::uint64_t n) noexcept { live.fetch_sub(n, std::memory_order_relaxed); }
};

WorkspaceStats& workspace_stats() noexcept;

template <class T>
struct TrackingAllocator {
  using value_type = T;
  TrackingAllocator() = default;
  template <class U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    workspace_stats().on_allocate(n);
    return std::allocator<T>{}.allocate(n);
  }
  void deallocate(T* p, std::size_t n) noexcept {
    workspace_stats().on_deallocate(n);
    std::allocator<T>{}.deallocate(p, n);
  }
  template <class U>
  bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

/// Per-worker buffers: the A tile, B tile and C accumulator, in one allocation.
template <Scalar T>
class Workspace {
 public:
  explicit Workspace(const BlockingStrategy& s)
      : a_size_(s.m_S * s.k_S), b_size_(s.k_S * s.n_S),
        buffer_(s.workspace_scalars()) {}

  std::span<T> a_tile() noexcept { return {buffer_.data(), a_size_}; }
  std::span<T> b_tile() noexcept { return {buffer_.data() + a_size_, b_size_}; }
  std::span<T> accumulator() noexcept {
    return {buffer_.data() + a_size_ + b_size_, buffer_.size() - a_size_ - b_size_};
  }
  std::size_t scalars() const noexcept { return buffer_.size(); }

 private:
  std::size_t a_size_, b_size_;
  std::vector<T, TrackingAllocator<T>> buffer_;
};

// --- geometry -------------------------------------------------------------

struct TileGrid {
  std::size_t row_blocks = 0;
  std::size_t col_blocks = 0;
  std::size_t count() const noexcept { return row_blocks * col_blocks; }
};

inline std::size_t ceil_div(std::size_t a, std::size_t b) noexcept { return (a + b - 1) / b; }

inline TileGrid tile_grid(std::size_t m, std::size_t n, const BlockingStrategy& s) noexcept {
  return {ceil_div(m, s.m_S), ceil_div(n, s.n_S)};
}

/// Throws std::invalid_argument unless a is m x k, b is k x n and c is m x n.
template <Scalar T>
void check_conformance(const FusedOperand<T>& a, const FusedOperand<T>& b,
                       const FusedDestination<T>& c) {
  if (a.count() == 0 || b.count() == 0 || c.count() == 0)
    throw std::invalid_argument("fused_multiply: empty operand");
  if (a.cols() != b.rows() || a.rows() != c.rows() || b.cols() != c.cols())
    throw std::invalid_argument("fused_multiply: nonconformant extents (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ") * (" +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ") -> (" +
                                std::to_string(c.rows()) + "x" + std::to_string(c.cols()) + ")");
}

// --- packing --------------------------------------------------------------

/// Packs the m_S x k_S slab (row_block, k_block) of the fused A operand into
/// column panels of height m_R: element (i, p) goes to
/// (i / m_R) * m_R * k_S + p * m_R + i % m_R. Cells beyond the logical or
/// physical edge are zero.
template <Scalar T>
void pack_a(const FusedOperand<T>& op, std::size_t row_block, std::size_t k_block,
            const BlockingStrategy& s, std::span<T> tile, KernelCounters* counters = nullptr) {
  const std::size_t m = op.rows(), k = op.cols();
  const std::size_t row0 = row_block * s.m_S, k0 = k_block * s.k_S;
  std::fill(tile.begin(), tile.begin() + s.m_S * s.k_S, T{0});
  if (row0 >= m || k0 >= k) return;
  const std::size_t valid_rows = std::min(s.m_S, m - row0);
  const std::size_t valid_k = std::min(s.k_S, k - k0);
  const std::size_t panel_stride = s.m_R * s.k_S;

  for (const auto& term : op.terms()) {
    const auto& v = term.view;
    const std::size_t pr = v.phys_rows() > row0 ? std::min(valid_rows, v.phys_rows() - row0) : 0;
    const std::size_t pk = v.phys_cols() > k0 ? std::min(valid_k, v.phys_cols() - k0) : 0;
    const bool negate = term.coeff < 0;
    for (std::size_t p = 0; p < pk; ++p) {
      const T* src = v.column(k0 + p) + row0;
      for (std::size_t i0 = 0; i0 < pr; i0 += s.m_R) {
        T* dst = tile.data() + (i0 / s.m_R) * panel_stride + p * s.m_R;
        const std::size_t len = std::min(s.m_R, pr - i0);
        if (negate) {
          for (std::size_t r = 0; r < len; ++r) dst[r] -= src[i0 + r];
        } else {
          for (std::size_t r = 0; r < len; ++r) dst[r] += src[i0 + r];
        }
      }
    }
  }
  if (counters) {
    const std::uint64_t cells = valid_rows * valid_k;
    counters->reads_a += op.count() * cells;
    counters->flop_add_a += (op.count() - 1) * cells;
  }
}

/// Packs the k_S x n_S slab (k_block, col_block) of the fused B operand into
/// row panels of width n_R: element (p, j) goes to
/// (j / n_R) * n_R * k_S + p * n_R + j % n_R.
template <Scalar T>
void pack_b(const FusedOperand<T>& op, std::size_t k_block, std::size_t col_block,
            const BlockingStrategy& s, std::span<T> tile, KernelCounters* counters = nullptr) {
  const std::size_t k = op.rows(), n = op.cols();
  const std::size_t k0 = k_block * s.k_S, col0 = col_block * s.n_S;
  std::fill(tile.begin(), tile.begin() + s.k_S * s.n_S, T{0});
  if (k0 >= k || col0 >= n) return;
  const std::size_t valid_k = std::min(s.k_S, k - k0);
  const std::size_t valid_cols = std::min(s.n_S, n - col0);
  const std::size_t panel_stride = s.n_R * s.k_S;

  for (const auto& term : op.terms()) {
    const auto& v = term.view;
    const std::size_t pk = v.phys_rows() > k0 ? std::min(valid_k, v.phys_rows() - k0) : 0;
    const std::size_t pc = v.phys_cols() > col0 ? std::min(valid_cols, v.phys_cols() - col0) : 0;
    const bool negate = term.coeff < 0;
    for (std::size_t j = 0; j < pc; ++j) {
      const T* src = v.column(col0 + j) + k0;
      T* dst = tile.data() + (j / s.n_R) * panel_stride + (j % s.n_R);
      if (negate) {
        for (std::size_t p = 0; p < pk; ++p) dst[p * s.n_R] -= src[p];
      } else {
        for (std::size_t p = 0; p < pk; ++p) dst[p * s.n_R] += src[p];
      }
    }
  }
  if (counters) {
    const std::uint64_t cells = valid_k * valid_cols;
    counters->reads_b += op.count() * cells;
    counters->flop_add_b += (op.count() - 1) * cells;
  }
}

// --- micro-kernel ---------------------------------------------------------

namespace detail {

template <class T, std::size_t MR, std::size_t NR>
inline void micro_kernel_fixed(const T* __restrict a, const T* __restrict b, T* __restrict acc,
                               std::size_t k) noexcept {
  T c[NR][MR];
  for (std::size_t j = 0; j < NR; ++j)
    for (std::size_t i = 0; i < MR; ++i) c[j][i] = acc[i + j * MR];
  for (std::size_t p = 0; p < k; ++p) {
    const T* ap = a + p * MR;
    const T* bp = b + p * NR;
    for (std::size_t j = 0; j < NR; ++j) {
      const T bj = bp[j];
      for (std::size_t i = 0; i < MR; ++i) c[j][i] += ap[i] * bj;
    }
  }
  for (std::size_t j = 0; j < NR; ++j)
    for (std::size_t i = 0; i < MR; ++i) acc[i + j * MR] = c[j][i];
}

template <class T>
inline void micro_kernel_generic(const T* a, const T* b, T* acc, std::size_t m_R, std::size_t n_R,
                                 std::size_t k) noexcept {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n_R; ++j) {
      const T bj = b[p * n_R + j];
      for (std::size_t i = 0; i < m_R; ++i) acc[i + j * m_R] += a[p * m_R + i] * bj;
    }
}

}  // namespace detail

/// acc (m_R x n_R, column-major) += sum over p < k of a_col(p) * b_row(p).
/// a_panel holds k columns of height m_R, b_panel k rows of width n_R.
template <Scalar T>
void micro_kernel(std::span<const T> a_panel, std::span<const T> b_panel, std::span<T> acc,
                  std::size_t m_R, std::size_t n_R, std::size_t k) noexcept {
  const T* a = a_panel.data();
  const T* b = b_panel.data();
  T* c = acc.data();
  if (m_R == 8 && n_R == 8) return detail::micro_kernel_fixed<T, 8, 8>(a, b, c, k);
  if (m_R == 4 && n_R == 4) return detail::micro_kernel_fixed<T, 4, 4>(a, b, c, k);
  if (m_R == 8 && n_R == 4) return detail::micro_kernel_fixed<T, 8, 4>(a, b, c, k);
  if (m_R == 4 && n_R == 8) return detail::micro_kernel_fixed<T, 4, 8>(a, b, c, k);
  detail::micro_kernel_generic(a, b, c, m_R, n_R, k);
}

// --- write-back -----------------------------------------------------------

namespace detail {

// Clip [begin, begin + len) of a view axis to its physical extent.
inline std::size_t clipped(std::size_t begin, std::size_t len, std::size_t phys) noexcept {
  return phys > begin ? std::min(len, phys - begin) : 0;
}

template <class T>
inline void add_block(const DestinationTerm<T>& term, std::size_t r0, std::size_t rows,
                      std::size_t c0, std::size_t cols, const T* src, std::size_t ld_src) noexcept {
  const bool negate = term.coeff < 0;
  for (std::size_t j = 0; j < cols; ++j) {
    T* dst = term.view.column(c0 + j) + r0;
    const T* s = src + j * ld_src;
    if (negate) {
      for (std::size_t i = 0; i < rows; ++i) dst[i] -= s[i];
    } else {
      for (std::size_t i = 0; i < rows; ++i) dst[i] += s[i];
    }
  }
}

template <class T>
inline void add_block_atomic(const DestinationTerm<T>& term, std::size_t r0, std::size_t rows,
                             std::size_t c0, std::size_t cols, const T* src,
                             std::size_t ld_src) noexcept {
  for (std::size_t j = 0; j < cols; ++j) {
    T* dst = term.view.column(c0 + j) + r0;
    const T* s = src + j * ld_src;
    for (std::size_t i = 0; i < rows; ++i)
      std::atomic_ref<T>(dst[i]).fetch_add(term.coeff * s[i], std::memory_order_relaxed);
  }
}

}  // namespace detail

/// Adds gamma_k * acc into every destination over the tile footprint
/// (row_block, col_block), dropping cells outside each view's physical extent.
template <Scalar T>
void writeback(std::span<const T> acc, const FusedDestination<T>& dest, std::size_t row_block,
               std::size_t col_block, const BlockingStrategy& s,
               KernelCounters* counters = nullptr) {
  const std::size_t m = dest.rows(), n = dest.cols();
  const std::size_t row0 = row_block * s.m_S, col0 = col_block * s.n_S;
  if (row0 >= m || col0 >= n) return;
  if (dest.mode() == WriteMode::BlockAtomic &&
      (dest.locks()->block_rows() < s.m_R || dest.locks()->block_cols() < s.n_R))
    throw std::invalid_argument("writeback: lock table coarser than the register tile required");
  const std::size_t valid_rows = std::min(s.m_S, m - row0);
  const std::size_t valid_cols = std::min(s.n_S, n - col0);
  const std::size_t tiles_m = s.m_S / s.m_R;
  const std::size_t micro = s.m_R * s.n_R;
  std::uint64_t atomics = 0;

  for (std::size_t c = 0; c < valid_cols; c += s.n_R) {
    const std::size_t cl = std::min(s.n_R, valid_cols - c);
    for (std::size_t r = 0; r < valid_rows; r += s.m_R) {
      const std::size_t rl = std::min(s.m_R, valid_rows - r);
      const T* tile = acc.data() + ((r / s.m_R) + (c / s.n_R) * tiles_m) * micro;
      const std::size_t vr = row0 + r, vc = col0 + c;

      switch (dest.mode()) {
        case WriteMode::Plain:
          for (const auto& t : dest.terms())
            detail::add_block(t, vr, detail::clipped(vr, rl, t.view.phys_rows()), vc,
                              detail::clipped(vc, cl, t.view.phys_cols()), tile, s.m_R);
          break;
        case WriteMode::ElementAtomic:
          for (const auto& t : dest.terms()) {
            const std::size_t pr = detail::clipped(vr, rl, t.view.phys_rows());
            const std::size_t pc = detail::clipped(vc, cl, t.view.phys_cols());
            detail::add_block_atomic(t, vr, pr, vc, pc, tile, s.m_R);
            atomics += pr * pc;
          }
          break;
        case WriteMode::BlockAtomic: {
          // Lock every lock word the footprints touch, in ascending order.
          LockTable& locks = *dest.locks();
          std::array<std::size_t, 4 * kMaxFusedTerms> ids{};
          std::size_t nids = 0;
          for (const auto& t : dest.terms()) {
            const std::size_t pr = detail::clipped(vr, rl, t.view.phys_rows());
            const std::size_t pc = detail::clipped(vc, cl, t.view.phys_cols());
            if (pr == 0 || pc == 0) continue;
            const std::size_t br = t.view.row_offset() + vr, bc = t.view.col_offset() + vc;
            for (std::size_t lr : {br, br + pr - 1})
              for (std::size_t lc : {bc, bc + pc - 1}) ids[nids++] = locks.cell(lr, lc);
          }
          std::sort(ids.begin(), ids.begin() + nids);
          nids = static_cast<std::size_t>(std::unique(ids.begin(), ids.begin() + nids) - ids.begin());
          for (std::size_t i = 0; i < nids; ++i) locks.lock(ids[i]);
          for (const auto& t : dest.terms())
            detail::add_block(t, vr, detail::clipped(vr, rl, t.view.phys_rows()), vc,
                              detail::clipped(vc, cl, t.view.phys_cols()), tile, s.m_R);
          for (std::size_t i = nids; i-- > 0;) locks.unlock(ids[i]);
          atomics += nids;
          break;
        }
      }
    }
  }
  if (counters) {
    const std::uint64_t cells = valid_rows * valid_cols;
    counters->updates_c += dest.count() * cells;
    counters->flop_add_c += dest.count() * cells;
    counters->atomic_ops += atomics;
  }
}

// --- tile and full multiply ----------------------------------------------

/// Computes one m_S x n_S output tile: pack, rank-k_S updates over all k
/// blocks, then write back. Uses only the buffers in ws.
template <Scalar T>
void compute_tile(const FusedOperand<T>& a, const FusedOperand<T>& b, const FusedDestination<T>& c,
                  const BlockingStrategy& s, std::size_t row_block, std::size_t col_block,
                  Workspace<T>& ws, KernelCounters* counters = nullptr) {
  const std::size_t m = c.rows(), n = c.cols(), k = a.cols();
  const std::size_t row0 = row_block * s.m_S, col0 = col_block * s.n_S;
  if (row0 >= m || col0 >= n) return;
  const std::size_t valid_rows = std::min(s.m_S, m - row0);
  const std::size_t valid_cols = std::min(s.n_S, n - col0);
  const std::size_t tiles_m = s.m_S / s.m_R;
  const std::size_t micro = s.m_R * s.n_R;

  auto acc = ws.accumulator();
  auto a_tile = ws.a_tile();
  auto b_tile = ws.b_tile();
  std::fill(acc.begin(), acc.end(), T{0});

  std::uint64_t mul_flops = 0, kernels = 0;
  for (std::size_t kb = 0; kb * s.k_S < k; ++kb) {
    const std::size_t valid_k = std::min(s.k_S, k - kb * s.k_S);
    pack_a(a, row_block, kb, s, a_tile, counters);
    pack_b(b, kb, col_block, s, b_tile, counters);
    for (std::size_t c0 = 0; c0 < valid_cols; c0 += s.n_R) {
      const std::size_t tj = c0 / s.n_R;
      for (std::size_t r0 = 0; r0 < valid_rows; r0 += s.m_R) {
        const std::size_t ti = r0 / s.m_R;
        micro_kernel<T>(std::span<const T>(a_tile.data() + ti * s.m_R * s.k_S, s.m_R * s.k_S),
                        std::span<const T>(b_tile.data() + tj * s.n_R * s.k_S, s.n_R * s.k_S),
                        acc.subspan((ti + tj * tiles_m) * micro, micro), s.m_R, s.n_R, valid_k);
        mul_flops += 2 * micro * valid_k;
        ++kernels;
      }
    }
  }
  if (k > 0) writeback<T>(acc, c, row_block, col_block, s, counters);
  if (counters) {
    counters->flop_mul += mul_flops;
    counters->micro_kernels += kernels;
    counters->tiles += 1;
  }
}

/// dest_k += gamma_k * (sum alpha_i X_i)(sum beta_j V_j), tile by tile on the
/// calling thread.
template <Scalar T>
void fused_multiply(const FusedOperand<T>& a, const FusedOperand<T>& b,
                    const FusedDestination<T>& c, const BlockingStrategy& s,
                    KernelCounters* counters = nullptr) {
  check_conformance(a, b, c);
  Workspace<T> ws(s);
  const TileGrid grid = tile_grid(c.rows(), c.cols(), s);
  for (std::size_t cb = 0; cb < grid.col_blocks; ++cb)
    for (std::size_t rb = 0; rb < grid.row_blocks; ++rb) compute_tile(a, b, c, s, rb, cb, ws, counters);
}

/// Plain C += A * B through the same blocked path.
template <Scalar T>
void gemm(MatrixView<const T> A, MatrixView<const T> B, MatrixView<T> C, const BlockingStrategy& s,
          KernelCounters* counters = nullptr) {
  fused_multiply(FusedOperand<T>(A), FusedOperand<T>(B), FusedDestination<T>(C), s, counters);
}

extern template void fused_multiply<float>(const FusedOperand<float>&, const FusedOperand<float>&,
                                           const FusedDestination<float>&, const BlockingStrategy&,
                                           KernelCounters*);
extern template void fused_multiply<double>(const FusedOperand<double>&,
                                            const FusedOperand<double>&,
                                            const FusedDestination<double>&,
                                            const BlockingStrategy&, KernelCounters*);

}  // namespace fastmm
