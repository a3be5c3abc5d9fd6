#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <vector>

namespace fastmm {

template <class T>
concept Scalar = std::is_same_v<T, float> || std::is_same_v<T, double>;

template <class T>
class MatrixView;

/// Dense column-major matrix. Element (i, j) lives at i + j * leading_dim.
template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, rows) {}
  Matrix(std::size_t rows, std::size_t cols, std::size_t leading_dim)
      : rows_(rows), cols_(cols), ld_(std::max<std::size_t>(leading_dim, 1)) {
    if (leading_dim < rows) throw std::invalid_argument("Matrix: leading_dim < rows");
    data_.assign(ld_ * cols_, T{0});
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t leading_dim() const noexcept { return ld_; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::size_t storage_size() const noexcept { return data_.size(); }

  T& operator()(std::size_t i, std::size_t j) noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i + j * ld_];
  }
  const T& operator()(std::size_t i, std::size_t j) const noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i + j * ld_];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  MatrixView<T> view();
  MatrixView<const T> view() const;
  MatrixView<const T> cview() const { return view(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t ld_ = 1;
  std::vector<T> data_;
};

/// Strided window into a Matrix. The logical extent (rows x cols) may exceed
/// the physically backed extent; reads beyond it are zero, writes are dropped.
template <class T>
class MatrixView {
 public:
  using value_type = std::remove_const_t<T>;

  MatrixView() = default;
  MatrixView(T* base, std::size_t base_rows, std::size_t base_cols, std::size_t ld)
      : base_(base), base_rows_(base_rows), base_cols_(base_cols), ld_(ld),
        rows_(base_rows), cols_(base_cols), phys_rows_(base_rows), phys_cols_(base_cols) {}

  MatrixView(T* base, std::size_t base_rows, std::size_t base_cols, std::size_t ld,
             std::size_t row_offset, std::size_t col_offset, std::size_t rows, std::size_t cols,
             std::size_t phys_rows, std::size_t phys_cols)
      : base_(base), base_rows_(base_rows), base_cols_(base_cols), ld_(ld),
        row_offset_(row_offset), col_offset_(col_offset), rows_(rows), cols_(cols),
        phys_rows_(phys_rows), phys_cols_(phys_cols) {
    if (phys_rows > rows || phys_cols > cols)
      throw std::invalid_argument("MatrixView: physical extent exceeds logical extent");
    if (row_offset + phys_rows > base_rows || col_offset + phys_cols > base_cols)
      throw std::out_of_range("MatrixView: window exceeds base matrix");
  }

  // const views from mutable ones
  template <class U>
    requires(std::is_const_v<T> && std::is_same_v<std::remove_const_t<T>, U>)
  MatrixView(const MatrixView<U>& other)  // NOLINT(google-explicit-constructor)
      : MatrixView(other.base(), other.base_rows(), other.base_cols(), other.leading_dim(),
                   other.row_offset(), other.col_offset(), other.rows(), other.cols(),
                   other.phys_rows(), other.phys_cols()) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t phys_rows() const noexcept { return phys_rows_; }
  std::size_t phys_cols() const noexcept { return phys_cols_; }
  std::size_t row_offset() const noexcept { return row_offset_; }
  std::size_t col_offset() const noexcept { return col_offset_; }
  std::size_t leading_dim() const noexcept { return ld_; }
  std::size_t base_rows() const noexcept { return base_rows_; }
  std::size_t base_cols() const noexcept { return base_cols_; }
  T* base() const noexcept { return base_; }

  /// Pointer to the view's (0, 0). Only dereferenceable when phys extent is nonzero.
  T* data() const noexcept { return base_ + row_offset_ + col_offset_ * ld_; }
  /// Pointer to physical column j, valid for rows [0, phys_rows).
  T* column(std::size_t j) const noexcept { return data() + j * ld_; }

  bool fully_physical() const noexcept { return phys_rows_ == rows_ && phys_cols_ == cols_; }

  value_type read_padded(std::size_t i, std::size_t j) const noexcept {
    assert(i < rows_ && j < cols_);
    if (i >= phys_rows_ || j >= phys_cols_) return value_type{0};
    return base_[(row_offset_ + i) + (col_offset_ + j) * ld_];
  }

  void write_clipped(std::size_t i, std::size_t j, value_type value) const noexcept
    requires(!std::is_const_v<T>)
  {
    assert(i < rows_ && j < cols_);
    if (i >= phys_rows_ || j >= phys_cols_) return;
    base_[(row_offset_ + i) + (col_offset_ + j) * ld_] = value;
  }

  bool same_window(const MatrixView& other) const noexcept {
    return base_ == other.base_ && row_offset_ == other.row_offset_ &&
           col_offset_ == other.col_offset_ && rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  T* base_ = nullptr;
  std::size_t base_rows_ = 0;
  std::size_t base_cols_ = 0;
  std::size_t ld_ = 1;
  std::size_t row_offset_ = 0;
  std::size_t col_offset_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t phys_rows_ = 0;
  std::size_t phys_cols_ = 0;
};

template <Scalar T>
MatrixView<T> Matrix<T>::view() {
  return MatrixView<T>(data_.data(), rows_, cols_, ld_);
}

template <Scalar T>
MatrixView<const T> Matrix<T>::view() const {
  return MatrixView<const T>(data_.data(), rows_, cols_, ld_);
}

enum class Quadrant : unsigned char { Q00 = 0, Q01 = 1, Q10 = 2, Q11 = 3 };

inline constexpr std::array<Quadrant, 4> kAllQuadrants = {Quadrant::Q00, Quadrant::Q01,
                                                          Quadrant::Q10, Quadrant::Q11};

constexpr unsigned quadrant_row(Quadrant q) noexcept { return static_cast<unsigned>(q) >> 1; }
constexpr unsigned quadrant_col(Quadrant q) noexcept { return static_cast<unsigned>(q) & 1u; }
constexpr Quadrant make_quadrant(unsigned row, unsigned col) noexcept {
  return static_cast<Quadrant>((row << 1) | col);
}
constexpr std::string_view quadrant_label(Quadrant q) noexcept {
  constexpr std::array<std::string_view, 4> labels = {"00", "01", "10", "11"};
  return labels[static_cast<unsigned>(q)];
}

namespace detail {

// Splits one axis of a view: logical half is ceil(n/2); the physical part is
// whatever of the parent's physical extent falls in that half.
struct AxisSplit {
  std::size_t offset;
  std::size_t logical;
  std::size_t physical;
};

inline AxisSplit split_axis(std::size_t offset, std::size_t logical, std::size_t physical,
                            std::size_t base_extent, unsigned half) noexcept {
  const std::size_t h = (logical + 1) / 2;
  if (half == 0) return {offset, h, std::min(h, physical)};
  const std::size_t phys = physical > h ? physical - h : 0;
  // Keep the offset inside the base when nothing is physically backed.
  const std::size_t off = std::min(offset + h, base_extent);
  return {phys == 0 ? off : offset + h, h, phys};
}

}  // namespace detail

/// Quadrant (p, q) of an m x n view: logical ceil(m/2) x ceil(n/2) for all
/// four quadrants, with the trailing half physically floor-sized.
template <class T>
MatrixView<T> quadrant(const MatrixView<T>& v, Quadrant q) {
  assert(v.rows() >= 1 && v.cols() >= 1);
  const auto r = detail::split_axis(v.row_offset(), v.rows(), v.phys_rows(), v.base_rows(),
                                    quadrant_row(q));
  const auto c = detail::split_axis(v.col_offset(), v.cols(), v.phys_cols(), v.base_cols(),
                                    quadrant_col(q));
  return MatrixView<T>(v.base(), v.base_rows(), v.base_cols(), v.leading_dim(), r.offset,
                       c.offset, r.logical, c.logical, r.physical, c.physical);
}

}  // namespace fastmm
