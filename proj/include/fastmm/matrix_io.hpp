#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <variant>

#include "fastmm/matrix.hpp"

namespace fastmm {

// SMAT fixture format: "SMAT" magic, u32 rows, u32 cols, u32 dtype
// (0 = f32, 1 = f64), all little-endian, followed by the column-major payload.

enum class DType : std::uint32_t { F32 = 0, F64 = 1 };

using AnyMatrix = std::variant<Matrix<float>, Matrix<double>>;

class SmatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <Scalar T>
constexpr DType dtype_of() noexcept {
  return std::is_same_v<T, float> ? DType::F32 : DType::F64;
}

void write_smat(std::ostream& out, const Matrix<float>& m);
void write_smat(std::ostream& out, const Matrix<double>& m);
AnyMatrix read_smat(std::istream& in);

void save_smat(const std::filesystem::path& path, const AnyMatrix& m);
AnyMatrix load_smat(const std::filesystem::path& path);

/// Loads a fixture and converts it to T when the stored dtype differs.
template <Scalar T>
Matrix<T> load_smat_as(const std::filesystem::path& path) {
  return std::visit(
      [](auto&& m) {
        Matrix<T> out(m.rows(), m.cols());
        for (std::size_t j = 0; j < m.cols(); ++j)
          for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = static_cast<T>(m(i, j));
        return out;
      },
      load_smat(path));
}

}  // namespace fastmm
