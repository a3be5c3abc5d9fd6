#include "fastmm/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace fastmm {
namespace {

constexpr std::array<char, 4> kMagic = {'S', 'M', 'A', 'T'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(U)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<U>(bytes);
  }
  return v;
}

template <class U>
void put(std::ostream& out, U v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <class U>
U get(std::istream& in) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(U));
  if (!in) throw SmatError("SMAT: truncated input");
  return to_little(v);
}

template <Scalar T>
void write_impl(std::ostream& out, const Matrix<T>& m) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (m.rows() > kMax || m.cols() > kMax) throw SmatError("SMAT: dimensions exceed u32");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dtype_of<T>()));
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) put<T>(out, m(i, j));
  if (!out) throw SmatError("SMAT: write failed");
}

template <Scalar T>
Matrix<T> read_payload(std::istream& in, std::size_t rows, std::size_t cols) {
  Matrix<T> m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = get<T>(in);
  return m;
}

}  // namespace

void write_smat(std::ostream& out, const Matrix<float>& m) { write_impl(out, m); }
void write_smat(std::ostream& out, const Matrix<double>& m) { write_impl(out, m); }

AnyMatrix read_smat(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw SmatError("SMAT: bad magic");
  const auto rows = get<std::uint32_t>(in);
  const auto cols = get<std::uint32_t>(in);
  const auto code = get<std::uint32_t>(in);
  switch (static_cast<DType>(code)) {
    case DType::F32: return read_payload<float>(in, rows, cols);
    case DType::F64: return read_payload<double>(in, rows, cols);
  }
  throw SmatError("SMAT: unknown dtype code " + std::to_string(code));
}

void save_smat(const std::filesystem::path& path, const AnyMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SmatError("SMAT: cannot open " + path.string());
  std::visit([&](const auto& mat) { write_smat(out, mat); }, m);
}

AnyMatrix load_smat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SmatError("SMAT: cannot open " + path.string());
  return read_smat(in);
}

}  // namespace fastmm
