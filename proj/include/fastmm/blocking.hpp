#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fastmm {

inline constexpr std::size_t kWarpSize = 32;

/// Tile sizes at each level of the hierarchy: thread block (S), warp (W) and
/// per-thread register tile (R).
struct BlockingStrategy {
  std::string name;
  std::size_t m_S = 0, n_S = 0, k_S = 0;
  std::size_t m_R = 0, n_R = 0;
  std::size_t m_W = 0, n_W = 0;
  // Launch-bounds style occupancy target the kernel is compiled for; 0 = none.
  std::size_t min_blocks_per_sm = 0;

  std::size_t threads_x() const noexcept { return m_R ? m_S / m_R : 0; }
  std::size_t threads_y() const noexcept { return n_R ? n_S / n_R : 0; }
  std::size_t threads() const noexcept { return threads_x() * threads_y(); }

  /// Scalars a worker needs for one A tile, one B tile and the C accumulator.
  std::size_t workspace_scalars() const noexcept { return m_S * k_S + k_S * n_S + m_S * n_S; }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

class UnknownStrategy : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class StrategyCatalog {
 public:
  StrategyCatalog() = default;
  explicit StrategyCatalog(std::vector<BlockingStrategy> entries);

  /// Case-insensitive. Throws UnknownStrategy listing the valid names.
  const BlockingStrategy& lookup(std::string_view name) const;
  bool contains(std::string_view name) const noexcept;

  /// Adds or replaces (by case-insensitive name) after validating.
  void upsert(BlockingStrategy s);

  const std::vector<BlockingStrategy>& entries() const noexcept { return entries_; }
  std::string names() const;

 private:
  std::vector<BlockingStrategy> entries_;
};

/// Huge, Large, Medium, Small.
const StrategyCatalog& default_catalog();

}  // namespace fastmm
