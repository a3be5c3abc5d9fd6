#pragma once

// Analytical GPU model for the fused primitive: per-thread-block memory and
// flop counts, blocking constraints, occupancy and a three-resource time
// prediction T = max(T_flop, T_gmop, T_smop).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fastmm/blocking.hpp"
#include "fastmm/strassen.hpp"

namespace fastmm {

struct HardwareSpec {
  std::string name;
  double tau_flop = 0;      // flop/s
  double tau_gmop = 0;      // bytes/s, global memory after texture boost
  double tau_smop = 0;      // bytes/s, shared memory
  std::size_t sm_count = 0;
  std::size_t max_regs_per_thread = 0;
  std::size_t regs_per_sm = 0;
  std::size_t shared_mem_per_sm = 0;  // bytes
  std::size_t word_size = 0;          // bytes
  std::size_t max_blocks_per_sm_cap = 0;
  double raw_hbm_bw = 0;    // bytes/s
  double texture_boost = 0;

  /// Recomputes tau_gmop from raw_hbm_bw and texture_boost.
  void set_global_bandwidth(double raw, double boost) noexcept {
    raw_hbm_bw = raw;
    texture_boost = boost;
    tau_gmop = raw * (1 + boost);
  }
  void validate() const;

  static HardwareSpec v100();
};

struct OpCounts {
  std::uint64_t n_gmop = 0;  // words per thread block
  std::uint64_t n_smop = 0;
  std::uint64_t n_flop_mul = 0;
  std::uint64_t n_flop_add_a = 0;
  std::uint64_t n_flop_add_b = 0;
  std::uint64_t n_flop_add_c = 0;

  std::uint64_t n_flop() const noexcept {
    return n_flop_mul + n_flop_add_a + n_flop_add_b + n_flop_add_c;
  }
};

/// Counts for one m_S x n_S thread block running the full k loop.
/// Throws std::invalid_argument on zero dimensions.
OpCounts count_ops(const BlockingStrategy& s, const VariantClass& cls, std::size_t m,
                   std::size_t n, std::size_t k);

struct ConstraintCheck {
  std::string id;  // global_bandwidth, shared_bandwidth, registers, shared_size, prefetch
  bool satisfied = false;
  double lhs = 0;
  double rhs = 0;
  std::string relation;  // ">=" or "<"
};

/// All five inequalities, evaluated with k large (C traffic dropped).
std::vector<ConstraintCheck> check_constraints(const BlockingStrategy& s, const VariantClass& cls,
                                               const HardwareSpec& hw);

/// Smallest m_S = n_S meeting the global bandwidth inequality.
double minimal_square_block(const VariantClass& cls, const HardwareSpec& hw);
/// Smallest m_R = n_R meeting the shared bandwidth inequality. Without a
/// block size the m_S -> infinity limit is returned; with one, nullopt means
/// no register tile is large enough.
std::optional<double> minimal_square_register_tile(const HardwareSpec& hw,
                                                   std::optional<double> block = std::nullopt);
/// Largest integer m_R = n_R meeting the register inequality (0 if none).
std::size_t max_square_register_tile(const VariantClass& cls, const HardwareSpec& hw);

/// m_R n_R + (2 + W_A) m_R + (2 + W_B) n_R + W_A + W_B + 5.
std::size_t registers_per_thread(const BlockingStrategy& s, const VariantClass& cls) noexcept;

struct OccupancyDetail {
  std::size_t blocks = 0;
  std::size_t by_registers = 0;
  std::size_t by_shared = 0;
  std::size_t cap = 0;
  std::size_t regs_per_thread = 0;
  bool spills = false;      // target above the register limit
  bool overridden = false;
};

OccupancyDetail occupancy_detail(const BlockingStrategy& s, const VariantClass& cls,
                                 const HardwareSpec& hw,
                                 std::optional<std::size_t> override_blocks = std::nullopt);

/// Active thread blocks per SM.
std::size_t occupancy(const BlockingStrategy& s, const VariantClass& cls, const HardwareSpec& hw,
                      std::optional<std::size_t> override_blocks = std::nullopt);

struct Prediction {
  double t_flop = 0, t_smop = 0, t_gmop = 0, t_total = 0;
  std::size_t active_blocks = 0;  // per SM
  std::size_t tiles = 0;
  std::size_t waves = 0;
  std::string limiting_resource;  // flop, gmop, smop
  OpCounts counts;
};

Prediction predict(const BlockingStrategy& s, const VariantClass& cls, const HardwareSpec& hw,
                   std::size_t m, std::size_t n, std::size_t k,
                   std::optional<std::size_t> occupancy_override = std::nullopt);

struct ModelRow {
  std::string op;  // op name, or "total" for the aggregate
  std::size_t m = 0, n = 0, k = 0;
  int level = 0;
  std::string cls;  // "1-1-1" style, or "all" for a Strassen aggregate
  double t_flop = 0, t_smop = 0, t_gmop = 0, t_total = 0;
  std::string limiting_resource;
  double effective_tflops = 0;
  long double flop_mul = 0;  // multiply flops over all tiles
};

struct ModelReport {
  std::vector<ModelRow> ops;
  ModelRow total;
};

/// Ops of a level run one after another on the device; each op works on the
/// ceil-halved subproblem. The aggregate sums the per-op times.
ModelReport model_report(int levels, const BlockingStrategy& s, const HardwareSpec& hw,
                         std::size_t m, std::size_t n, std::size_t k,
                         std::optional<std::size_t> occupancy_override = std::nullopt);

/// "start:stop:step" (inclusive) or a single value.
std::vector<std::size_t> parse_sweep(const std::string& text);

void write_model_header(std::ostream& os, bool with_op = false);
void write_model_row(std::ostream& os, const ModelRow& row, bool with_op = false);

}  // namespace fastmm
