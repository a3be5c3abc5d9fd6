#include "fastmm/kernel.hpp"

namespace fastmm {

void WorkspaceStats::on_allocate(std::uint64_t n) noexcept {
  instances.fetch_add(1, std::memory_order_relaxed);
  const auto now = live.fetch_add(n, std::memory_order_relaxed) + n;
  auto peak = peak_live.load(std::memory_order_relaxed);
  while (now > peak && !peak_live.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {}
  auto hi = max_instance.load(std::memory_order_relaxed);
  while (n > hi && !max_instance.compare_exchange_weak(hi, n, std::memory_order_relaxed)) {}
  auto lo = min_instance.load(std::memory_order_relaxed);
  while (n < lo && !min_instance.compare_exchange_weak(lo, n, std::memory_order_relaxed)) {}
}

WorkspaceStats& workspace_stats() noexcept {
  static WorkspaceStats stats;
  return stats;
}

template void fused_multiply<float>(const FusedOperand<float>&, const FusedOperand<float>&,
                                    const FusedDestination<float>&, const BlockingStrategy&,
                                    KernelCounters*);
template void fused_multiply<double>(const FusedOperand<double>&, const FusedOperand<double>&,
                                     const FusedDestination<double>&, const BlockingStrategy&,
                                     KernelCounters*);

}  // namespace fastmm
