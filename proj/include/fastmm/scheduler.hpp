#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastmm/blocking.hpp"
#include "fastmm/kernel.hpp"
#include "fastmm/matrix.hpp"
#include "fastmm/strassen.hpp"

namespace fastmm {

enum class ExecMode { Sequential, Staged, FullAtomicElement, FullAtomicBlock, SingleDispatch };

inline constexpr std::array<ExecMode, 5> kAllModes = {
    ExecMode::Sequential, ExecMode::Staged, ExecMode::FullAtomicElement, ExecMode::FullAtomicBlock,
    ExecMode::SingleDispatch};

/// "sequential", "staged", "atomic-element", "atomic-block", "single-dispatch".
std::string_view to_string(ExecMode mode) noexcept;
std::optional<ExecMode> parse_exec_mode(std::string_view text) noexcept;

/// Write mode the executor uses for destinations in a given mode.
WriteMode write_mode_for(ExecMode mode, WriteMode single_dispatch = WriteMode::ElementAtomic) noexcept;

/// Streams run concurrently inside a stage; ops inside a stream run in order.
/// Stages are separated by full barriers.
struct Stage {
  std::vector<std::vector<std::size_t>> streams;  // indices into Schedule::ops
};

struct Schedule {
  ExecMode mode = ExecMode::Sequential;
  std::vector<StrassenOp> ops;
  std::vector<Stage> stages;

  std::size_t max_streams() const noexcept;
  std::size_t op_count() const noexcept { return ops.size(); }
};

/// Ops sorted by descending W_C, then id. Both Sequential and Staged follow it,
/// so every destination sees its writers in the same order in both modes.
std::vector<std::size_t> documented_order(const std::vector<StrassenOp>& ops);

/// Staged: greedy list scheduling. A stage holds up to `streams` streams whose
/// destination sets are pairwise disjoint; a stream holds at most
/// `stream_depth` ops (which may share destinations). An op never overtakes a
/// deferred op it conflicts with.
/// FullAtomic* and SingleDispatch: one stage, one op per stream.
/// Sequential: one stage, one stream.
Schedule build_schedule(std::vector<StrassenOp> ops, std::size_t streams, ExecMode mode,
                        std::size_t stream_depth = 2);

/// Every op exactly once; in Staged mode, destinations of different streams
/// within a stage are disjoint. Returns an error description, or nullopt.
std::optional<std::string> validate_schedule(const Schedule& schedule);

/// Stage/stream grid with op names, one stream per line.
std::string format_schedule(const Schedule& schedule);

struct ExecutionOptions {
  WriteMode single_dispatch_write = WriteMode::ElementAtomic;
  /// Record which C quadrants each running op writes and count overlaps
  /// between ops of different streams.
  bool track_writes = false;
};

struct ExecutionReport {
  std::vector<double> op_seconds;  // per op, first tile start to last tile end
  std::size_t stages = 0;
  std::size_t barriers = 0;
  std::size_t multiply_count = 0;
  std::size_t write_conflicts = 0;
  std::size_t workers = 0;
  double seconds = 0;
  KernelCounters counters;
};

/// Owns the worker pool. Safe for concurrent use only through distinct instances.
class Executor {
 public:
  explicit Executor(std::size_t workers = 0);  // 0 = hardware concurrency
  ~Executor();
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  std::size_t workers() const noexcept;

  /// C += A B through the schedule's ops. Throws std::invalid_argument on
  /// nonconformant operands.
  template <Scalar T>
  ExecutionReport run(const Schedule& schedule, MatrixView<const T> A, MatrixView<const T> B,
                      MatrixView<T> C, const BlockingStrategy& strategy,
                      const ExecutionOptions& options = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

template <Scalar T>
ExecutionReport execute(const Schedule& schedule, MatrixView<const T> A, MatrixView<const T> B,
                        MatrixView<T> C, const BlockingStrategy& strategy, std::size_t workers = 0,
                        const ExecutionOptions& options = {}) {
  Executor ex(workers);
  return ex.run<T>(schedule, A, B, C, strategy, options);
}

struct MultiplyConfig {
  int levels = 1;
  ExecMode mode = ExecMode::Staged;
  std::size_t streams = 2;
  std::size_t stream_depth = 2;
  ExecutionOptions options;
};

/// C += A B with 0-, 1- or 2-level Strassen on an existing executor.
template <Scalar T>
ExecutionReport multiply(Executor& ex, MatrixView<const T> A, MatrixView<const T> B,
                         MatrixView<T> C, const BlockingStrategy& strategy,
                         const MultiplyConfig& cfg = {}) {
  const auto schedule =
      build_schedule(ops_for_level(cfg.levels), cfg.streams, cfg.mode, cfg.stream_depth);
  return ex.run<T>(schedule, A, B, C, strategy, cfg.options);
}

extern template ExecutionReport Executor::run<float>(const Schedule&, MatrixView<const float>,
                                                     MatrixView<const float>, MatrixView<float>,
                                                     const BlockingStrategy&,
                                                     const ExecutionOptions&);
extern template ExecutionReport Executor::run<double>(const Schedule&, MatrixView<const double>,
                                                      MatrixView<const double>, MatrixView<double>,
                                                      const BlockingStrategy&,
                                                      const ExecutionOptions&);

}  // namespace fastmm
