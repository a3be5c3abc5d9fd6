#include "fastmm/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <oneapi/tbb/blocked_range.h>
#include <oneapi/tbb/enumerable_thread_specific.h>
#include <oneapi/tbb/global_control.h>
#include <oneapi/tbb/parallel_for.h>
#include <oneapi/tbb/task_arena.h>
#include <oneapi/tbb/task_group.h>

namespace fastmm {

std::string_view to_string(ExecMode mode) noexcept {
  switch (mode) {
    case ExecMode::Sequential: return "sequential";
    case ExecMode::Staged: return "staged";
    case ExecMode::FullAtomicElement: return "atomic-element";
    case ExecMode::FullAtomicBlock: return "atomic-block";
    case ExecMode::SingleDispatch: return "single-dispatch";
  }
  return "?";
}

std::optional<ExecMode> parse_exec_mode(std::string_view text) noexcept {
  for (ExecMode m : kAllModes)
    if (to_string(m) == text) return m;
  return std::nullopt;
}

WriteMode write_mode_for(ExecMode mode, WriteMode single_dispatch) noexcept {
  switch (mode) {
    case ExecMode::FullAtomicElement: return WriteMode::ElementAtomic;
    case ExecMode::FullAtomicBlock: return WriteMode::BlockAtomic;
    case ExecMode::SingleDispatch:
      return single_dispatch == WriteMode::Plain ? WriteMode::ElementAtomic : single_dispatch;
    default: return WriteMode::Plain;
  }
}

std::size_t Schedule::max_streams() const noexcept {
  std::size_t n = 0;
  for (const auto& st : stages) n = std::max(n, st.streams.size());
  return n;
}

std::vector<std::size_t> documented_order(const std::vector<StrassenOp>& ops) {
  std::vector<std::size_t> order(ops.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (ops[x].c.size() != ops[y].c.size()) return ops[x].c.size() > ops[y].c.size();
    return ops[x].id < ops[y].id;
  });
  return order;
}

namespace {

std::vector<Stage> greedy_stages(const std::vector<StrassenOp>& ops, std::size_t streams,
                                 std::size_t depth) {
  std::vector<std::size_t> remaining = documented_order(ops);
  std::vector<Stage> stages;
  auto conflicts = [&](std::size_t x, std::size_t y) {
    return destinations_conflict(ops[x], ops[y]);
  };

  while (!remaining.empty()) {
    std::vector<std::vector<std::size_t>> lanes;
    std::vector<std::size_t> deferred;
    for (std::size_t idx : remaining) {
      const bool blocked = std::any_of(deferred.begin(), deferred.end(),
                                       [&](std::size_t d) { return conflicts(d, idx); });
      if (blocked) {
        deferred.push_back(idx);
        continue;
      }
      std::vector<std::size_t> hits;
      for (std::size_t s = 0; s < lanes.size(); ++s)
        if (std::any_of(lanes[s].begin(), lanes[s].end(),
                        [&](std::size_t o) { return conflicts(o, idx); }))
          hits.push_back(s);

      std::optional<std::size_t> target;
      if (hits.size() == 1) {
        if (lanes[hits.front()].size() < depth) target = hits.front();
      } else if (hits.empty()) {
        if (lanes.size() < streams) {
          lanes.emplace_back();
          target = lanes.size() - 1;
        } else {
          // No free stream: serialize behind the least loaded one with room.
          std::size_t best = lanes.size();
          for (std::size_t s = 0; s < lanes.size(); ++s)
            if (lanes[s].size() < depth && (best == lanes.size() || lanes[s].size() < lanes[best].size()))
              best = s;
          if (best < lanes.size()) target = best;
        }
      }
      if (target) {
        lanes[*target].push_back(idx);
      } else {
        deferred.push_back(idx);
      }
    }
    stages.push_back(Stage{std::move(lanes)});
    remaining = std::move(deferred);
  }
  return stages;
}

}  // namespace

Schedule build_schedule(std::vector<StrassenOp> ops, std::size_t streams, ExecMode mode,
                        std::size_t stream_depth) {
  if (streams == 0) throw std::invalid_argument("build_schedule: streams must be >= 1");
  if (stream_depth == 0) throw std::invalid_argument("build_schedule: stream_depth must be >= 1");
  Schedule sch;
  sch.mode = mode;
  sch.ops = std::move(ops);
  if (sch.ops.empty()) return sch;
  const auto order = documented_order(sch.ops);

  switch (mode) {
    case ExecMode::Sequential:
      sch.stages.push_back(Stage{{order}});
      break;
    case ExecMode::Staged:
      sch.stages = greedy_stages(sch.ops, streams, stream_depth);
      break;
    case ExecMode::FullAtomicElement:
    case ExecMode::FullAtomicBlock:
    case ExecMode::SingleDispatch: {
      Stage st;
      for (std::size_t idx : order) st.streams.push_back({idx});
      sch.stages.push_back(std::move(st));
      break;
    }
  }
  return sch;
}

std::optional<std::string> validate_schedule(const Schedule& sch) {
  std::vector<int> seen(sch.ops.size(), 0);
  for (const auto& st : sch.stages)
    for (const auto& lane : st.streams)
      for (std::size_t idx : lane) {
        if (idx >= sch.ops.size()) return "op index out of range: " + std::to_string(idx);
        ++seen[idx];
      }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (seen[i] != 1)
      return sch.ops[i].name + " scheduled " + std::to_string(seen[i]) + " times";

  if (sch.mode == ExecMode::Staged || sch.mode == ExecMode::Sequential) {
    for (std::size_t s = 0; s < sch.stages.size(); ++s) {
      const auto& lanes = sch.stages[s].streams;
      for (std::size_t x = 0; x < lanes.size(); ++x)
        for (std::size_t y = x + 1; y < lanes.size(); ++y)
          for (std::size_t i : lanes[x])
            for (std::size_t j : lanes[y])
              if (destinations_conflict(sch.ops[i], sch.ops[j]))
                return "stage " + std::to_string(s + 1) + ": " + sch.ops[i].name + " and " +
                       sch.ops[j].name + " write the same C quadrant from different streams";
    }
  }
  return std::nullopt;
}

std::string format_schedule(const Schedule& sch) {
  std::ostringstream os;
  os << "schedule: mode=" << to_string(sch.mode) << " ops=" << sch.ops.size()
     << " stages=" << sch.stages.size() << " streams=" << sch.max_streams() << "\n";
  for (std::size_t s = 0; s < sch.stages.size(); ++s) {
    os << "stage " << s + 1 << ":\n";
    const auto& lanes = sch.stages[s].streams;
    for (std::size_t l = 0; l < lanes.size(); ++l) {
      os << "  stream " << l + 1 << ":";
      for (std::size_t idx : lanes[l]) os << ' ' << sch.ops[idx].name;
      os << "\n";
    }
  }
  return os.str();
}

// --- execution -------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

// Tracks destination paths of running ops; counts overlaps across streams.
class WriteTracker {
 public:
  void begin(const StrassenOp& op, std::size_t lane_key) {
    std::lock_guard lk(mu_);
    for (const auto& a : active_)
      if (a.lane != lane_key)
        for (const auto& t : op.c)
          if (paths_overlap(a.path, t.path)) ++conflicts_;
    for (const auto& t : op.c) active_.push_back({t.path, lane_key, op.id});
  }
  void end(const StrassenOp& op) {
    std::lock_guard lk(mu_);
    std::erase_if(active_, [&](const Entry& e) { return e.op == op.id; });
  }
  std::size_t conflicts() const { return conflicts_; }

 private:
  struct Entry {
    QuadrantPath path;
    std::size_t lane;
    std::size_t op;
  };
  std::mutex mu_;
  std::vector<Entry> active_;
  std::size_t conflicts_ = 0;
};

}  // namespace

struct Executor::Impl {
  explicit Impl(std::size_t n)
      : workers(n ? n : std::max(1u, std::thread::hardware_concurrency())),
        control(tbb::global_control::max_allowed_parallelism, workers),
        arena(static_cast<int>(workers)) {}

  std::size_t workers;
  tbb::global_control control;
  tbb::task_arena arena;
};

Executor::Executor(std::size_t workers) : impl_(std::make_unique<Impl>(workers)) {}
Executor::~Executor() = default;
std::size_t Executor::workers() const noexcept { return impl_->workers; }

template <Scalar T>
ExecutionReport Executor::run(const Schedule& sch, MatrixView<const T> A, MatrixView<const T> B,
                              MatrixView<T> C, const BlockingStrategy& s,
                              const ExecutionOptions& options) {
  s.validate();
  if (A.cols() != B.rows() || A.rows() != C.rows() || B.cols() != C.cols())
    throw std::invalid_argument("execute: nonconformant A, B, C");
  if (auto err = validate_schedule(sch)) throw std::invalid_argument("execute: " + *err);

  ExecutionReport report;
  report.workers = impl_->workers;
  report.stages = sch.stages.size();
  report.op_seconds.assign(sch.ops.size(), 0.0);

  const WriteMode wmode = write_mode_for(sch.mode, options.single_dispatch_write);
  std::unique_ptr<LockTable> locks;
  if (wmode == WriteMode::BlockAtomic)
    locks = std::make_unique<LockTable>(C.base_rows(), C.base_cols(), s.m_R, s.n_R);

  std::vector<ResolvedOp<T>> resolved;
  resolved.reserve(sch.ops.size());
  for (const auto& op : sch.ops) resolved.push_back(resolve<T>(op, A, B, C, wmode, locks.get()));
  for (const auto& r : resolved) check_conformance(r.a, r.b, r.c);

  WriteTracker tracker;
  std::atomic<std::size_t> multiplies{0};
  const auto t0 = Clock::now();
  auto since = [&](Clock::time_point t) { return std::chrono::duration<double>(t - t0).count(); };

  impl_->arena.execute([&] {
    tbb::enumerable_thread_specific<Workspace<T>> workspaces([&] { return Workspace<T>(s); });
    tbb::enumerable_thread_specific<KernelCounters> counters;

    auto run_tiles = [&](const ResolvedOp<T>& r, std::size_t begin, std::size_t end,
                         std::size_t row_blocks) {
      auto& ws = workspaces.local();
      auto& kc = counters.local();
      for (std::size_t t = begin; t < end; ++t)
        compute_tile(r.a, r.b, r.c, s, t % row_blocks, t / row_blocks, ws, &kc);
    };

    auto run_op = [&](std::size_t idx, std::size_t lane_key) {
      const auto& r = resolved[idx];
      if (options.track_writes) tracker.begin(sch.ops[idx], lane_key);
      const auto start = Clock::now();
      const TileGrid grid = tile_grid(r.c.rows(), r.c.cols(), s);
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, grid.count()),
                        [&](const tbb::blocked_range<std::size_t>& rg) {
                          run_tiles(r, rg.begin(), rg.end(), grid.row_blocks);
                        });
      report.op_seconds[idx] = std::chrono::duration<double>(Clock::now() - start).count();
      if (options.track_writes) tracker.end(sch.ops[idx]);
      multiplies.fetch_add(1, std::memory_order_relaxed);
    };

    if (sch.mode == ExecMode::SingleDispatch) {
      // One flat dispatch over (op, tile); the op id plays the role of a third grid axis.
      const std::size_t n_ops = resolved.size();
      std::vector<std::size_t> first(n_ops + 1, 0), row_blocks(n_ops, 1);
      for (std::size_t i = 0; i < n_ops; ++i) {
        const TileGrid g = tile_grid(resolved[i].c.rows(), resolved[i].c.cols(), s);
        row_blocks[i] = std::max<std::size_t>(g.row_blocks, 1);
        first[i + 1] = first[i] + g.count();
      }
      std::vector<std::atomic<std::size_t>> pending(n_ops);
      std::vector<std::atomic<std::int64_t>> t_begin(n_ops), t_end(n_ops);
      for (std::size_t i = 0; i < n_ops; ++i) {
        pending[i] = first[i + 1] - first[i];
        t_begin[i] = INT64_MAX;
        t_end[i] = 0;
        if (pending[i] == 0) multiplies.fetch_add(1, std::memory_order_relaxed);
      }
      auto ns = [&] {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
      };
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, first.back()),
                        [&](const tbb::blocked_range<std::size_t>& rg) {
                          for (std::size_t w = rg.begin(); w != rg.end(); ++w) {
                            const auto op = static_cast<std::size_t>(
                                std::upper_bound(first.begin(), first.end(), w) - first.begin() - 1);
                            std::int64_t b = ns();
                            run_tiles(resolved[op], w - first[op], w - first[op] + 1, row_blocks[op]);
                            std::int64_t e = ns();
                            auto lo = t_begin[op].load();
                            while (b < lo && !t_begin[op].compare_exchange_weak(lo, b)) {}
                            auto hi = t_end[op].load();
                            while (e > hi && !t_end[op].compare_exchange_weak(hi, e)) {}
                            if (pending[op].fetch_sub(1) == 1)
                              multiplies.fetch_add(1, std::memory_order_relaxed);
                          }
                        });
      for (std::size_t i = 0; i < n_ops; ++i)
        if (t_end[i] > 0) report.op_seconds[i] = (t_end[i] - t_begin[i]) * 1e-9;
      report.barriers = 1;
    } else {
      for (std::size_t st = 0; st < sch.stages.size(); ++st) {
        const auto& lanes = sch.stages[st].streams;
        if (lanes.size() == 1) {
          for (std::size_t idx : lanes.front()) run_op(idx, st * 4096);
        } else {
          tbb::task_group group;
          for (std::size_t l = 0; l < lanes.size(); ++l)
            group.run([&, st, l] {
              for (std::size_t idx : lanes[l]) run_op(idx, st * 4096 + l);
            });
          group.wait();
        }
        ++report.barriers;
      }
    }
    for (const auto& kc : counters) report.counters += kc;
  });

  report.seconds = since(Clock::now());
  report.multiply_count = multiplies.load();
  report.write_conflicts = tracker.conflicts();
  return report;
}

template ExecutionReport Executor::run<float>(const Schedule&, MatrixView<const float>,
                                              MatrixView<const float>, MatrixView<float>,
                                              const BlockingStrategy&, const ExecutionOptions&);
template ExecutionReport Executor::run<double>(const Schedule&, MatrixView<const double>,
                                               MatrixView<const double>, MatrixView<double>,
                                               const BlockingStrategy&, const ExecutionOptions&);

}  // namespace fastmm
