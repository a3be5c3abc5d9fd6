#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fastmm/config.hpp"
#include "fastmm/matrix_io.hpp"
#include "fastmm/perfmodel.hpp"
#include "fastmm/reference.hpp"
#include "fastmm/scheduler.hpp"

namespace fastmm::cli {
namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    if (item != "0" && item != "1" && item != "2")
      throw UsageError("--levels: expected 0, 1 or 2, got '" + item + "'");
    out.push_back(item[0] - '0');
  }
  if (out.empty()) throw UsageError("--levels: empty list");
  return out;
}

std::vector<ExecMode> parse_modes(const std::string& text) {
  if (text == "all") return {kAllModes.begin(), kAllModes.end()};
  std::vector<ExecMode> out;
  for (const auto& item : split_list(text)) {
    auto m = parse_exec_mode(item);
    if (!m)
      throw UsageError("--mode: unknown mode '" + item +
                       "'; valid: sequential, staged, atomic-element, atomic-block, "
                       "single-dispatch, all");
    out.push_back(*m);
  }
  if (out.empty()) throw UsageError("--mode: empty list");
  return out;
}

struct Dims {
  std::size_t m, n, k;
};

// Either --sweep (square sizes) or explicit --m/--n/--k.
std::vector<Dims> parse_dims(std::size_t m, std::size_t n, std::size_t k, const std::string& sweep) {
  if (!sweep.empty()) {
    std::vector<Dims> out;
    for (std::size_t s : parse_sweep(sweep)) {
      if (s == 0) throw UsageError("--sweep: sizes must be positive");
      out.push_back({s, s, s});
    }
    return out;
  }
  if (m == 0 || n == 0 || k == 0) throw UsageError("--m, --n and --k must be positive");
  return {{m, n, k}};
}

// Writes to --out when given, else to the command's stdout.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("--out: cannot open '" + path + "'");
    }
    os_ = file_ ? file_.get() : &fallback;
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

struct Common {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;

  Config load() const { return config_path.empty() ? Config{} : load_config(config_path); }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "INI file with [strategy.<name>] and [hardware] sections");
  cmd->add_option("--out", c.out_path, "Write output to this file");
  cmd->add_option("--seed", c.seed, "Random seed");
}

// --- verify ---------------------------------------------------------------

struct VerifyArgs {
  Common common;
  std::size_t m = 0, n = 0, k = 0;
  std::string levels = "0,1,2";
  std::string modes = "all";
  std::string strategy = "medium";
  std::size_t workers = 0;
  std::size_t streams = 2;
  std::string dtype = "f64";
  bool integer = false;
  std::string a_path, b_path;
};

template <Scalar T>
int verify_typed(const VerifyArgs& v, const BlockingStrategy& strategy, std::ostream& out) {
  Matrix<T> A, B;
  if (!v.a_path.empty() || !v.b_path.empty()) {
    if (v.a_path.empty() || v.b_path.empty()) throw UsageError("--a and --b must be given together");
    A = load_smat_as<T>(v.a_path);
    B = load_smat_as<T>(v.b_path);
    if (A.cols() != B.rows()) throw UsageError("--a and --b: inner dimensions differ");
    if (A.rows() == 0 || A.cols() == 0 || B.cols() == 0) throw UsageError("--a/--b: empty matrix");
  } else {
    const auto d = parse_dims(v.m, v.n, v.k, "").front();
    A = Matrix<T>(d.m, d.k);
    B = Matrix<T>(d.k, d.n);
    fill_random(A, v.common.seed, v.integer);
    fill_random(B, v.common.seed + 1, v.integer);
  }
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  const auto levels = parse_levels(v.levels);
  const auto modes = parse_modes(v.modes);
  const char* dtype = std::is_same_v<T, float> ? "f32" : "f64";

  Matrix<T> ref(m, n);
  reference_gemm<T>(A.cview(), B.cview(), ref.view());
  const double tol = default_tolerance<T>(k);

  Output csv_out(v.common.out_path, out);
  const bool csv = !v.common.out_path.empty();
  if (csv) csv_out.stream() << "m,n,k,level,mode,dtype,max_abs_error,relative_error,tolerance,status\n";

  Executor ex(v.workers);
  int failures = 0;
  for (int level : levels)
    for (ExecMode mode : modes) {
      Matrix<T> C(m, n);
      MultiplyConfig cfg;
      cfg.levels = level;
      cfg.mode = mode;
      cfg.streams = v.streams;
      multiply<T>(ex, A.cview(), B.cview(), C.view(), strategy, cfg);
      const auto r = compare<T>(A.cview(), B.cview(), C.cview(), ref.cview(), tol);
      failures += !r.pass;
      out << std::setw(5) << m << 'x' << n << 'x' << k << "  level " << level << "  "
          << std::left << std::setw(16) << to_string(mode) << std::right << "  " << dtype
          << "  rel_err " << std::scientific << std::setprecision(3) << r.relative << "  tol "
          << r.tolerance << std::defaultfloat << "  " << (r.pass ? "PASS" : "FAIL")
          << (r.max_abs == 0 ? " (exact)" : "") << "\n";
      if (csv)
        csv_out.stream() << m << ',' << n << ',' << k << ',' << level << ',' << to_string(mode)
                         << ',' << dtype << ',' << std::setprecision(6) << r.max_abs << ','
                         << r.relative << ',' << r.tolerance << ',' << (r.pass ? "PASS" : "FAIL")
                         << "\n";
    }
  out << (failures ? "FAILED: " + std::to_string(failures) + " case(s) out of tolerance\n"
                   : std::string("all cases within tolerance\n"));
  return failures ? kExitFailure : kExitOk;
}

int cmd_verify(const VerifyArgs& v, std::ostream& out) {
  const Config cfg = v.common.load();
  const auto& strategy = cfg.strategies.lookup(v.strategy);
  if (v.dtype == "f64") return verify_typed<double>(v, strategy, out);
  if (v.dtype == "f32") return verify_typed<float>(v, strategy, out);
  throw UsageError("--dtype: expected f32 or f64");
}

// --- bench ----------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::size_t m = 0, n = 0, k = 0;
  std::string sweep;
  std::string levels = "0,1";
  std::string modes = "staged";
  std::string strategy = "medium";
  std::size_t workers = 0;
  std::size_t streams = 2;
  std::size_t repeats = 5;
  std::string dtype = "f64";
};

template <Scalar T>
int bench_typed(const BenchArgs& b, const BlockingStrategy& strategy, std::ostream& os) {
  if (b.repeats == 0) throw UsageError("--repeats must be positive");
  const auto dims = parse_dims(b.m, b.n, b.k, b.sweep);
  const auto levels = parse_levels(b.levels);
  const auto modes = parse_modes(b.modes);
  Executor ex(b.workers);
  os << "m,n,k,level,mode,strategy,seconds,effective_gflops,multiply_count,checksum\n";
  for (const auto& d : dims) {
    Matrix<T> A(d.m, d.k), B(d.k, d.n);
    fill_random(A, b.common.seed);
    fill_random(B, b.common.seed + 1);
    for (int level : levels)
      for (ExecMode mode : modes) {
        MultiplyConfig cfg;
        cfg.levels = level;
        cfg.mode = mode;
        cfg.streams = b.streams;
        std::vector<double> times;
        ExecutionReport rep;
        Matrix<T> C(d.m, d.n);
        for (std::size_t r = 0; r < b.repeats; ++r) {
          C.fill(T{0});
          const auto t0 = std::chrono::steady_clock::now();
          rep = multiply<T>(ex, A.cview(), B.cview(), C.view(), strategy, cfg);
          times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        std::sort(times.begin(), times.end());
        const double median = times.size() % 2
                                  ? times[times.size() / 2]
                                  : 0.5 * (times[times.size() / 2 - 1] + times[times.size() / 2]);
        long double checksum = 0;
        for (std::size_t j = 0; j < C.cols(); ++j)
          for (std::size_t i = 0; i < C.rows(); ++i) checksum += C(i, j);
        const double gflops = 2.0 * double(d.m) * double(d.n) * double(d.k) / median / 1e9;
        os << d.m << ',' << d.n << ',' << d.k << ',' << level << ',' << to_string(mode) << ','
           << strategy.name << ',' << std::setprecision(6) << median << ',' << gflops << ','
           << rep.multiply_count << ',' << std::setprecision(10) << double(checksum) << "\n";
      }
  }
  return kExitOk;
}

int cmd_bench(const BenchArgs& b, std::ostream& out) {
  const Config cfg = b.common.load();
  const auto& strategy = cfg.strategies.lookup(b.strategy);
  Output o(b.common.out_path, out);
  if (b.dtype == "f64") return bench_typed<double>(b, strategy, o.stream());
  if (b.dtype == "f32") return bench_typed<float>(b, strategy, o.stream());
  throw UsageError("--dtype: expected f32 or f64");
}

// --- model ----------------------------------------------------------------

struct ModelArgs {
  Common common;
  std::size_t m = 0, n = 0, k = 0;
  std::string sweep;
  std::string levels = "0";
  std::string strategy = "huge";
  std::optional<std::size_t> occupancy;
  bool per_op = false;
  std::optional<double> tau_flop, tau_smop, raw_bw, texture_boost;
  std::optional<std::size_t> sm_count;
};

int cmd_model(const ModelArgs& a, std::ostream& out) {
  Config cfg = a.common.load();
  HardwareSpec hw = cfg.hardware;
  if (a.tau_flop) hw.tau_flop = *a.tau_flop;
  if (a.tau_smop) hw.tau_smop = *a.tau_smop;
  if (a.sm_count) hw.sm_count = *a.sm_count;
  hw.set_global_bandwidth(a.raw_bw.value_or(hw.raw_hbm_bw), a.texture_boost.value_or(hw.texture_boost));
  hw.validate();
  const auto& strategy = cfg.strategies.lookup(a.strategy);
  const auto dims = parse_dims(a.m, a.n, a.k, a.sweep);
  const auto levels = parse_levels(a.levels);

  Output o(a.common.out_path, out);
  write_model_header(o.stream(), a.per_op);
  for (int level : levels)
    for (const auto& d : dims) {
      const auto rep = model_report(level, strategy, hw, d.m, d.n, d.k, a.occupancy);
      if (a.per_op && level > 0)
        for (const auto& row : rep.ops) write_model_row(o.stream(), row, true);
      write_model_row(o.stream(), rep.total, a.per_op);
    }
  return kExitOk;
}

// --- schedule -------------------------------------------------------------

struct ScheduleArgs {
  Common common;
  int levels = 1;
  std::size_t streams = 2;
  std::size_t depth = 2;
  std::string mode = "staged";
  bool ops = false;
};

int cmd_schedule(const ScheduleArgs& a, std::ostream& out) {
  if (a.levels < 0 || a.levels > 2) throw UsageError("--levels: expected 0, 1 or 2");
  const auto modes = parse_modes(a.mode);
  if (modes.size() != 1) throw UsageError("--mode: schedule takes a single mode");
  const auto sch = build_schedule(ops_for_level(a.levels), a.streams, modes.front(), a.depth);
  Output o(a.common.out_path, out);
  if (a.ops) o.stream() << dump_ops(sch.ops);
  o.stream() << format_schedule(sch);
  const auto problem = validate_schedule(sch);
  o.stream() << "safety check: " << (problem ? "FAILED (" + *problem + ")" : std::string("ok")) << "\n";
  return problem ? kExitFailure : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Workspace-free Strassen matrix multiply: verification, benchmarks, schedules and GPU model"};
  app.name("fastmm");
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check every level/mode against the naive oracle");
  add_common(verify, va.common);
  verify->add_option("--m", va.m, "Rows of A and C");
  verify->add_option("--n", va.n, "Columns of B and C");
  verify->add_option("--k", va.k, "Columns of A, rows of B");
  verify->add_option("--levels", va.levels, "Comma list of 0, 1, 2")->capture_default_str();
  verify->add_option("--mode", va.modes, "Execution mode(s), comma list, or 'all'")->capture_default_str();
  verify->add_option("--strategy", va.strategy, "Blocking strategy")->capture_default_str();
  verify->add_option("--workers", va.workers, "Worker threads (0 = all cores)");
  verify->add_option("--streams", va.streams, "Streams for staged mode")->capture_default_str();
  verify->add_option("--dtype", va.dtype, "f32 or f64")->capture_default_str();
  verify->add_flag("--integer", va.integer, "Draw small integers instead of uniform [-1, 1]");
  verify->add_option("--a", va.a_path, "SMAT fixture for A");
  verify->add_option("--b", va.b_path, "SMAT fixture for B");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time multiplies and emit CSV");
  add_common(bench, ba.common);
  bench->add_option("--m", ba.m);
  bench->add_option("--n", ba.n);
  bench->add_option("--k", ba.k);
  bench->add_option("--sweep", ba.sweep, "Square sizes start:stop:step");
  bench->add_option("--levels", ba.levels)->capture_default_str();
  bench->add_option("--mode", ba.modes)->capture_default_str();
  bench->add_option("--strategy", ba.strategy)->capture_default_str();
  bench->add_option("--workers", ba.workers);
  bench->add_option("--streams", ba.streams)->capture_default_str();
  bench->add_option("--repeats", ba.repeats, "Timed repeats; the median is reported")->capture_default_str();
  bench->add_option("--dtype", ba.dtype)->capture_default_str();

  ModelArgs ma;
  auto* model = app.add_subcommand("model", "Evaluate the GPU performance model and emit CSV");
  add_common(model, ma.common);
  model->add_option("--m", ma.m);
  model->add_option("--n", ma.n);
  model->add_option("--k", ma.k);
  model->add_option("--sweep", ma.sweep, "Square sizes start:stop:step");
  model->add_option("--levels", ma.levels)->capture_default_str();
  model->add_option("--strategy", ma.strategy)->capture_default_str();
  model->add_option("--occupancy", ma.occupancy, "Active blocks per SM (overrides the estimate)");
  model->add_flag("--per-op", ma.per_op, "Also emit one row per op, with an op column");
  model->add_option("--tau-flop", ma.tau_flop, "flop/s");
  model->add_option("--tau-smop", ma.tau_smop, "Shared memory bytes/s");
  model->add_option("--raw-bw", ma.raw_bw, "Raw global bandwidth, bytes/s");
  model->add_option("--texture-boost", ma.texture_boost, "Global bandwidth boost ratio");
  model->add_option("--sm-count", ma.sm_count);

  ScheduleArgs sa;
  auto* schedule = app.add_subcommand("schedule", "Print the stage/stream schedule for a level");
  add_common(schedule, sa.common);
  schedule->add_option("--levels", sa.levels)->capture_default_str();
  schedule->add_option("--streams", sa.streams)->capture_default_str();
  schedule->add_option("--mode", sa.mode)->capture_default_str();
  schedule->add_option("--depth", sa.depth, "Max ops per stream per stage")->capture_default_str();
  schedule->add_flag("--ops", sa.ops, "Also list the ops");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(va, out);
    if (*bench) return cmd_bench(ba, out);
    if (*model) return cmd_model(ma, out);
    if (*schedule) return cmd_schedule(sa, out);
  } catch (const std::invalid_argument& e) {  // usage, strategy, config errors
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SmatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fastmm::cli
