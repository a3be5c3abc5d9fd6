#include "fastmm/perfmodel.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace fastmm {

void HardwareSpec::validate() const {
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument("hardware '" + name + "': " + what);
  };
  need(tau_flop > 0 && tau_gmop > 0 && tau_smop > 0, "throughputs must be positive");
  need(sm_count > 0 && max_regs_per_thread > 0 && regs_per_sm > 0 && shared_mem_per_sm > 0,
       "resource counts must be positive");
  need(word_size > 0 && max_blocks_per_sm_cap > 0, "word size and block cap must be positive");
  need(std::abs(tau_gmop - raw_hbm_bw * (1 + texture_boost)) <= 1e-9 * tau_gmop,
       "tau_gmop must equal raw_hbm_bw * (1 + texture_boost)");
}

HardwareSpec HardwareSpec::v100() {
  HardwareSpec hw;
  hw.name = "V100";
  hw.tau_flop = 15.67e12;
  hw.tau_smop = 15.30e12;
  hw.sm_count = 80;
  hw.max_regs_per_thread = 255;
  hw.regs_per_sm = 65536;
  hw.shared_mem_per_sm = 96 * 1024;
  hw.word_size = 4;
  hw.max_blocks_per_sm_cap = 32;
  hw.set_global_bandwidth(900e9, 0.20);
  return hw;
}

OpCounts count_ops(const BlockingStrategy& s, const VariantClass& cls, std::size_t m,
                   std::size_t n, std::size_t k) {
  if (m == 0 || n == 0 || k == 0) throw std::invalid_argument("count_ops: dimensions must be positive");
  OpCounts c;
  const std::uint64_t mS = s.m_S, nS = s.n_S, K = k;
  c.n_gmop = mS * K * cls.w_a + nS * K * cls.w_b + mS * nS * cls.w_c;
  c.n_smop = mS * K + nS * K + std::uint64_t{s.threads()} * (s.m_R + s.n_R) * K;
  c.n_flop_mul = 2 * mS * nS * K;
  c.n_flop_add_a = (cls.w_a - 1) * mS * K;
  c.n_flop_add_b = (cls.w_b - 1) * nS * K;
  c.n_flop_add_c = cls.w_c * mS * nS;
  return c;
}

std::vector<ConstraintCheck> check_constraints(const BlockingStrategy& s, const VariantClass& cls,
                                               const HardwareSpec& hw) {
  const double mS = s.m_S, nS = s.n_S, kS = s.k_S, mR = s.m_R, nR = s.n_R;
  const double wa = cls.w_a, wb = cls.w_b;
  const double word = hw.word_size;
  const double t = s.threads();
  // Per unit of k; C-side terms vanish as k grows.
  const double flop = 2 * mS * nS + (wa - 1) * mS + (wb - 1) * nS;
  const double gmop = mS * wa + nS * wb;
  const double smop = mS + nS + t * (mR + nR);

  std::vector<ConstraintCheck> out;
  auto add = [&](std::string id, double lhs, double rhs, bool strict_less) {
    const bool ok = strict_less ? lhs < rhs : lhs >= rhs;
    out.push_back({std::move(id), ok, lhs, rhs, strict_less ? "<" : ">="});
  };
  add("global_bandwidth", flop / gmop, word * hw.tau_flop / hw.tau_gmop, false);
  add("shared_bandwidth", 2 * mS * nS / smop, word * hw.tau_flop / hw.tau_smop, false);
  add("registers", mR * nR + (2 + wa) * mR + (2 + wb) * nR, double(hw.max_regs_per_thread), true);
  add("shared_size", (mS * kS + nS * kS) * word, double(hw.shared_mem_per_sm), true);
  // Prefetch registers must hold a whole A and B slab: m_R t >= m_S k_S, n_R t >= n_S k_S.
  add("prefetch", std::min(mR * t / (mS * kS), nR * t / (nS * kS)), 1.0, false);
  return out;
}

double minimal_square_block(const VariantClass& cls, const HardwareSpec& hw) {
  // (2 m^2 + (W_A + W_B - 2) m) / ((W_A + W_B) m) >= ratio, solved for m.
  const double ratio = hw.word_size * hw.tau_flop / hw.tau_gmop;
  const double w = double(cls.w_a + cls.w_b);
  return (ratio * w - (w - 2)) / 2;
}

std::optional<double> minimal_square_register_tile(const HardwareSpec& hw,
                                                   std::optional<double> block) {
  // Flops 2 m^2 against shared traffic 2m + 2 m^2 / r per unit k.
  const double ratio = hw.word_size * hw.tau_flop / hw.tau_smop;
  if (!block) return ratio;
  if (*block <= ratio) return std::nullopt;
  return ratio * *block / (*block - ratio);
}

std::size_t max_square_register_tile(const VariantClass& cls, const HardwareSpec& hw) {
  std::size_t r = 0;
  while (true) {
    const std::size_t next = r + 1;
    if (next * next + (4 + cls.w_a + cls.w_b) * next >= hw.max_regs_per_thread) return r;
    r = next;
  }
}

std::size_t registers_per_thread(const BlockingStrategy& s, const VariantClass& cls) noexcept {
  return s.m_R * s.n_R + (2 + cls.w_a) * s.m_R + (2 + cls.w_b) * s.n_R + cls.w_a + cls.w_b + 5;
}

OccupancyDetail occupancy_detail(const BlockingStrategy& s, const VariantClass& cls,
                                 const HardwareSpec& hw,
                                 std::optional<std::size_t> override_blocks) {
  OccupancyDetail d;
  d.regs_per_thread = registers_per_thread(s, cls);
  d.by_registers = hw.regs_per_sm / std::max<std::size_t>(d.regs_per_thread * s.threads(), 1);
  const std::size_t tile_bytes = (s.m_S + s.n_S) * s.k_S * hw.word_size;
  d.by_shared = hw.shared_mem_per_sm / std::max<std::size_t>(tile_bytes, 1);
  d.cap = hw.max_blocks_per_sm_cap;
  if (override_blocks) {
    d.blocks = *override_blocks;
    d.overridden = true;
    return d;
  }
  d.blocks = std::min({d.by_registers, d.by_shared, d.cap});
  // A launch-bounds target above the register limit is met by spilling.
  if (s.min_blocks_per_sm > d.by_registers) {
    const std::size_t target = std::min({s.min_blocks_per_sm, d.by_shared, d.cap});
    if (target > d.blocks) {
      d.blocks = target;
      d.spills = true;
    }
  }
  return d;
}

std::size_t occupancy(const BlockingStrategy& s, const VariantClass& cls, const HardwareSpec& hw,
                      std::optional<std::size_t> override_blocks) {
  return occupancy_detail(s, cls, hw, override_blocks).blocks;
}

Prediction predict(const BlockingStrategy& s, const VariantClass& cls, const HardwareSpec& hw,
                   std::size_t m, std::size_t n, std::size_t k,
                   std::optional<std::size_t> occupancy_override) {
  Prediction p;
  p.counts = count_ops(s, cls, m, n, k);
  p.active_blocks = occupancy(s, cls, hw, occupancy_override);
  if (p.active_blocks == 0) throw std::invalid_argument("predict: occupancy is zero");
  const double blocks = double(hw.sm_count * p.active_blocks);
  p.tiles = ceil_div(m, s.m_S) * ceil_div(n, s.n_S);
  p.waves = ceil_div(p.tiles, hw.sm_count * p.active_blocks);
  const double word = hw.word_size;
  p.t_flop = p.waves * (blocks * double(p.counts.n_flop()) / hw.tau_flop);
  p.t_smop = p.waves * (blocks * word * double(p.counts.n_smop) / hw.tau_smop);
  p.t_gmop = p.tiles * (word * double(p.counts.n_gmop) / hw.tau_gmop);
  p.t_total = std::max({p.t_flop, p.t_gmop, p.t_smop});
  p.limiting_resource = p.t_total == p.t_flop ? "flop" : p.t_total == p.t_gmop ? "gmop" : "smop";
  return p;
}

ModelReport model_report(int levels, const BlockingStrategy& s, const HardwareSpec& hw,
                         std::size_t m, std::size_t n, std::size_t k,
                         std::optional<std::size_t> occupancy_override) {
  if (m == 0 || n == 0 || k == 0) throw std::invalid_argument("model_report: dimensions must be positive");
  const auto ops = ops_for_level(levels);
  std::size_t sm = m, sn = n, sk = k;
  for (int l = 0; l < levels; ++l) {
    sm = (sm + 1) / 2;
    sn = (sn + 1) / 2;
    sk = (sk + 1) / 2;
  }
  const double work = 2.0 * double(m) * double(n) * double(k);

  ModelReport r;
  ModelRow& total = r.total;
  total.op = "total";
  total.m = m;
  total.n = n;
  total.k = k;
  total.level = levels;
  total.cls = levels == 0 ? VariantClass{}.to_string() : "all";
  for (const auto& op : ops) {
    const VariantClass cls = classify(op);
    const Prediction p = predict(s, cls, hw, sm, sn, sk, occupancy_override);
    ModelRow row{op.name, sm, sn, sk, levels, cls.to_string(), p.t_flop, p.t_smop, p.t_gmop,
                 p.t_total, p.limiting_resource,
                 2.0 * double(sm) * double(sn) * double(sk) / p.t_total / 1e12,
                 static_cast<long double>(p.tiles) * p.counts.n_flop_mul};
    total.t_flop += row.t_flop;
    total.t_smop += row.t_smop;
    total.t_gmop += row.t_gmop;
    total.t_total += row.t_total;
    total.flop_mul += row.flop_mul;
    if (total.limiting_resource.empty())
      total.limiting_resource = row.limiting_resource;
    else if (total.limiting_resource != row.limiting_resource)
      total.limiting_resource = "mixed";
    r.ops.push_back(std::move(row));
  }
  total.effective_tflops = work / total.t_total / 1e12;
  return r;
}

std::vector<std::size_t> parse_sweep(const std::string& text) {
  auto bad = [&] { return std::invalid_argument("invalid sweep '" + text + "'; expected start:stop:step"); };
  std::array<std::size_t, 3> v{0, 0, 1};
  std::size_t count = 0, pos = 0;
  while (true) {
    const std::size_t colon = text.find(':', pos);
    const std::string part = text.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
    if (count == 3 || part.empty()) throw bad();
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[count]);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw bad();
    ++count;
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (count == 1) return {v[0]};
  if (count == 2) throw bad();
  if (v[2] == 0 || v[0] > v[1]) throw bad();
  std::vector<std::size_t> out;
  for (std::size_t x = v[0]; x <= v[1]; x += v[2]) out.push_back(x);
  return out;
}

void write_model_header(std::ostream& os, bool with_op) {
  os << "m,n,k,level,class,t_flop,t_smop,t_gmop,t_total,limiting_resource,effective_tflops";
  if (with_op) os << ",op";
  os << "\n";
}

void write_model_row(std::ostream& os, const ModelRow& r, bool with_op) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(10) << r.m << ',' << r.n << ',' << r.k << ',' << r.level << ',' << r.cls
     << ',' << r.t_flop << ',' << r.t_smop << ',' << r.t_gmop << ',' << r.t_total << ','
     << r.limiting_resource << ',' << r.effective_tflops;
  if (with_op) os << ',' << r.op;
  os << "\n";
  os.flags(flags);
  os.precision(prec);
}

}  // namespace fastmm
