#include <doctest.h>

#include <sstream>

#include "fastmm/perfmodel.hpp"

using namespace fastmm;

namespace {

const BlockingStrategy& huge() { return default_catalog().lookup("Huge"); }
const BlockingStrategy& small() { return default_catalog().lookup("Small"); }

const ConstraintCheck& find(const std::vector<ConstraintCheck>& v, const std::string& id) {
  for (const auto& c : v)
    if (c.id == id) return c;
  throw std::logic_error("missing constraint " + id);
}

}  // namespace

TEST_SUITE("perfmodel") {

TEST_CASE("V100 defaults") {
  const auto hw = HardwareSpec::v100();
  CHECK(hw.tau_gmop == doctest::Approx(1.08e12).epsilon(1e-15));
  CHECK(hw.shared_mem_per_sm == 98304);
  CHECK_NOTHROW(hw.validate());
  auto bad = hw;
  bad.tau_gmop = 900e9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("count_ops for Huge at k = 8192") {
  const auto c = count_ops(huge(), {1, 1, 1}, 8192, 8192, 8192);
  CHECK(c.n_gmop == 2113536);
  CHECK(c.n_smop == 35651584);
  CHECK(c.n_flop_mul == 2ull * 128 * 128 * 8192);
  CHECK(c.n_flop_add_a == 0);
  CHECK(c.n_flop_add_c == 128 * 128);
  CHECK(c.n_flop() == 268451840);
  const auto v = count_ops(huge(), {2, 2, 2}, 8192, 8192, 8192);
  CHECK(double(v.n_gmop) / double(c.n_gmop) == 2.0);
  CHECK(v.n_flop_add_a == 128ull * 8192);
  CHECK_THROWS_AS(count_ops(huge(), {1, 1, 1}, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("count_ops is linear in k") {
  for (const auto& s : default_catalog().entries()) {
    const VariantClass cls{2, 1, 2};
    const auto c1 = count_ops(s, cls, 512, 512, s.k_S);
    const auto c2 = count_ops(s, cls, 512, 512, 2 * s.k_S);
    const auto c4 = count_ops(s, cls, 512, 512, 4 * s.k_S);
    // Affine in k: the k-independent part is the C traffic and C additions.
    CHECK(c4.n_gmop - c2.n_gmop == 2 * (c2.n_gmop - c1.n_gmop));
    CHECK(c4.n_smop == 4 * c1.n_smop);
    CHECK(c4.n_flop_mul == 4 * c1.n_flop_mul);
    CHECK(c4.n_flop() - c2.n_flop() == 2 * (c2.n_flop() - c1.n_flop()));
  }
}

TEST_CASE("minimal bounds") {
  const auto hw = HardwareSpec::v100();
  const double ms = minimal_square_block({1, 1, 1}, hw);
  CHECK(ms == doctest::Approx(4 * 15.67 / 1.08));
  CHECK(std::abs(ms - 58.2) / 58.2 <= 0.01);
  const double mr = *minimal_square_register_tile(hw);
  CHECK(mr == doctest::Approx(4 * 15.67 / 15.30));
  CHECK(std::abs(mr - 4.1) / 4.1 <= 0.01);
  CHECK(*minimal_square_register_tile(hw, 128.0) > mr);
  CHECK_FALSE(minimal_square_register_tile(hw, 4.0).has_value());
  CHECK(max_square_register_tile({1, 1, 1}, hw) == 13);
  CHECK(max_square_register_tile({4, 4, 4}, hw) == 11);
}

TEST_CASE("global bandwidth check separates Huge from Small for GEMM") {
  const auto hw = HardwareSpec::v100();
  CHECK(find(check_constraints(huge(), {1, 1, 1}, hw), "global_bandwidth").satisfied);
  CHECK_FALSE(find(check_constraints(small(), {1, 1, 1}, hw), "global_bandwidth").satisfied);
  // The checker and the closed form agree on where the bound sits.
  BlockingStrategy s = huge();
  s.m_S = s.n_S = 64;
  CHECK(find(check_constraints(s, {1, 1, 1}, hw), "global_bandwidth").satisfied);
  s.m_S = s.n_S = 56;
  s.m_W = 56;
  CHECK_FALSE(find(check_constraints(s, {1, 1, 1}, hw), "global_bandwidth").satisfied);
}

TEST_CASE("register bound") {
  const auto hw = HardwareSpec::v100();
  BlockingStrategy s = huge();
  for (std::size_t w = 1; w <= 4; ++w) {
    s.m_R = s.n_R = 16;
    CHECK_FALSE(find(check_constraints(s, {w, w, w}, hw), "registers").satisfied);
  }
  s.m_R = s.n_R = 8;
  const auto r = find(check_constraints(s, {1, 1, 1}, hw), "registers");
  CHECK(r.lhs == 112);
  CHECK(r.satisfied);
  CHECK(find(check_constraints(s, {2, 2, 2}, hw), "registers").satisfied);
}

TEST_CASE("occupancy") {
  const auto hw = HardwareSpec::v100();
  for (const VariantClass c : {VariantClass{1, 1, 1}, VariantClass{2, 2, 2}, VariantClass{4, 4, 4}, VariantClass{2, 1, 2}}) {
    CHECK(occupancy(huge(), c, hw) == 2);
  }
  CHECK_FALSE(occupancy_detail(huge(), {1, 1, 1}, hw).spills);
  CHECK(occupancy_detail(huge(), {2, 2, 2}, hw).spills);
  CHECK(occupancy(huge(), {1, 1, 1}, hw, 20) == 20);
  const auto small_gemm = occupancy(small(), {1, 1, 1}, hw);
  CHECK(small_gemm >= 16);
  CHECK(small_gemm <= 32);
}

TEST_CASE("predict: Huge GEMM at 8192^3 against hand-evaluated equations") {
  const auto hw = HardwareSpec::v100();
  const auto p = predict(huge(), {1, 1, 1}, hw, 8192, 8192, 8192);
  // 4096 tiles, 160 resident blocks, 26 waves.
  CHECK(p.tiles == 4096);
  CHECK(p.waves == 26);
  CHECK(p.t_flop == doctest::Approx(0.07126736786).epsilon(1e-9));
  CHECK(p.t_smop == doctest::Approx(0.03877401031).epsilon(1e-9));
  CHECK(p.t_gmop == doctest::Approx(0.03206312391).epsilon(1e-9));
  CHECK(p.t_total == p.t_flop);
  CHECK(p.limiting_resource == "flop");
}

TEST_CASE("predict: a single tile is one wave") {
  const auto hw = HardwareSpec::v100();
  const auto p = predict(huge(), {1, 1, 1}, hw, 128, 128, 128);
  CHECK(p.waves == 1);
  CHECK(p.t_flop == doctest::Approx(160.0 * double(p.counts.n_flop()) / hw.tau_flop));
}

TEST_CASE("predict never exceeds the flop or bandwidth peaks") {
  const auto hw = HardwareSpec::v100();
  for (const auto& s : default_catalog().entries())
    for (std::size_t n : {100u, 1024u, 3000u, 8192u})
      for (const VariantClass c : {VariantClass{1, 1, 1}, VariantClass{2, 2, 2}, VariantClass{4, 1, 4}}) {
        const auto p = predict(s, c, hw, n, n, n);
        const double tiles_flop = double(p.tiles) * double(p.counts.n_flop());
        CHECK(tiles_flop / p.t_total <= hw.tau_flop * (1 + 1e-12));
        const double bytes = double(p.tiles) * hw.word_size * double(p.counts.n_gmop);
        CHECK(bytes / p.t_gmop <= hw.tau_gmop * (1 + 1e-12));
        CHECK(p.t_total == std::max({p.t_flop, p.t_smop, p.t_gmop}));
      }
}

TEST_CASE("t_gmop is nondecreasing in each operand count") {
  const auto hw = HardwareSpec::v100();
  for (std::size_t a = 1; a <= 4; ++a)
    for (std::size_t b = 1; b <= 4; ++b)
      for (std::size_t c = 1; c <= 3; ++c) {
        const double t = predict(huge(), {a, b, c}, hw, 4096, 4096, 4096).t_gmop;
        CHECK(predict(huge(), {a + 1, b, c}, hw, 4096, 4096, 4096).t_gmop >= t);
        CHECK(predict(huge(), {a, b + 1, c}, hw, 4096, 4096, 4096).t_gmop >= t);
        CHECK(predict(huge(), {a, b, c + 1}, hw, 4096, 4096, 4096).t_gmop >= t);
      }
}

TEST_CASE("model_report aggregates") {
  const auto hw = HardwareSpec::v100();
  for (std::size_t n : {1024u, 4096u, 8192u}) {
    const auto g = model_report(0, huge(), hw, n, n, n);
    const auto s1 = model_report(1, huge(), hw, n, n, n);
    const auto s2 = model_report(2, huge(), hw, n, n, n);
    CHECK(g.ops.size() == 1);
    CHECK(s1.ops.size() == 7);
    CHECK(s2.ops.size() == 49);
    CHECK(s1.total.flop_mul / g.total.flop_mul == 7.0L / 8.0L);
    CHECK(s2.total.flop_mul / g.total.flop_mul == 49.0L / 64.0L);
    CHECK(g.total.t_total == std::max({g.total.t_flop, g.total.t_smop, g.total.t_gmop}));
    CHECK(g.total.effective_tflops <= hw.tau_flop / 1e12);
    CHECK(s1.total.effective_tflops <= hw.tau_flop / 1e12 * 8 / 7);
    CHECK(s2.total.effective_tflops <= hw.tau_flop / 1e12 * 64 / 49);
    CHECK(s1.total.cls == "all");
    CHECK(g.total.cls == "1-1-1");
    for (const auto& r : {s1.total, s2.total}) {
      CHECK(r.t_total >= std::max({r.t_flop, r.t_smop, r.t_gmop}) * (1 - 1e-12));
      if (r.limiting_resource != "mixed")
        CHECK(r.t_total == doctest::Approx(std::max({r.t_flop, r.t_smop, r.t_gmop})).epsilon(1e-12));
    }
  }
}

TEST_CASE("sweep parsing and CSV") {
  CHECK(parse_sweep("1024:20480:1024").size() == 20);
  CHECK(parse_sweep("5") == std::vector<std::size_t>{5});
  CHECK(parse_sweep("2:8:3") == std::vector<std::size_t>{2, 5, 8});
  for (const char* bad : {"", "1:2", "a:b:c", "4:2:1", "1:5:0", "1:2:3:4", "1::2"})
    CHECK_THROWS_AS(parse_sweep(bad), std::invalid_argument);

  std::ostringstream os;
  write_model_header(os);
  write_model_row(os, model_report(0, huge(), HardwareSpec::v100(), 8192, 8192, 8192).total);
  CHECK(os.str() ==
        "m,n,k,level,class,t_flop,t_smop,t_gmop,t_total,limiting_resource,effective_tflops\n"
        "8192,8192,8192,0,1-1-1,0.07126736786,0.03877401031,0.03206312391,0.07126736786,flop,15.42798143\n");
}

}  // TEST_SUITE
