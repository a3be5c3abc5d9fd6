#include <doctest.h>

#include <string>

#include "fastmm/blocking.hpp"
#include "fastmm/perfmodel.hpp"

using namespace fastmm;

TEST_SUITE("blocking") {

TEST_CASE("Huge strategy geometry") {
  const auto& h = default_catalog().lookup("Huge");
  CHECK(h.m_S == 128);
  CHECK(h.n_S == 128);
  CHECK(h.threads_x() == 16);
  CHECK(h.threads_y() == 16);
  CHECK(h.threads() == 256);
  CHECK(h.workspace_scalars() == 128 * 8 + 8 * 128 + 128 * 128);
}

TEST_CASE("Small strategy is 16x16 with 4x4 register tiles") {
  const auto& s = default_catalog().lookup("small");
  CHECK(s.m_S == 16);
  CHECK(s.n_S == 16);
  CHECK(s.m_R == 4);
  CHECK(s.threads() == 16);
}

TEST_CASE("lookup is case-insensitive and unknown names list the catalog") {
  CHECK(default_catalog().lookup("HUGE").name == "Huge");
  CHECK(default_catalog().contains("medium"));
  CHECK_FALSE(default_catalog().contains("gigantic"));
  try {
    (void)default_catalog().lookup("gigantic");
    FAIL("expected UnknownStrategy");
  } catch (const UnknownStrategy& e) {
    const std::string msg = e.what();
    for (const char* n : {"Huge", "Large", "Medium", "Small"}) CHECK(msg.find(n) != std::string::npos);
  }
}

TEST_CASE("every catalog entry satisfies the strategy invariants") {
  for (const auto& s : default_catalog().entries()) {
    CAPTURE(s.name);
    CHECK_NOTHROW(s.validate());
    CHECK(s.m_S % s.m_R == 0);
    CHECK(s.n_S % s.n_R == 0);
    CHECK((s.m_W / s.m_R) * (s.n_W / s.n_R) == 32);
  }
}

TEST_CASE("every catalog entry passes the shared-size and prefetch checks") {
  const auto hw = HardwareSpec::v100();
  for (const auto& s : default_catalog().entries())
    for (const VariantClass cls : {VariantClass{1, 1, 1}, VariantClass{2, 2, 2}, VariantClass{4, 4, 4}}) {
      CAPTURE(s.name);
      for (const auto& c : check_constraints(s, cls, hw))
        if (c.id == "shared_size" || c.id == "prefetch") CHECK(c.satisfied);
    }
}

TEST_CASE("validate names the broken invariant") {
  BlockingStrategy s{"bad", 64, 64, 8, 8, 8, 32, 64, 0};
  CHECK_NOTHROW(s.validate());
  s.m_S = 60;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("m_S must be a multiple of m_R"), std::invalid_argument);
  s.m_S = 64;
  s.n_W = 32;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("32 threads"), std::invalid_argument);
  s.n_W = 64;
  s.k_S = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("upsert replaces by name and validates") {
  StrategyCatalog c(std::vector<BlockingStrategy>(default_catalog().entries()));
  BlockingStrategy s = c.lookup("medium");
  s.name = "MEDIUM";
  s.k_S = 16;
  c.upsert(s);
  CHECK(c.entries().size() == default_catalog().entries().size());
  CHECK(c.lookup("Medium").k_S == 16);
  s.m_R = 7;
  CHECK_THROWS_AS(c.upsert(s), std::invalid_argument);
}

}  // TEST_SUITE
