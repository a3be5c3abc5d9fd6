#include "fastmm/blocking.hpp"

#include <algorithm>
#include <cctype>

namespace fastmm {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](char x, char y) {
    return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
  });
}

void require(bool ok, const BlockingStrategy& s, const char* what) {
  if (!ok) throw std::invalid_argument("strategy '" + s.name + "': " + what);
}

}  // namespace

void BlockingStrategy::validate() const {
  require(!name.empty(), *this, "empty name");
  require(m_S && n_S && k_S && m_R && n_R && m_W && n_W, *this, "all tile sizes must be positive");
  require(m_S % m_R == 0, *this, "m_S must be a multiple of m_R");
  require(n_S % n_R == 0, *this, "n_S must be a multiple of n_R");
  require(m_W % m_R == 0, *this, "m_W must be a multiple of m_R");
  require(n_W % n_R == 0, *this, "n_W must be a multiple of n_R");
  require((m_W / m_R) * (n_W / n_R) == kWarpSize, *this, "warp tile must hold exactly 32 threads");
}

StrategyCatalog::StrategyCatalog(std::vector<BlockingStrategy> entries) {
  for (auto& e : entries) upsert(std::move(e));
}

const BlockingStrategy& StrategyCatalog::lookup(std::string_view name) const {
  for (const auto& e : entries_)
    if (iequals(e.name, name)) return e;
  throw UnknownStrategy("unknown strategy '" + std::string(name) + "'; valid: " + names());
}

bool StrategyCatalog::contains(std::string_view name) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const BlockingStrategy& e) { return iequals(e.name, name); });
}

void StrategyCatalog::upsert(BlockingStrategy s) {
  s.validate();
  for (auto& e : entries_) {
    if (iequals(e.name, s.name)) {
      e = std::move(s);
      return;
    }
  }
  entries_.push_back(std::move(s));
}

std::string StrategyCatalog::names() const {
  std::string out;
  for (const auto& e : entries_) {
    if (!out.empty()) out += ", ";
    out += e.name;
  }
  return out;
}

const StrategyCatalog& default_catalog() {
  //                                  m_S  n_S k_S m_R n_R m_W n_W min_blocks
  static const StrategyCatalog catalog({
      BlockingStrategy{"Huge",   128, 128, 8, 8, 8, 32, 64, 2},
      BlockingStrategy{"Large",  128, 64,  8, 8, 8, 32, 64, 0},
      BlockingStrategy{"Medium", 64,  64,  8, 8, 8, 32, 64, 0},
      BlockingStrategy{"Small",  16,  16,  4, 4, 4, 16, 32, 0},
  });
  return catalog;
}

}  // namespace fastmm
