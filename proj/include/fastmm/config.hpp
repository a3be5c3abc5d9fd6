#pragma once

// INI-style configuration:
//
//   [hardware]
//   tau_flop = 15.67e12
//   raw_hbm_bw = 900e9
//   texture_boost = 0.2
//
//   [strategy.tiny]
//   m_S = 32
//   ...
//
// Strategy sections named after an existing catalog entry override only the
// keys they set. tau_gmop is derived, never given directly.

#include <istream>
#include <string>

#include "fastmm/blocking.hpp"
#include "fastmm/perfmodel.hpp"

namespace fastmm {

struct Config {
  StrategyCatalog strategies = default_catalog();
  HardwareSpec hardware = HardwareSpec::v100();
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Applies the file on top of `base`. Throws ConfigError on syntax errors,
/// unknown sections or keys, and invalid values.
Config parse_config(std::istream& in, Config base = {});
Config load_config(const std::string& path, Config base = {});

}  // namespace fastmm
