#include "fastmm/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace fastmm {
namespace {

namespace pt = boost::property_tree;

template <class T>
T value_of(const std::string& section, const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T v;
    if constexpr (std::is_floating_point_v<T>) {
      v = static_cast<T>(std::stod(text, &used));
    } else {
      if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
      v = static_cast<T>(std::stoull(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": invalid value '" + text + "'");
  }
}

void apply_strategy(Config& cfg, const std::string& section, const std::string& name,
                    const pt::ptree& keys) {
  BlockingStrategy s;
  if (cfg.strategies.contains(name)) s = cfg.strategies.lookup(name);
  s.name = name;
  const std::map<std::string, std::size_t BlockingStrategy::*> fields = {
      {"m_S", &BlockingStrategy::m_S}, {"n_S", &BlockingStrategy::n_S},
      {"k_S", &BlockingStrategy::k_S}, {"m_R", &BlockingStrategy::m_R},
      {"n_R", &BlockingStrategy::n_R}, {"m_W", &BlockingStrategy::m_W},
      {"n_W", &BlockingStrategy::n_W}, {"min_blocks_per_sm", &BlockingStrategy::min_blocks_per_sm}};
  for (const auto& [key, node] : keys) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("[" + section + "] unknown key '" + key + "'");
    s.*(it->second) = value_of<std::size_t>(section, key, node.data());
  }
  try {
    cfg.strategies.upsert(std::move(s));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
}

void apply_hardware(Config& cfg, const std::string& section, const pt::ptree& keys) {
  HardwareSpec& hw = cfg.hardware;
  double raw = hw.raw_hbm_bw, boost = hw.texture_boost;
  const std::map<std::string, double HardwareSpec::*> reals = {
      {"tau_flop", &HardwareSpec::tau_flop}, {"tau_smop", &HardwareSpec::tau_smop}};
  const std::map<std::string, std::size_t HardwareSpec::*> counts = {
      {"sm_count", &HardwareSpec::sm_count},
      {"max_regs_per_thread", &HardwareSpec::max_regs_per_thread},
      {"regs_per_sm", &HardwareSpec::regs_per_sm},
      {"shared_mem_per_sm", &HardwareSpec::shared_mem_per_sm},
      {"word_size", &HardwareSpec::word_size},
      {"max_blocks_per_sm_cap", &HardwareSpec::max_blocks_per_sm_cap}};
  for (const auto& [key, node] : keys) {
    const std::string& text = node.data();
    if (key == "name") {
      hw.name = text;
    } else if (key == "raw_hbm_bw") {
      raw = value_of<double>(section, key, text);
    } else if (key == "texture_boost") {
      boost = value_of<double>(section, key, text);
    } else if (auto r = reals.find(key); r != reals.end()) {
      hw.*(r->second) = value_of<double>(section, key, text);
    } else if (auto c = counts.find(key); c != counts.end()) {
      hw.*(c->second) = value_of<std::size_t>(section, key, text);
    } else {
      throw ConfigError("[" + section + "] unknown key '" + key + "'");
    }
  }
  hw.set_global_bandwidth(raw, boost);
  try {
    hw.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
}

}  // namespace

Config parse_config(std::istream& in, Config cfg) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const std::string prefix = "strategy.";
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty())
      throw ConfigError("config: key '" + section + "' outside a section");
    if (section == "hardware") {
      apply_hardware(cfg, section, keys);
    } else if (section.rfind(prefix, 0) == 0 && section.size() > prefix.size()) {
      apply_strategy(cfg, section, section.substr(prefix.size()), keys);
    } else {
      throw ConfigError("config: unknown section [" + section + "]");
    }
  }
  return cfg;
}

Config load_config(const std::string& path, Config base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace fastmm
