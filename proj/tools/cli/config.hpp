// Copyright 2026 The qkdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration: INI sections of key = value pairs, every key also
// settable as --section.key on the command line. Values are checked against
// the schema as soon as they are set.

#pragma once

#include "qkdsim/montecarlo.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkdsim::cli {

/// Anything wrong with the configuration or output location (exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyType { probability, real, count, choice, text, count_list, choice_list };

struct KeySpec {
  std::string key;  // "section.name"
  KeyType type;
  std::string fallback;  // empty: unset unless given
  std::vector<std::string> choices;
  std::string help;
  std::uint64_t min_count = 0;
};

inline const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      {"protocol.kind", KeyType::choice, "bb84", {"bb84", "b92", "bbm92", "dual-rail"},
       "protocol for shots"},
      {"protocol.noise", KeyType::choice, "ad", {"ad", "gad"}, "channel family"},
      {"protocol.gamma", KeyType::probability, "0.5", {}, "damping for fixed-gamma commands"},
      {"protocol.p", KeyType::probability, "1", {}, "GAD ground-state weight"},
      {"protocol.delta", KeyType::probability, "0", {}, "readout flip probability"},
      {"protocol.pair", KeyType::choice, "correlated", {"correlated", "anti-correlated"},
       "BBM92 Bell pair"},
      {"protocol.distribution", KeyType::choice, "charlie", {"charlie", "alice-sends"},
       "BBM92 pair distribution"},
      {"protocol.gamma_a", KeyType::probability, "", {}, "asymmetric BBM92: Alice link"},
      {"protocol.gamma_b", KeyType::probability, "", {}, "asymmetric BBM92: Bob link"},
      {"protocol.scheme", KeyType::choice, "ancilla", {"ancilla", "optimal"},
       "dual-rail detection circuit"},
      {"protocol.fault", KeyType::choice, "none", {"none", "encoder", "post-selection", "decoder"},
       "faulty CNOT for dual-rail rates"},
      {"protocol.beta", KeyType::probability, "0", {}, "CNOT failure probability"},
      {"sweep.param", KeyType::choice, "", {"gamma", "beta"}, "swept parameter"},
      {"sweep.start", KeyType::probability, "", {}, "first grid value"},
      {"sweep.stop", KeyType::probability, "", {}, "last grid value"},
      {"sweep.points", KeyType::count, "", {}, "grid size", 1},
      {"sweep.grid_points", KeyType::count, "21", {}, "points per axis of (gamma, p) grids", 1},
      {"rates.protocols", KeyType::choice_list,
       "bb84,b92,bbm92-correlated,bbm92-anticorrelated,bbm92-alice,dual-rail,bb84-gad,dual-rail-gad",
       {"bb84", "b92", "bbm92-correlated", "bbm92-anticorrelated", "bbm92-alice",
        "bbm92-asymmetric", "dual-rail", "bb84-gad", "dual-rail-gad"},
       "curves to write"},
      {"rates.l_sift", KeyType::count, "32768", {}, "sifted key length for l_sec"},
      {"shots.shots_per_block", KeyType::count, "8192", {}, "shots per block", 1},
      {"shots.states", KeyType::choice_list, "", {"0", "1", "+", "-", "z", "x"},
       "block sequence (protocol default if unset)"},
      {"shots.gates", KeyType::count_list, "0,100,200,300,400,500,600,700,800,900,1000,1100,1200",
       {}, "identity-gate delays, one row each"},
      {"shots.mode", KeyType::choice, "block", {"block", "random"}, "state choice per block or shot"},
      {"shots.qubits", KeyType::count_list, "", {}, "profile qubits used (default 0,1,2)"},
      {"shots.delta_override", KeyType::probability, "", {}, "readout error for every qubit"},
      {"shots.gamma_override", KeyType::probability, "", {}, "damping instead of the delay"},
      {"profile.name", KeyType::choice, "yorktown", {"yorktown", "bogota", "ideal"},
       "built-in device profile"},
      {"profile.file", KeyType::text, "", {}, "profile INI file (overrides name)"},
      {"profile.cnot_beta", KeyType::probability, "", {}, "CNOT failure rate in shot runs"},
      {"output.path", KeyType::text, "", {}, "CSV file (rates: directory)"},
      {"run.seed", KeyType::count, "1", {}, "64-bit seed"},
      {"run.workers", KeyType::count, "1", {}, "worker threads", 1},
  };
  return keys;
}

inline const KeySpec* find_key(const std::string& key) {
  for (const auto& k : schema()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_real(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_count(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline void check_value(const KeySpec& spec, const std::string& value) {
  const auto fail = [&](const std::string& why) {
    throw ConfigError(spec.key + " = '" + value + "': " + why);
  };
  switch (spec.type) {
    case KeyType::probability: {
      const auto v = parse_real(value);
      if (!v) fail("not a number");
      if (*v < 0.0 || *v > 1.0) fail("must lie in [0, 1]");
      break;
    }
    case KeyType::real:
      if (!parse_real(value)) fail("not a number");
      break;
    case KeyType::count: {
      const auto v = parse_count(value);
      if (!v) fail("not a non-negative integer");
      if (*v < spec.min_count) fail("must be at least " + std::to_string(spec.min_count));
      break;
    }
    case KeyType::choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        fail("unknown choice");
      }
      break;
    case KeyType::text:
      break;
    case KeyType::count_list:
      for (const auto& item : split(value)) {
        if (!parse_count(item)) fail("'" + item + "' is not a non-negative integer");
      }
      break;
    case KeyType::choice_list:
      for (const auto& item : split(value)) {
        if (std::find(spec.choices.begin(), spec.choices.end(), item) == spec.choices.end()) {
          fail("unknown item '" + item + "'");
        }
      }
      break;
  }
}

}  // namespace detail

class Config {
 public:
  void set(const std::string& key, const std::string& raw) {
    const KeySpec* spec = find_key(key);
    if (spec == nullptr) {
      throw ConfigError("unknown key '" + key + "'");
    }
    const std::string value = detail::trim(raw);
    if (!value.empty()) {
      detail::check_value(*spec, value);
    }
    values_[key] = value;
  }

  void load_file(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError(path.string() + ": key '" + section + "' is outside any section");
      }
      for (const auto& [name, value] : body) {
        set(section + "." + name, value.get_value<std::string>());
      }
    }
  }

  /// Explicit value, else the schema default; empty if neither.
  std::string raw(const std::string& key) const {
    const KeySpec* spec = find_key(key);
    if (spec == nullptr) throw ConfigError("unknown key '" + key + "'");
    const auto it = values_.find(key);
    return it != values_.end() && !it->second.empty() ? it->second : spec->fallback;
  }

  bool has(const std::string& key) const { return !raw(key).empty(); }

  double real(const std::string& key) const { return *detail::parse_real(require(key)); }
  std::uint64_t count(const std::string& key) const { return *detail::parse_count(require(key)); }
  std::string text(const std::string& key) const { return raw(key); }

  std::optional<double> optional_real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return real(key);
  }

  std::vector<std::string> list(const std::string& key) const { return detail::split(raw(key)); }

  std::vector<std::uint64_t> count_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const auto& item : list(key)) out.push_back(*detail::parse_count(item));
    return out;
  }

  /// Fully resolved configuration in INI form; loadable again with --config.
  void write_ini(const std::filesystem::path& path, const std::string& command) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "# qkdsim " << command << "\n";
    std::string section;
    for (const auto& spec : schema()) {
      const auto dot = spec.key.find('.');
      const std::string sec = spec.key.substr(0, dot);
      if (sec != section) {
        out << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
        section = sec;
      }
      out << spec.key.substr(dot + 1) << " = " << raw(spec.key) << "\n";
    }
    if (!out) throw ConfigError("cannot write " + path.string());
  }

 private:
  std::string require(const std::string& key) const {
    const std::string v = raw(key);
    if (v.empty()) throw ConfigError(key + " is required");
    return v;
  }

  std::map<std::string, std::string> values_;
};

/// Profile file: [profile] with name, gate_time_ns, gate_time_assumed,
/// cnot_beta, and comma-separated t1_us and readout_error lists.
inline HardwareProfile load_profile_file(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  static const std::vector<std::string> allowed = {"name",      "gate_time_ns", "gate_time_assumed",
                                                   "cnot_beta", "t1_us",        "readout_error"};
  for (const auto& [section, body] : tree) {
    if (section != "profile") throw ConfigError(path.string() + ": unknown section '" + section + "'");
    for (const auto& [name, value] : body) {
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        throw ConfigError(path.string() + ": unknown key 'profile." + name + "'");
      }
    }
  }
  const auto get = [&](const std::string& key) {
    const auto v = tree.get_optional<std::string>("profile." + key);
    if (!v) throw ConfigError(path.string() + ": missing profile." + key);
    return detail::trim(*v);
  };
  const auto number = [&](const std::string& item, const std::string& key) {
    const auto v = detail::parse_real(item);
    if (!v) throw ConfigError(path.string() + ": profile." + key + " has bad value '" + item + "'");
    return *v;
  };

  std::vector<double> t1;
  std::vector<double> readout;
  for (const auto& item : detail::split(get("t1_us"))) t1.push_back(number(item, "t1_us"));
  for (const auto& item : detail::split(get("readout_error"))) {
    readout.push_back(number(item, "readout_error"));
  }
  if (t1.size() != readout.size()) {
    throw ConfigError(path.string() + ": t1_us and readout_error lengths differ");
  }
  const std::string assumed = tree.get<std::string>("profile.gate_time_assumed", "false");
  if (assumed != "true" && assumed != "false") {
    throw ConfigError(path.string() + ": gate_time_assumed must be true or false");
  }
  HardwareProfile profile = profiles::make(get("name"), t1, readout,
                                           number(get("gate_time_ns"), "gate_time_ns"),
                                           assumed == "true");
  profile.cnot_beta = number(tree.get<std::string>("profile.cnot_beta", "0"), "cnot_beta");
  try {
    profile.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return profile;
}

}  // namespace qkdsim::cli
