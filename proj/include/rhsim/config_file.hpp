#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "rhsim/harness.hpp"

namespace rhsim {

inline constexpr const char* kVersion = "rhsim 0.1.0";

// Fully resolved simulation configuration: DRAM geometry, energy model,
// tracker selection and the run seed. Values come from a flat key=value
// config file, overridden by CLI flags; see README for the key list.
struct SimConfig {
  DramConfig dram;
  EnergyModel energy;
  TrackerMode mode = TrackerMode::Rvc;
  RetriggerPolicy retrigger = RetriggerPolicy::Reset;
  std::optional<Count> threshold_override;
  std::uint64_t seed = 1;

  RunOptions run_options() const { return {mode, retrigger, threshold_override}; }

  void validate() const {
    dram.validate();
    energy.validate();
  }

  // Deterministic one-line echo of every resolved field, embedded in the
  // header of every output file.
  std::string echo() const {
    std::ostringstream os;
    os << "rows_per_bank=" << dram.rows_per_bank << " trh=" << dram.t_rh
       << " blast_radius=" << dram.blast_radius << " window_acts=" << dram.window_acts
       << " phase_model=" << to_string(dram.phase_model) << " e_act=" << dram_fmt(energy.e_act)
       << " e_row_refresh=" << dram_fmt(energy.e_row_refresh)
       << " e_mitigation_cmd=" << dram_fmt(energy.e_mitigation_cmd)
       << " mode=" << to_string(mode) << " retrigger=" << to_string(retrigger)
       << " threshold_override="
       << (threshold_override ? std::to_string(*threshold_override) : std::string("none"))
       << " seed=" << seed;
    return os.str();
  }

 private:
  static std::string dram_fmt(double v) { return detail::fmt_double(v); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("invalid integer for '" + key + "': " + v);
  return out;
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for '" + key + "': " + v);
  }
}

}  // namespace detail

/// Applies one key=value pair. Shared by the config-file reader and the
/// CLI flag layer so both accept the same vocabulary.
inline void apply_config_key(SimConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_u64;
  if (key == "rows_per_bank")
    cfg.dram.rows_per_bank = static_cast<Row>(parse_u64(value, key));
  else if (key == "trh")
    cfg.dram.t_rh = parse_u64(value, key);
  else if (key == "blast_radius")
    cfg.dram.blast_radius = static_cast<Row>(parse_u64(value, key));
  else if (key == "window_acts")
    cfg.dram.window_acts = parse_u64(value, key);
  else if (key == "phase_model") {
    if (value == "epoch")
      cfg.dram.phase_model = PhaseModel::EpochBoundary;
    else if (value == "staggered")
      cfg.dram.phase_model = PhaseModel::Staggered;
    else
      throw ConfigError("phase_model must be 'epoch' or 'staggered', got: " + value);
  } else if (key == "e_act")
    cfg.energy.e_act = parse_double(value, key);
  else if (key == "e_row_refresh")
    cfg.energy.e_row_refresh = parse_double(value, key);
  else if (key == "e_mitigation_cmd")
    cfg.energy.e_mitigation_cmd = parse_double(value, key);
  else if (key == "mode") {
    if (value == "aggressor")
      cfg.mode = TrackerMode::Aggressor;
    else if (value == "rvc")
      cfg.mode = TrackerMode::Rvc;
    else
      throw ConfigError("mode must be 'aggressor' or 'rvc', got: " + value);
  } else if (key == "retrigger") {
    if (value == "reset")
      cfg.retrigger = RetriggerPolicy::Reset;
    else if (value == "multiples")
      cfg.retrigger = RetriggerPolicy::Multiples;
    else
      throw ConfigError("retrigger must be 'reset' or 'multiples', got: " + value);
  } else if (key == "threshold_override") {
    if (value == "none")
      cfg.threshold_override.reset();
    else
      cfg.threshold_override = parse_u64(value, key);
  } else if (key == "seed")
    cfg.seed = parse_u64(value, key);
  else
    throw ConfigError("unknown config key: " + key);
}

/// Flat key=value text, '#' comments, blank lines ignored.
inline SimConfig load_config_file(const std::string& path, SimConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    try {
      apply_config_key(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

}  // namespace rhsim
