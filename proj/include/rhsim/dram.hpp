#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rhsim {

using Row = std::int64_t;
using Count = std::uint64_t;

// Error taxonomy. The CLI maps each class to a distinct exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EncodingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// How per-row auto-refresh is scheduled within a refresh window.
// EpochBoundary: every row is restored at the window boundary.
// Staggered: row r is restored once per window at activation position
// floor(r * window_acts / rows_per_bank), so restorations spread evenly
// across the window and counter state straddles boundaries.
enum class PhaseModel { EpochBoundary, Staggered };

inline const char* to_string(PhaseModel m) {
  return m == PhaseModel::EpochBoundary ? "epoch" : "staggered";
}

/// Device geometry and protection parameters for one simulated bank.
struct DramConfig {
  Row rows_per_bank = 65536;
  Count t_rh = 500;        // RowHammer threshold: disturbance a row absorbs
                           // between restorations without flipping
  Row blast_radius = 2;    // victim rows per side of an aggressor
  Count window_acts = 665000;  // max activations per bank per refresh window
                               // (DDR5 ballpark: tREFW / tRC ~= 665k)
  PhaseModel phase_model = PhaseModel::EpochBoundary;

  void validate() const {
    if (rows_per_bank <= 0) throw ConfigError("rows_per_bank must be positive");
    if (t_rh == 0) throw ConfigError("t_rh must be positive");
    if (blast_radius <= 0) throw ConfigError("blast_radius must be positive");
    if (t_rh <= 4 * static_cast<Count>(blast_radius))
      throw ConfigError("t_rh must exceed 4*blast_radius; no usable aggressor-mode threshold otherwise");
    if (2 * blast_radius >= rows_per_bank)
      throw ConfigError("blast_radius must be less than rows_per_bank/2");
    if (window_acts < t_rh)
      throw ConfigError("window_acts must be at least t_rh; shorter windows cannot express an attack");
  }
};

/// Abstract energy accounting. Unit-free; only relative comparisons are
/// meaningful.
struct EnergyModel {
  double e_act = 1.0;             // per row activation
  double e_row_refresh = 1.0;     // per single row refresh
  double e_mitigation_cmd = 1.0;  // fixed cost per mitigation command

  void validate() const {
    if (e_act < 0 || e_row_refresh < 0 || e_mitigation_cmd < 0)
      throw ConfigError("energy constants must be nonnegative");
  }
};

/// Rows within the blast radius of `row`, clipped to the bank, ascending.
/// Never contains `row` itself.
inline std::vector<Row> neighbors(Row row, const DramConfig& cfg) {
  if (row < 0 || row >= cfg.rows_per_bank)
    throw DomainError("row " + std::to_string(row) + " out of range [0, " +
                      std::to_string(cfg.rows_per_bank) + ")");
  std::vector<Row> out;
  out.reserve(static_cast<std::size_t>(2 * cfg.blast_radius));
  Row lo = row - cfg.blast_radius;
  Row hi = row + cfg.blast_radius;
  if (lo < 0) lo = 0;
  if (hi > cfg.rows_per_bank - 1) hi = cfg.rows_per_bank - 1;
  for (Row r = lo; r <= hi; ++r)
    if (r != row) out.push_back(r);
  return out;
}

// Tracking thresholds. Both are the largest integer T satisfying a strict
// inequality; comparisons are exact in integers, never floating point.
//
//   aggressor mode: 2(T-1) < t_rh / (2n)   <=>   4n(T-1) < t_rh
//   victim mode:    2(T-1) < t_rh
//
// The factor 2 covers activations split across two consecutive refresh
// windows; the division by 2n covers the cumulative effect of all 2n
// aggressors sharing one victim. Victim-centric counting measures the
// cumulative effect directly, so only the factor 2 remains.

inline Count threshold_aggressor(Count t_rh, Row blast_radius) {
  if (blast_radius <= 0) throw ConfigError("blast_radius must be positive");
  const Count four_n = 4 * static_cast<Count>(blast_radius);
  if (t_rh <= four_n)
    throw ConfigError("no positive aggressor threshold: t_rh must exceed 4*blast_radius");
  return (t_rh - 1) / four_n + 1;
}

inline Count threshold_rvc(Count t_rh) {
  if (t_rh < 4) throw ConfigError("no usable victim threshold: t_rh must be at least 4");
  return (t_rh - 1) / 2 + 1;
}

/// Misra-Gries count-table sizing: the smallest N_entry with
/// N_entry > w/t - 1, i.e. the smallest N such that any address activated
/// more than w/(N+1) times in a stream of w is guaranteed resident when the
/// per-address guarantee threshold is t.
inline Count table_entries(Count w, Count t) {
  if (w == 0 || t == 0) throw ConfigError("table_entries requires positive w and t");
  if (t > w) throw ConfigError("table_entries: threshold exceeds window; tracker unnecessary");
  // smallest N with t*(N+1) > w is exactly floor(w/t)
  return w / t;
}

/// table_entries with an exact rational threshold t_num/t_den.
inline Count table_entries_rational(Count w, Count t_num, Count t_den) {
  if (w == 0 || t_num == 0 || t_den == 0)
    throw ConfigError("table_entries_rational requires positive arguments");
  if (t_num > w * t_den)
    throw ConfigError("table_entries_rational: threshold exceeds window");
  // smallest N with t_num*(N+1) > w*t_den
  return (w * t_den) / t_num;
}

/// Count-table size for aggressor-mode tracking: Misra-Gries over W
/// activations at the aggressor threshold.
inline Count aggressor_table_entries(const DramConfig& cfg) {
  return table_entries(cfg.window_acts, threshold_aggressor(cfg.t_rh, cfg.blast_radius));
}

/// Count-table size for victim-mode tracking. Each activation feeds up to
/// 2n victim counters, so the observation volume and the threshold both
/// scale by 2n relative to aggressor mode and the table size stays
/// constant up to integer rounding of the thresholds.
inline Count rvc_table_entries(const DramConfig& cfg) {
  const Count volume = 2 * static_cast<Count>(cfg.blast_radius) * cfg.window_acts;
  return table_entries(volume, threshold_rvc(cfg.t_rh));
}

}  // namespace rhsim
