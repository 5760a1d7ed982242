#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhsim/count_table.hpp"
#include "rhsim/dram.hpp"

namespace rhsim {

enum class TrackerMode { Aggressor, Rvc };
enum class RetriggerPolicy { Reset, Multiples };

inline const char* to_string(TrackerMode m) {
  return m == TrackerMode::Aggressor ? "aggressor" : "rvc";
}
inline const char* to_string(RetriggerPolicy p) {
  return p == RetriggerPolicy::Reset ? "reset" : "multiples";
}

// A mitigation command sent to the DRAM.
//
// BlanketVrr refreshes every row within the blast radius of the anchor
// (the classic victim-row-refresh reaction to a hot aggressor).
// SelectiveVrr carries a 2n-bit vector naming exactly the rows to refresh
// near the anchor, bit i covering offset i-n for i < n and i-n+1 otherwise
// (i.e. [-n..-1, +1..+n], the anchor itself excluded). Bits whose offset
// falls outside the bank are always 0.
struct MitigationAction {
  enum class Kind { BlanketVrr, SelectiveVrr };
  Kind kind;
  Row anchor_row;
  std::vector<bool> victim_mask;  // exactly 2*blast_radius bits

  bool operator==(const MitigationAction&) const = default;
};

inline Row mask_offset(std::size_t bit, Row blast_radius) {
  const auto n = static_cast<std::size_t>(blast_radius);
  return bit < n ? static_cast<Row>(bit) - blast_radius
                 : static_cast<Row>(bit) - blast_radius + 1;
}

inline std::size_t mask_bit(Row offset, Row blast_radius) {
  return static_cast<std::size_t>(offset < 0 ? offset + blast_radius
                                             : offset + blast_radius - 1);
}

/// Decodes a mitigation action into the absolute rows it refreshes,
/// ascending. BlanketVrr always yields exactly neighbors(anchor).
inline std::vector<Row> refresh_set(const MitigationAction& a, const DramConfig& cfg) {
  const auto width = static_cast<std::size_t>(2 * cfg.blast_radius);
  if (a.victim_mask.size() != width)
    throw EncodingError("victim mask has " + std::to_string(a.victim_mask.size()) +
                        " bits, expected " + std::to_string(width));
  if (a.anchor_row < 0 || a.anchor_row >= cfg.rows_per_bank)
    throw EncodingError("anchor row out of range");
  std::vector<Row> rows;
  rows.reserve(width);
  bool any = false;
  for (std::size_t i = 0; i < width; ++i) {
    const Row target = a.anchor_row + mask_offset(i, cfg.blast_radius);
    const bool in_range = target >= 0 && target < cfg.rows_per_bank;
    if (a.victim_mask[i]) {
      if (!in_range) throw EncodingError("mask bit set for out-of-range row " + std::to_string(target));
      rows.push_back(target);
      any = true;
    } else if (a.kind == MitigationAction::Kind::BlanketVrr && in_range) {
      throw EncodingError("blanket mask must cover every in-range neighbor");
    }
  }
  if (!any) throw EncodingError("mitigation mask has no bits set");
  return rows;
}

struct TrackerStats {
  Count mitigations_issued = 0;
  Count rows_refreshed = 0;
  Count acts_observed = 0;
  bool operator==(const TrackerStats&) const = default;
};

// One RowHammer tracker instance per simulated bank. Two detection modes
// behind one interface:
//
//   Aggressor: count activations per row (Graphene-style). When a row's
//   estimate reaches the threshold, issue a BlanketVrr for its whole
//   blast radius.
//
//   Rvc: count per-victim vulnerability. Activating a row zeroes its own
//   counter (the access restored it) and increments every neighbor within
//   the blast radius; victims whose estimate reaches the threshold are
//   refreshed together through a single SelectiveVrr.
//
// Thresholds default to the mode's closed form (threshold_aggressor /
// threshold_rvc); threshold_override substitutes a caller-chosen value and
// the count table is sized for whichever threshold is active. The caller
// drives window boundaries; feeding more than window_acts activations
// without a boundary is a contract violation.
class Tracker {
 public:
  Tracker(const DramConfig& cfg, TrackerMode mode,
          RetriggerPolicy retrigger = RetriggerPolicy::Reset,
          std::optional<Count> threshold_override = std::nullopt)
      : cfg_(cfg),
        mode_(mode),
        retrigger_(retrigger),
        threshold_(threshold_override
                       ? *threshold_override
                       : (mode == TrackerMode::Aggressor
                              ? threshold_aggressor(cfg.t_rh, cfg.blast_radius)
                              : threshold_rvc(cfg.t_rh))),
        table_(static_cast<std::size_t>(
            mode == TrackerMode::Aggressor
                ? table_entries(cfg.window_acts, threshold_)
                : table_entries(2 * static_cast<Count>(cfg.blast_radius) * cfg.window_acts,
                                threshold_))) {
    cfg_.validate();
    if (threshold_ == 0) throw ConfigError("tracker threshold must be positive");
  }

  std::optional<MitigationAction> on_activation(Row row) {
    if (row < 0 || row >= cfg_.rows_per_bank)
      throw DomainError("row " + std::to_string(row) + " out of range");
    if (acts_in_window_ >= cfg_.window_acts)
      throw ContractViolation("window overflow: caller failed to roll the window");
    ++acts_in_window_;
    ++stats_.acts_observed;

    std::optional<MitigationAction> action =
        mode_ == TrackerMode::Aggressor ? aggressor_step(row) : rvc_step(row);
    if (action) {
      ++stats_.mitigations_issued;
      for (bool b : action->victim_mask)
        if (b) ++stats_.rows_refreshed;
    }
    return action;
  }

  void on_window_boundary() {
    table_.global_reset();
    acts_in_window_ = 0;
  }

  TrackerMode mode() const { return mode_; }
  RetriggerPolicy retrigger() const { return retrigger_; }
  Count trigger_threshold() const { return threshold_; }
  Count acts_in_window() const { return acts_in_window_; }
  const TrackerStats& stats() const { return stats_; }
  const CountTable& table() const { return table_; }
  const DramConfig& config() const { return cfg_; }

 private:
  bool triggered(Count estimate) const {
    if (estimate < threshold_) return false;
    return retrigger_ == RetriggerPolicy::Reset || estimate % threshold_ == 0;
  }

  std::optional<MitigationAction> aggressor_step(Row row) {
    const Count estimate = table_.observe(row);
    if (!triggered(estimate)) return std::nullopt;
    MitigationAction a{MitigationAction::Kind::BlanketVrr, row,
                       std::vector<bool>(static_cast<std::size_t>(2 * cfg_.blast_radius), false)};
    for (Row v : neighbors(row, cfg_))
      a.victim_mask[mask_bit(v - row, cfg_.blast_radius)] = true;
    if (retrigger_ == RetriggerPolicy::Reset) table_.reset_entry(row);
    return a;
  }

  std::optional<MitigationAction> rvc_step(Row row) {
    table_.reset_entry(row);  // the access itself restored this row
    const std::vector<Row> nb = neighbors(row, cfg_);
    for (Row v : nb) table_.observe(v);

    MitigationAction a{MitigationAction::Kind::SelectiveVrr, row,
                       std::vector<bool>(static_cast<std::size_t>(2 * cfg_.blast_radius), false)};
    bool any = false;
    for (Row v : nb) {
      const auto count = table_.resident_count(v);
      if (count && triggered(*count)) {
        a.victim_mask[mask_bit(v - row, cfg_.blast_radius)] = true;
        any = true;
      }
    }
    if (!any) return std::nullopt;
    if (retrigger_ == RetriggerPolicy::Reset)
      for (Row v : nb)
        if (a.victim_mask[mask_bit(v - row, cfg_.blast_radius)]) table_.reset_entry(v);
    return a;
  }

  DramConfig cfg_;
  TrackerMode mode_;
  RetriggerPolicy retrigger_;
  Count threshold_;
  CountTable table_;
  Count acts_in_window_ = 0;
  TrackerStats stats_;
};

}  // namespace rhsim
