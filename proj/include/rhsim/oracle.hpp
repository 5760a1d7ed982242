#pragma once

#include <cstdint>
#include <vector>

#include "rhsim/dram.hpp"

namespace rhsim {

struct FlipEvent {
  Count act_seq;     // 1-based activation index at which the flip occurred
  Row row;
  Count disturbance; // accumulated disturbance at the moment of the flip
  bool operator==(const FlipEvent&) const = default;
};

// Exact physical model of RowHammer disturbance. Tracks, per row, the
// number of neighbor activations absorbed since the row's charge was last
// restored (own activation, mitigation refresh, or auto-refresh), and
// records a bit flip whenever that count reaches t_rh.
//
// Restoration sources:
//   - activating a row restores it (an activation is a refresh);
//   - oracle_refresh() restores the given rows (mitigation);
//   - auto-refresh per the phase model. Under EpochBoundary the caller
//     signals window ends via window_boundary(), which restores every row.
//     Under Staggered, row r is restored once per window at activation
//     position floor(r*W/rows); positions advance one per activation and
//     window_boundary() jumps the position clock to the next window start,
//     so restorations of skipped slots are applied lazily on next touch.
//
// A flip is recorded at the exact crossing (disturbance == t_rh);
// disturbance keeps accumulating afterwards for post-mortem inspection,
// and a restored row can cross and flip again.
class DisturbanceOracle {
 public:
  explicit DisturbanceOracle(const DramConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    disturbance_.assign(static_cast<std::size_t>(cfg_.rows_per_bank), 0);
    if (cfg_.phase_model == PhaseModel::Staggered)
      checkpoint_.assign(static_cast<std::size_t>(cfg_.rows_per_bank), -1);
  }

  void on_activation(Row row, Count act_seq) {
    check_row(row);
    if (act_seq <= last_act_seq_)
      throw ContractViolation("act_seq must be strictly increasing");
    last_act_seq_ = act_seq;

    const std::int64_t pos = clock_++;
    normalize(row, pos);
    disturbance_[static_cast<std::size_t>(row)] = 0;  // activation restores the row

    const Row lo = std::max<Row>(0, row - cfg_.blast_radius);
    const Row hi = std::min<Row>(cfg_.rows_per_bank - 1, row + cfg_.blast_radius);
    for (Row v = lo; v <= hi; ++v) {
      if (v == row) continue;
      normalize(v, pos);
      Count& d = disturbance_[static_cast<std::size_t>(v)];
      if (++d == cfg_.t_rh) flips_.push_back({act_seq, v, d});
    }
  }

  void refresh(const std::vector<Row>& rows) {
    for (Row r : rows) {
      check_row(r);
      disturbance_[static_cast<std::size_t>(r)] = 0;
      if (cfg_.phase_model == PhaseModel::Staggered)
        checkpoint_[static_cast<std::size_t>(r)] = clock_ - 1;
    }
  }

  void window_boundary() {
    if (cfg_.phase_model == PhaseModel::EpochBoundary) {
      std::fill(disturbance_.begin(), disturbance_.end(), 0);
    } else {
      // End the current window: the position clock rounds up to the next
      // window start (no-op if already on a boundary) and the skipped
      // auto-refresh slots take effect lazily in normalize().
      const auto w = static_cast<std::int64_t>(cfg_.window_acts);
      clock_ = (clock_ + w - 1) / w * w;
    }
  }

  // Disturbance as of now, with pending staggered restorations applied.
  Count disturbance(Row row) const {
    check_row(row);
    if (cfg_.phase_model == PhaseModel::Staggered &&
        slot_fired(row, checkpoint_[static_cast<std::size_t>(row)], clock_ - 1))
      return 0;
    return disturbance_[static_cast<std::size_t>(row)];
  }

  const std::vector<FlipEvent>& flips() const { return flips_; }
  const DramConfig& config() const { return cfg_; }

  // Auto-refresh slot of a row under the Staggered model: the activation
  // position within each window at which the row is restored.
  std::int64_t slot_of(Row row) const {
    return static_cast<std::int64_t>(
        (static_cast<__int128>(row) * static_cast<__int128>(cfg_.window_acts)) /
        cfg_.rows_per_bank);
  }

 private:
  void check_row(Row row) const {
    if (row < 0 || row >= cfg_.rows_per_bank)
      throw DomainError("row " + std::to_string(row) + " out of range");
  }

  // True if row's slot fired at any position in (from, to].
  bool slot_fired(Row row, std::int64_t from, std::int64_t to) const {
    if (to < from) return false;
    const auto w = static_cast<std::int64_t>(cfg_.window_acts);
    const std::int64_t s = slot_of(row);
    return floor_div(to - s, w) > floor_div(from - s, w);
  }

  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  }

  // Apply any auto-refresh slot of `row` elapsed up to and including `pos`.
  void normalize(Row row, std::int64_t pos) {
    if (cfg_.phase_model != PhaseModel::Staggered) return;
    auto& cp = checkpoint_[static_cast<std::size_t>(row)];
    if (slot_fired(row, cp, pos)) disturbance_[static_cast<std::size_t>(row)] = 0;
    cp = pos;
  }

  DramConfig cfg_;
  std::vector<Count> disturbance_;
  std::vector<std::int64_t> checkpoint_;  // staggered: last position examined per row
  std::vector<FlipEvent> flips_;
  std::int64_t clock_ = 0;  // position of the next activation
  Count last_act_seq_ = 0;
};

}  // namespace rhsim
