#pragma once

#include <cstdio>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rhsim/oracle.hpp"
#include "rhsim/tracker.hpp"
#include "rhsim/workloads.hpp"

namespace rhsim {

struct RunOptions {
  TrackerMode mode = TrackerMode::Rvc;
  RetriggerPolicy retrigger = RetriggerPolicy::Reset;
  std::optional<Count> threshold_override;
};

struct ActionRecord {
  Count act_seq;
  MitigationAction action;
  std::vector<Row> refreshed;
};

struct RunReport {
  Count acts = 0;
  Count mitigations_issued = 0;
  Count rows_refreshed = 0;
  std::vector<FlipEvent> flips;
  double vrr_energy = 0;
  double total_energy = 0;
  std::vector<ActionRecord> actions;

  bool secure() const { return flips.empty(); }
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// Steps tracker and oracle in lockstep over one trace.
///
/// Per activation the ordering is physical: the tracker observes the ACT,
/// the oracle applies the ACT's disturbance, and only then is any emitted
/// mitigation's refresh set applied to the oracle. A same-cycle refresh
/// cannot retroactively absorb that ACT's disturbance. Window boundaries
/// come from explicit trace markers and are also rolled automatically once
/// window_acts activations accumulate, since a real window cannot hold
/// more.
inline RunReport run(const DramConfig& cfg, const RunOptions& opt, const Trace& trace,
                     const EnergyModel& energy) {
  cfg.validate();
  energy.validate();
  Tracker tracker(cfg, opt.mode, opt.retrigger, opt.threshold_override);
  DisturbanceOracle oracle(cfg);

  RunReport report;
  Count act_seq = 0;
  for (const auto& rec : trace.records) {
    if (rec.kind == TraceRecord::Kind::WindowBoundary) {
      tracker.on_window_boundary();
      oracle.window_boundary();
      continue;
    }
    if (rec.row < 0 || rec.row >= cfg.rows_per_bank)
      throw ValidationError("trace row " + std::to_string(rec.row) + " out of range for config");
    if (tracker.acts_in_window() == cfg.window_acts) {
      tracker.on_window_boundary();
      oracle.window_boundary();
    }
    ++act_seq;
    auto action = tracker.on_activation(rec.row);
    oracle.on_activation(rec.row, act_seq);
    if (action) {
      std::vector<Row> rows = refresh_set(*action, cfg);
      oracle.refresh(rows);
      report.actions.push_back({act_seq, std::move(*action), std::move(rows)});
    }
  }

  report.acts = act_seq;
  report.mitigations_issued = tracker.stats().mitigations_issued;
  report.rows_refreshed = tracker.stats().rows_refreshed;
  report.flips = oracle.flips();
  report.vrr_energy = static_cast<double>(report.mitigations_issued) * energy.e_mitigation_cmd +
                      static_cast<double>(report.rows_refreshed) * energy.e_row_refresh;
  report.total_energy = static_cast<double>(report.acts) * energy.e_act + report.vrr_energy;
  return report;
}

// Percentage improvement of rvc over the baseline: 100*(base - rvc)/base.
// base == rvc == 0 counts as 0; base == 0 with rvc > 0 has no finite
// percentage and is reported as an unbounded regression.
struct PctImprovement {
  bool unbounded_regression = false;
  double value = 0;

  std::string str() const {
    return unbounded_regression ? "regression_unbounded" : detail::fmt_double(value);
  }
};

inline PctImprovement pct_improvement(double base, double rvc) {
  if (base == 0 && rvc == 0) return {false, 0};
  if (base == 0) return {true, 0};
  return {false, 100.0 * (base - rvc) / base};
}

struct TraceComparison {
  std::string trace_name;
  RunReport baseline;  // aggressor mode
  RunReport rvc;
  PctImprovement pct_mitigations, pct_refreshes, pct_vrr_energy, pct_total_energy;
};

struct ComparisonReport {
  std::vector<TraceComparison> per_trace;
  PctImprovement avg_mitigations, avg_refreshes, avg_vrr_energy, avg_total_energy;
};

/// Runs aggressor baseline and RVC on every trace and reports per-trace
/// and average percentage improvements.
inline ComparisonReport compare(const DramConfig& cfg, const std::vector<NamedTrace>& traces,
                                const EnergyModel& energy,
                                const RunOptions& baseline_opt = {TrackerMode::Aggressor,
                                                                  RetriggerPolicy::Reset,
                                                                  std::nullopt},
                                const RunOptions& rvc_opt = {TrackerMode::Rvc,
                                                             RetriggerPolicy::Reset,
                                                             std::nullopt}) {
  if (traces.empty()) throw ValidationError("compare requires at least one trace");
  ComparisonReport out;
  for (const auto& nt : traces) {
    TraceComparison c;
    c.trace_name = nt.name;
    c.baseline = run(cfg, baseline_opt, nt.trace, energy);
    c.rvc = run(cfg, rvc_opt, nt.trace, energy);
    c.pct_mitigations = pct_improvement(static_cast<double>(c.baseline.mitigations_issued),
                                        static_cast<double>(c.rvc.mitigations_issued));
    c.pct_refreshes = pct_improvement(static_cast<double>(c.baseline.rows_refreshed),
                                      static_cast<double>(c.rvc.rows_refreshed));
    c.pct_vrr_energy = pct_improvement(c.baseline.vrr_energy, c.rvc.vrr_energy);
    c.pct_total_energy = pct_improvement(c.baseline.total_energy, c.rvc.total_energy);
    out.per_trace.push_back(std::move(c));
  }

  auto average = [&](auto pick) {
    PctImprovement avg;
    double sum = 0;
    for (const auto& c : out.per_trace) {
      const PctImprovement& p = pick(c);
      if (p.unbounded_regression) return PctImprovement{true, 0};
      sum += p.value;
    }
    avg.value = sum / static_cast<double>(out.per_trace.size());
    return avg;
  };
  out.avg_mitigations = average([](const TraceComparison& c) { return c.pct_mitigations; });
  out.avg_refreshes = average([](const TraceComparison& c) { return c.pct_refreshes; });
  out.avg_vrr_energy = average([](const TraceComparison& c) { return c.pct_vrr_energy; });
  out.avg_total_energy = average([](const TraceComparison& c) { return c.pct_total_energy; });
  return out;
}

// CSV rendering. Headers are part of the external contract and must not
// change.
inline constexpr const char* kRunCsvHeader =
    "trh,n,mode,trace,acts,mitigations,refreshes,flips,vrr_energy,total_energy";
inline constexpr const char* kComparisonCsvHeader =
    "trh,n,mode,trace,acts,mitigations,refreshes,flips,vrr_energy,total_energy,"
    "pct_mitigations,pct_refreshes,pct_vrr_energy,pct_total_energy";

inline std::string run_csv_row(const DramConfig& cfg, const std::string& mode,
                               const std::string& trace_name, const RunReport& r) {
  std::ostringstream os;
  os << cfg.t_rh << ',' << cfg.blast_radius << ',' << mode << ',' << trace_name << ','
     << r.acts << ',' << r.mitigations_issued << ',' << r.rows_refreshed << ','
     << r.flips.size() << ',' << detail::fmt_double(r.vrr_energy) << ','
     << detail::fmt_double(r.total_energy);
  return os.str();
}

inline std::string comparison_csv_rows(const DramConfig& cfg, const TraceComparison& c) {
  const std::string pct = ',' + c.pct_mitigations.str() + ',' + c.pct_refreshes.str() + ',' +
                          c.pct_vrr_energy.str() + ',' + c.pct_total_energy.str();
  return run_csv_row(cfg, "aggressor", c.trace_name, c.baseline) + pct + '\n' +
         run_csv_row(cfg, "rvc", c.trace_name, c.rvc) + pct + '\n';
}

// One sweep cell: a (t_rh, blast_radius) pair compared over a trace suite,
// or the reason it was skipped.
struct SweepCell {
  Count t_rh = 0;
  Row blast_radius = 0;
  DramConfig cfg;
  std::optional<ComparisonReport> report;
  std::string skip_reason;
};

using SuiteBuilder = std::vector<NamedTrace> (*)(const DramConfig&, std::uint64_t seed);

/// Cross-product execution over threshold/blast-radius grids. Invalid
/// combinations are reported with a reason, never silently dropped. Cells
/// execute concurrently; results are assembled in grid order so output is
/// deterministic regardless of completion order.
inline std::vector<SweepCell> sweep(const DramConfig& base, const std::vector<Count>& t_rh_list,
                                    const std::vector<Row>& n_list, SuiteBuilder build_suite,
                                    std::uint64_t seed, const EnergyModel& energy,
                                    const RunOptions& baseline_opt = {TrackerMode::Aggressor,
                                                                      RetriggerPolicy::Reset,
                                                                      std::nullopt},
                                    const RunOptions& rvc_opt = {TrackerMode::Rvc,
                                                                 RetriggerPolicy::Reset,
                                                                 std::nullopt}) {
  std::vector<SweepCell> cells;
  for (Count trh : t_rh_list)
    for (Row n : n_list) {
      SweepCell cell;
      cell.t_rh = trh;
      cell.blast_radius = n;
      cell.cfg = base;
      cell.cfg.t_rh = trh;
      cell.cfg.blast_radius = n;
      try {
        cell.cfg.validate();
      } catch (const ConfigError& e) {
        cell.skip_reason = e.what();
      }
      cells.push_back(std::move(cell));
    }

  std::vector<std::future<ComparisonReport>> jobs(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].skip_reason.empty()) continue;
    jobs[i] = std::async(std::launch::async, [&, i] {
      const std::vector<NamedTrace> suite = build_suite(cells[i].cfg, seed);
      return compare(cells[i].cfg, suite, energy, baseline_opt, rvc_opt);
    });
  }
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (jobs[i].valid()) cells[i].report = jobs[i].get();
  return cells;
}

}  // namespace rhsim
