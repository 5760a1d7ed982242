#include "rhsim/harness.hpp"

#include <gtest/gtest.h>

namespace rhsim {
namespace {

DramConfig cfg500() {
  DramConfig cfg;
  cfg.t_rh = 500;
  cfg.blast_radius = 2;
  cfg.rows_per_bank = 4096;
  cfg.window_acts = 65536;
  return cfg;
}

const RunOptions kAggressor{TrackerMode::Aggressor, RetriggerPolicy::Reset, std::nullopt};
const RunOptions kRvc{TrackerMode::Rvc, RetriggerPolicy::Reset, std::nullopt};

TEST(Run, DecoyUnderRvcThreshold500IsSilent) {
  DramConfig cfg = cfg500();
  const Trace trace = gen_decoy(1000, 495, 5, cfg);
  const RunOptions opt{TrackerMode::Rvc, RetriggerPolicy::Reset, Count{500}};
  const RunReport r = run(cfg, opt, trace, EnergyModel{});
  EXPECT_EQ(r.acts, 504u);
  EXPECT_EQ(r.mitigations_issued, 0u);
  EXPECT_EQ(r.rows_refreshed, 0u);
  EXPECT_TRUE(r.flips.empty());
  EXPECT_TRUE(r.secure());
  EXPECT_EQ(r.vrr_energy, 0.0);
}

TEST(Run, DecoyUnderAggressorBaseline) {
  DramConfig cfg = cfg500();
  const Trace trace = gen_decoy(1000, 495, 5, cfg);
  const RunReport r = run(cfg, kAggressor, trace, EnergyModel{});
  EXPECT_EQ(r.mitigations_issued, 7u);
  EXPECT_EQ(r.rows_refreshed, 28u);
  EXPECT_TRUE(r.flips.empty());
}

TEST(Run, EmptyTraceIsAllZeroAndSecure) {
  DramConfig cfg = cfg500();
  const RunReport r = run(cfg, kRvc, Trace{}, EnergyModel{});
  EXPECT_EQ(r.acts, 0u);
  EXPECT_EQ(r.mitigations_issued, 0u);
  EXPECT_EQ(r.rows_refreshed, 0u);
  EXPECT_EQ(r.total_energy, 0.0);
  EXPECT_TRUE(r.secure());
}

TEST(Run, LockstepRefreshAccounting) {
  // every refreshed row the oracle saw corresponds to exactly one emitted
  // action's decoded refresh set, and the counters agree
  DramConfig cfg = cfg500();
  const Trace trace = gen_common_victim(2000, 400, cfg);
  const RunReport r = run(cfg, kRvc, trace, EnergyModel{});
  ASSERT_GT(r.actions.size(), 0u);
  Count rows_total = 0;
  for (const auto& rec : r.actions) {
    EXPECT_EQ(rec.refreshed, refresh_set(rec.action, cfg));
    rows_total += rec.refreshed.size();
  }
  EXPECT_EQ(rows_total, r.rows_refreshed);
  EXPECT_EQ(r.actions.size(), r.mitigations_issued);
}

TEST(Run, EnergyDecomposition) {
  DramConfig cfg = cfg500();
  EnergyModel energy;
  energy.e_act = 2.0;
  energy.e_row_refresh = 3.0;
  energy.e_mitigation_cmd = 5.0;
  const Trace trace = gen_single_sided(1000, 1000, cfg);
  const RunReport r = run(cfg, kAggressor, trace, energy);
  EXPECT_GT(r.mitigations_issued, 0u);
  EXPECT_EQ(r.vrr_energy, static_cast<double>(r.mitigations_issued) * 5.0 +
                              static_cast<double>(r.rows_refreshed) * 3.0);
  EXPECT_EQ(r.total_energy, static_cast<double>(r.acts) * 2.0 + r.vrr_energy);
  EXPECT_LE(r.vrr_energy, r.total_energy);
}

TEST(Run, AutoRollMatchesExplicitWindowMarkers) {
  DramConfig cfg = cfg500();
  cfg.window_acts = 500;

  Trace plain;
  for (int i = 0; i < 1200; ++i) plain.push_act(1000);

  Trace marked;
  for (int i = 0; i < 1200; ++i) {
    if (i > 0 && i % 500 == 0) marked.push_window();
    marked.push_act(1000);
  }

  for (const RunOptions& opt : {kAggressor, kRvc}) {
    const RunReport a = run(cfg, opt, plain, EnergyModel{});
    const RunReport b = run(cfg, opt, marked, EnergyModel{});
    EXPECT_EQ(a.mitigations_issued, b.mitigations_issued);
    EXPECT_EQ(a.rows_refreshed, b.rows_refreshed);
    EXPECT_EQ(a.flips, b.flips);
  }
}

TEST(Run, TraceRowOutsideConfigIsValidationError) {
  DramConfig cfg = cfg500();
  Trace t;
  t.push_act(cfg.rows_per_bank);
  EXPECT_THROW(run(cfg, kRvc, t, EnergyModel{}), ValidationError);
}

TEST(Pct, Definition) {
  EXPECT_EQ(pct_improvement(0, 0).value, 0.0);
  EXPECT_FALSE(pct_improvement(0, 0).unbounded_regression);
  EXPECT_TRUE(pct_improvement(0, 3).unbounded_regression);
  EXPECT_DOUBLE_EQ(pct_improvement(28, 0).value, 100.0);
  EXPECT_DOUBLE_EQ(pct_improvement(100, 25).value, 75.0);
  EXPECT_DOUBLE_EQ(pct_improvement(50, 100).value, -100.0);
  EXPECT_EQ(pct_improvement(0, 3).str(), "regression_unbounded");
  EXPECT_EQ(pct_improvement(28, 0).str(), "100");
}

TEST(Compare, SilentTraceGivesZeroPercentAcrossTheBoard) {
  DramConfig cfg = cfg500();
  std::vector<NamedTrace> traces;
  traces.push_back({"quiet", gen_single_sided(1000, 10, cfg)});
  const ComparisonReport rep = compare(cfg, traces, EnergyModel{});
  ASSERT_EQ(rep.per_trace.size(), 1u);
  EXPECT_EQ(rep.per_trace[0].pct_mitigations.value, 0.0);
  EXPECT_EQ(rep.per_trace[0].pct_refreshes.value, 0.0);
  EXPECT_EQ(rep.per_trace[0].pct_vrr_energy.value, 0.0);
  // both runs burn the same activation energy: 0% total improvement
  EXPECT_EQ(rep.per_trace[0].pct_total_energy.value, 0.0);
}

TEST(Compare, DecoyGoldenIsHundredPercentRefreshReduction) {
  DramConfig cfg = cfg500();
  std::vector<NamedTrace> traces;
  traces.push_back({"decoy", gen_decoy(1000, 495, 5, cfg)});
  const RunOptions rvc_override{TrackerMode::Rvc, RetriggerPolicy::Reset, Count{500}};
  const ComparisonReport rep = compare(cfg, traces, EnergyModel{}, kAggressor, rvc_override);
  ASSERT_EQ(rep.per_trace.size(), 1u);
  EXPECT_EQ(rep.per_trace[0].baseline.rows_refreshed, 28u);
  EXPECT_EQ(rep.per_trace[0].rvc.rows_refreshed, 0u);
  EXPECT_DOUBLE_EQ(rep.per_trace[0].pct_refreshes.value, 100.0);
  EXPECT_DOUBLE_EQ(rep.avg_refreshes.value, 100.0);
}

TEST(Compare, CommonVictimFamilyNeverFavorsBaseline) {
  DramConfig cfg = cfg500();
  std::vector<NamedTrace> traces;
  for (Count per_row : {50u, 125u, 250u, 500u, 1000u})
    traces.push_back({"cv" + std::to_string(per_row), gen_common_victim(2000, per_row, cfg)});
  const ComparisonReport rep = compare(cfg, traces, EnergyModel{});
  for (const auto& c : rep.per_trace) {
    EXPECT_LE(c.rvc.rows_refreshed, c.baseline.rows_refreshed) << c.trace_name;
    EXPECT_TRUE(c.rvc.flips.empty()) << c.trace_name;
    EXPECT_TRUE(c.baseline.flips.empty()) << c.trace_name;
  }
}

TEST(Compare, EmptyTraceListRejected) {
  DramConfig cfg = cfg500();
  EXPECT_THROW(compare(cfg, {}, EnergyModel{}), ValidationError);
}

TEST(Csv, RunRowRendering) {
  DramConfig cfg = cfg500();
  const Trace trace = gen_decoy(1000, 495, 5, cfg);
  const RunReport r = run(cfg, kAggressor, trace, EnergyModel{});
  EXPECT_EQ(run_csv_row(cfg, "aggressor", "decoy", r),
            "500,2,aggressor,decoy,504,7,28,0,35,539");
}

TEST(Csv, ComparisonRowsCarryPctColumns) {
  DramConfig cfg = cfg500();
  std::vector<NamedTrace> traces;
  traces.push_back({"decoy", gen_decoy(1000, 495, 5, cfg)});
  const RunOptions rvc_override{TrackerMode::Rvc, RetriggerPolicy::Reset, Count{500}};
  const ComparisonReport rep = compare(cfg, traces, EnergyModel{}, kAggressor, rvc_override);
  const std::string rows = comparison_csv_rows(cfg, rep.per_trace[0]);
  EXPECT_EQ(rows,
            "500,2,aggressor,decoy,504,7,28,0,35,539,100,100,100,6.493506494\n"
            "500,2,rvc,decoy,504,0,0,0,0,504,100,100,100,6.493506494\n");
}

TEST(Sweep, SingleCellEqualsCompare) {
  DramConfig base = cfg500();
  base.rows_per_bank = 1024;
  const auto suite = [](const DramConfig& cfg, std::uint64_t) { return adversarial_suite(cfg); };
  const auto cells = sweep(base, {500}, {2}, suite, 1, EnergyModel{});
  ASSERT_EQ(cells.size(), 1u);
  ASSERT_TRUE(cells[0].report.has_value());
  const ComparisonReport direct = compare(cells[0].cfg, adversarial_suite(cells[0].cfg), EnergyModel{});
  ASSERT_EQ(cells[0].report->per_trace.size(), direct.per_trace.size());
  for (std::size_t i = 0; i < direct.per_trace.size(); ++i) {
    EXPECT_EQ(comparison_csv_rows(cells[0].cfg, cells[0].report->per_trace[i]),
              comparison_csv_rows(cells[0].cfg, direct.per_trace[i]));
  }
}

TEST(Sweep, InvalidComboIsSkippedWithReason) {
  DramConfig base = cfg500();
  base.rows_per_bank = 1024;
  const auto suite = [](const DramConfig& cfg, std::uint64_t) { return adversarial_suite(cfg); };
  // t_rh=30 with n=8 violates t_rh > 4n; the valid cell still runs
  const auto cells = sweep(base, {30, 500}, {8}, suite, 1, EnergyModel{});
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_FALSE(cells[0].report.has_value());
  EXPECT_FALSE(cells[0].skip_reason.empty());
  EXPECT_TRUE(cells[1].report.has_value());
  EXPECT_TRUE(cells[1].skip_reason.empty());
}

TEST(Sweep, SecuritySuiteIsFlipFreeEverywhere) {
  DramConfig base = cfg500();
  base.rows_per_bank = 4096;
  const auto suite = [](const DramConfig& cfg, std::uint64_t) { return adversarial_suite(cfg); };
  const auto cells = sweep(base, {100, 500, 1000, 5000}, {1, 2, 4, 8}, suite, 1, EnergyModel{});
  for (const auto& cell : cells) {
    ASSERT_TRUE(cell.report.has_value()) << cell.skip_reason;
    for (const auto& c : cell.report->per_trace) {
      EXPECT_TRUE(c.baseline.flips.empty())
          << c.trace_name << " trh=" << cell.t_rh << " n=" << cell.blast_radius;
      EXPECT_TRUE(c.rvc.flips.empty())
          << c.trace_name << " trh=" << cell.t_rh << " n=" << cell.blast_radius;
    }
  }
}

TEST(Sweep, RefreshImprovementGrowsWithBlastRadius) {
  // wider blast radii make every blanket refresh more expensive, so the
  // victim tracker's refresh savings on the shared-victim hammer can only
  // grow with n
  DramConfig base = cfg500();
  base.rows_per_bank = 4096;
  double last_pct = -1;
  for (Row n : {1, 2, 4, 8}) {
    DramConfig cfg = base;
    cfg.blast_radius = n;
    std::vector<NamedTrace> traces;
    traces.push_back({"many_sided", gen_common_victim(2048, cfg.t_rh, cfg)});
    const ComparisonReport rep = compare(cfg, traces, EnergyModel{});
    ASSERT_FALSE(rep.per_trace[0].pct_refreshes.unbounded_regression);
    const double pct = rep.per_trace[0].pct_refreshes.value;
    EXPECT_GE(pct, last_pct) << "n=" << n;
    last_pct = pct;
  }
  EXPECT_GT(last_pct, 0.0);
}

TEST(Sweep, DeterministicAcrossRuns) {
  DramConfig base = cfg500();
  base.rows_per_bank = 1024;
  base.window_acts = 65536;
  const auto suite = [](const DramConfig& cfg, std::uint64_t seed) {
    return benign_suite(cfg, seed);
  };
  auto render = [&](const std::vector<SweepCell>& cells) {
    std::string out;
    for (const auto& c : cells) {
      if (!c.report) continue;
      for (const auto& tc : c.report->per_trace) out += comparison_csv_rows(c.cfg, tc);
    }
    return out;
  };
  const auto a = sweep(base, {500, 1000}, {1, 2}, suite, 7, EnergyModel{});
  const auto b = sweep(base, {500, 1000}, {1, 2}, suite, 7, EnergyModel{});
  EXPECT_EQ(render(a), render(b));
  EXPECT_FALSE(render(a).empty());
}

}  // namespace
}  // namespace rhsim
