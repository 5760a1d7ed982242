// Command-line front end: trace generation, single runs, aggressor-vs-rvc
// comparisons, grid sweeps and the security verification contract.
//
// Exit codes: 0 success / contract met, 64 usage, 65 validation or config,
// 66 I/O, 70 internal, 77 security contract failed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rhsim/config_file.hpp"
#include "rhsim/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 64;
constexpr int kExitValidation = 65;
constexpr int kExitIo = 66;
constexpr int kExitInternal = 70;
constexpr int kExitSecurity = 77;

using namespace rhsim;

struct GlobalFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // applied in flag order
};

SimConfig resolve_config(const GlobalFlags& flags) {
  SimConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path);
  for (const auto& [key, value] : flags.overrides) apply_config_key(cfg, key, value);
  cfg.validate();
  return cfg;
}

// Registers one CLI flag that funnels into the shared config vocabulary.
void add_config_flag(CLI::App* app, GlobalFlags& flags, const std::string& flag,
                     const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
         flag, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); },
         help)
      ->expected(1);
}

std::vector<std::string> header_lines(const SimConfig& cfg) {
  std::vector<std::string> lines;
  lines.push_back(std::string("# ") + kVersion);
  lines.push_back("# config: " + cfg.echo());
  if (cfg.threshold_override)
    lines.push_back("# WARNING: threshold_override=" + std::to_string(*cfg.threshold_override) +
                    " is NON-STANDARD; derived thresholds are bypassed");
  return lines;
}

void write_file(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("failed writing output file: " + path);
}

std::string mask_string(const MitigationAction& a) {
  std::string s;
  s.reserve(a.victim_mask.size());
  for (bool b : a.victim_mask) s.push_back(b ? '1' : '0');
  return s;
}

std::string action_log_line(const ActionRecord& rec, TrackerMode mode) {
  std::ostringstream os;
  os << rec.act_seq << ',' << to_string(mode) << ',' << rec.action.anchor_row << ','
     << mask_string(rec.action) << ',';
  for (std::size_t i = 0; i < rec.refreshed.size(); ++i) {
    if (i) os << ';';
    os << rec.refreshed[i];
  }
  return os.str();
}

std::string flip_log_line(const FlipEvent& f) {
  std::ostringstream os;
  os << f.act_seq << ',' << f.row << ',' << f.disturbance;
  return os.str();
}

void write_run_outputs(const std::string& prefix, const SimConfig& cfg, TrackerMode mode,
                       const std::string& trace_name, const RunReport& report) {
  std::vector<std::string> csv = header_lines(cfg);
  csv.push_back(kRunCsvHeader);
  csv.push_back(run_csv_row(cfg.dram, to_string(mode), trace_name, report));
  write_file(prefix + ".csv", csv);

  std::vector<std::string> actions = header_lines(cfg);
  actions.push_back("# schema: act_seq,mode,anchor_row,mask_bits,refreshed_rows");
  for (const auto& rec : report.actions) actions.push_back(action_log_line(rec, mode));
  write_file(prefix + ".actions.log", actions);

  std::vector<std::string> flips = header_lines(cfg);
  flips.push_back("# schema: act_seq,row,disturbance_at_flip");
  for (const auto& f : report.flips) flips.push_back(flip_log_line(f));
  write_file(prefix + ".flips.log", flips);
}

void print_run_summary(const std::string& trace_name, TrackerMode mode, const RunReport& r) {
  std::printf("%-20s mode=%-9s acts=%llu mitigations=%llu refreshes=%llu flips=%zu "
              "vrr_energy=%s total_energy=%s %s\n",
              trace_name.c_str(), to_string(mode), static_cast<unsigned long long>(r.acts),
              static_cast<unsigned long long>(r.mitigations_issued),
              static_cast<unsigned long long>(r.rows_refreshed), r.flips.size(),
              detail::fmt_double(r.vrr_energy).c_str(), detail::fmt_double(r.total_energy).c_str(),
              r.secure() ? "SECURE" : "FLIPPED");
}

std::string trace_label(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

std::vector<NamedTrace> load_or_build_traces(const SimConfig& cfg,
                                             const std::vector<std::string>& trace_paths,
                                             const std::string& suite_name) {
  if (!trace_paths.empty() && !suite_name.empty())
    throw ValidationError("give either --trace files or --suite, not both");
  if (!trace_paths.empty()) {
    std::vector<NamedTrace> out;
    for (const auto& p : trace_paths)
      out.push_back({trace_label(p), read_trace(p, cfg.dram.rows_per_bank)});
    return out;
  }
  if (suite_name == "adversarial") return adversarial_suite(cfg.dram);
  if (suite_name == "benign") return benign_suite(cfg.dram, cfg.seed);
  if (suite_name == "golden") return golden_suite(cfg.dram);
  throw ValidationError("no traces: pass --trace or --suite {adversarial,benign,golden}");
}

// ---- subcommands ----

int cmd_gen(const SimConfig& cfg, const std::string& generator, std::optional<Row> row,
            std::optional<Row> victim, std::optional<Count> count, std::optional<Count> lead,
            std::optional<Count> tail, std::optional<Count> len, std::optional<double> skew,
            std::optional<Row> working_set, std::optional<Count> tracker_threshold,
            const std::string& out) {
  auto need = [](const auto& opt, const char* what) {
    if (!opt) throw ValidationError(std::string("missing required parameter ") + what);
    return *opt;
  };
  Trace trace;
  if (generator == "single") {
    trace = gen_single_sided(need(row, "--row"), need(count, "--count"), cfg.dram);
  } else if (generator == "double") {
    trace = gen_double_sided(need(victim, "--victim"), need(count, "--count"), cfg.dram);
  } else if (generator == "common-victim") {
    trace = gen_common_victim(need(victim, "--victim"), need(count, "--count"), cfg.dram);
  } else if (generator == "decoy") {
    trace = gen_decoy(need(row, "--row"), need(lead, "--lead"), need(tail, "--tail"), cfg.dram);
  } else if (generator == "straddle") {
    Count t = tracker_threshold ? *tracker_threshold
              : cfg.threshold_override
                  ? *cfg.threshold_override
                  : (cfg.mode == TrackerMode::Aggressor
                         ? threshold_aggressor(cfg.dram.t_rh, cfg.dram.blast_radius)
                         : threshold_rvc(cfg.dram.t_rh));
    trace = gen_straddle(need(victim, "--victim"), t, cfg.dram);
  } else if (generator == "zipf") {
    trace = gen_benign_zipf(cfg.seed, need(len, "--len"), skew.value_or(1.0),
                            working_set.value_or(std::min<Row>(cfg.dram.rows_per_bank, 512)),
                            cfg.dram);
  } else {
    std::fprintf(stderr, "unknown generator '%s' (expected single, double, common-victim, "
                         "decoy, straddle or zipf)\n",
                 generator.c_str());
    return kExitUsage;
  }
  write_trace(trace, out);
  std::printf("wrote %llu records to %s\n",
              static_cast<unsigned long long>(trace.records.size()), out.c_str());
  return kExitOk;
}

int cmd_run(const SimConfig& cfg, const std::string& trace_path, const std::string& out) {
  const Trace trace = read_trace(trace_path, cfg.dram.rows_per_bank);
  const RunReport report = run(cfg.dram, cfg.run_options(), trace, cfg.energy);
  const std::string name = trace_label(trace_path);
  print_run_summary(name, cfg.mode, report);
  std::printf("%s\n%s\n", kRunCsvHeader,
              run_csv_row(cfg.dram, to_string(cfg.mode), name, report).c_str());
  if (!out.empty()) write_run_outputs(out, cfg, cfg.mode, name, report);
  return kExitOk;
}

int cmd_compare(const SimConfig& cfg, const std::vector<std::string>& trace_paths,
                const std::string& suite_name, std::optional<Count> agg_override,
                std::optional<Count> rvc_override, const std::string& out) {
  const std::vector<NamedTrace> traces = load_or_build_traces(cfg, trace_paths, suite_name);
  const RunOptions base_opt{TrackerMode::Aggressor, cfg.retrigger, agg_override};
  const RunOptions rvc_opt{TrackerMode::Rvc, cfg.retrigger, rvc_override};
  const ComparisonReport rep = compare(cfg.dram, traces, cfg.energy, base_opt, rvc_opt);

  std::vector<std::string> csv = header_lines(cfg);
  csv.push_back(kComparisonCsvHeader);
  for (const auto& c : rep.per_trace) {
    std::istringstream rows(comparison_csv_rows(cfg.dram, c));
    std::string line;
    while (std::getline(rows, line)) csv.push_back(line);
  }
  csv.push_back("# average: pct_mitigations=" + rep.avg_mitigations.str() +
                " pct_refreshes=" + rep.avg_refreshes.str() +
                " pct_vrr_energy=" + rep.avg_vrr_energy.str() +
                " pct_total_energy=" + rep.avg_total_energy.str());
  if (!out.empty()) write_file(out + ".csv", csv);

  std::printf("%-20s %12s %12s %12s %12s %10s %10s\n", "trace", "base_mitig", "rvc_mitig",
              "base_refr", "rvc_refr", "pct_mitig", "pct_refr");
  for (const auto& c : rep.per_trace)
    std::printf("%-20s %12llu %12llu %12llu %12llu %10s %10s\n", c.trace_name.c_str(),
                static_cast<unsigned long long>(c.baseline.mitigations_issued),
                static_cast<unsigned long long>(c.rvc.mitigations_issued),
                static_cast<unsigned long long>(c.baseline.rows_refreshed),
                static_cast<unsigned long long>(c.rvc.rows_refreshed),
                c.pct_mitigations.str().c_str(), c.pct_refreshes.str().c_str());
  std::printf("%-20s %12s %12s %12s %12s %10s %10s\n", "average", "", "", "", "",
              rep.avg_mitigations.str().c_str(), rep.avg_refreshes.str().c_str());
  return kExitOk;
}

std::vector<Count> parse_count_list(const std::string& csv) {
  std::vector<Count> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(detail::parse_u64(item, "list"));
  if (out.empty()) throw ValidationError("empty list: " + csv);
  return out;
}

int cmd_sweep(const SimConfig& cfg, const std::string& trh_csv, const std::string& n_csv,
              const std::string& suite_name, const std::string& out) {
  const std::vector<Count> trh_list = parse_count_list(trh_csv);
  std::vector<Row> n_list;
  for (Count n : parse_count_list(n_csv)) n_list.push_back(static_cast<Row>(n));

  SuiteBuilder builder = nullptr;
  if (suite_name == "adversarial")
    builder = [](const DramConfig& d, std::uint64_t) { return adversarial_suite(d); };
  else if (suite_name == "benign")
    builder = [](const DramConfig& d, std::uint64_t seed) { return benign_suite(d, seed); };
  else if (suite_name == "golden")
    builder = [](const DramConfig& d, std::uint64_t) { return golden_suite(d); };
  else
    throw ValidationError("sweep requires --suite {adversarial,benign,golden}");

  const RunOptions base_opt{TrackerMode::Aggressor, cfg.retrigger, std::nullopt};
  const RunOptions rvc_opt{TrackerMode::Rvc, cfg.retrigger, cfg.threshold_override};
  const auto cells =
      sweep(cfg.dram, trh_list, n_list, builder, cfg.seed, cfg.energy, base_opt, rvc_opt);

  std::vector<std::string> csv = header_lines(cfg);
  csv.push_back(kComparisonCsvHeader);
  Count total_flips = 0;
  for (const auto& cell : cells) {
    if (!cell.report) {
      const std::string note = "# skipped trh=" + std::to_string(cell.t_rh) +
                               " n=" + std::to_string(cell.blast_radius) + ": " +
                               cell.skip_reason;
      csv.push_back(note);
      std::fprintf(stderr, "%s\n", note.c_str());
      continue;
    }
    for (const auto& c : cell.report->per_trace) {
      total_flips += c.baseline.flips.size() + c.rvc.flips.size();
      std::istringstream rows(comparison_csv_rows(cell.cfg, c));
      std::string line;
      while (std::getline(rows, line)) csv.push_back(line);
    }
  }
  if (!out.empty()) write_file(out + ".csv", csv);
  std::printf("sweep: %zu cells, %llu flips total\n", cells.size(),
              static_cast<unsigned long long>(total_flips));
  return kExitOk;
}

int cmd_verify(const SimConfig& cfg, const std::string& suite_name, const std::string& out) {
  if (suite_name == "adversarial") {
    const auto suite = adversarial_suite(cfg.dram);
    std::vector<std::string> flip_lines = header_lines(cfg);
    flip_lines.push_back("# schema: act_seq,row,disturbance_at_flip");
    Count total_flips = 0;
    for (const auto& nt : suite) {
      const RunReport r = run(cfg.dram, cfg.run_options(), nt.trace, cfg.energy);
      print_run_summary(nt.name, cfg.mode, r);
      total_flips += r.flips.size();
      for (const auto& f : r.flips) flip_lines.push_back(flip_log_line(f));
    }
    if (!out.empty()) write_file(out + ".flips.log", flip_lines);
    if (total_flips == 0) {
      std::printf("verify adversarial: PASS (zero flips across %zu traces)\n", suite.size());
      return kExitOk;
    }
    std::printf("verify adversarial: FAIL (%llu flips)\n",
                static_cast<unsigned long long>(total_flips));
    return kExitSecurity;
  }

  if (suite_name == "insecure-witness") {
    // Demonstrates that skipping the 2n division when deriving the
    // aggressor threshold admits a common-victim attack: every aggressor
    // stays under T while the shared victim accumulates t_rh.
    const Count t_insecure = threshold_rvc(cfg.dram.t_rh);
    const RunOptions opt{TrackerMode::Aggressor, cfg.retrigger, t_insecure};
    const Row victim = cfg.dram.rows_per_bank / 2;
    for (Count per_row = 1; per_row < t_insecure; ++per_row) {
      const Trace trace = gen_common_victim(victim, per_row, cfg.dram);
      const RunReport r = run(cfg.dram, opt, trace, cfg.energy);
      if (!r.flips.empty()) {
        std::printf("insecure-witness: common-victim per_row=%llu flips row %lld at act %llu "
                    "(aggressor T=%llu from 2(T-1) < t_rh, no 2n division)\n",
                    static_cast<unsigned long long>(per_row),
                    static_cast<long long>(r.flips[0].row),
                    static_cast<unsigned long long>(r.flips[0].act_seq),
                    static_cast<unsigned long long>(t_insecure));
        if (!out.empty()) {
          std::vector<std::string> lines = header_lines(cfg);
          lines.push_back("# schema: act_seq,row,disturbance_at_flip");
          lines.push_back("# witness: common-victim per_row=" + std::to_string(per_row) +
                          " insecure_threshold=" + std::to_string(t_insecure));
          for (const auto& f : r.flips) lines.push_back(flip_log_line(f));
          write_file(out + ".flips.log", lines);
        }
        std::printf("verify insecure-witness: PASS (demonstration succeeded)\n");
        return kExitOk;
      }
    }
    std::printf("verify insecure-witness: FAIL (no flip found)\n");
    return kExitSecurity;
  }

  throw ValidationError("verify requires --suite {adversarial,insecure-witness}");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven RowHammer tracker simulation"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "key=value config file");
  add_config_flag(&app, flags, "--rows-per-bank", "rows_per_bank", "rows in one bank");
  add_config_flag(&app, flags, "--trh", "trh", "RowHammer threshold T_rh");
  add_config_flag(&app, flags, "--blast-radius", "blast_radius", "victim rows per side");
  add_config_flag(&app, flags, "--window-acts", "window_acts", "activations per refresh window");
  add_config_flag(&app, flags, "--phase-model", "phase_model", "epoch or staggered");
  add_config_flag(&app, flags, "--e-act", "e_act", "energy per activation");
  add_config_flag(&app, flags, "--e-row-refresh", "e_row_refresh", "energy per row refresh");
  add_config_flag(&app, flags, "--e-mitigation-cmd", "e_mitigation_cmd",
                  "energy per mitigation command");
  add_config_flag(&app, flags, "--mode", "mode", "aggressor or rvc");
  add_config_flag(&app, flags, "--retrigger", "retrigger", "reset or multiples");
  add_config_flag(&app, flags, "--threshold-override", "threshold_override",
                  "replace the derived tracking threshold (NON-STANDARD)");
  add_config_flag(&app, flags, "--seed", "seed", "RNG seed");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a trace file");
  gen->fallthrough();
  std::string generator;
  gen->add_option("generator", generator, "single|double|common-victim|decoy|straddle|zipf")
      ->required();
  std::optional<Row> g_row, g_victim, g_ws;
  std::optional<Count> g_count, g_lead, g_tail, g_len, g_threshold;
  std::optional<double> g_skew;
  gen->add_option("--row", g_row, "target row");
  gen->add_option("--victim", g_victim, "victim row");
  gen->add_option("--count", g_count, "activation count (per aggressor where applicable)");
  gen->add_option("--lead", g_lead, "decoy: leading activations");
  gen->add_option("--tail", g_tail, "decoy: trailing activations");
  gen->add_option("--len", g_len, "zipf: trace length");
  gen->add_option("--skew", g_skew, "zipf: skew exponent");
  gen->add_option("--working-set", g_ws, "zipf: distinct rows");
  gen->add_option("--tracker-threshold", g_threshold, "straddle: threshold T");
  std::string gen_out;
  gen->add_option("--out", gen_out, "trace file path")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "run one trace against one tracker mode");
  run_cmd->fallthrough();
  std::string run_trace, run_out;
  run_cmd->add_option("--trace", run_trace, "trace file")->required();
  run_cmd->add_option("--out", run_out, "output prefix (.csv, .actions.log, .flips.log)");

  // compare
  auto* cmp = app.add_subcommand("compare", "run both modes and report improvements");
  cmp->fallthrough();
  std::vector<std::string> cmp_traces;
  std::string cmp_suite, cmp_out;
  std::optional<Count> cmp_agg_override, cmp_rvc_override;
  cmp->add_option("--trace", cmp_traces, "trace file (repeatable)");
  cmp->add_option("--suite", cmp_suite, "adversarial|benign|golden");
  cmp->add_option("--aggressor-threshold-override", cmp_agg_override,
                  "override for the aggressor baseline");
  cmp->add_option("--rvc-threshold-override", cmp_rvc_override, "override for the rvc side");
  cmp->add_option("--out", cmp_out, "output prefix (.csv)");

  // sweep
  auto* swp = app.add_subcommand("sweep", "cross-product comparison over (trh, n) grids");
  swp->fallthrough();
  std::string swp_trh = "100,500,1000,4800", swp_n = "1,2,4,8", swp_suite = "adversarial",
              swp_out;
  swp->add_option("--trh-list", swp_trh, "comma-separated t_rh values");
  swp->add_option("--n-list", swp_n, "comma-separated blast radii");
  swp->add_option("--suite", swp_suite, "adversarial|benign|golden");
  swp->add_option("--out", swp_out, "output prefix (.csv)");

  // verify
  auto* ver = app.add_subcommand("verify", "security exit-code contract");
  ver->fallthrough();
  std::string ver_suite, ver_out;
  ver->add_option("--suite", ver_suite, "adversarial|insecure-witness")->required();
  ver->add_option("--out", ver_out, "output prefix (.flips.log)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const SimConfig cfg = resolve_config(flags);
    if (cfg.threshold_override)
      std::fprintf(stderr, "NOTE: threshold_override=%llu is NON-STANDARD\n",
                   static_cast<unsigned long long>(*cfg.threshold_override));
    if (gen->parsed())
      return cmd_gen(cfg, generator, g_row, g_victim, g_count, g_lead, g_tail, g_len, g_skew,
                     g_ws, g_threshold, gen_out);
    if (run_cmd->parsed()) return cmd_run(cfg, run_trace, run_out);
    if (cmp->parsed())
      return cmd_compare(cfg, cmp_traces, cmp_suite, cmp_agg_override, cmp_rvc_override, cmp_out);
    if (swp->parsed()) return cmd_sweep(cfg, swp_trh, swp_n, swp_suite, swp_out);
    if (ver->parsed()) return cmd_verify(cfg, ver_suite, ver_out);
    return kExitUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitValidation;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kExitValidation;
  } catch (const EncodingError& e) {
    std::fprintf(stderr, "encoding error: %s\n", e.what());
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
