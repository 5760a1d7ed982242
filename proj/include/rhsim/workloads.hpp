#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rhsim/dram.hpp"

namespace rhsim {

// Desk-scale bound on trace length; generators and the reader refuse
// anything longer.
inline constexpr std::size_t kMaxTraceRecords = std::size_t{1} << 26;

struct TraceRecord {
  enum class Kind { Act, WindowBoundary };
  Kind kind;
  Row row = 0;  // meaningful for Act only
  bool operator==(const TraceRecord&) const = default;
};

// An ordered sequence of row activations with optional window-boundary
// markers, plus free-form header metadata (generator name, seed, config
// summary) preserved by the file round trip.
struct Trace {
  std::vector<TraceRecord> records;
  std::vector<std::string> meta;

  void push_act(Row row) {
    check_cap(records.size() + 1);
    records.push_back({TraceRecord::Kind::Act, row});
  }
  void push_window() {
    check_cap(records.size() + 1);
    records.push_back({TraceRecord::Kind::WindowBoundary, 0});
  }

  Count act_count() const {
    Count n = 0;
    for (const auto& r : records)
      if (r.kind == TraceRecord::Kind::Act) ++n;
    return n;
  }

  static void check_cap(std::size_t n) {
    if (n > kMaxTraceRecords)
      throw DomainError("trace exceeds the configured record cap");
  }

  bool operator==(const Trace&) const = default;
};

namespace detail {

inline void require_interior(Row row, Row radius, const DramConfig& cfg, const char* what) {
  if (row - radius < 0 || row + radius >= cfg.rows_per_bank)
    throw DomainError(std::string(what) + ": row " + std::to_string(row) +
                      " lacks in-range neighbors at distance " + std::to_string(radius));
}

inline std::string cfg_summary(const DramConfig& cfg) {
  std::ostringstream os;
  os << "rows=" << cfg.rows_per_bank << " trh=" << cfg.t_rh
     << " n=" << cfg.blast_radius << " window_acts=" << cfg.window_acts
     << " phase=" << to_string(cfg.phase_model);
  return os.str();
}

}  // namespace detail

/// `count` back-to-back activations of one row.
inline Trace gen_single_sided(Row row, Count count, const DramConfig& cfg) {
  if (row < 0 || row >= cfg.rows_per_bank) throw DomainError("single-sided: row out of range");
  if (count == 0) throw DomainError("single-sided: count must be at least 1");
  Trace::check_cap(count);
  Trace t;
  t.meta = {"generator: single-sided row=" + std::to_string(row) +
                " count=" + std::to_string(count),
            "cfg: " + detail::cfg_summary(cfg)};
  t.records.reserve(count);
  for (Count i = 0; i < count; ++i) t.push_act(row);
  return t;
}

/// Alternates the two distance-1 neighbors of `victim`, `count` times each.
inline Trace gen_double_sided(Row victim, Count count, const DramConfig& cfg) {
  detail::require_interior(victim, 1, cfg, "double-sided");
  Trace::check_cap(2 * count);
  Trace t;
  t.meta = {"generator: double-sided victim=" + std::to_string(victim) +
                " count=" + std::to_string(count),
            "cfg: " + detail::cfg_summary(cfg)};
  t.records.reserve(2 * count);
  for (Count i = 0; i < count; ++i) {
    t.push_act(victim - 1);
    t.push_act(victim + 1);
  }
  return t;
}

/// Round-robin over all 2n neighbors of `victim`, `per_row_count` each.
/// The victim absorbs one disturbance per activation while every aggressor
/// stays at per_row_count, the worst case for aggressor-count trackers.
inline Trace gen_common_victim(Row victim, Count per_row_count, const DramConfig& cfg) {
  detail::require_interior(victim, cfg.blast_radius, cfg, "common-victim");
  const std::vector<Row> nb = neighbors(victim, cfg);
  Trace::check_cap(nb.size() * per_row_count);
  Trace t;
  t.meta = {"generator: common-victim victim=" + std::to_string(victim) +
                " per_row=" + std::to_string(per_row_count),
            "cfg: " + detail::cfg_summary(cfg)};
  t.records.reserve(nb.size() * per_row_count);
  for (Count i = 0; i < per_row_count; ++i)
    for (Row r : nb) t.push_act(r);
  return t;
}

/// `lead` activations of `row`, one activation of each neighbor ascending,
/// then `tail` more activations of `row`. Directly accessing the victims
/// restores them, so a victim-centric tracker owes no refreshes here while
/// an aggressor-count tracker keeps firing.
inline Trace gen_decoy(Row row, Count lead, Count tail, const DramConfig& cfg) {
  detail::require_interior(row, cfg.blast_radius, cfg, "decoy");
  const std::vector<Row> nb = neighbors(row, cfg);
  Trace::check_cap(lead + nb.size() + tail);
  Trace t;
  t.meta = {"generator: decoy row=" + std::to_string(row) + " lead=" + std::to_string(lead) +
                " tail=" + std::to_string(tail),
            "cfg: " + detail::cfg_summary(cfg)};
  t.records.reserve(lead + nb.size() + tail);
  for (Count i = 0; i < lead; ++i) t.push_act(row);
  for (Row r : nb) t.push_act(r);
  for (Count i = 0; i < tail; ++i) t.push_act(row);
  return t;
}

/// Cross-window straddle: T-1 victim disturbances, an explicit window
/// boundary, then T-1 more. Stays below the tracker threshold in both
/// windows while the victim accumulates 2(T-1) if its restoration does not
/// intervene.
inline Trace gen_straddle(Row victim, Count tracker_threshold, const DramConfig& cfg) {
  if (tracker_threshold == 0) throw DomainError("straddle: threshold must be positive");
  const Count half = tracker_threshold - 1;
  if (half > cfg.window_acts) throw DomainError("straddle: T-1 exceeds window_acts");
  detail::require_interior(victim, cfg.blast_radius, cfg, "straddle");
  const std::vector<Row> nb = neighbors(victim, cfg);
  Trace::check_cap(2 * half + 1);
  Trace t;
  t.meta = {"generator: straddle victim=" + std::to_string(victim) +
                " threshold=" + std::to_string(tracker_threshold),
            "cfg: " + detail::cfg_summary(cfg)};
  for (Count i = 0; i < half; ++i) t.push_act(nb[i % nb.size()]);
  t.push_window();
  for (Count i = 0; i < half; ++i) t.push_act(nb[i % nb.size()]);
  return t;
}

namespace detail {

// Deterministic sampling helpers on top of mt19937's pinned output stream.
// Distribution adapters from <random> are implementation-defined, so the
// mapping from raw draws to values is done by hand.
class TraceRng {
 public:
  explicit TraceRng(std::uint64_t seed) : gen_(static_cast<std::uint32_t>(seed)) {}

  double next_unit() { return gen_() * (1.0 / 4294967296.0); }

  Row next_below(Row bound) { return static_cast<Row>(gen_() % static_cast<std::uint32_t>(bound)); }

 private:
  std::mt19937 gen_;
};

}  // namespace detail

/// Seeded Zipf-distributed traffic over a pseudorandom working set:
/// rank k of `working_set` rows is drawn with probability proportional to
/// k^-skew. Fully deterministic given identical arguments.
inline Trace gen_benign_zipf(std::uint64_t seed, Count length, double skew, Row working_set,
                             const DramConfig& cfg) {
  if (skew <= 0) throw DomainError("zipf: skew must be positive");
  if (working_set < 1 || working_set > cfg.rows_per_bank)
    throw DomainError("zipf: working set must be within [1, rows_per_bank]");
  Trace::check_cap(length);

  detail::TraceRng rng(seed);

  // Partial Fisher-Yates: the first `working_set` entries of a seeded
  // permutation of [0, rows_per_bank).
  std::unordered_map<Row, Row> moved;
  std::vector<Row> rows(static_cast<std::size_t>(working_set));
  for (Row i = 0; i < working_set; ++i) {
    const Row j = i + rng.next_below(cfg.rows_per_bank - i);
    auto at = [&](Row k) {
      auto it = moved.find(k);
      return it == moved.end() ? k : it->second;
    };
    const Row vi = at(i), vj = at(j);
    moved[j] = vi;
    rows[static_cast<std::size_t>(i)] = vj;
  }

  std::vector<double> cumulative(static_cast<std::size_t>(working_set));
  double total = 0;
  for (Row k = 1; k <= working_set; ++k) {
    total += std::pow(static_cast<double>(k), -skew);
    cumulative[static_cast<std::size_t>(k - 1)] = total;
  }

  std::ostringstream skew_str;
  skew_str << skew;
  Trace t;
  t.meta = {"generator: zipf seed=" + std::to_string(seed) + " len=" + std::to_string(length) +
                " skew=" + skew_str.str() + " working_set=" + std::to_string(working_set),
            "seed: " + std::to_string(seed), "cfg: " + detail::cfg_summary(cfg)};
  t.records.reserve(length);
  for (Count i = 0; i < length; ++i) {
    const double x = rng.next_unit() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    const auto rank = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), static_cast<std::size_t>(working_set - 1));
    t.push_act(rows[rank]);
  }
  return t;
}

// Trace file format (line oriented):
//   # <metadata>       leading comment lines are preserved as metadata
//   A <row>            one activation, row in decimal
//   W                  window boundary
// Blank lines and non-leading comments are skipped on read.

inline void write_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open trace file for writing: " + path);
  for (const auto& m : trace.meta) out << "# " << m << '\n';
  for (const auto& r : trace.records) {
    if (r.kind == TraceRecord::Kind::Act)
      out << "A " << r.row << '\n';
    else
      out << "W\n";
  }
  if (!out) throw IoError("failed writing trace file: " + path);
}

inline Trace read_trace(const std::string& path, std::optional<Row> rows_per_bank = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  Trace t;
  std::string line;
  std::size_t lineno = 0;
  bool in_header = true;
  auto fail = [&](const std::string& why) {
    throw ValidationError(path + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      in_header = false;
      continue;
    }
    if (line[0] == '#') {
      if (in_header) {
        std::size_t start = line.size() > 1 && line[1] == ' ' ? 2 : 1;
        t.meta.push_back(line.substr(start));
      }
      continue;
    }
    in_header = false;
    Trace::check_cap(t.records.size() + 1);
    if (line == "W") {
      t.push_window();
      continue;
    }
    if (line.size() < 3 || line[0] != 'A' || line[1] != ' ')
      fail("malformed record '" + line + "' (expected 'A <row>' or 'W')");
    Row row = 0;
    const char* first = line.data() + 2;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, row);
    if (ec != std::errc() || ptr != last) fail("malformed row in '" + line + "'");
    if (row < 0 || (rows_per_bank && row >= *rows_per_bank))
      fail("row " + std::to_string(row) + " out of range");
    t.push_act(row);
  }
  return t;
}

// Named traces for harness suites.
struct NamedTrace {
  std::string name;
  Trace trace;
};

/// The adversarial battery used by security verification: every attack
/// family at parameters that stress the tracker. Straddle patterns are
/// emitted for both tracking thresholds so one list serves either mode.
inline std::vector<NamedTrace> adversarial_suite(const DramConfig& cfg) {
  cfg.validate();
  const Row mid = cfg.rows_per_bank / 2;
  const Count two_n = 2 * static_cast<Count>(cfg.blast_radius);
  const Count minimal_per_row = (cfg.t_rh + two_n - 1) / two_n;
  std::vector<NamedTrace> suite;
  suite.push_back({"single_sided", gen_single_sided(mid, 2 * cfg.t_rh, cfg)});
  suite.push_back({"double_sided", gen_double_sided(mid, cfg.t_rh, cfg)});
  suite.push_back({"many_sided", gen_common_victim(mid, cfg.t_rh, cfg)});
  suite.push_back({"common_victim", gen_common_victim(mid, minimal_per_row, cfg)});
  suite.push_back({"decoy", gen_decoy(mid, cfg.t_rh - 1, cfg.t_rh - 1, cfg)});
  suite.push_back({"straddle_aggressor",
                   gen_straddle(mid, threshold_aggressor(cfg.t_rh, cfg.blast_radius), cfg)});
  suite.push_back({"straddle_rvc", gen_straddle(mid, threshold_rvc(cfg.t_rh), cfg)});
  return suite;
}

/// Redundant-refresh demonstration scenarios: traffic where an
/// aggressor-count tracker keeps refreshing rows that were just restored.
inline std::vector<NamedTrace> golden_suite(const DramConfig& cfg) {
  cfg.validate();
  const Row mid = cfg.rows_per_bank / 2;
  const Count t_agg = threshold_aggressor(cfg.t_rh, cfg.blast_radius);
  std::vector<NamedTrace> suite;

  // Two aggressors sharing victims: the second blanket refresh re-covers
  // rows the first one already restored.
  {
    Trace t;
    t.meta = {"generator: shared-victims a1=" + std::to_string(mid) +
                  " a2=" + std::to_string(mid + cfg.blast_radius + 1) +
                  " count=" + std::to_string(t_agg),
              "cfg: " + detail::cfg_summary(cfg)};
    for (Count i = 0; i < t_agg; ++i) {
      t.push_act(mid);
      t.push_act(mid + cfg.blast_radius + 1);
    }
    suite.push_back({"shared_victims", std::move(t)});
  }

  // Victims accessed right before the aggressor crosses: the blanket
  // refresh restores rows whose charge the accesses just restored.
  suite.push_back({"accessed_victims", gen_decoy(mid, t_agg - 1, 1, cfg)});

  // The canonical decoy shape: a near-threshold lead, the victim sweep,
  // then a short tail.
  suite.push_back({"decoy_canonical", gen_decoy(mid, cfg.t_rh - 5, 5, cfg)});

  return suite;
}

struct ZipfPreset {
  const char* name;
  double skew;
  Row working_set;
  Count length;
};

// Benign traffic presets by locality: hot, medium, low.
inline constexpr ZipfPreset kZipfPresets[] = {
    {"zipf_h", 1.1, 64, 100000},
    {"zipf_m", 1.0, 512, 100000},
    {"zipf_l", 0.9, 4096, 100000},
};

inline std::vector<NamedTrace> benign_suite(const DramConfig& cfg, std::uint64_t seed) {
  std::vector<NamedTrace> suite;
  for (const auto& p : kZipfPresets) {
    const Row ws = std::min<Row>(p.working_set, cfg.rows_per_bank);
    suite.push_back({p.name, gen_benign_zipf(seed, p.length, p.skew, ws, cfg)});
  }
  return suite;
}

}  // namespace rhsim
