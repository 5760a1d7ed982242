// End-to-end checks of the installed CLI surface. The binary path comes
// from RHSIM_CLI (set by ctest); tests are skipped when it is absent.

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rhsim/workloads.hpp"

namespace rhsim {
namespace {

struct CliResult {
  int exit_code;
  std::string output;  // stdout+stderr
};

const char* cli_path() { return std::getenv("RHSIM_CLI"); }

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  std::string output;
  std::array<char, 4096> buf;
  while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), output};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

#define REQUIRE_CLI() \
  if (cli_path() == nullptr) GTEST_SKIP() << "RHSIM_CLI not set"

TEST(Cli, GenDecoyMatchesLibraryOutput) {
  REQUIRE_CLI();
  const auto r = run_cli("gen decoy --row 1000 --lead 495 --tail 5 --out /tmp/rhsim_cli_decoy.trace");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  write_trace(gen_decoy(1000, 495, 5, DramConfig{}), "/tmp/rhsim_cli_decoy_lib.trace");
  EXPECT_EQ(slurp("/tmp/rhsim_cli_decoy.trace"), slurp("/tmp/rhsim_cli_decoy_lib.trace"));
}

TEST(Cli, GenCommonVictimFlipTrace) {
  REQUIRE_CLI();
  const auto r =
      run_cli("gen common-victim --victim 500 --count 125 --out /tmp/rhsim_cli_cv.trace");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const Trace t = read_trace("/tmp/rhsim_cli_cv.trace");
  EXPECT_EQ(t.act_count(), 500u);
}

TEST(Cli, GenZipfZeroLengthIsEmptyTraceFile) {
  REQUIRE_CLI();
  const auto r = run_cli("gen zipf --seed 1 --len 0 --out /tmp/rhsim_cli_zipf0.trace");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(read_trace("/tmp/rhsim_cli_zipf0.trace").act_count(), 0u);
}

TEST(Cli, RunDecoyRvcEmitsZeroMitigationCsvRow) {
  REQUIRE_CLI();
  run_cli("gen decoy --row 1000 --lead 495 --tail 5 --out /tmp/rhsim_cli_decoy.trace");
  const auto r = run_cli("run --trace /tmp/rhsim_cli_decoy.trace --mode rvc"
                         " --threshold-override 500 --out /tmp/rhsim_cli_run");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("500,2,rvc,rhsim_cli_decoy,504,0,0,0,0,504"), std::string::npos)
      << r.output;
  const std::string csv = slurp("/tmp/rhsim_cli_run.csv");
  EXPECT_NE(csv.find("trh,n,mode,trace,acts,mitigations,refreshes,flips,vrr_energy,total_energy"),
            std::string::npos);
  EXPECT_EQ(csv.rfind("# rhsim ", 0), 0u);  // version header leads the file
  EXPECT_NE(csv.find("NON-STANDARD"), std::string::npos);  // override is flagged
}

TEST(Cli, CompareDecoyReportsFullRefreshReduction) {
  REQUIRE_CLI();
  run_cli("gen decoy --row 1000 --lead 495 --tail 5 --out /tmp/rhsim_cli_decoy.trace");
  const auto r = run_cli("compare --trace /tmp/rhsim_cli_decoy.trace"
                         " --rvc-threshold-override 500 --out /tmp/rhsim_cli_cmp");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = slurp("/tmp/rhsim_cli_cmp.csv");
  EXPECT_NE(csv.find("500,2,aggressor,rhsim_cli_decoy,504,7,28,0,35,539,100,100,100,"),
            std::string::npos)
      << csv;
  EXPECT_NE(csv.find("# average: pct_mitigations=100 pct_refreshes=100"), std::string::npos);
}

TEST(Cli, ActionLogIsConsumable) {
  REQUIRE_CLI();
  run_cli("gen common-victim --victim 2048 --count 400 --rows-per-bank 4096"
          " --out /tmp/rhsim_cli_cv4.trace");
  const auto r = run_cli("run --trace /tmp/rhsim_cli_cv4.trace --mode rvc --rows-per-bank 4096"
                         " --window-acts 65536 --out /tmp/rhsim_cli_act");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  std::ifstream log("/tmp/rhsim_cli_act.actions.log");
  ASSERT_TRUE(log.good());
  std::string line;
  Count actions = 0, rows_total = 0;
  while (std::getline(log, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++actions;
    // act_seq,mode,anchor_row,mask_bits,refreshed_rows
    std::istringstream fields(line);
    std::string act_seq, mode, anchor, mask, refreshed;
    ASSERT_TRUE(std::getline(fields, act_seq, ','));
    ASSERT_TRUE(std::getline(fields, mode, ','));
    ASSERT_TRUE(std::getline(fields, anchor, ','));
    ASSERT_TRUE(std::getline(fields, mask, ','));
    ASSERT_TRUE(std::getline(fields, refreshed));
    EXPECT_EQ(mode, "rvc");
    EXPECT_EQ(mask.size(), 4u);
    Count mask_bits = 0;
    for (char b : mask) {
      ASSERT_TRUE(b == '0' || b == '1');
      if (b == '1') ++mask_bits;
    }
    Count listed = refreshed.empty() ? 0 : 1;
    for (char ch : refreshed)
      if (ch == ';') ++listed;
    EXPECT_EQ(listed, mask_bits) << line;
    rows_total += listed;
  }
  EXPECT_GT(actions, 0u);
  // cross-check against the CSV refresh counter
  const std::string csv = slurp("/tmp/rhsim_cli_act.csv");
  EXPECT_NE(csv.find("," + std::to_string(rows_total) + ",0,"), std::string::npos) << csv;
}

TEST(Cli, MissingTraceFileIsIoExit) {
  REQUIRE_CLI();
  EXPECT_EQ(run_cli("run --trace /tmp/rhsim_no_such_file.trace").exit_code, 66);
}

TEST(Cli, UnknownGeneratorIsUsageExit) {
  REQUIRE_CLI();
  EXPECT_EQ(run_cli("gen bogus --out /tmp/x.trace").exit_code, 64);
}

TEST(Cli, BadConfigValueIsValidationExit) {
  REQUIRE_CLI();
  EXPECT_EQ(run_cli("run --trace /tmp/whatever.trace --trh 8 --blast-radius 2").exit_code, 65);
}

TEST(Cli, VerifyContractExitCodes) {
  REQUIRE_CLI();
  const std::string base = "--rows-per-bank 4096 --window-acts 65536 --trh 500 --blast-radius 2";
  EXPECT_EQ(run_cli("verify --suite adversarial --mode rvc " + base).exit_code, 0);
  EXPECT_EQ(run_cli("verify --suite adversarial --mode aggressor " + base).exit_code, 0);
  EXPECT_EQ(run_cli("verify --suite insecure-witness " + base).exit_code, 0);
  // an absurdly high override must be caught by the oracle
  EXPECT_EQ(
      run_cli("verify --suite adversarial --mode aggressor --threshold-override 500 " + base)
          .exit_code,
      77);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  REQUIRE_CLI();
  {
    std::ofstream conf("/tmp/rhsim_cli_test.conf");
    conf << "trh = 1000\nblast_radius = 4\nmode = aggressor\n";
  }
  const auto r = run_cli("run --config /tmp/rhsim_cli_test.conf --trh 500"
                         " --trace /tmp/rhsim_cli_decoy.trace --out /tmp/rhsim_cli_prec");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = slurp("/tmp/rhsim_cli_prec.csv");
  // flag wins over file; file values that were not overridden survive
  EXPECT_NE(csv.find("trh=500"), std::string::npos);
  EXPECT_NE(csv.find("blast_radius=4"), std::string::npos);
  EXPECT_NE(csv.find("mode=aggressor"), std::string::npos);
}

}  // namespace
}  // namespace rhsim
