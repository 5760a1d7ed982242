// Minimal library walkthrough: build a device config, generate an access
// pattern whose victims are refreshed redundantly by aggressor-count
// tracking, and compare both trackers on it.

#include <cstdio>

#include "rhsim/harness.hpp"

int main() {
  using namespace rhsim;

  DramConfig dram;
  dram.rows_per_bank = 4096;
  dram.t_rh = 500;
  dram.blast_radius = 2;
  dram.window_acts = 65536;

  // near-threshold hammering of one row, then a touch of every victim,
  // then a short tail
  const Trace decoy = gen_decoy(2048, dram.t_rh - 5, 5, dram);

  const EnergyModel energy;
  const RunReport aggressor =
      run(dram, {TrackerMode::Aggressor, RetriggerPolicy::Reset, std::nullopt}, decoy, energy);
  const RunReport rvc =
      run(dram, {TrackerMode::Rvc, RetriggerPolicy::Reset, std::nullopt}, decoy, energy);

  std::printf("decoy trace, %llu activations\n",
              static_cast<unsigned long long>(decoy.act_count()));
  std::printf("  aggressor tracking: %llu mitigations, %llu row refreshes\n",
              static_cast<unsigned long long>(aggressor.mitigations_issued),
              static_cast<unsigned long long>(aggressor.rows_refreshed));
  std::printf("  victim tracking:    %llu mitigations, %llu row refreshes\n",
              static_cast<unsigned long long>(rvc.mitigations_issued),
              static_cast<unsigned long long>(rvc.rows_refreshed));
  std::printf("  refresh reduction:  %s%%\n",
              pct_improvement(static_cast<double>(aggressor.rows_refreshed),
                              static_cast<double>(rvc.rows_refreshed))
                  .str()
                  .c_str());
  std::printf("  flips (either run): %zu\n", aggressor.flips.size() + rvc.flips.size());
  return 0;
}
