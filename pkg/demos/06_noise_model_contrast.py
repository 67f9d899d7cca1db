"""Why the noise model matters: heavy tails break sub-Gaussian tuning.

Both runs below see the same ground truth and the same heteroscedastic
Student-t noise.  The classic multiplier, told the noise is sub-Gaussian
with scale 1e-5, trusts wildly corrupted observations and walks outside
the true safe region.  The scenario multiplier sizes its caution from
actual noise samples and explores carefully instead.
"""

import numpy as np

from safebo import ExperimentConfig, run_single

# A slice of the benchmark battery; the full 20-seed run lives in the
# acceptance suite.
config = ExperimentConfig.from_preset("paper-synthetic-2", {"seeds": list(range(10, 18))})

print("seed | classic iters/viol | scenario iters/viol")
print("-----+--------------------+--------------------")
classic_viols = 0
scenario_viols = 0
for seed in config.seeds:
    classic = run_single(config, seed, "classic_subgaussian")
    scenario = run_single(config, seed, "scenario")
    classic_viols += classic.violation_count
    scenario_viols += scenario.violation_count
    marker = "  <- unsafe evaluations" if classic.violation_count else ""
    print(f"{seed:4d} | {classic.iterations:10d} / {classic.violation_count:d}"
          f"     | {scenario.iterations:10d} / {scenario.violation_count:d}{marker}")

print(f"\ntotals: classic {classic_viols} violations, scenario {scenario_viols}")

print("""
Reading the table: the classic runs race through a few overconfident
iterations, sometimes evaluating points whose true constraint value is
negative, then stall behind falsely tight intervals (the interval-reset
warnings above are those contradictions surfacing).  The scenario runs
accumulate large noise bounds, inflate beta, and stay inside the
provably safe region; the cost is slower reward progress.
""")

one = run_single(config, config.seeds[0], "scenario")
print(f"scenario beta on seed {config.seeds[0]} grew"
      f" {one.beta_bar[0]:.2f} -> {one.beta_bar[-1]:.2f}"
      f" over {one.iterations} iterations (large, by design: the sampled"
      " noise really is that heavy).")
