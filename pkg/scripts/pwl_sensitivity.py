"""How segment count and breakpoint spacing move the priced scenarios.

For each setting, re-solves the capacity and efficiency scenarios and
records daily benefit, lifetime and the gap between the piecewise-linear
and exact degradation cost.
"""

from __future__ import annotations

import argparse
from dataclasses import replace
from pathlib import Path

from peakshave.config import load_config
from peakshave.io import load_profile, write_table
from peakshave.study import SCENARIOS, run_scenario, scenario_criteria
from peakshave.operation import baseline_cost


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="default")
    ap.add_argument("--out", default="results/pwl_sensitivity.csv")
    args = ap.parse_args()
    base_cfg = load_config(args.config)
    profile = load_profile(base_cfg.profile)
    j0 = baseline_cost(profile, base_cfg.tariff)

    rows = []
    for spacing in ("uniform", "log"):
        for segments in (2, 4, 8, 16, 32):
            cfg = replace(base_cfg, segments=segments, spacing=spacing)
            for name in SCENARIOS[2:]:
                row, result = run_scenario(name, cfg, profile, j0, *scenario_criteria(cfg, name))
                gap = result.costs.degradation_pwl - result.costs.degradation_exact
                rows.append((spacing, segments, name, row.daily_benefit, row.lifetime_days,
                             row.mean_nonzero_dod, gap))
                print(f"{spacing:>7} K={segments:<3} {name}: benefit {row.daily_benefit:8.1f} $/day, "
                      f"life {row.lifetime_days:7.0f} d, pwl-exact gap {gap:6.2f} $")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as f:
        write_table(("spacing", "segments", "scenario", "daily_benefit", "lifetime_days",
                     "mean_nonzero_dod", "pwl_minus_exact"), rows, f)


if __name__ == "__main__":
    main()
