"""Day-by-day aging to end of life, with and without parameter feedback.

With feedback the dispatch is re-solved on the derated battery every
``--resolve-every`` days; without it the fresh-battery day repeats.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from peakshave.cli import parse_criterion
from peakshave.config import load_config
from peakshave.io import load_profile, write_table
from peakshave.operation import optimize_day
from peakshave.study import estimate_lifetime, simulate_to_eol


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="default")
    ap.add_argument("--criterion", default="capacity")
    ap.add_argument("--resolve-every", type=int, default=10)
    ap.add_argument("--out", default="results/simulation")
    args = ap.parse_args()
    cfg = load_config(args.config)
    crit = parse_criterion(args.criterion, cfg)
    profile = load_profile(cfg.profile)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    day = optimize_day(profile, cfg.tariff, [cfg.storage], [crit], segments=cfg.segments)
    print(f"closed-form lifetime: {estimate_lifetime(day, crit, cfg.storage):.1f} days")
    for feedback in (False, True):
        sim = simulate_to_eol(cfg, crit, profile=profile, feedback=feedback,
                              resolve_every=args.resolve_every)
        tag = "feedback" if feedback else "fixed"
        with open(out / f"trajectory_{tag}.csv", "w", newline="") as f:
            write_table(("day", "loss", "throughput_ah", "capacity", "resistance"),
                        [(s.days, s.loss, s.throughput, s.c_star, s.r_star) for s in sim.trajectory], f)
        print(f"{tag:>8}: {sim.days} days ({sim.reason}), final capacity {sim.final.c_star:.3f}")


if __name__ == "__main__":
    main()
