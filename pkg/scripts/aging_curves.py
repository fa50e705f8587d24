"""Aging and cycle-life curves as plot-ready CSV files.

Writes capacity and battery-only efficiency against cycle count at several
depths, plus cycle life against depth for both end-of-life criteria.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from peakshave.config import load_config
from peakshave.degradation import capacity_fade, coeffs_at_voltage, resistance_growth, throughput_from_cycles
from peakshave.io import write_table
from peakshave.scrapping import CapacityBased, EfficiencyBased, battery_efficiency


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="default")
    ap.add_argument("--out", default="results/curves")
    args = ap.parse_args()
    cfg = load_config(args.config)
    cell = cfg.cell
    coeffs = coeffs_at_voltage(cell.v_avg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cycles = np.linspace(0, 3000, 151)
    for d in (0.2, 0.5, 0.8, 1.0):
        rows = []
        for n in cycles:
            q = throughput_from_cycles(n, d, cell.c0)
            c_star, r_star = capacity_fade(q, d, coeffs), resistance_growth(q, d, coeffs)
            rows.append((n, c_star, battery_efficiency(cell.clr0 * c_star * r_star, cell)))
        with open(out / f"aging_d{d:.1f}.csv", "w", newline="") as f:
            write_table(("cycles", "capacity", "efficiency"), rows, f)

    cap = CapacityBased(cfg.c_end)
    eff = EfficiencyBased.from_tariff(cfg.tariff, cell, cfg.inverter_passes, "optimistic")
    rows = []
    for d in np.linspace(0.02, 1.0, 50):
        n_eff = eff.max_cycles(float(d), cell)
        rows.append((float(d), cap.max_cycles(float(d), cell), n_eff if np.isfinite(n_eff) else None))
    with open(out / "max_cycles.csv", "w", newline="") as f:
        write_table(("dod", "capacity_cycles", "efficiency_cycles"), rows, f)
    print(f"wrote curves to {out}")


if __name__ == "__main__":
    main()
