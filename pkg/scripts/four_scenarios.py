"""Run the four-scenario comparison and save the report in all formats."""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from peakshave.config import load_config
from peakshave.study import run_four_scenarios


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="default")
    ap.add_argument("--out", default="results/scenarios")
    args = ap.parse_args()
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    report = run_four_scenarios(cfg)
    elapsed = time.perf_counter() - start
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.json").write_text(report.to_json())
    (out / "report.txt").write_text(report.to_text())
    for name, result in report.dispatches.items():
        with open(out / f"dispatch_{name}.csv", "w") as f:
            f.write("hour,grid_mw,discharge_mw,charge_mw,soc_mwh,dod\n")
            for t in range(len(result.grid)):
                row = [t, result.grid[t]]
                row += ([result.discharge[0, t], result.charge[0, t], result.soc[0, t], result.dod[0, t]]
                        if result.n_batteries else [0.0, 0.0, 0.0, 0.0])
                f.write(",".join(repr(float(v)) for v in row) + "\n")
    print(report.to_text())
    print(f"solved in {elapsed:.2f} s; files in {out}")


if __name__ == "__main__":
    main()
