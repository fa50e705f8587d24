"""Command-line entry point.

Errors go to stderr as ``error[<code>]: <message>``. Exit status is 1 for
invalid input and 2 when a model or the solver cannot produce an answer.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from typing import Sequence

import numpy as np

from .config import StudyConfig, load_config
from .degradation import coeffs_at_voltage
from .errors import ModelError, PeakShaveError, TargetUnreachable, ValidationError
from .io import load_profile, write_table
from .lifecost import build_pwl
from .operation import DispatchFlags, optimize_day
from .scrapping import (
    CapacityBased,
    EfficiencyBased,
    ScrappingCriterion,
    battery_efficiency,
    clr_limit,
)
from .study import estimate_lifetime, run_four_scenarios, simulate_to_eol


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ValidationError(message)


def parse_criterion(text: str, config: StudyConfig) -> ScrappingCriterion:
    """``capacity[:c_end]`` or ``efficiency[:error|optimistic]``."""
    kind, _, arg = text.partition(":")
    if kind == "capacity":
        try:
            c_end = float(arg) if arg else config.c_end
        except ValueError:
            raise ValidationError(f"bad capacity threshold {arg!r}") from None
        return CapacityBased(c_end)
    if kind == "efficiency":
        return EfficiencyBased.from_tariff(config.tariff, config.cell, config.inverter_passes,
                                           arg or config.efficiency_unreachable)
    raise ValidationError(f"unknown criterion {text!r}; use capacity:<c_end> or efficiency")


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _emit(args, header: Sequence[str], rows: list[Sequence], extra: dict | None = None) -> None:
    out, close = _open_out(args.out)
    try:
        if args.format == "json":
            payload = dict(extra or {})
            payload["rows"] = [dict(zip(header, r)) for r in rows]
            out.write(json.dumps(payload, indent=2, default=float) + "\n")
        else:
            write_table(header, rows, out)
    finally:
        if close:
            out.close()


def _config(args) -> StudyConfig:
    cfg = load_config(args.config)
    if args.segments is not None:
        cfg = replace(cfg, segments=args.segments)
    if args.profile is not None:
        cfg = replace(cfg, profile=args.profile)
    return cfg


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_curves(args, cfg: StudyConfig) -> int:
    cell = cfg.cell
    coeffs = coeffs_at_voltage(cell.v_avg)
    if args.kind == "aging":
        d = args.dod
        rows = []
        for n in np.linspace(0, args.cycles, args.points):
            q = n * 2 * d * cell.c0
            c_star = 1 - coeffs.beta(d) * np.sqrt(q)
            r_star = 1 + coeffs.alpha(d) * q
            rows.append((float(n), float(c_star), battery_efficiency(cell.clr0 * c_star * r_star, cell)))
        _emit(args, ("cycles", "capacity", "efficiency"), rows)
    elif args.kind == "maxcycles":
        cap = CapacityBased(cfg.c_end)
        eff = EfficiencyBased.from_tariff(cfg.tariff, cell, cfg.inverter_passes, "optimistic")
        rows = []
        for d in np.linspace(0.02, 1.0, args.points):
            n_eff = eff.max_cycles(float(d), cell)
            rows.append((float(d), cap.max_cycles(float(d), cell), None if np.isinf(n_eff) else n_eff))
        _emit(args, ("dod", "capacity_cycles", "efficiency_cycles"), rows)
    else:
        crit = parse_criterion(args.criterion, cfg)
        pwl = build_pwl(crit, cfg.storage, cfg.segments, spacing=cfg.spacing)
        _emit(args, ("dod", "cost_usd"), list(zip(pwl.d, pwl.g)))
    return 0


def cmd_threshold(args, cfg: StudyConfig) -> int:
    th = clr_limit(cfg.tariff, cfg.cell, cfg.inverter_passes)
    values = {
        "total_threshold": th.ratio_total,
        "y": th.y,
        "clr_limit": th.clr_limit,
        "target_product": th.target_product,
        "battery_efficiency_fresh": battery_efficiency(cfg.cell.clr0, cfg.cell),
        "battery_scrap_efficiency_inv1": th.battery_only_efficiency(1),
        "battery_scrap_efficiency_inv2": th.battery_only_efficiency(2),
    }
    note = ("battery-only scrap efficiency divides the total threshold by the inverter "
            "efficiency once (inv1) or for both legs (inv2); the published 61.6% sits "
            "closest to inv2")
    if args.format == "csv":
        _emit(args, ("quantity", "value"), list(values.items()))
        return 0
    out, close = _open_out(args.out)
    if args.format == "json":
        out.write(json.dumps({**values, "note": note}, indent=2) + "\n")
    else:
        for k, v in values.items():
            out.write(f"{k} = {v:.5g}\n")
        out.write(f"# {note}\n")
    if close:
        out.close()
    return 0


def cmd_maxcycles(args, cfg: StudyConfig) -> int:
    crit = parse_criterion(args.criterion, cfg)
    rows = []
    for k in range(1, round(1 / args.step) + 1):
        d = round(k * args.step, 12)
        try:
            n = crit.max_cycles(d, cfg.cell)
        except TargetUnreachable:
            n = None
        rows.append((d, None if n is not None and np.isinf(n) else n))
    _emit(args, ("dod", "max_cycles"), rows, {"criterion": crit.label})
    return 0


def cmd_optimize(args, cfg: StudyConfig) -> int:
    profile = load_profile(cfg.profile)
    crit = parse_criterion(args.criterion, cfg) if args.criterion else None
    flags = DispatchFlags(price_degradation=crit is not None, cyclic_soc=cfg.cyclic_soc,
                          initial_soc=cfg.initial_soc)
    pricing = crit if crit is not None else CapacityBased(cfg.c_end)
    result = optimize_day(profile, cfg.tariff, [cfg.storage], [pricing], flags,
                          segments=cfg.segments, spacing=cfg.spacing, tol=cfg.tol)
    c = result.costs
    summary = {
        "criterion": pricing.label if crit is not None else "ignored",
        "total": c.total, "energy": c.energy, "peak": c.peak, "om": c.om,
        "degradation": c.degradation, "degradation_pwl": c.degradation_pwl,
        "degradation_exact": c.degradation_exact, "calendar": c.calendar,
        "peak_mw": result.peak, "lifetime_days": estimate_lifetime(result, pricing, cfg.storage),
    }
    header = ("hour", "grid_mw", "pv_used_mw", "discharge_mw", "charge_mw", "soc_mwh", "dod")
    rows = [(h, result.grid[t], result.pv_used[t], result.discharge[0, t], result.charge[0, t],
             result.soc[0, t], result.dod[0, t]) for t, h in enumerate(profile.hours())]
    if args.format == "json":
        _emit(args, header, rows, summary)
    else:
        _emit(args, header, rows)
        for k, v in summary.items():
            print(f"# {k} = {v}", file=sys.stderr)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_scenarios(args, cfg: StudyConfig) -> int:
    report = run_four_scenarios(cfg)
    text = {"csv": report.to_csv, "json": report.to_json, "text": report.to_text}[args.format]()
    out, close = _open_out(args.out)
    out.write(text if text.endswith("\n") else text + "\n")
    if close:
        out.close()
    return 0 if all(r.ok for r in report.rows) else 2


def cmd_simulate(args, cfg: StudyConfig) -> int:
    crit = parse_criterion(args.criterion, cfg)
    sim = simulate_to_eol(cfg, crit, feedback=not args.no_feedback,
                          resolve_every=args.resolve_every)
    header = ("day", "loss", "throughput_ah", "capacity", "resistance")
    rows = [(s.days, s.loss, s.throughput, s.c_star, s.r_star) for s in sim.trajectory]
    _emit(args, header, rows, {"days": sim.days, "reason": sim.reason})
    print(f"# end of life after {sim.days} days ({sim.reason})", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="YAML config file or 'default'")
    common.add_argument("--profile", default=None, help="profile CSV (hour,load_mw,pv_mw)")
    common.add_argument("--segments", type=int, default=None, help="PWL segment count")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json", "text"), default=None,
                        help="csv or json; threshold and scenarios also take text (their default)")
    common.add_argument("--seed", type=int, default=None,
                        help="seed for numpy's global RNG; nothing in the pipeline is random")

    parser = _Parser(prog="peakshave", description="Degradation-aware peak-shaving studies")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("curves", parents=[common], help="aging, cycle-life or PWL cost curves")
    p.add_argument("--kind", choices=("aging", "maxcycles", "pwl"), default="aging")
    p.add_argument("--dod", type=float, default=1.0)
    p.add_argument("--cycles", type=float, default=2000.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--criterion", default="capacity")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("threshold", parents=[common], help="efficiency scrap threshold")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("maxcycles", parents=[common], help="cycle life over a DOD grid")
    p.add_argument("--criterion", default="capacity")
    p.add_argument("--step", type=float, default=0.1)
    p.set_defaults(func=cmd_maxcycles)

    p = sub.add_parser("optimize", parents=[common], help="one-day dispatch")
    p.add_argument("--criterion", default=None, help="omit to leave degradation unpriced")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("scenarios", parents=[common], help="four-scenario comparison")
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("simulate", parents=[common], help="repeat the day until end of life")
    p.add_argument("--criterion", default="capacity")
    p.add_argument("--no-feedback", action="store_true", help="keep the fresh parameters")
    p.add_argument("--resolve-every", type=int, default=10, help="days between re-solves")
    p.set_defaults(func=cmd_simulate)
    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.seed is not None:
            np.random.seed(args.seed)
        if getattr(args, "step", 0.1) <= 0 or getattr(args, "points", 2) < 2:
            raise ValidationError("step must be positive and points at least 2")
        if args.format is None:
            args.format = "text" if args.command in ("threshold", "scenarios") else "csv"
        elif args.format == "text" and args.command not in ("threshold", "scenarios"):
            raise ValidationError(f"{args.command} writes csv or json, not text")
        return args.func(args, _config(args))
    except ValidationError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except ModelError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except PeakShaveError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
