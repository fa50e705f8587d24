"""Lifetime estimates, the four-scenario comparison and day-by-day aging.

Scenarios:

* ``S1``: no storage, the baseline cost ``J0``;
* ``S2``: storage dispatched with degradation left out of the objective;
* ``S3``: degradation priced under the capacity criterion;
* ``S4``: degradation priced under the efficiency criterion from the tariff.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .config import StudyConfig
from .degradation import coeffs_at_voltage
from .errors import ImmortalBattery, NoConvergence, PeakShaveError, ValidationError
from .io import format_number, load_profile
from .lifecost import HALF_CYCLE, build_pwl, calendar_cost, cycle_loss_rate
from .operation import DispatchFlags, DispatchResult, energy_weighted_dod, mean_nonzero, optimize_day
from .params import DayProfile, StorageUnit
from .scrapping import (
    CapacityBased,
    EfficiencyBased,
    NoneIgnored,
    ScrappingCriterion,
    battery_efficiency,
)

SCENARIOS = ("S1", "S2", "S3", "S4")
LOSS_TOL = 1e-9


# --------------------------------------------------------------------------
# Lifetime and lifetime benefit
# --------------------------------------------------------------------------

def daily_loss_rate(
    dods: Sequence[float], criterion: ScrappingCriterion, storage: StorageUnit
) -> tuple[float, float]:
    """``(cycle loss, calendar loss)`` of one day, each interval half a cycle."""
    cycle = sum(cycle_loss_rate(HALF_CYCLE, d, criterion, storage.cell) for d in dods)
    return float(cycle), calendar_cost(storage)[1]


def lifetime_from_rates(cycle: float, calendar: float) -> float:
    total = cycle + calendar
    if not total > 0:
        raise ImmortalBattery("no cycling and no calendar aging: lifetime is unbounded")
    return 1.0 / total


def estimate_lifetime(
    dispatch: DispatchResult, criterion: ScrappingCriterion, storage: StorageUnit, battery: int = 0
) -> float:
    """Days until the repeated typical day uses up the whole life budget."""
    if criterion.ignores_degradation:
        raise ValidationError("a lifetime needs a criterion that prices degradation")
    return lifetime_from_rates(*daily_loss_rate(dispatch.dod[battery], criterion, storage))


def lifetime_benefit(
    j0: float, jday: float, t: float, convention: str = "gross", investment: float = 0.0
) -> float:
    """Daily saving times lifetime; ``"net"`` also subtracts the investment."""
    if not t > 0:
        raise ValidationError(f"lifetime must be positive, got {t!r}")
    gross = (j0 - jday) * t
    if convention == "gross":
        return gross
    if convention == "net":
        return gross - investment
    raise ValidationError(f"unknown convention {convention!r}")


# --------------------------------------------------------------------------
# Four scenarios
# --------------------------------------------------------------------------

@dataclass
class ScenarioRow:
    scenario: str
    criterion: str
    daily_total_cost: float | None = None
    daily_energy_cost: float | None = None
    daily_om_cost: float | None = None
    daily_degradation_cost: float | None = None
    daily_peak_load_cost: float | None = None
    daily_benefit: float | None = None
    lifetime_days: float | None = None
    lifetime_benefit: float | None = None
    lifetime_benefit_gross: float | None = None
    lifetime_benefit_net: float | None = None
    lifetime_benefit_convention: str = ""
    peak_capacity_mw: float | None = None
    mean_nonzero_dod: float | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


NUMERIC_FIELDS = (
    "daily_total_cost", "daily_energy_cost", "daily_om_cost", "daily_degradation_cost",
    "daily_peak_load_cost", "daily_benefit", "lifetime_days", "lifetime_benefit",
    "lifetime_benefit_gross", "lifetime_benefit_net", "peak_capacity_mw", "mean_nonzero_dod",
)
ROW_FIELDS = ("scenario", "criterion") + NUMERIC_FIELDS + ("lifetime_benefit_convention", "status")

TEXT_LABELS = (
    ("daily_total_cost", "Daily total cost ($)"),
    ("daily_energy_cost", "Daily energy cost ($)"),
    ("daily_om_cost", "Daily O&M cost ($)"),
    ("daily_degradation_cost", "Daily degradation cost ($)"),
    ("daily_peak_load_cost", "Daily peak load cost ($)"),
    ("daily_benefit", "Daily benefit ($)"),
    ("lifetime_days", "Lifetime (days)"),
    ("lifetime_benefit", "Lifetime benefit ($)"),
    ("peak_capacity_mw", "Peak capacity (MW)"),
    ("mean_nonzero_dod", "Mean nonzero DOD"),
)


@dataclass
class ScenarioReport:
    baseline_cost: float
    investment: float
    rows: list[ScenarioRow] = field(default_factory=list)
    dispatches: dict[str, DispatchResult] = field(default_factory=dict, repr=False)

    def row(self, name: str) -> ScenarioRow:
        for r in self.rows:
            if r.scenario == name:
                return r
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for r in self.rows:
            d = asdict(r)
            writer.writerow([format_number(d[k]) if k in NUMERIC_FIELDS else d[k] for k in ROW_FIELDS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and not math.isfinite(v) else v
        return {
            "baseline_cost": self.baseline_cost,
            "investment": self.investment,
            "scenarios": [{k: clean(asdict(r)[k]) for k in ROW_FIELDS} for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        names = [r.scenario for r in self.rows]
        width = 14
        lines = [f"{'':<28}" + "".join(f"{n:>{width}}" for n in names)]
        for key, label in TEXT_LABELS:
            cells = []
            for r in self.rows:
                v = getattr(r, key)
                if v is None:
                    cells.append("-")
                elif key in ("peak_capacity_mw", "mean_nonzero_dod"):
                    cells.append(f"{v:.3f}")
                else:
                    cells.append(f"{v:.0f}" if math.isfinite(v) else "inf")
            lines.append(f"{label:<28}" + "".join(f"{c:>{width}}" for c in cells))
        lines.append(f"{'Benefit convention':<28}"
                     + "".join(f"{(r.lifetime_benefit_convention or '-'):>{width}}" for r in self.rows))
        for r in self.rows:
            if not r.ok:
                lines.append(f"{r.scenario}: {r.status}")
        return "\n".join(lines) + "\n"


def scenario_criteria(config: StudyConfig, name: str) -> tuple[ScrappingCriterion, ScrappingCriterion]:
    """``(criterion priced in dispatch, criterion used for lifetime)`` of one scenario."""
    if name == "S2":
        return NoneIgnored(), CapacityBased(config.s2_lifetime_c_end)
    if name == "S3":
        crit = CapacityBased(config.c_end)
        return crit, crit
    if name == "S4":
        crit = EfficiencyBased.from_tariff(config.tariff, config.cell, config.inverter_passes,
                                           config.efficiency_unreachable)
        return crit, crit
    raise ValidationError(f"no storage scenario named {name!r}")


def _flags(config: StudyConfig, priced: bool) -> DispatchFlags:
    return DispatchFlags(price_degradation=priced, cyclic_soc=config.cyclic_soc,
                         initial_soc=config.initial_soc)


def run_scenario(
    name: str, config: StudyConfig, profile: DayProfile, j0: float,
    priced: ScrappingCriterion, life: ScrappingCriterion,
) -> tuple[ScenarioRow, DispatchResult]:
    storage = config.storage
    result = optimize_day(
        profile, config.tariff, [storage], [priced], _flags(config, not priced.ignores_degradation),
        segments=config.segments, spacing=config.spacing, tol=config.tol,
    )
    c = result.costs
    row = ScenarioRow(name, priced.label)
    row.daily_total_cost = c.total
    row.daily_energy_cost = c.energy
    row.daily_om_cost = c.om
    row.daily_degradation_cost = c.degradation
    row.daily_peak_load_cost = c.peak
    row.daily_benefit = j0 - c.total
    row.peak_capacity_mw = result.peak
    row.mean_nonzero_dod = mean_nonzero(result.dod[0])
    try:
        t = estimate_lifetime(result, life, storage)
    except ImmortalBattery:
        t = math.inf
    row.lifetime_days = t
    if math.isfinite(t):
        row.lifetime_benefit_gross = lifetime_benefit(j0, c.total, t, "gross")
        row.lifetime_benefit_net = lifetime_benefit(j0, c.total, t, "net", storage.investment)
    # the priced scenarios already pay the investment back through their daily
    # degradation cost; the unpriced one has to subtract it once
    row.lifetime_benefit_convention = "net" if priced.ignores_degradation else "gross"
    row.lifetime_benefit = (row.lifetime_benefit_net if priced.ignores_degradation
                            else row.lifetime_benefit_gross)
    return row, result


def run_four_scenarios(config: StudyConfig, profile: DayProfile | None = None) -> ScenarioReport:
    """Solve S1 to S4 on one typical day; failures mark their row only."""
    if profile is None:
        profile = load_profile(config.profile)
    base = optimize_day(profile, config.tariff, tol=config.tol)
    j0 = base.total
    report = ScenarioReport(j0, config.storage.investment)
    s1 = ScenarioRow("S1", "none", daily_total_cost=j0, daily_energy_cost=base.costs.energy,
                     daily_om_cost=0.0, daily_degradation_cost=0.0,
                     daily_peak_load_cost=base.costs.peak, peak_capacity_mw=base.peak)
    report.rows.append(s1)
    report.dispatches["S1"] = base
    labels = {"S2": "ignored", "S3": f"capacity:{config.c_end:g}", "S4": "efficiency"}
    for name in SCENARIOS[1:]:
        try:
            row, result = run_scenario(name, config, profile, j0, *scenario_criteria(config, name))
            report.dispatches[name] = result
        except PeakShaveError as exc:
            row = ScenarioRow(name, labels[name], status=f"failed: {exc.code}: {exc}")
        report.rows.append(row)
    return report


# --------------------------------------------------------------------------
# Day-by-day aging
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AgingState:
    loss: float = 0.0
    throughput: float = 0.0   # Ah per cell
    c_star: float = 1.0
    r_star: float = 1.0
    days: int = 0


def fold_day_aging(
    state: AgingState, dods: Sequence[float], storage: StorageUnit, loss: float
) -> AgingState:
    """Advance the cell state by one day of per-interval depths.

    The day's charge moved is applied as equivalent throughput at its
    energy-weighted mean depth: capacity falls by ``beta(d) * d(sqrt(Q))`` and
    resistance grows by ``alpha(d) * dQ``. At a constant depth this is the
    single-depth aging curve exactly.
    """
    cell = storage.cell
    coeffs = coeffs_at_voltage(cell.v_avg)
    # depths are relative to the current usable capacity
    dq = float(np.sum(dods)) * cell.c0 * state.c_star
    if dq <= 0:
        return replace(state, loss=state.loss + loss, days=state.days + 1)
    d_bar = energy_weighted_dod(dods)
    q_new = state.throughput + dq
    c_new = state.c_star - coeffs.beta(d_bar) * (math.sqrt(q_new) - math.sqrt(state.throughput))
    r_new = state.r_star + coeffs.alpha(d_bar) * dq
    return AgingState(state.loss + loss, q_new, c_new, r_new, state.days + 1)


def derated_storage(storage: StorageUnit, state: AgingState) -> StorageUnit:
    """Storage as seen by the dispatch after aging to ``state``.

    Usable energy shrinks with ``C*``; both conversion efficiencies shrink with
    the square root of the battery round-trip efficiency ratio. ``unit_invest``
    is rescaled so the total investment stays the same.
    """
    cell = storage.cell
    fresh = battery_efficiency(cell.clr0, cell)
    now = battery_efficiency(cell.clr0 * state.c_star * state.r_star, cell)
    scale = math.sqrt(max(now, 1e-6) / fresh)
    c_star = max(state.c_star, 1e-6)
    return replace(
        storage,
        e_cap=storage.e_cap * c_star,
        unit_invest=storage.unit_invest / c_star,
        eta_dis=min(1.0, storage.eta_dis * scale),
        eta_cha=min(1.0, storage.eta_cha * scale),
    )


@dataclass
class SimulationResult:
    days: int
    reason: str               # "loss", "threshold"
    trajectory: list[AgingState]

    @property
    def final(self) -> AgingState:
        return self.trajectory[-1]


DayHook = Callable[[int, AgingState, StorageUnit], Sequence[float]]


def simulate_to_eol(
    config: StudyConfig,
    criterion: ScrappingCriterion,
    profile: DayProfile | None = None,
    feedback: bool = True,
    dispatch: DayHook | None = None,
    resolve_every: int = 1,
    max_days: int | None = None,
) -> SimulationResult:
    """Repeat the typical day until end of life.

    Each day the dispatch runs on the derated storage (or ``dispatch`` supplies
    the day's depths directly), the half-cycle loss rates and calendar loss are
    added up, and the cell state is advanced. The run stops once the summed
    loss reaches one or, with ``feedback``, once the cell state crosses the
    criterion's own threshold. Without ``feedback`` the dispatch is solved
    once and the fresh storage is used throughout.
    """
    if criterion.ignores_degradation:
        raise ValidationError("simulation needs a criterion that prices degradation")
    if resolve_every < 1:
        raise ValidationError("resolve_every must be at least 1")
    max_days = config.max_days if max_days is None else max_days
    storage = config.storage
    if dispatch is None:
        if profile is None:
            profile = load_profile(config.profile)
        pwl = build_pwl(criterion, storage, config.segments, spacing=config.spacing)

        def dispatch(day: int, state: AgingState, st: StorageUnit) -> Sequence[float]:
            result = optimize_day(profile, config.tariff, [st], [criterion],
                                  _flags(config, True), pwls=[pwl], tol=config.tol)
            return result.dod[0]

    state = AgingState()
    trajectory = [state]
    dods: Sequence[float] | None = None
    while state.days < max_days:
        current = derated_storage(storage, state) if feedback else storage
        if dods is None or (feedback and state.days % resolve_every == 0):
            dods = list(dispatch(state.days, state, current))
        cycle, cal = daily_loss_rate(dods, criterion, storage)
        state = fold_day_aging(state, dods, storage, cycle + cal)
        trajectory.append(state)
        if state.loss >= 1.0 - LOSS_TOL:
            return SimulationResult(state.days, "loss", trajectory)
        if feedback and criterion.reached(state.c_star, state.r_star):
            return SimulationResult(state.days, "threshold", trajectory)
    raise NoConvergence(f"end of life not reached within {max_days} days")
