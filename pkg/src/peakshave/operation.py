"""Daily peak-shaving dispatch as a linear program.

The program minimizes grid energy cost, the prorated peak-capacity charge,
storage O&M and (optionally) degradation. Per interval ``t`` and battery
``i`` it uses grid draw ``pg``, PV used ``pr``, discharge ``dis`` and charge
``cha`` (grid side, MW), state of charge ``soc`` (MWh), depth of discharge
``d`` and an epigraph variable ``z`` for the convex piecewise-linear
half-cycle cost. ``|P^b|`` in the depth definition is relaxed to two
inequalities, which are tight at the optimum whenever the binding cost
segment has a positive slope.

Cell-side net outflow is ``P^b = dis / eta_dis - cha * eta_cha`` and the
stored energy follows ``soc[t] = soc[t-1] - P^b * dt``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SolverStatusError, ValidationError
from .lifecost import PWLCurve, build_pwl, calendar_cost, exact_degradation_cost
from .lpsolve import LinearProgram, LPBuilder, LPSolution, Solver, solve
from .params import DayProfile, StorageUnit, Tariff
from .scrapping import ScrappingCriterion

log = logging.getLogger(__name__)

KWH_PER_MWH = 1000.0
FEAS_TOL = 1e-6


@dataclass(frozen=True)
class DispatchFlags:
    """Scenario switches for the day program.

    ``price_degradation=False`` drops the cycle and calendar terms from the
    objective; realized degradation is still computed afterwards.
    ``cyclic_soc`` ties the final state of charge to the initial one,
    otherwise the day starts from ``initial_soc`` (fraction of capacity).
    """

    price_degradation: bool = True
    cyclic_soc: bool = True
    initial_soc: float = 0.5

    def __post_init__(self):
        if not 0 <= self.initial_soc <= 1:
            raise ValidationError(f"initial_soc must lie in [0, 1], got {self.initial_soc!r}")


@dataclass(frozen=True)
class DayContext:
    lp: LinearProgram
    profile: DayProfile
    tariff: Tariff
    storages: tuple[StorageUnit, ...]
    pwls: tuple[PWLCurve, ...]
    flags: DispatchFlags


@dataclass
class CostBreakdown:
    energy: float = 0.0
    peak: float = 0.0
    om: float = 0.0
    degradation_pwl: float = 0.0
    degradation_exact: float = 0.0
    calendar: float = 0.0
    priced_degradation: bool = True

    @property
    def degradation(self) -> float:
        """Exact cycle cost plus calendar cost, when degradation is priced."""
        if not self.priced_degradation:
            return 0.0
        return self.degradation_exact + self.calendar

    @property
    def total(self) -> float:
        return self.energy + self.peak + self.om + self.degradation


@dataclass
class DispatchResult:
    dt: float
    grid: np.ndarray
    pv_used: np.ndarray
    discharge: np.ndarray   # (K, M)
    charge: np.ndarray
    net: np.ndarray         # cell-side outflow P^b
    soc: np.ndarray
    dod: np.ndarray         # realized |P^b| dt / C^b
    dod_var: np.ndarray     # LP depth variable, >= dod
    peak: float
    costs: CostBreakdown
    objective: float
    warnings: list[str] = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.costs.total

    @property
    def n_batteries(self) -> int:
        return self.discharge.shape[0]

    def nonzero_dod(self, i: int = 0, threshold: float = FEAS_TOL) -> np.ndarray:
        return self.dod[i][self.dod[i] > threshold]


def interval_prices(profile: DayProfile, tariff: Tariff) -> list[float]:
    return [tariff.price_at(h) for h in profile.hours()]


def build_day_lp(
    profile: DayProfile,
    tariff: Tariff,
    storages: Sequence[StorageUnit] = (),
    pwls: Sequence[PWLCurve] = (),
    flags: DispatchFlags = DispatchFlags(),
) -> LinearProgram:
    """Assemble the day program. ``pwls`` pairs with ``storages``."""
    if flags.price_degradation and len(pwls) != len(storages):
        raise ValidationError("one PWL curve per storage unit is required")
    m, dt = profile.n_intervals, profile.dt
    prices = interval_prices(profile, tariff)
    lp = LPBuilder("peak_shaving_day")

    pg = [lp.var(f"pg_{t}") for t in range(m)]
    pr = [lp.var(f"pr_{t}", 0.0, profile.pv[t]) for t in range(m)]
    peak = lp.var("peak")
    for t in range(m):
        lp.cost(pg[t], prices[t] * KWH_PER_MWH * dt)
    lp.cost(peak, tariff.capacity_price * KWH_PER_MWH / tariff.days_per_month)

    flows: list[dict[int, float]] = [{pg[t]: 1.0, pr[t]: 1.0} for t in range(m)]
    for i, st in enumerate(storages):
        tag = f"{i}"
        dis = [lp.var(f"dis_{tag}_{t}", 0.0, st.p_dis_max) for t in range(m)]
        cha = [lp.var(f"cha_{tag}_{t}", 0.0, st.p_cha_max) for t in range(m)]
        soc = [lp.var(f"soc_{tag}_{t}", 0.0, st.e_cap) for t in range(m)]
        om = tariff.om_cost * KWH_PER_MWH * dt
        for t in range(m):
            lp.cost(dis[t], om)
            lp.cost(cha[t], om)
            flows[t][dis[t]] = 1.0
            flows[t][cha[t]] = -1.0
        for t in range(m):
            row = {soc[t]: 1.0, dis[t]: dt / st.eta_dis, cha[t]: -dt * st.eta_cha}
            if t > 0:
                row[soc[t - 1]] = -1.0
                lp.add(row, "=", 0.0, f"soc_{tag}_{t}")
            elif flags.cyclic_soc:
                row[soc[m - 1]] = -1.0
                lp.add(row, "=", 0.0, f"soc_{tag}_{t}")
            else:
                lp.add(row, "=", flags.initial_soc * st.e_cap, f"soc_{tag}_{t}")
        if not flags.price_degradation:
            continue
        pwl = pwls[i]
        d = [lp.var(f"d_{tag}_{t}", 0.0, pwl.d_max) for t in range(m)]
        z = [lp.var(f"z_{tag}_{t}") for t in range(m)]
        k = dt / st.e_cap
        for t in range(m):
            lp.add({d[t]: 1.0, dis[t]: -k / st.eta_dis, cha[t]: k * st.eta_cha}, ">=", 0.0,
                   f"dpos_{tag}_{t}")
            lp.add({d[t]: 1.0, dis[t]: k / st.eta_dis, cha[t]: -k * st.eta_cha}, ">=", 0.0,
                   f"dneg_{tag}_{t}")
            for s, (slope, intercept) in enumerate(pwl.lines()):
                lp.add({z[t]: 1.0, d[t]: -slope}, ">=", intercept, f"seg_{tag}_{t}_{s}")
            lp.cost(z[t], 1.0)
        lp.constant += calendar_cost(st)[0]

    for t in range(m):
        lp.add(flows[t], "=", profile.load[t], f"balance_{t}")
        lp.add({peak: 1.0, pg[t]: -1.0}, ">=", 0.0, f"peak_{t}")
    return lp.build()


def extract(
    solution: LPSolution,
    context: DayContext,
    criteria: Sequence[ScrappingCriterion] | None = None,
) -> DispatchResult:
    """Turn an optimal solution into a :class:`DispatchResult`.

    ``criteria`` drives the exact re-evaluation of degradation at the
    realized depths; without it only the PWL value is reported.
    """
    if not solution.optimal:
        raise SolverStatusError(solution.status)
    lp, profile, tariff = context.lp, context.profile, context.tariff
    m, dt, k = profile.n_intervals, profile.dt, len(context.storages)
    index = {v.name: j for j, v in enumerate(lp.variables)}
    x = solution.x

    def series(prefix: str) -> np.ndarray:
        return np.array([x[index[f"{prefix}_{t}"]] for t in range(m)])

    grid = np.maximum(series("pg"), 0.0)
    pv_used = series("pr")
    shape = (k, m)
    dis, cha, soc = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    dod_var, z = np.zeros(shape), np.zeros(shape)
    for i in range(k):
        dis[i], cha[i], soc[i] = series(f"dis_{i}"), series(f"cha_{i}"), series(f"soc_{i}")
        if context.flags.price_degradation:
            dod_var[i], z[i] = series(f"d_{i}"), series(f"z_{i}")
    etas_dis = np.array([[s.eta_dis] for s in context.storages]).reshape(k, 1)
    etas_cha = np.array([[s.eta_cha] for s in context.storages]).reshape(k, 1)
    caps = np.array([[s.e_cap] for s in context.storages]).reshape(k, 1)
    net = dis / etas_dis - cha * etas_cha if k else np.zeros(shape)
    dod = np.abs(net) * dt / caps if k else np.zeros(shape)

    prices = np.array(interval_prices(profile, tariff))
    costs = CostBreakdown(priced_degradation=context.flags.price_degradation)
    costs.energy = float(prices @ grid) * KWH_PER_MWH * dt
    peak = float(x[index["peak"]])
    costs.peak = peak * tariff.capacity_price * KWH_PER_MWH / tariff.days_per_month
    costs.om = float((dis + cha).sum()) * tariff.om_cost * KWH_PER_MWH * dt
    costs.degradation_pwl = float(z.sum())
    if criteria is not None:
        for i, (st, crit) in enumerate(zip(context.storages, criteria)):
            costs.degradation_exact += exact_degradation_cost(dod[i], st, crit)
    costs.calendar = sum(calendar_cost(st)[0] for st in context.storages)

    result = DispatchResult(dt, grid, pv_used, dis, cha, net, soc, dod, dod_var, peak,
                            costs, solution.objective)
    _check(result, context)
    return result


def _check(result: DispatchResult, context: DayContext) -> None:
    profile, tariff = context.profile, context.tariff
    m = profile.n_intervals
    balance = result.grid + result.pv_used + (result.discharge - result.charge).sum(axis=0)
    worst = float(np.abs(balance - np.array(profile.load)).max(initial=0.0))
    if worst > FEAS_TOL:
        raise SolverStatusError(f"power balance violated by {worst:.3g} MW")
    for i in range(result.n_batteries):
        prev = np.roll(result.soc[i], 1)
        if not context.flags.cyclic_soc:
            prev[0] = context.flags.initial_soc * context.storages[i].e_cap
        gap = result.soc[i] - prev + result.net[i] * profile.dt
        if np.abs(gap).max() > FEAS_TOL:
            raise SolverStatusError("state-of-charge recursion violated")
        both = (result.discharge[i] > FEAS_TOL) & (result.charge[i] > FEAS_TOL)
        if tariff.om_cost > 0 and both.any():
            hours = [t for t in range(m) if both[t]]
            msg = f"battery {i} charges and discharges at once in intervals {hours}"
            log.warning(msg)
            result.warnings.append(msg)
    if tariff.capacity_price > 0 and m:
        if abs(result.peak - result.grid.max()) > FEAS_TOL:
            raise SolverStatusError("peak variable not tight at the optimum")


def optimize_day(
    profile: DayProfile,
    tariff: Tariff,
    storages: Sequence[StorageUnit] = (),
    criteria: Sequence[ScrappingCriterion] = (),
    flags: DispatchFlags = DispatchFlags(),
    segments: int = 8,
    spacing: str = "uniform",
    pwls: Sequence[PWLCurve] | None = None,
    solver: Solver = solve,
    tol: float = 1e-9,
) -> DispatchResult:
    """Build, solve and extract one day (the four steps end to end)."""
    storages = tuple(storages)
    criteria = tuple(criteria)
    if len(criteria) != len(storages):
        raise ValidationError("one scrapping criterion per storage unit is required")
    if pwls is None:
        pwls = tuple(build_pwl(c, s, segments, spacing=spacing) for c, s in zip(criteria, storages))
    context = DayContext(
        build_day_lp(profile, tariff, storages, pwls, flags),
        profile, tariff, storages, tuple(pwls), flags,
    )
    solution = solver(context.lp, tol=tol)
    return extract(solution, context, criteria)


def baseline_cost(profile: DayProfile, tariff: Tariff, solver: Solver = solve) -> float:
    """Daily cost without storage."""
    return optimize_day(profile, tariff, solver=solver).total


def energy_weighted_dod(dods: Sequence[float]) -> float:
    """Mean depth weighted by the energy each interval moves."""
    d = np.asarray(dods, dtype=float)
    total = d.sum()
    return float((d * d).sum() / total) if total > 0 else 0.0


def mean_nonzero(values: Sequence[float], threshold: float = FEAS_TOL) -> float:
    v = np.asarray(values, dtype=float)
    v = v[v > threshold]
    return float(v.mean()) if v.size else 0.0


def peak_cost(peak_mw: float, tariff: Tariff) -> float:
    """Daily share of the monthly peak-capacity charge for ``peak_mw``."""
    return peak_mw * KWH_PER_MWH * tariff.capacity_price / tariff.days_per_month

