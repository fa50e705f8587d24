"""End-of-life criteria and the cycle-life functions derived from them.

Two ways to retire a cell are modelled:

* capacity based: retire once normalized capacity falls to ``c_end``;
* efficiency based: retire once the round-trip arbitrage (peak price times
  output minus valley price times input) no longer covers the O&M cost of
  moving the energy. With a fixed cell voltage and C-rate, that break-even
  efficiency maps to an upper limit on the capacity-resistance product
  ``C_L * R``.

The life functions return fractional cycle counts to EOL at a fixed depth
of discharge ``d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .degradation import DegradationCoeffs, coeffs_at_voltage, cap_res_product
from .errors import NoArbitrageMargin, TargetUnreachable, UneconomicAtBirth, ValidationError
from .params import CellParams, Tariff


# --------------------------------------------------------------------------
# Thresholds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ScrapThreshold:
    ratio_total: float
    y: float
    clr_limit: float
    target_product: float
    eta_inv: float = 1.0
    inverter_passes: int = 1

    def battery_only_efficiency(self, passes: int = 2) -> float:
        """Battery round-trip efficiency at scrap, inverter losses removed.

        ``passes=2`` counts the inverter on both the charge and the discharge
        leg; ``passes=1`` matches how the inverter enters ``y``.
        """
        return self.ratio_total / self.eta_inv ** passes


def efficiency_threshold(tariff: Tariff) -> float:
    """Break-even total (inverter and battery) round-trip efficiency."""
    p_peak, p_valley, p_om = tariff.peak_price, tariff.valley_price, tariff.om_cost
    margin = p_peak - p_om
    if not margin > 0:
        raise NoArbitrageMargin(
            f"peak price {p_peak!r} does not exceed O&M cost {p_om!r}"
        )
    return (p_valley + p_om) / margin


def clr_limit(tariff: Tariff, cell: CellParams, inverter_passes: int = 1) -> ScrapThreshold:
    """Capacity-resistance product (V) at which the cell stops paying for itself.

    ``inverter_passes`` selects how often the inverter efficiency divides the
    break-even ratio; the default of one applies it once, as it appears in
    the closed-form limit.
    """
    if inverter_passes not in (1, 2):
        raise ValidationError(f"inverter_passes must be 1 or 2, got {inverter_passes!r}")
    ratio = efficiency_threshold(tariff)
    y = ratio * cell.n_cha / (cell.eta_inv ** inverter_passes * cell.n_dis)
    numerator = cell.v_dis - y * cell.v_cha
    if not numerator > 0:
        raise UneconomicAtBirth(
            f"v_dis={cell.v_dis} <= y*v_cha={y * cell.v_cha:.6g}: the cell cannot "
            "meet the efficiency threshold even when fresh"
        )
    limit = numerator / (cell.n_dis + y * cell.n_cha)
    return ScrapThreshold(
        ratio_total=ratio,
        y=y,
        clr_limit=limit,
        target_product=limit / cell.clr0,
        eta_inv=cell.eta_inv,
        inverter_passes=inverter_passes,
    )


def battery_efficiency(clr: float, cell: CellParams) -> float:
    """Battery-only round-trip efficiency for a capacity-resistance product ``clr`` (V).

    Charging at ``n_cha`` C with current ``n_cha * C_L`` adds ``I**2 R`` to the
    input power; discharging subtracts it from the output.
    """
    return (cell.n_dis / cell.n_cha) * (
        (cell.v_dis - cell.n_dis * clr) / (cell.v_cha + cell.n_cha * clr)
    )


def clr_for_efficiency(eta: float, cell: CellParams) -> float:
    """Inverse of :func:`battery_efficiency`."""
    k = eta * cell.n_cha / cell.n_dis
    return (cell.v_dis - k * cell.v_cha) / (cell.n_dis + k * cell.n_cha)


# --------------------------------------------------------------------------
# Cubic in sqrt(Q)
# --------------------------------------------------------------------------

def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def solve_cubic(a: float, b: float, c: float, d: float) -> list[float]:
    """Real roots of ``a x^3 + b x^2 + c x + d``, ascending.

    Depressed-cubic reduction, then Cardano for one real root or the
    trigonometric form for three. Falls back to the quadratic or linear
    formula when leading coefficients vanish.
    """
    if a == 0.0:
        if b == 0.0:
            return [] if c == 0.0 else [-d / c]
        disc = c * c - 4.0 * b * d
        if disc < 0:
            return []
        s = math.sqrt(disc)
        # avoid cancellation
        q = -0.5 * (c + math.copysign(s, c)) if c != 0 else -0.5 * s
        roots = []
        if q != 0.0:
            roots += [q / b, d / q]
        else:
            roots += [0.0, 0.0]
        return sorted(roots)

    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    if p == 0.0 and q == 0.0:
        ts = [0.0]
    elif disc > 0:
        s = math.sqrt(disc)
        ts = [_cbrt(-q / 2.0 + s) + _cbrt(-q / 2.0 - s)]
    elif disc == 0.0:
        u = _cbrt(-q / 2.0)
        ts = [2.0 * u, -u]
    else:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (p * r)) if r else 0.0
        phi = math.acos(max(-1.0, min(1.0, arg)))
        ts = [r * math.cos((phi - 2.0 * math.pi * k) / 3.0) for k in range(3)]
    return sorted(t - shift for t in ts)


def product_curve_max(d: float, c: DegradationCoeffs) -> tuple[float, float]:
    """Maximum of ``C_L* R*`` over the range where capacity is still positive.

    Returns ``(value, sqrt_q)``. When the curve never rises above its start
    the maximum is ``(1.0, 0.0)``.
    """
    beta, alpha = c.beta(d), c.alpha(d)
    if alpha <= 0 or beta <= 0:
        return 1.0, 0.0
    # f'(x) = -beta + 2 alpha x - 3 alpha beta x^2; local max at the larger root
    disc = 4.0 * alpha * alpha - 12.0 * alpha * beta * beta
    if disc < 0:
        return 1.0, 0.0
    x_hi = (2.0 * alpha + math.sqrt(disc)) / (6.0 * alpha * beta)
    value = cap_res_product(x_hi * x_hi, d, c)
    if value <= 1.0 or x_hi >= 1.0 / beta:
        return 1.0, 0.0
    return value, x_hi


def cubic_sqrt_q(target: float, d: float, c: DegradationCoeffs) -> float:
    """First ``sqrt(Q)`` at which ``C_L* R*`` climbs to ``target``.

    The product starts at 1, dips while capacity loss dominates and then
    rises as resistance grows, so for ``target >= 1`` the end of life is the
    smallest positive root, on the rising branch.
    """
    if not target >= 1.0:
        raise ValueError(f"target product must be >= 1, got {target!r}")
    if not 0 < d <= 1:
        raise ValueError(f"depth of discharge must lie in (0, 1], got {d!r}")
    if target == 1.0:
        return 0.0
    curve_max, x_max = product_curve_max(d, c)
    if target > curve_max:
        raise TargetUnreachable(target, d, curve_max, x_max)

    beta, alpha = c.beta(d), c.alpha(d)
    roots = solve_cubic(-beta * alpha, alpha, -beta, 1.0 - target)
    candidates = [x for x in roots if 0.0 < x <= x_max * (1.0 + 1e-9)]
    if not candidates:
        # target within rounding of the maximum: tangent double root
        return x_max
    x = min(candidates)
    # two Newton steps recover digits lost in the trigonometric branch
    for _ in range(2):
        f = 1.0 - beta * x + alpha * x * x - beta * alpha * x ** 3 - target
        fp = -beta + 2.0 * alpha * x - 3.0 * beta * alpha * x * x
        if fp <= 0:
            break
        step = f / fp
        if not 0.0 < x - step <= x_max:
            break
        x -= step
    return x


# --------------------------------------------------------------------------
# Cycle life
# --------------------------------------------------------------------------

def max_cycles_capacity(c_end: float, d: float, c_st: float, c: DegradationCoeffs) -> float:
    if not 0 < c_end <= 1:
        raise ValueError(f"c_end must lie in (0, 1], got {c_end!r}")
    if not 0 < d <= 1:
        raise ValueError(f"depth of discharge must lie in (0, 1], got {d!r}")
    return (1.0 - c_end) ** 2 / (2.0 * c_st * d * c.beta(d) ** 2)


def max_cycles_efficiency(
    threshold: ScrapThreshold | float, d: float, c_st: float, c: DegradationCoeffs
) -> float:
    target = threshold.target_product if isinstance(threshold, ScrapThreshold) else threshold
    x = cubic_sqrt_q(target, d, c)
    return x * x / (2.0 * d * c_st)


def reachable_dod_interval(
    target: float, c: DegradationCoeffs, tol: float = 1e-10
) -> tuple[float, float] | None:
    """Depths of discharge at which the product curve reaches ``target``.

    The curve maximum is unimodal in ``d``; the interval ends are located by
    bisection around the best point of a coarse scan. ``None`` when the
    target is unreachable at every depth.
    """
    grid = [k / 400 for k in range(1, 401)]
    peaks = [product_curve_max(d, c)[0] for d in grid]
    best = max(range(len(grid)), key=peaks.__getitem__)
    if peaks[best] < target:
        return None

    def reachable(d: float) -> bool:
        return product_curve_max(d, c)[0] >= target

    def edge(inside: float, outside: float) -> float:
        while abs(outside - inside) > tol:
            mid = 0.5 * (inside + outside)
            if reachable(mid):
                inside = mid
            else:
                outside = mid
        return inside

    lo = 1e-12 if reachable(1e-12) else edge(grid[best], 0.0)
    hi = 1.0 if reachable(1.0) else edge(grid[best], 1.0)
    return lo, hi


# --------------------------------------------------------------------------
# Criteria
# --------------------------------------------------------------------------

class ScrappingCriterion:
    """Maps a depth of discharge to the number of cycles until end of life."""

    label = "criterion"
    ignores_degradation = False

    def max_cycles(self, d: float, cell: CellParams) -> float:
        raise NotImplementedError

    def reached(self, c_star: float, r_star: float) -> bool:
        """Whether a cell state is past end of life under this criterion."""
        return False


@dataclass(frozen=True)
class CapacityBased(ScrappingCriterion):
    c_end: float = 0.8

    def __post_init__(self):
        if not 0 < self.c_end < 1:
            raise ValidationError(f"c_end must lie in (0, 1), got {self.c_end!r}")

    @property
    def label(self) -> str:
        return f"capacity:{self.c_end:g}"

    def max_cycles(self, d: float, cell: CellParams) -> float:
        return max_cycles_capacity(self.c_end, d, cell.c0, coeffs_at_voltage(cell.v_avg))

    def reached(self, c_star: float, r_star: float) -> bool:
        return c_star <= self.c_end


@dataclass(frozen=True)
class EfficiencyBased(ScrappingCriterion):
    """Retire when the capacity-resistance product hits ``threshold.target_product``.

    ``unreachable`` decides what an unreachable target means: ``"error"``
    propagates :class:`TargetUnreachable`, ``"optimistic"`` treats the cycle
    life at that depth as unbounded.
    """

    threshold: ScrapThreshold
    unreachable: str = "error"

    def __post_init__(self):
        if self.unreachable not in ("error", "optimistic"):
            raise ValidationError(f"unknown unreachable policy {self.unreachable!r}")
        if not self.threshold.target_product > 1:
            raise ValidationError(
                f"target product must exceed 1, got {self.threshold.target_product!r}"
            )

    @classmethod
    def from_tariff(
        cls, tariff: Tariff, cell: CellParams, inverter_passes: int = 1,
        unreachable: str = "error",
    ) -> "EfficiencyBased":
        return cls(clr_limit(tariff, cell, inverter_passes), unreachable)

    @property
    def label(self) -> str:
        return "efficiency"

    def max_cycles(self, d: float, cell: CellParams) -> float:
        try:
            return max_cycles_efficiency(self.threshold, d, cell.c0, coeffs_at_voltage(cell.v_avg))
        except TargetUnreachable:
            if self.unreachable == "optimistic":
                return math.inf
            raise

    def reached(self, c_star: float, r_star: float) -> bool:
        return c_star * r_star >= self.threshold.target_product


@dataclass(frozen=True)
class NoneIgnored(ScrappingCriterion):
    """Degradation left out of the dispatch objective."""

    ignores_degradation = True

    @property
    def label(self) -> str:
        return "ignored"

    def max_cycles(self, d: float, cell: CellParams) -> float:
        return math.inf


@dataclass(frozen=True)
class CustomCriterion(ScrappingCriterion):
    """Cycle life supplied as an arbitrary function of depth of discharge."""

    fn: Callable[[float], float]
    name: str = "custom"

    @property
    def label(self) -> str:
        return self.name

    def max_cycles(self, d: float, cell: CellParams) -> float:
        return self.fn(d)
