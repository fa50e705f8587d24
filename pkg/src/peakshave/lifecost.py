"""Degradation accounting: loss rates, their dollar cost, and the convex
piecewise-linear cost handed to the dispatch LP.

Every dispatch interval is treated as half a cycle at the interval's depth of
discharge, so the per-interval cost curve is ``g(d) = cycle_cost(0.5, d)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .degradation import coeffs_at_voltage
from .errors import NonConvexCost, TargetUnreachable, ValidationError
from .params import CellParams, StorageUnit
from .scrapping import (
    EfficiencyBased,
    ScrappingCriterion,
    product_curve_max,
    reachable_dod_interval,
)

HALF_CYCLE = 0.5
DEFAULT_SEGMENTS = 8
REACH_MARGIN = 1e-3
CURVATURE_MARGIN = 0.05


def cycle_loss_rate(n: float, d: float, criterion: ScrappingCriterion, cell: CellParams) -> float:
    """Fraction of cycle life used by ``n`` cycles at depth ``d``."""
    if n < 0:
        raise ValueError(f"cycle count must be >= 0, got {n!r}")
    if n == 0 or d <= 0:
        return 0.0
    n_end = criterion.max_cycles(min(d, 1.0), cell)
    if n_end == 0:
        return math.inf
    return n / n_end


def cycle_cost(n: float, d: float, storage: StorageUnit, criterion: ScrappingCriterion) -> float:
    return cycle_loss_rate(n, d, criterion, storage.cell) * storage.investment


def calendar_cost(storage: StorageUnit) -> tuple[float, float]:
    """Daily calendar-aging ``(cost in $, loss rate)``; infinite life costs nothing."""
    t_end = storage.cell.t_end_cal
    rate = 0.0 if math.isinf(t_end) else 1.0 / t_end
    return rate * storage.investment, rate


@dataclass(frozen=True)
class PWLCurve:
    """Convex piecewise-linear interpolant through ``(d[k], g[k])``.

    ``d[0] == 0`` and ``g[0] == 0``; slopes are non-decreasing.
    """

    d: tuple[float, ...]
    g: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        object.__setattr__(self, "g", tuple(float(v) for v in self.g))
        if len(self.d) != len(self.g) or len(self.d) < 2:
            raise ValidationError("a PWL curve needs matching breakpoints, at least two")
        if self.d[0] != 0.0 or self.g[0] != 0.0:
            raise ValidationError("a PWL curve must start at the origin")
        if any(b <= a for a, b in zip(self.d, self.d[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        if self.d[-1] > 1.0:
            raise ValidationError("breakpoints must not exceed d = 1")
        slopes = self.slopes
        for k in range(len(slopes) - 1):
            if slopes[k + 1] < slopes[k] - 1e-9 * max(1.0, abs(slopes[k])):
                raise NonConvexCost(k, slopes[k], slopes[k + 1])

    @property
    def d_max(self) -> float:
        return self.d[-1]

    @property
    def slopes(self) -> list[float]:
        return [(g1 - g0) / (d1 - d0)
                for d0, d1, g0, g1 in zip(self.d, self.d[1:], self.g, self.g[1:])]

    def lines(self) -> list[tuple[float, float]]:
        """``(slope, intercept)`` of each segment; their max is the curve."""
        return [(s, g0 - s * d0) for s, d0, g0 in zip(self.slopes, self.d, self.g)]

    def __call__(self, d: float) -> float:
        if d <= 0:
            return 0.0
        return float(np.interp(d, self.d, self.g)) if d <= self.d_max else max(
            s * d + b for s, b in self.lines()
        )

    def scaled(self, factor: float) -> "PWLCurve":
        return PWLCurve(self.d, tuple(factor * g for g in self.g))

    def write_csv(self, out: TextIO) -> None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["dod", "cost_usd"])
        for d, g in zip(self.d, self.g):
            writer.writerow([repr(d), repr(g)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def zero_pwl() -> PWLCurve:
    """Degradation priced at nothing, for scenarios that ignore it."""
    return PWLCurve((0.0, 1.0), (0.0, 0.0))


def _breakpoints(segments: int, d_max: float, spacing: str) -> list[float]:
    if spacing == "uniform":
        return [d_max * k / segments for k in range(1, segments + 1)]
    if spacing == "log":
        # gaps to d_max shrink geometrically down to d_max / (8 * segments)
        ratio = (1.0 / (8.0 * segments)) ** (1.0 / (segments - 1))
        return [d_max * (1.0 - ratio ** k) for k in range(1, segments)] + [d_max]
    raise ValidationError(f"unknown breakpoint spacing {spacing!r}")


def convex_dod_range(
    criterion: EfficiencyBased, storage: StorageUnit, lo: float, hi: float, samples: int = 400
) -> tuple[float, float]:
    """Stretch of ``[lo, hi]`` on which the origin chord plus the efficiency cost is convex.

    Near both ends of the reachable band the target sits close to the top of
    the product curve and the EOL root moves fast with ``d``, so the cost is
    concave there. The lower end is replaced by the chord from the origin to
    the tangent point. The upper end stops where the curvature drops below a
    small fraction of its largest value, so closely spaced breakpoints near
    the top still give non-decreasing slopes.
    """
    ds = np.linspace(lo, hi, samples)
    g = np.array([cycle_cost(HALF_CYCLE, d, storage, criterion) for d in ds])
    slope = np.diff(g) / np.diff(ds)
    # curvature[j] belongs to sample j + 1
    curvature = np.diff(slope)
    rising = np.nonzero(curvature > 0)[0]
    if rising.size == 0:
        raise NonConvexCost(0, float(slope[0]), float(slope[-1]))
    start = None
    for i in range(rising[0] + 1, len(ds) - 1):
        if g[i] / ds[i] <= slope[i]:
            start = i
            break
    if start is None:
        raise NonConvexCost(0, float(g[-2] / ds[-2]), float(slope[-1]))
    # stop before curvature fades, so closely spaced breakpoints stay convex
    tail = curvature[start:]
    flat = np.nonzero(tail < CURVATURE_MARGIN * tail.max())[0]
    end = len(ds) - 1 if flat.size == 0 else start + flat[0]
    return float(ds[start]), float(ds[end])


def efficiency_dod_range(criterion: EfficiencyBased, storage: StorageUnit) -> tuple[float, float]:
    """Depths over which the efficiency cost is sampled for the PWL curve."""
    cell = storage.cell
    target = criterion.threshold.target_product
    band = reachable_dod_interval(target, coeffs_at_voltage(cell.v_avg))
    if band is None:
        raise TargetUnreachable(target, 1.0, *_peak_of_curve(cell))
    lo, hi = band
    return convex_dod_range(criterion, storage, lo, hi - REACH_MARGIN)


def _peak_of_curve(cell: CellParams) -> tuple[float, float]:
    c = coeffs_at_voltage(cell.v_avg)
    return max((product_curve_max(k / 100, c) for k in range(1, 101)), key=lambda p: p[0])


def build_pwl(
    criterion: ScrappingCriterion,
    storage: StorageUnit,
    segments: int = DEFAULT_SEGMENTS,
    d_max: float | None = None,
    spacing: str = "uniform",
) -> PWLCurve:
    """Sample ``g(d) = cycle_cost(0.5, d)`` and return its convex interpolant.

    For the efficiency criterion the default ``d_max`` stops short of the
    largest reachable depth and of the point where ``g`` turns concave.
    Breakpoints below the tangent point of the origin chord are skipped, so
    the first segment is that chord.
    """
    if segments < 2:
        raise ValidationError(f"need at least two segments, got {segments!r}")
    if criterion.ignores_degradation:
        return zero_pwl()
    lo = 0.0
    if isinstance(criterion, EfficiencyBased):
        lo, hi = efficiency_dod_range(criterion, storage)
        if d_max is None:
            d_max = hi
    elif d_max is None:
        d_max = 1.0
    if not 0 < d_max <= 1:
        raise ValidationError(f"d_max must lie in (0, 1], got {d_max!r}")

    ds, gs = [0.0], [0.0]
    for d in _breakpoints(segments, d_max, spacing):
        if d < lo:
            continue
        ds.append(d)
        gs.append(cycle_cost(HALF_CYCLE, d, storage, criterion))
    return PWLCurve(tuple(ds), tuple(gs))


def exact_degradation_cost(
    dods: Sequence[float], storage: StorageUnit, criterion: ScrappingCriterion
) -> float:
    """Sum of per-interval half-cycle costs at the realized depths."""
    return sum(cycle_cost(HALF_CYCLE, d, storage, criterion) for d in dods)
