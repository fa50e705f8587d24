"""Empirical cycle-aging model for NMC 18650 cells.

Capacity fades with the square root of charge throughput and resistance grows
linearly with it; both rates depend on depth of discharge ``d`` and on the
average cell voltage. Throughput ``q`` is in Ah and all outputs are normalized
to the fresh cell. Nothing here is clamped: capacity may go negative for huge
throughput and the resistance factor may dip below one where the fitted
resistance slope is negative (small ``d`` near 3.7 V).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# voltage-dependent fit, vertex form
BETA0_CURVATURE = 7.348e-3
BETA0_VERTEX_V = 3.667
BETA0_MIN = 7.600e-4
BETA1 = 4.081e-3
ALPHA0_CURVATURE = 2.153e-4
ALPHA0_VERTEX_V = 3.725
ALPHA0_MIN = -1.521e-5
ALPHA1 = 2.798e-4


@dataclass(frozen=True)
class DegradationCoeffs:
    beta0: float
    beta1: float
    alpha0: float
    alpha1: float

    def beta(self, d: float) -> float:
        """Capacity-fade rate per sqrt(Ah) at depth ``d``."""
        return self.beta0 + self.beta1 * d

    def alpha(self, d: float) -> float:
        """Resistance-growth rate per Ah at depth ``d``."""
        return self.alpha0 + self.alpha1 * d

    def resistance_flip_dod(self) -> float:
        """Depth below which resistance shrinks with throughput."""
        return -self.alpha0 / self.alpha1


@dataclass(frozen=True)
class AgingPoint:
    q: float
    d: float
    c_star: float
    r_star: float


def coeffs_at_voltage(v: float) -> DegradationCoeffs:
    if not v > 0:
        raise ValueError(f"voltage must be positive, got {v!r}")
    return DegradationCoeffs(
        beta0=BETA0_CURVATURE * (v - BETA0_VERTEX_V) ** 2 + BETA0_MIN,
        beta1=BETA1,
        alpha0=ALPHA0_CURVATURE * (v - ALPHA0_VERTEX_V) ** 2 + ALPHA0_MIN,
        alpha1=ALPHA1,
    )


def capacity_fade(q: float, d: float, c: DegradationCoeffs) -> float:
    return 1.0 - c.beta(d) * math.sqrt(q)


def resistance_growth(q: float, d: float, c: DegradationCoeffs) -> float:
    return 1.0 + c.alpha(d) * q


def cap_res_product(q: float, d: float, c: DegradationCoeffs) -> float:
    """Normalized capacity times normalized resistance.

    Evaluated as the cubic in ``x = sqrt(q)``::

        1 - beta*x + alpha*x**2 - beta*alpha*x**3
    """
    x = math.sqrt(q)
    b, a = c.beta(d), c.alpha(d)
    return 1.0 - b * x + a * x * x - b * a * x * x * x


def aging_point(q: float, d: float, c: DegradationCoeffs) -> AgingPoint:
    return AgingPoint(q, d, capacity_fade(q, d, c), resistance_growth(q, d, c))


def throughput_from_cycles(n: float, d: float, c_st: float) -> float:
    """Charge throughput (Ah) of ``n`` cycles at depth ``d`` for a cell of ``c_st`` Ah.

    Each cycle moves ``d * c_st`` in and out, hence the factor two.
    """
    return n * 2.0 * d * c_st


def cycles_from_throughput(q: float, d: float, c_st: float) -> float:
    return q / (2.0 * d * c_st)
