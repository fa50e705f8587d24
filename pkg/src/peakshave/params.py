"""Parameter containers shared by the models, the optimizer and the CLI.

Units follow the grid-side convention used throughout the package: power in
MW, energy in MWh, time in hours, prices in $/kWh (energy) and $/kW-month
(peak capacity). Cell-level quantities stay in volts, amperes and ohms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .errors import ValidationError

HOURS_PER_DAY = 24.0


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ValidationError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class CellParams:
    """Electrochemical description of a single cell.

    ``c0`` and ``r0`` are not given in the source case study; the defaults are
    chosen so that 2000 full cycles leave about half the capacity and the fresh
    cell has a battery-only round-trip efficiency of 0.89 ** 2.
    """

    v_cha: float = 3.7
    v_dis: float = 3.7
    n_cha: float = 1.0
    n_dis: float = 1.0
    c0: float = 2.5
    r0: float = 0.1718
    eta_inv: float = 0.9
    t_end_cal: float = 5475.0

    def __post_init__(self):
        for name in ("v_cha", "v_dis", "n_cha", "n_dis", "c0", "r0"):
            _positive(name, getattr(self, name))
        if not 0 < self.eta_inv <= 1:
            raise ValidationError(f"eta_inv must lie in (0, 1], got {self.eta_inv!r}")
        # math.inf is allowed and means "no calendar aging"
        if not self.t_end_cal > 0:
            raise ValidationError(f"t_end_cal must be positive, got {self.t_end_cal!r}")
        p_dis = self.n_dis * self.v_dis
        p_cha = self.n_cha * self.v_cha
        if abs(p_dis - p_cha) > 1e-9 * max(p_dis, p_cha):
            raise ValidationError(
                f"charge and discharge power must balance: n_dis*v_dis={p_dis!r} "
                f"vs n_cha*v_cha={p_cha!r}"
            )

    @property
    def v_avg(self) -> float:
        """Mean of the charge and discharge voltages, used by the aging fit."""
        return 0.5 * (self.v_cha + self.v_dis)

    @property
    def clr0(self) -> float:
        """Fresh capacity-resistance product in volts."""
        return self.c0 * self.r0


JIANGSU_HOUR_BANDS: tuple[str, ...] = tuple(
    "valley" if h < 8 else
    "peak" if h < 12 else
    "normal" if h < 17 else
    "peak" if h < 21 else
    "normal"
    for h in range(24)
)


@dataclass(frozen=True)
class Tariff:
    """Time-of-use tariff with a monthly peak-capacity charge."""

    prices: Mapping[str, float] = field(
        default_factory=lambda: {"peak": 0.153, "normal": 0.092, "valley": 0.05}
    )
    hour_bands: Sequence[str] = JIANGSU_HOUR_BANDS
    capacity_price: float = 10.0
    om_cost: float = 0.017
    days_per_month: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "prices", dict(self.prices))
        object.__setattr__(self, "hour_bands", tuple(self.hour_bands))
        if len(self.hour_bands) != 24:
            raise ValidationError(f"hour map needs 24 entries, got {len(self.hour_bands)}")
        for h, band in enumerate(self.hour_bands):
            if band not in self.prices:
                raise ValidationError(f"hour {h} mapped to unknown band {band!r}")
        for band, price in self.prices.items():
            if not price >= 0:
                raise ValidationError(f"price of band {band!r} must be >= 0, got {price!r}")
        if not self.capacity_price >= 0 or not self.om_cost >= 0:
            raise ValidationError("capacity price and O&M cost must be >= 0")
        _positive("days_per_month", self.days_per_month)
        if not self.peak_price >= self.valley_price:
            raise ValidationError("peak price must not fall below valley price")

    @property
    def peak_price(self) -> float:
        return max(self.prices[b] for b in self.hour_bands)

    @property
    def valley_price(self) -> float:
        return min(self.prices[b] for b in self.hour_bands)

    def price_at(self, hour: float) -> float:
        return self.prices[self.hour_bands[int(math.floor(hour)) % 24]]

    def scaled(self, factor: float) -> "Tariff":
        """All energy prices multiplied by ``factor``."""
        return replace(self, prices={k: v * factor for k, v in self.prices.items()})


@dataclass(frozen=True)
class StorageUnit:
    """Grid-side battery system. ``unit_invest`` is in $/kWh of capacity."""

    e_cap: float = 4.0
    p_dis_max: float = 4.0
    p_cha_max: float = 4.0
    eta_dis: float = 0.89
    eta_cha: float = 0.89
    unit_invest: float = 176.0
    cell: CellParams = field(default_factory=CellParams)
    name: str = "bess"

    def __post_init__(self):
        _positive("e_cap", self.e_cap)
        _positive("unit_invest", self.unit_invest)
        for name in ("p_dis_max", "p_cha_max"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be >= 0, got {value!r}")
        for name in ("eta_dis", "eta_cha"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValidationError(f"{name} must lie in (0, 1], got {value!r}")

    @property
    def investment(self) -> float:
        """Total investment in $."""
        return self.e_cap * 1000.0 * self.unit_invest


@dataclass(frozen=True)
class DayProfile:
    """Load and PV forecast for one day, ``len(load)`` intervals of ``dt`` hours."""

    load: Sequence[float]
    pv: Sequence[float]
    dt: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "load", tuple(float(v) for v in self.load))
        object.__setattr__(self, "pv", tuple(float(v) for v in self.pv))
        if len(self.load) != len(self.pv):
            raise ValidationError("load and pv series differ in length")
        _positive("dt", self.dt)
        if abs(len(self.load) * self.dt - HOURS_PER_DAY) > 1e-9:
            raise ValidationError(
                f"{len(self.load)} intervals of {self.dt} h do not cover 24 h"
            )
        for name, series in (("load", self.load), ("pv", self.pv)):
            for t, v in enumerate(series):
                if not (v >= 0 and math.isfinite(v)):
                    raise ValidationError(f"{name}[{t}] must be >= 0, got {v!r}")

    @property
    def n_intervals(self) -> int:
        return len(self.load)

    def hours(self) -> list[float]:
        return [t * self.dt for t in range(self.n_intervals)]
