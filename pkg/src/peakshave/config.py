"""Study configuration: one YAML file, flat keys plus nested sections.

Example::

    cell:
      v_cha: 3.7
      v_dis: 3.7
      c0: 2.5
      r0: 0.1718
      eta_inv: 0.9
      t_end_cal: 5475
    storage:
      e_cap: 4.0
      p_dis_max: 4.0
      unit_invest: 176
    tariff:
      prices: {peak: 0.153, normal: 0.092, valley: 0.05}
      bands:
        peak: [8, 9, 10, 11, 17, 18, 19, 20]
        normal: [12, 13, 14, 15, 16, 21, 22, 23]
        valley: [0, 1, 2, 3, 4, 5, 6, 7]
      capacity_price: 10
      om_cost: 0.017
      days_per_month: 30
    profile: jiangsu_typical.csv
    c_end: 0.8
    inverter_passes: 1
    segments: 8
    spacing: uniform

Unknown keys are rejected so typos surface as validation errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .errors import ValidationError
from .params import CellParams, StorageUnit, Tariff

_TOP_KEYS = {
    "cell", "storage", "tariff", "profile", "c_end", "inverter_passes",
    "efficiency_unreachable", "segments", "spacing", "tol", "cyclic_soc",
    "initial_soc", "max_days", "s2_lifetime_c_end",
}


@dataclass(frozen=True)
class StudyConfig:
    storage: StorageUnit = field(default_factory=StorageUnit)
    tariff: Tariff = field(default_factory=Tariff)
    profile: str | None = None
    c_end: float = 0.8
    inverter_passes: int = 1
    efficiency_unreachable: str = "optimistic"
    s2_lifetime_c_end: float = 0.8
    segments: int = 8
    spacing: str = "uniform"
    tol: float = 1e-9
    cyclic_soc: bool = True
    initial_soc: float = 0.5
    max_days: int = 20000

    def __post_init__(self):
        if not 0 < self.c_end < 1:
            raise ValidationError(f"c_end must lie in (0, 1), got {self.c_end!r}")
        if not 0 < self.s2_lifetime_c_end < 1:
            raise ValidationError("s2_lifetime_c_end must lie in (0, 1)")
        if self.inverter_passes not in (1, 2):
            raise ValidationError("inverter_passes must be 1 or 2")
        if self.efficiency_unreachable not in ("error", "optimistic"):
            raise ValidationError("efficiency_unreachable must be 'error' or 'optimistic'")
        if self.segments < 2:
            raise ValidationError("segments must be at least 2")
        if self.spacing not in ("uniform", "log"):
            raise ValidationError("spacing must be 'uniform' or 'log'")
        if not 0 < self.tol < 1e-3:
            raise ValidationError("tol must lie in (0, 1e-3)")
        if self.max_days < 1:
            raise ValidationError("max_days must be positive")

    @property
    def cell(self) -> CellParams:
        return self.storage.cell


def _section(raw: Any, name: str, allowed: set[str]) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ValidationError(f"section {name!r} must be a mapping")
    unknown = set(raw) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return dict(raw)


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def _number(value: Any, key: str) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{key} must be numeric, got {value!r}") from None


def tariff_from_dict(raw: dict) -> Tariff:
    raw = _section(raw, "tariff", {"prices", "bands", "capacity_price", "om_cost", "days_per_month"})
    kwargs: dict[str, Any] = {}
    if "prices" in raw:
        kwargs["prices"] = {str(k): _number(v, f"tariff.prices.{k}") for k, v in raw["prices"].items()}
    if "bands" in raw:
        hours: list[str | None] = [None] * 24
        for band, hs in raw["bands"].items():
            for h in hs:
                if not isinstance(h, int) or not 0 <= h < 24:
                    raise ValidationError(f"tariff.bands.{band}: bad hour {h!r}")
                if hours[h] is not None:
                    raise ValidationError(f"hour {h} assigned to both {hours[h]!r} and {band!r}")
                hours[h] = str(band)
        missing = [h for h, b in enumerate(hours) if b is None]
        if missing:
            raise ValidationError(f"tariff.bands leaves hours {missing} unassigned")
        kwargs["hour_bands"] = tuple(hours)
    for key in ("capacity_price", "om_cost", "days_per_month"):
        if key in raw:
            kwargs[key] = _number(raw[key], f"tariff.{key}")
    return Tariff(**kwargs)


def config_from_dict(raw: dict | None) -> StudyConfig:
    raw = _section(raw or {}, "config", _TOP_KEYS)
    cell_raw = _section(raw.pop("cell", None), "cell", _field_names(CellParams))
    cell = CellParams(**{k: _number(v, f"cell.{k}") for k, v in cell_raw.items()})
    st_raw = _section(raw.pop("storage", None), "storage", _field_names(StorageUnit) - {"cell"})
    st_kwargs = {k: (str(v) if k == "name" else _number(v, f"storage.{k}")) for k, v in st_raw.items()}
    storage = StorageUnit(cell=cell, **st_kwargs)
    tariff = tariff_from_dict(raw.pop("tariff", None) or {})
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        if key in ("profile", "efficiency_unreachable", "spacing"):
            kwargs[key] = None if value is None else str(value)
        elif key in ("inverter_passes", "segments", "max_days"):
            kwargs[key] = int(value)
        elif key == "cyclic_soc":
            kwargs[key] = bool(value)
        else:
            kwargs[key] = _number(value, key)
    return StudyConfig(storage=storage, tariff=tariff, **kwargs)


def load_config(path: str | Path | None) -> StudyConfig:
    """Read a YAML config; ``None`` or ``"default"`` gives the built-in case."""
    if path is None or str(path) == "default":
        return StudyConfig()
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from None
    cfg = config_from_dict(raw)
    if cfg.profile is not None and not Path(cfg.profile).is_absolute():
        candidate = path.parent / cfg.profile
        if candidate.is_file():
            cfg = replace(cfg, profile=str(candidate))
    return cfg
