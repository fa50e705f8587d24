"""Degradation-aware dispatch of peak-shaving battery storage."""

from .config import StudyConfig, load_config
from .degradation import DegradationCoeffs, coeffs_at_voltage
from .errors import ModelError, PeakShaveError, ValidationError
from .io import load_profile, write_profile
from .lifecost import PWLCurve, build_pwl
from .lpsolve import LinearProgram, LPBuilder, LPSolution, solve
from .operation import DispatchFlags, DispatchResult, baseline_cost, build_day_lp, optimize_day
from .params import CellParams, DayProfile, StorageUnit, Tariff
from .scrapping import CapacityBased, EfficiencyBased, NoneIgnored, clr_limit
from .study import estimate_lifetime, lifetime_benefit, run_four_scenarios, simulate_to_eol

__version__ = "0.1.0"

__all__ = [
    "CapacityBased", "CellParams", "DayProfile", "DegradationCoeffs", "DispatchFlags",
    "DispatchResult", "EfficiencyBased", "LPBuilder", "LPSolution", "LinearProgram",
    "ModelError", "NoneIgnored", "PWLCurve", "PeakShaveError", "StorageUnit", "StudyConfig",
    "Tariff", "ValidationError", "baseline_cost", "build_day_lp", "build_pwl", "clr_limit",
    "coeffs_at_voltage", "estimate_lifetime", "lifetime_benefit", "load_config",
    "load_profile", "optimize_day", "run_four_scenarios", "simulate_to_eol", "solve",
    "write_profile",
]
