"""Exception hierarchy.

``ValidationError`` covers bad inputs (CLI exit code 1); ``ModelError`` covers
conditions the models or the solver cannot resolve (CLI exit code 2).
"""

from __future__ import annotations


class PeakShaveError(Exception):
    code = "error"


class ValidationError(PeakShaveError, ValueError):
    code = "validation"


class ModelError(PeakShaveError):
    code = "model"


class ProfileError(ValidationError):
    code = "profile"


class NoArbitrageMargin(ValidationError):
    """Peak price does not exceed the O&M cost, so no threshold exists."""

    code = "NoArbitrageMargin"


class UneconomicAtBirth(ModelError):
    """A fresh cell already fails the efficiency criterion."""

    code = "UneconomicAtBirth"


class TargetUnreachable(ModelError):
    """The capacity-resistance product never reaches the requested target."""

    code = "TargetUnreachable"

    def __init__(self, target: float, d: float, curve_max: float, x_at_max: float):
        self.target = target
        self.d = d
        self.curve_max = curve_max
        self.x_at_max = x_at_max
        super().__init__(
            f"target product {target:.6g} unreachable at d={d:.6g}; "
            f"curve maximum {curve_max:.6g} at sqrt(Q)={x_at_max:.6g}"
        )


class NonConvexCost(ModelError):
    code = "NonConvexCost"

    def __init__(self, segment: int, left_slope: float, right_slope: float):
        self.segment = segment
        self.left_slope = left_slope
        self.right_slope = right_slope
        super().__init__(
            f"sampled cost is not convex: slope of segment {segment} "
            f"({left_slope:.6g}) exceeds slope of segment {segment + 1} ({right_slope:.6g})"
        )


class SolverStatusError(ModelError):
    code = "SolverStatus"

    def __init__(self, status: str):
        self.status = status
        super().__init__(f"linear program not solved to optimality: {status}")


class ImmortalBattery(ModelError):
    code = "ImmortalBattery"


class NoConvergence(ModelError):
    code = "NoConvergence"
