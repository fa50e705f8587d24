"""Small linear-programming layer: a model container and a dense simplex.

Programs here are a few hundred variables at most, so a dense two-phase
tableau is fast enough and keeps the package free of solver dependencies.
Pricing is Dantzig's largest-coefficient rule; after a run of degenerate
pivots the solver switches to Bland's lowest-index rule until the objective
moves again, which rules out cycling.

Any callable with the signature of :func:`solve` can stand in for the
bundled solver wherever a ``solver`` argument is accepted.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"

SENSES = ("<=", "=", ">=")
STALL_LIMIT = 50


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    name: str = ""


@dataclass(frozen=True)
class LinearProgram:
    """``min objective . x + constant`` subject to rows and variable bounds."""

    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[int, float], ...]
    constant: float = 0.0
    name: str = "lp"

    def __post_init__(self):
        n = len(self.variables)
        for v in self.variables:
            if v.lower > v.upper:
                raise ValueError(f"variable {v.name!r}: lower bound exceeds upper bound")
            if v.lower == math.inf or v.upper == -math.inf:
                raise ValueError(f"variable {v.name!r}: bounds exclude every value")
        for row in self.constraints:
            if row.sense not in SENSES:
                raise ValueError(f"constraint {row.name!r}: unknown sense {row.sense!r}")
            for j, _ in row.coeffs:
                if not 0 <= j < n:
                    raise ValueError(f"constraint {row.name!r} references variable {j}")
        for j, _ in self.objective:
            if not 0 <= j < n:
                raise ValueError(f"objective references variable {j}")

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.constraints)

    def dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(A, b, c)`` with one row per constraint."""
        a = np.zeros((self.n_rows, self.n_vars))
        for i, row in enumerate(self.constraints):
            for j, v in row.coeffs:
                a[i, j] += v
        b = np.array([row.rhs for row in self.constraints], dtype=float)
        c = np.zeros(self.n_vars)
        for j, v in self.objective:
            c[j] += v
        return a, b, c

    def residuals(self, x: np.ndarray) -> np.ndarray:
        """Constraint violation per row (zero when satisfied)."""
        a, b, _ = self.dense()
        lhs = a @ x
        out = np.zeros(self.n_rows)
        for i, row in enumerate(self.constraints):
            if row.sense == "<=":
                out[i] = max(0.0, lhs[i] - b[i])
            elif row.sense == ">=":
                out[i] = max(0.0, b[i] - lhs[i])
            else:
                out[i] = abs(lhs[i] - b[i])
        return out


class LPBuilder:
    """Incremental construction of a :class:`LinearProgram`."""

    def __init__(self, name: str = "lp"):
        self.name = name
        self._vars: list[Variable] = []
        self._index: dict[str, int] = {}
        self._rows: list[Constraint] = []
        self._obj: dict[int, float] = {}
        self.constant = 0.0

    def var(self, name: str, lower: float = 0.0, upper: float = math.inf) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        self._index[name] = len(self._vars)
        self._vars.append(Variable(name, float(lower), float(upper)))
        return self._index[name]

    def index(self, name: str) -> int:
        return self._index[name]

    def add(self, coeffs: Mapping[int, float] | Iterable[tuple[int, float]], sense: str,
            rhs: float, name: str = "") -> int:
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        self._rows.append(Constraint(tuple((int(j), float(v)) for j, v in items if v != 0),
                                     sense, float(rhs), name or f"r{len(self._rows)}"))
        return len(self._rows) - 1

    def cost(self, j: int, value: float) -> None:
        self._obj[j] = self._obj.get(j, 0.0) + float(value)

    def build(self) -> LinearProgram:
        return LinearProgram(
            tuple(self._vars), tuple(self._rows),
            tuple((j, v) for j, v in sorted(self._obj.items()) if v != 0),
            self.constant, self.name,
        )


@dataclass(frozen=True)
class LPSolution:
    status: str
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = math.nan
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


Solver = Callable[..., LPSolution]


# --------------------------------------------------------------------------
# Standard form
# --------------------------------------------------------------------------

@dataclass
class _StandardForm:
    a: np.ndarray            # equality rows over structural + slack columns
    b: np.ndarray            # non-negative right-hand sides
    c: np.ndarray
    const: float
    basis: list[int | None]  # initial basic column per row, None -> artificial
    row_sign: np.ndarray     # +1/-1 applied to the original row
    row_origin: list[int]    # original constraint index, -1 for bound rows
    var_map: list[list[tuple[int, float]]]
    var_offset: np.ndarray


def _standardize(lp: LinearProgram) -> _StandardForm:
    n = lp.n_vars
    var_map: list[list[tuple[int, float]]] = []
    offset = np.zeros(n)
    bound_rows: list[tuple[int, float]] = []
    ncol = 0
    for j, v in enumerate(lp.variables):
        lo, hi = v.lower, v.upper
        if math.isfinite(lo):
            var_map.append([(ncol, 1.0)])
            offset[j] = lo
            if math.isfinite(hi):
                bound_rows.append((ncol, hi - lo))
            ncol += 1
        elif math.isfinite(hi):
            var_map.append([(ncol, -1.0)])
            offset[j] = hi
            ncol += 1
        else:
            var_map.append([(ncol, 1.0), (ncol + 1, -1.0)])
            ncol += 2

    rows: list[tuple[dict[int, float], str, float, int]] = []
    for i, con in enumerate(lp.constraints):
        coeffs: dict[int, float] = {}
        rhs = con.rhs
        for j, val in con.coeffs:
            rhs -= val * offset[j]
            for col, sgn in var_map[j]:
                coeffs[col] = coeffs.get(col, 0.0) + sgn * val
        rows.append((coeffs, con.sense, rhs, i))
    for col, ub in bound_rows:
        rows.append(({col: 1.0}, "<=", ub, -1))

    n_slack = sum(1 for _, s, _, _ in rows if s != "=")
    m = len(rows)
    a = np.zeros((m, ncol + n_slack))
    b = np.zeros(m)
    sign = np.ones(m)
    basis: list[int | None] = []
    origin = []
    slack = ncol
    for r, (coeffs, sense, rhs, i) in enumerate(rows):
        for col, val in coeffs.items():
            a[r, col] = val
        if sense != "=":
            a[r, slack] = 1.0 if sense == "<=" else -1.0
        # flip so the right-hand side is non-negative; a zero rhs on a >= row
        # is flipped too, which lets its slack start in the basis
        if rhs < 0 or (rhs == 0 and sense == ">="):
            a[r] *= -1.0
            rhs = -rhs
            sign[r] = -1.0
        b[r] = rhs
        if sense != "=" and a[r, slack] > 0:
            basis.append(slack)
        else:
            basis.append(None)
        if sense != "=":
            slack += 1
        origin.append(i)

    c = np.zeros(a.shape[1])
    const = lp.constant
    for j, val in lp.objective:
        const += val * offset[j]
        for col, sgn in var_map[j]:
            c[col] += sgn * val
    return _StandardForm(a, b, c, const, basis, sign, origin, var_map, offset)


# --------------------------------------------------------------------------
# Tableau simplex
# --------------------------------------------------------------------------

class _Tableau:
    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int], tol: float):
        m, n = a.shape
        self.t = np.zeros((m + 1, n + 1))
        self.t[:m, :n] = a
        self.t[:m, n] = b
        self.basis = list(basis)
        self.tol = tol
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.t.shape[0] - 1

    def set_cost(self, c: np.ndarray) -> None:
        row = np.zeros(self.t.shape[1])
        row[:len(c)] = c
        for r, j in enumerate(self.basis):
            if row[j] != 0.0:
                row -= row[j] * self.t[r]
        self.t[-1] = row

    def pivot(self, r: int, j: int) -> None:
        t = self.t
        t[r] /= t[r, j]
        col = t[:, j].copy()
        col[r] = 0.0
        t -= np.outer(col, t[r])
        t[:, j] = 0.0
        t[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: np.ndarray, max_iter: int) -> str:
        """Minimize the current cost row over columns flagged in ``allowed``."""
        t, tol = self.t, self.tol
        stall = 0
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            rc = np.where(allowed, t[-1, :-1], 0.0)
            scale = max(1.0, float(np.abs(t[-1, :-1]).max(initial=0.0)))
            if stall >= STALL_LIMIT:
                candidates = np.nonzero(rc < -tol * scale)[0]
                if candidates.size == 0:
                    return OPTIMAL
                j = int(candidates[0])
            else:
                j = int(np.argmin(rc))
                if rc[j] >= -tol * scale:
                    return OPTIMAL
            column = t[:-1, j]
            rows = np.nonzero(column > tol)[0]
            if rows.size == 0:
                return UNBOUNDED
            ratios = t[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + tol * max(1.0, abs(best))]
            # lowest basic index among ties: Bland's leaving rule
            r = int(min(ties, key=lambda i: self.basis[i]))
            stall = stall + 1 if best <= tol else 0
            self.pivot(r, j)


def solve(lp: LinearProgram, tol: float = 1e-9, max_iter: int | None = None) -> LPSolution:
    """Solve ``lp`` to a vertex optimum.

    Infeasible and unbounded programs come back as statuses, not exceptions.
    Optimal primal values and row duals are recomputed from the final basis
    with a direct solve, which keeps residuals near machine precision.
    """
    sf = _standardize(lp)
    m, n = sf.a.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    art_rows = [r for r, bcol in enumerate(sf.basis) if bcol is None]
    a = np.hstack([sf.a, np.zeros((m, len(art_rows)))])
    basis = list(sf.basis)
    for k, r in enumerate(art_rows):
        a[r, n + k] = 1.0
        basis[r] = n + k
    tab = _Tableau(a, sf.b, basis, tol)
    b_scale = 1.0 + float(np.abs(sf.b).max(initial=0.0))

    if art_rows:
        phase1 = np.zeros(n + len(art_rows))
        phase1[n:] = 1.0
        tab.set_cost(phase1)
        status = tab.run(np.ones(n + len(art_rows), dtype=bool), max_iter)
        if status == ITERATION_LIMIT:
            return LPSolution(status, iterations=tab.iterations)
        if -tab.t[-1, -1] > 1e-7 * b_scale:
            return LPSolution(INFEASIBLE, iterations=tab.iterations)
        # drive artificials out of the basis; rows with nothing left are redundant
        redundant = []
        for r in range(m):
            if tab.basis[r] >= n:
                row = np.abs(tab.t[r, :n])
                j = int(np.argmax(row))
                if row[j] > 1e-7:
                    tab.pivot(r, j)
                else:
                    redundant.append(r)
        if redundant:
            keep = [r for r in range(m) if r not in redundant]
            tab.t = np.vstack([tab.t[keep], tab.t[-1:]])
            tab.basis = [tab.basis[r] for r in keep]
        else:
            keep = list(range(m))
        tab.t = np.hstack([tab.t[:, :n], tab.t[:, -1:]])
    else:
        keep = list(range(m))

    tab.set_cost(sf.c)
    status = tab.run(np.ones(n, dtype=bool), max_iter)
    if status != OPTIMAL:
        return LPSolution(status, iterations=tab.iterations)

    a_keep = sf.a[keep]
    b_keep = sf.b[keep]
    basic = tab.basis
    xb = tab.t[:-1, -1].copy()
    y_keep = np.zeros(len(keep))
    try:
        bmat = a_keep[:, basic]
        xb_direct = np.linalg.solve(bmat, b_keep)
        y_keep = np.linalg.solve(bmat.T, sf.c[basic])
        if np.all(xb_direct >= -1e-9 * b_scale):
            xb = xb_direct
    except np.linalg.LinAlgError:
        pass
    x_std = np.zeros(n)
    x_std[basic] = np.maximum(xb, 0.0)

    x = sf.var_offset.copy()
    for j, parts in enumerate(sf.var_map):
        for col, sgn in parts:
            x[j] += sgn * x_std[col]
    _, _, c = lp.dense()
    objective = float(c @ x + lp.constant)

    duals = np.zeros(lp.n_rows)
    for k, r in enumerate(keep):
        i = sf.row_origin[r]
        if i >= 0:
            duals[i] = sf.row_sign[r] * y_keep[k]
    return LPSolution(OPTIMAL, x, objective, duals, tab.iterations)


def dual_objective(lp: LinearProgram, duals: np.ndarray, tol: float = 1e-9) -> float:
    """Lagrangian dual bound for ``duals`` with bound multipliers chosen optimally.

    Equals the primal optimum at an optimal dual certificate; returns ``-inf``
    when a reduced cost beyond ``tol`` pushes against an infinite bound.
    """
    a, b, c = lp.dense()
    reduced = c - a.T @ duals
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    total = float(b @ duals) + lp.constant
    for j, v in enumerate(lp.variables):
        r = reduced[j]
        if abs(r) <= tol * scale:
            continue
        if r > 0:
            if not math.isfinite(v.lower):
                return -math.inf
            total += r * v.lower
        elif r < 0:
            if not math.isfinite(v.upper):
                return -math.inf
            total += r * v.upper
    return total


def dual_sign_violation(lp: LinearProgram, duals: np.ndarray) -> float:
    """Largest amount by which a row dual has the wrong sign for its sense."""
    worst = 0.0
    for row, y in zip(lp.constraints, duals):
        if row.sense == "<=":
            worst = max(worst, y)
        elif row.sense == ">=":
            worst = max(worst, -y)
    return worst


# --------------------------------------------------------------------------
# LP text format
# --------------------------------------------------------------------------

_BAD_NAME = re.compile(r"[^A-Za-z0-9_.]")


def _lp_name(name: str) -> str:
    clean = _BAD_NAME.sub("_", name)
    return clean if clean and not clean[0].isdigit() and clean[0] != "." else "_" + clean


def _lp_expr(coeffs: Iterable[tuple[int, float]], names: list[str]) -> str:
    parts = []
    for j, v in coeffs:
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {abs(v)!r} {names[j]}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_format(lp: LinearProgram) -> str:
    """Render ``lp`` in the CPLEX LP text format."""
    names = [_lp_name(v.name) for v in lp.variables]
    lines = [f"\\ {lp.name}", "Minimize", f" obj: {_lp_expr(lp.objective, names)}"]
    if lp.constant:
        lines[-1] += f" + {lp.constant!r} __const"
    lines.append("Subject To")
    for row in lp.constraints:
        lines.append(f" {_lp_name(row.name)}: {_lp_expr(row.coeffs, names)} {row.sense} {row.rhs!r}")
    if lp.constant:
        lines.append(" __fix_const: __const = 1")
    lines.append("Bounds")
    for name, v in zip(names, lp.variables):
        if v.lower == -math.inf and v.upper == math.inf:
            lines.append(f" {name} free")
        elif v.upper == math.inf:
            lines.append(f" {name} >= {v.lower!r}" if v.lower != 0 else f" 0 <= {name}")
        else:
            lo = "-inf" if v.lower == -math.inf else repr(v.lower)
            lines.append(f" {lo} <= {name} <= {v.upper!r}")
    lines.append("End")
    return "\n".join(lines) + "\n"
