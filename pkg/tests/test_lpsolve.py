import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import random_box_lp, to_ub, vertex_enumeration
from peakshave.lpsolve import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LPBuilder,
    LinearProgram,
    dual_objective,
    dual_sign_violation,
    solve,
    to_lp_format,
)

scipy_optimize = pytest.importorskip("scipy.optimize")


def build(c, upper, a, b, senses, a_eq=None, b_eq=None):
    lp = LPBuilder()
    xs = [lp.var(f"x{j}", 0.0, float(u)) for j, u in enumerate(upper)]
    for row, rhs, sense in zip(a, b, senses):
        lp.add(dict(zip(xs, row)), str(sense), float(rhs))
    if a_eq is not None:
        for row, rhs in zip(a_eq, b_eq):
            lp.add(dict(zip(xs, row)), "=", float(rhs))
    for j, v in zip(xs, c):
        lp.cost(j, float(v))
    return lp.build()


def test_single_bound():
    lp = LPBuilder()
    x = lp.var("x", 0, 10)
    lp.add({x: 1}, ">=", 3)
    lp.cost(x, 1)
    sol = solve(lp.build())
    assert sol.optimal and sol.x[0] == pytest.approx(3) and sol.objective == pytest.approx(3)


def test_triangle():
    lp = LPBuilder()
    x, y = lp.var("x", 0, 1), lp.var("y", 0, 1)
    lp.add({x: 1, y: 1}, "<=", 1)
    lp.cost(x, -1)
    lp.cost(y, -1)
    assert solve(lp.build()).objective == pytest.approx(-1)


def test_statuses():
    lp = LPBuilder()
    x = lp.var("x")
    lp.cost(x, -1)
    assert solve(lp.build()).status == UNBOUNDED
    lp = LPBuilder()
    x = lp.var("x")
    lp.add({x: 1}, "<=", 1)
    lp.add({x: 1}, ">=", 2)
    assert solve(lp.build()).status == INFEASIBLE


def test_free_and_negative_bounds():
    lp = LPBuilder()
    x = lp.var("x", -math.inf, math.inf)
    y = lp.var("y", -5, -1)
    lp.add({x: 1, y: -1}, ">=", 2)
    lp.cost(x, 1)
    lp.cost(y, -1)
    sol = solve(lp.build())
    # x = y + 2, objective x - y = 2 everywhere on the boundary
    assert sol.objective == pytest.approx(2)


def test_beale_cycling_example():
    # classic program on which textbook Dantzig pricing cycles
    lp = LPBuilder()
    x = [lp.var(f"x{i}") for i in range(4)]
    lp.add({x[0]: 0.25, x[1]: -60, x[2]: -0.04, x[3]: 9}, "<=", 0)
    lp.add({x[0]: 0.5, x[1]: -90, x[2]: -0.02, x[3]: 3}, "<=", 0)
    lp.add({x[2]: 1}, "<=", 1)
    for j, v in zip(x, (-0.75, 150, -0.02, 6)):
        lp.cost(j, v)
    sol = solve(lp.build())
    assert sol.optimal and sol.objective == pytest.approx(-0.05)


def test_vertex_enumeration_oracle():
    rng = np.random.default_rng(7)
    checked = 0
    for trial in range(30):
        n, m = int(rng.integers(2, 6)), int(rng.integers(1, 6))
        c, upper, a, b, senses, a_eq, b_eq = random_box_lp(rng, n, m, with_eq=trial % 3 == 0)
        a_ub, b_ub = to_ub(a, b, senses)
        want = vertex_enumeration(a_ub, b_ub, c, np.zeros(n), upper, a_eq, b_eq)
        sol = solve(build(c, upper, a, b, senses, a_eq, b_eq))
        if want is None:
            assert sol.status == INFEASIBLE
        else:
            assert sol.status == OPTIMAL
            assert sol.objective == pytest.approx(want, rel=1e-6, abs=1e-9)
            checked += 1
    assert checked >= 15


@given(st.integers(0, 2**32 - 1))
def test_matches_reference_solver(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 12)), int(rng.integers(1, 12))
    c, upper, a, b, senses, a_eq, b_eq = random_box_lp(rng, n, m, with_eq=bool(seed % 2))
    a_ub, b_ub = to_ub(a, b, senses)
    ref = scipy_optimize.linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                                 bounds=list(zip(np.zeros(n), upper)), method="highs")
    sol = solve(build(c, upper, a, b, senses, a_eq, b_eq))
    if ref.status == 2:
        assert sol.status == INFEASIBLE
    else:
        assert ref.status == 0
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
        lp = build(c, upper, a, b, senses, a_eq, b_eq)
        assert lp.residuals(sol.x).max(initial=0) <= 1e-9
        assert dual_objective(lp, sol.duals) == pytest.approx(sol.objective, rel=1e-6, abs=1e-6)
        assert dual_sign_violation(lp, sol.duals) <= 1e-7


def test_deterministic():
    rng = np.random.default_rng(3)
    lp = build(*random_box_lp(rng, 6, 6)[:5])
    a, b = solve(lp), solve(lp)
    assert a.status == b.status
    assert np.array_equal(a.x, b.x)


def test_constant_carried():
    lp = LPBuilder()
    x = lp.var("x", 1, 2)
    lp.cost(x, 2)
    lp.constant = 5.0
    assert solve(lp.build()).objective == pytest.approx(7.0)


def test_validation():
    from peakshave.lpsolve import Constraint, Variable
    with pytest.raises(ValueError):
        LinearProgram((Variable("x", 2, 1),), (), ())
    with pytest.raises(ValueError):
        LinearProgram((Variable("x"),), (Constraint(((3, 1.0),), "<=", 1),), ())
    with pytest.raises(ValueError):
        LinearProgram((Variable("x"),), (Constraint(((0, 1.0),), "<", 1),), ())
    b = LPBuilder()
    b.var("x")
    with pytest.raises(ValueError):
        b.var("x")


def test_lp_text_format():
    lp = LPBuilder("toy")
    x, y = lp.var("pg_0", 0, 4), lp.var("free", -math.inf, math.inf)
    lp.add({x: 1, y: -2.5}, ">=", 1, name="bal[0]")
    lp.cost(x, 3)
    text = to_lp_format(lp.build())
    for word in ("Minimize", "Subject To", "Bounds", "End", "pg_0", "free"):
        assert word in text
    assert "[" not in text
