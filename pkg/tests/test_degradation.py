import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from peakshave.degradation import (
    aging_point,
    cap_res_product,
    capacity_fade,
    coeffs_at_voltage,
    cycles_from_throughput,
    resistance_growth,
    throughput_from_cycles,
)

C = coeffs_at_voltage(3.7)
dods = st.floats(0.01, 1.0)
qs = st.floats(0.0, 2e4)


def test_vertex_values():
    assert coeffs_at_voltage(3.667).beta0 == pytest.approx(7.600e-4, abs=1e-12)
    assert coeffs_at_voltage(3.725).alpha0 == pytest.approx(-1.521e-5, abs=1e-12)


def test_voltage_must_be_positive():
    with pytest.raises(ValueError):
        coeffs_at_voltage(0.0)


def test_fresh_cell_is_nominal():
    assert capacity_fade(0.0, 0.5, C) == 1.0
    assert resistance_growth(0.0, 0.5, C) == 1.0


def test_full_cycles_example():
    # 2000 full cycles of a 2.5 Ah cell is 10000 Ah
    q = throughput_from_cycles(2000, 1.0, 2.5)
    assert q == 10000.0
    assert capacity_fade(q, 1.0, C) == pytest.approx(1 - (C.beta0 + C.beta1) * 100.0)


@given(qs, dods)
def test_product_matches_factors(q, d):
    p = aging_point(q, d, C)
    assert cap_res_product(q, d, C) == pytest.approx(p.c_star * p.r_star, rel=1e-9, abs=1e-12)


@given(qs, qs, dods)
def test_capacity_never_recovers(q1, q2, d):
    lo, hi = sorted((q1, q2))
    assert capacity_fade(hi, d, C) <= capacity_fade(lo, d, C)


@given(st.floats(0.0, 1e4), dods, st.floats(0.5, 5.0))
def test_throughput_round_trip(n, d, c_st):
    q = throughput_from_cycles(n, d, c_st)
    assert cycles_from_throughput(q, d, c_st) == pytest.approx(n, rel=1e-12, abs=1e-12)


def test_resistance_flip_depth():
    d0 = C.resistance_flip_dod()
    assert C.alpha(d0) == pytest.approx(0.0, abs=1e-15)
    assert resistance_growth(100.0, d0 / 2, C) < 1.0 < resistance_growth(100.0, 2 * d0, C)
    assert math.isfinite(d0) and 0 < d0 < 1
