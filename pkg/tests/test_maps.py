import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfnoise import maps
from pfnoise.errors import DomainError, InvalidMapError
from pfnoise.maps import MapKind, make_map


def test_ricker_values_and_canonical_b():
    m = maps.ricker(3.0)
    assert m.b == pytest.approx(1 / 3, abs=1e-12)
    assert m(0.5) == pytest.approx(0.5 * math.exp(3.0 * (1 - 0.5)), rel=1e-14)
    assert m.slope_limit_at_zero == pytest.approx(math.exp(3.0))


def test_truncated_logistic_clips_at_zero():
    m = maps.truncated_logistic(2.5)
    assert m.b == 0.5
    assert m(2.0) == 0.0
    assert m(0.4) == pytest.approx(2.5 * 0.4 * 0.6)


def test_bh_example_constants():
    m = maps.bh_example()
    assert m.b == pytest.approx(2 ** -0.4, abs=1e-9)
    assert m.f_b == pytest.approx(2 * 2 ** -0.4, abs=1e-9)
    assert m.f_at_zero == 0.0
    assert m.slope_limit_at_zero == 2.5


def test_quail_b_is_first_critical_point():
    m = maps.quail_example()
    h = 1e-7
    slope = (m(m.b + h) - m(m.b - h)) / (2 * h)
    assert abs(slope) < 1e-5
    assert m.slope_limit_at_zero == pytest.approx(4.0)


def test_gompertz_truncated_and_zero_at_origin():
    m = maps.gompertz(1.0)
    assert m(0.0) == 0.0
    assert m(5.0) == 0.0
    assert m.slope_limit_at_zero == math.inf
    assert m.b == pytest.approx(1 / math.e)


def test_vectorised_evaluation_matches_scalar():
    m = maps.bh_example()
    xs = np.linspace(0.0, 3.0, 17)
    assert np.allclose(m(xs), [m(float(x)) for x in xs], rtol=0, atol=0)


def test_scalar_call_returns_python_float():
    assert isinstance(maps.bh_example()(0.3), float)


@pytest.mark.parametrize(
    "kind,params",
    [
        ("ricker", {"r": -1.0}),
        ("truncated_logistic", {"r": 1.5}),
        ("maynard_smith", {"A": 2.0, "B": 1.0, "gamma": 0.5}),
        ("quail", {"A": 0.5, "B": 1.0}),
    ],
)
def test_invalid_parameters_rejected(kind, params):
    with pytest.raises(InvalidMapError):
        make_map(kind, params)


def test_b_beyond_critical_point_rejected():
    with pytest.raises(InvalidMapError):
        maps.ricker(3.0, b=1.0)
    # explicitly allowed for negative controls
    m = make_map("ricker", {"r": 3.0}, 1.0, enforce_cap=False)
    assert m.b == 1.0


def test_eval_map_rejects_negative_and_nan():
    m = maps.bh_example()
    for bad in (-0.1, float("nan")):
        with pytest.raises(DomainError):
            maps.eval_map(m, bad)


def test_custom_map_positive_f0_forces_infinite_slope_limit():
    m = maps.custom(lambda x: 0.1 + 2 * x / (1 + x * x), b=1.0, f_at_zero=0.1)
    assert m.slope_limit_at_zero == math.inf
    assert m.kind is MapKind.CUSTOM


def test_dict_round_trip():
    m = maps.quail_example()
    again = maps.map_from_dict(m.to_dict())
    assert again.b == m.b
    assert dict(again.params) == dict(m.params)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.5, 4.0))
def test_ricker_critical_point_matches_closed_form(r):
    m = maps.ricker(r)
    found = maps.smallest_critical_point(m)
    assert found == pytest.approx(1.0 / r, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(A=st.floats(1.5, 5.0), gamma=st.floats(1.5, 8.0))
def test_maynard_smith_b_matches_closed_form(A, gamma):
    # d/dx [A x / (1 + x^g)] = 0  <=>  x^g = 1 / (g - 1)
    m = maps.maynard_smith(A, 1.0, gamma)
    assert m.b == pytest.approx((1.0 / (gamma - 1.0)) ** (1.0 / gamma), rel=1e-8)
