import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cboundary.errors import InvalidProfileError, UnsolvableError
from cboundary.warp import (
    WarpProfile,
    adaptive_simpson,
    check_conditions,
    improper_integral,
    k_omega,
    primitive,
    solve_sK,
    time_integral,
)

from conftest import logistic_primitive


def test_simpson_polynomial():
    assert adaptive_simpson(lambda t: 1 + t * t, 0.0, 2.0) == pytest.approx(4.666666666666667, abs=1e-12)
    assert adaptive_simpson(lambda t: t, 1.0, 0.0) == pytest.approx(-0.5, abs=1e-14)


def test_improper_statuses():
    conv = improper_integral(lambda t: math.exp(-t), 0.0)
    assert conv.status == "convergent" and conv.value == pytest.approx(1.0, abs=1e-8)
    div = improper_integral(lambda t: 1.0, 0.0)
    assert div.status == "divergent" and div.converges is False
    slow = improper_integral(lambda t: 1.0 / (1.0 + t), 0.0)
    assert slow.status == "divergent"
    past = improper_integral(lambda t: math.exp(t), 0.0, direction=-1)
    assert past.value == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        improper_integral(lambda t: 1.0, 0.0, direction=0)


def test_logistic_frozen_values(logistic_profile):
    assert time_integral(logistic_profile, 0.0, 1.0) == pytest.approx(1.6321205588285577, abs=1e-10)
    assert k_omega(logistic_profile, 1.0) == pytest.approx(0.6321205588285577, abs=1e-10)
    assert k_omega(logistic_profile, 5.0) == pytest.approx(0.99326205300091453, abs=1e-10)
    assert time_integral(logistic_profile, 0.0, 5.0) == pytest.approx(5.9932620530009145, abs=1e-10)
    assert k_omega(logistic_profile, math.inf) == pytest.approx(1.0, abs=1e-8)
    assert solve_sK(logistic_profile, 0.0, 1.6321205588) == pytest.approx(0.99999999997912266, abs=1e-9)


def test_constant_profile_shortcuts():
    p = WarpProfile.from_expression("0.5")
    assert p.constant == 0.5
    assert time_integral(p, 1.0, 3.0) == 4.0
    assert k_omega(p, 2.0) == 2.0
    assert k_omega(p, math.inf) == math.inf
    assert k_omega(WarpProfile.unit(), math.inf) == 0.0
    assert solve_sK(p, 1.0, 4.0) == 3.0


def test_improper_travel_time(logistic_profile):
    assert time_integral(logistic_profile, 0.0, math.inf) == math.inf
    fast = WarpProfile.from_expression("1+t^2")
    assert time_integral(fast, 0.0, math.inf) == pytest.approx(math.pi / 2, abs=1e-6)
    with pytest.raises(UnsolvableError):
        solve_sK(fast, 0.0, 2.0)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(-3, 3))
def test_travel_time_additive(a, b, c):
    p = WarpProfile.from_expression("1/(exp(-t)+1)")
    total = time_integral(p, a, b) + time_integral(p, b, c)
    assert total == pytest.approx(time_integral(p, a, c), abs=1e-9)


@given(t=st.floats(-3, 5), K=st.floats(-4, 6))
def test_solve_inverts_travel_time(t, K):
    p = WarpProfile.from_expression("1/(exp(-t)+1)")
    s = solve_sK(p, t, K)
    assert logistic_primitive(s) - logistic_primitive(t) == pytest.approx(K, abs=1e-8)


@given(t=st.floats(-2, 2), K1=st.floats(0, 3), K2=st.floats(0, 3))
def test_solve_composes(t, K1, K2):
    p = WarpProfile.from_expression("1/(exp(-t)+1)")
    two_step = solve_sK(p, solve_sK(p, t, K1), K2)
    assert two_step == pytest.approx(solve_sK(p, t, K1 + K2), abs=1e-8)


@given(a=st.floats(0, 8), b=st.floats(0, 8))
def test_warp_constant_monotone(a, b):
    p = WarpProfile.from_expression("1/(exp(-t)+1)")
    lo, hi = sorted((a, b))
    assert k_omega(p, lo) <= k_omega(p, hi) + 1e-12
    assert k_omega(p, hi) <= 1.0 + 1e-9


def test_primitive_matches_closed_form(logistic_profile):
    for t in (-2.0, -0.5, 0.0, 0.7, 3.0):
        assert primitive(logistic_profile, t) == pytest.approx(logistic_primitive(t), abs=1e-10)


def test_flags_logistic(logistic_profile):
    f = check_conditions(logistic_profile)
    assert f.intcond_future is True and f.intcond_past is True
    assert f.e4 is True and f.e4_prime is False
    assert f.alpha_le_1


def test_flags_constant_below_one():
    f = check_conditions(WarpProfile.from_expression(str(1 / math.sqrt(3))))
    assert f.intcond_future is True and f.e4 is False


def test_flags_finite_travel_time():
    f = check_conditions(WarpProfile.from_expression("1+t^2"))
    assert f.intcond_future is False and f.intcond_past is False
    assert not f.alpha_le_1
    assert set(f.as_dict()) >= {"e4", "diagnostics"}


def test_sample_profile():
    p = WarpProfile.from_samples([0.0, 1.0, 2.0], [1.0, 0.5, 0.5])
    assert p(0.5) == pytest.approx(0.75)
    assert p(10.0) == 0.5
    assert p.to_dict()["samples"]["alpha"] == [1.0, 0.5, 0.5]
    flat = WarpProfile.from_samples([0.0, 1.0], [0.25, 0.25])
    assert flat.constant == 0.25


@pytest.mark.parametrize(
    "times, values",
    [([0.0], [1.0]), ([0.0, 0.0], [1.0, 1.0]), ([0.0, 1.0], [1.0, -1.0]), ([0.0, 1.0], [1.0, math.nan])],
)
def test_sample_profile_rejects(times, values):
    with pytest.raises(InvalidProfileError):
        WarpProfile.from_samples(times, values)


def test_invalid_profiles():
    with pytest.raises(InvalidProfileError):
        WarpProfile.from_expression("-1")
    with pytest.raises(InvalidProfileError):
        WarpProfile.from_expression("t").validate()
    with pytest.raises(InvalidProfileError):
        WarpProfile.from_expression("2").validate(require_le_one=True)
    with pytest.raises(InvalidProfileError):
        k_omega(WarpProfile.unit(), math.nan)
