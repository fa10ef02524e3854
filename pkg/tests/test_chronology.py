import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cboundary.chronology import (
    CurveSample,
    Event,
    Relation,
    batch_chronology,
    chron_bounds_general,
    chron_related,
    classify_curve,
    lightcone_ode_1d,
    relation,
    relation_matrix,
    rk4,
    sandwich_check,
    verdicts_to_csv,
)
from cboundary.distance import DistanceTable, UniformLineDistance
from cboundary.errors import DegenerateSegmentError, InvalidInputError, InvalidMetricError
from cboundary.geometry import DirectedMesh, RandersField, TimeDependentRandersField, build_weighted_graph
from cboundary.warp import WarpProfile

from conftest import LOGISTIC, logistic_primitive

EUCLID = UniformLineDistance()


def test_minkowski_relations(unit_profile):
    o = Event(0.0, 0.0)
    assert relation(o, Event(1.0, 0.5), unit_profile, EUCLID) is Relation.CHRONOLOGICAL
    assert relation(o, Event(1.0, -1.0), unit_profile, EUCLID) is Relation.HORISMOTIC
    assert relation(o, Event(1.0, 2.0), unit_profile, EUCLID) is Relation.UNRELATED
    assert relation(Event(1.0, 0.0), o, unit_profile, EUCLID) is Relation.UNRELATED
    assert not chron_related(o, o, unit_profile, EUCLID)


def test_asymmetric_cone(unit_profile):
    wind = UniformLineDistance(right=0.4, left=0.1)
    o = Event(0.0, 0.0)
    assert chron_related(o, Event(1.0, 2.0), unit_profile, wind)
    assert not chron_related(o, Event(1.0, 3.0), unit_profile, wind)
    assert chron_related(o, Event(1.0, -9.0), unit_profile, wind)


def test_logistic_warp_cone(logistic_profile):
    o = Event(0.0, 0.0)
    reach = logistic_primitive(1.0)
    assert reach == pytest.approx(1.6321205588285577, abs=1e-15)
    assert relation(o, Event(1.0, reach), logistic_profile, EUCLID) is Relation.HORISMOTIC
    assert relation(o, Event(1.0, 1.6), logistic_profile, EUCLID) is Relation.CHRONOLOGICAL
    assert relation(o, Event(1.0, 1.7), logistic_profile, EUCLID) is Relation.UNRELATED


@given(
    t=st.lists(st.floats(-2, 4), min_size=3, max_size=3),
    x=st.lists(st.floats(-5, 5), min_size=3, max_size=3),
)
def test_chronology_transitive(t, x):
    p = WarpProfile.from_expression(LOGISTIC)
    a, b, c = (Event(ti, xi) for ti, xi in zip(t, x))
    if chron_related(a, b, p, EUCLID) and chron_related(b, c, p, EUCLID):
        assert chron_related(a, c, p, EUCLID)


def test_relation_matrix_agrees(logistic_profile):
    mesh = DirectedMesh.line(np.linspace(-2, 2, 9))
    table = DistanceTable.from_graph(build_weighted_graph(mesh, RandersField.constant([[1.0]], [0.3])))
    times = [-1.0, 0.0, 0.5, 2.0]
    R = relation_matrix(times, logistic_profile, table.matrix())
    code = {Relation.CHRONOLOGICAL: 1, Relation.HORISMOTIC: 0, Relation.UNRELATED: -1}
    for i, ti in enumerate(times):
        for j, tj in enumerate(times):
            for a in range(9):
                for b in range(9):
                    assert R[i, a, j, b] == code[relation(Event(ti, a), Event(tj, b), logistic_profile, table)]


def test_curve_classification():
    f = RandersField.euclidean(1)
    ts = np.linspace(0, 1, 11)
    assert classify_curve(CurveSample(ts, np.zeros(11)), f).label == "timelike"
    assert classify_curve(CurveSample(ts, ts), f).label == "lightlike"
    assert classify_curve(CurveSample(ts, 2 * ts), f).label == "noncausal"
    mixed = np.concatenate([ts[:6], np.full(5, ts[5])])
    assert classify_curve(CurveSample(ts, mixed), f).label == "causal"
    past = CurveSample(ts[::-1], np.zeros(11), orientation="past")
    assert classify_curve(past, f).label == "timelike"


def test_curve_classification_with_warp():
    p = WarpProfile.from_expression("0.5")
    ts = np.linspace(0, 1, 5)
    c = classify_curve(CurveSample(ts, 2 * ts), RandersField.euclidean(1), p)
    assert c.label == "lightlike"
    assert np.allclose(c.ratios, 1.0)


def test_curve_validation():
    with pytest.raises(InvalidInputError):
        CurveSample([0.0, 0.0], [0.0, 1.0])
    with pytest.raises(InvalidInputError):
        CurveSample([0.0], [0.0])
    with pytest.raises(InvalidInputError):
        CurveSample([1.0, 0.0], [0.0, 1.0], orientation="sideways")
    curve = CurveSample(np.array([0.0, 1.0]), np.zeros(2))
    object.__setattr__(curve, "times", np.array([0.0, 0.0]))
    with pytest.raises(DegenerateSegmentError):
        classify_curve(curve, RandersField.euclidean(1))


def _squeezed(profile, weight):
    """Time-dependent field ``h_t = (weight * alpha^2 + (1 - weight)) * h``, omega = 0."""

    def metric(t, x):
        a = np.asarray(profile(np.asarray(t, dtype=float)), dtype=float)
        return ((weight * a * a + (1 - weight)) * np.ones(len(x)))[:, None, None]

    return TimeDependentRandersField(1, metric)


def test_sandwich(logistic_profile):
    base = RandersField.euclidean(1)
    pts, vecs, times = np.linspace(-1, 1, 5), np.array([1.0, -2.0]), np.linspace(-3, 3, 13)
    for w in (0.0, 0.3, 1.0):
        assert sandwich_check(_squeezed(logistic_profile, w), base, logistic_profile, pts, vecs, times).passed
    too_slow = TimeDependentRandersField(1, lambda t, x: (0.8 * np.asarray(logistic_profile(t)) ** 2 * np.ones(len(x)))[:, None, None])
    rep = sandwich_check(too_slow, base, logistic_profile, pts, vecs, times)
    assert not rep.passed and rep.lower_slack < 0
    too_fast = _squeezed(logistic_profile, -0.5)
    assert sandwich_check(too_fast, base, logistic_profile, pts, vecs, times).upper_slack < 0


def test_bounds_band():
    half = WarpProfile.from_expression("0.5")
    o = Event(0.0, 0.0)
    assert chron_bounds_general(o, Event(1.0, 0.5), EUCLID, EUCLID, half).verdict == "related"
    assert chron_bounds_general(o, Event(1.0, 1.5), EUCLID, EUCLID, half).verdict == "indeterminate"
    assert chron_bounds_general(o, Event(1.0, 3.0), EUCLID, EUCLID, half).verdict == "unrelated"


def test_batch_csv():
    half = WarpProfile.from_expression("0.5")
    rows = batch_chronology([(0.0, 0.0, 1.0, 0.5), (0.0, 0.0, 1.0, 1.5)], EUCLID, half)
    assert [r["verdict"] for r in rows] == ["related", "indeterminate"]
    text = verdicts_to_csv([{"t0": 0.0, **rows[0]}])
    assert text.splitlines() == ["t0,cl,op,verdict", "0.0,True,True,related"]


def test_rk4_exact_on_cubic():
    xs, ys, done = rk4(lambda x, y: 3 * x * x, 0.0, 0.0, 2.0, 0.1)
    assert done and ys[-1] == pytest.approx(8.0, abs=1e-12)


def test_minkowski_lightcone():
    flat = lambda t, x: 1.0  # noqa: E731
    right = lightcone_ode_1d(flat, Event(0.0, 0.0), "right-future", 2.0, step=0.1)
    assert right.times[-1] == pytest.approx(2.0, abs=1e-12)
    past = lightcone_ode_1d(flat, Event(0.0, 0.0), "left-past", -1.0, step=0.1)
    assert past.orientation == "past" and past.times[-1] == pytest.approx(-1.0, abs=1e-12)


def test_milne_lightcone_accuracy():
    c = lightcone_ode_1d(lambda t, x: t * t, Event(1.0, 0.0), "right-future", 1.0, step=1e-2)
    assert c.times[-1] == pytest.approx(math.e, abs=1e-9)


@given(t1=st.floats(-1, 1), gap=st.floats(1e-3, 1))
def test_lightcones_do_not_cross(t1, gap):
    h = lambda t, x: 1.0 / (math.exp(-t) + 1.0) ** 2  # noqa: E731
    a = lightcone_ode_1d(h, Event(t1, 0.0), "right-future", 3.0, step=0.05)
    b = lightcone_ode_1d(h, Event(t1 + gap, 0.0), "right-future", 3.0, step=0.05)
    assert np.all(b.times > a.times)


def test_lightcone_errors():
    with pytest.raises(InvalidInputError):
        lightcone_ode_1d(lambda t, x: 1.0, Event(0.0, 0.0), "up", 1.0)
    with pytest.raises(InvalidInputError):
        lightcone_ode_1d(lambda t, x: 1.0, Event(0.0, 0.0), "left-future", 1.0)
    with pytest.raises(InvalidMetricError):
        lightcone_ode_1d(lambda t, x: -1.0, Event(0.0, 0.0), "right-future", 1.0)
    blow = lightcone_ode_1d(lambda t, x: t**4, Event(1.0, 0.0), "right-future", 2.0, step=1e-3)
    assert blow.truncated and blow.positions[-1, 0] <= 1.0
