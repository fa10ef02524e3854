import json
import math

import numpy as np
import pytest

from cboundary.boundary import (
    BoundaryPair,
    as_g_set,
    boundary_report,
    canonical_projection,
    chronology_witness,
    classify_column,
    collapsed,
    jbar,
    jhat_op,
    make_line,
    pair_from_symmetrized_point,
    pairwise_distinct,
    st_related,
    strain_classes,
    strain_map_injective,
    total_strain_member,
    verify_line,
)
from cboundary.busemann import ProbeSet, TerminalSetRep, busemann_eval
from cboundary.chronology import CurveSample
from cboundary.completion import DeclaredSequence, classify_boundary
from cboundary.distance import DistanceTable, UniformLineDistance
from cboundary.errors import InvalidInputError, NotSPairableError, NotTimelikeError, ProjectionUndefinedError
from cboundary.geometry import DirectedMesh, RandersField, TimeDependentRandersField, build_weighted_graph
from cboundary.warp import WarpProfile

EUCLID = UniformLineDistance()
XS = np.linspace(-2, 2, 9)
PROBES = ProbeSet(tuple(XS.tolist()))


def _pair(omega, target, profile):
    return pair_from_symmetrized_point(omega, target, profile, EUCLID, PROBES)


def test_interior_point_pair(unit_profile):
    pair = _pair(1.0, 0.0, unit_profile)
    assert np.allclose(pair.P.values, 1 - np.abs(XS))
    assert np.allclose(pair.F.values, 1 + np.abs(XS))
    assert pair.s_related and not pair.P.is_terminal
    assert pair.describe()["origin_point"] == ["1.0", "0.0"]
    with pytest.raises(InvalidInputError):
        BoundaryPair(None, None)
    with pytest.raises(InvalidInputError):
        BoundaryPair(pair.F, None)


def test_forward_only_class_not_pairable(unit_profile):
    n = np.arange(1, 21)
    mesh = DirectedMesh.line(2.0**-n)
    table = DistanceTable.from_graph(build_weighted_graph(mesh, RandersField.from_expressions("1", ["1/x^2"], 1)))
    seq = DeclaredSequence(tuple(mesh.nearest_vertex([x]) for x in 2.0**-n), "down")
    (cls,) = classify_boundary([seq], table)
    probes = ProbeSet((0, 5, 10))
    with pytest.raises(NotSPairableError):
        pair_from_symmetrized_point(0.0, cls, unit_profile, table, probes)


def test_symmetrized_class_pair(unit_profile):
    n = np.arange(1, 21)
    mesh = DirectedMesh.line(np.concatenate([2.0**-n, [0.5, 1.0]]))
    table = DistanceTable.from_graph(build_weighted_graph(mesh, RandersField.constant([[1.0]], [0.5])))
    seq = DeclaredSequence(tuple(mesh.nearest_vertex([x]) for x in 2.0**-n), "zero")
    (cls,) = classify_boundary([seq], table)
    probes = ProbeSet((mesh.nearest_vertex([0.5]), mesh.nearest_vertex([1.0])))
    pair = pair_from_symmetrized_point(0.0, cls, unit_profile, table, probes)
    right, left = math.sqrt(1.25) + 0.5, math.sqrt(1.25) - 0.5
    # P: -d(x, 0) moves leftwards; F: d(0, x) moves rightwards
    assert np.allclose(pair.P.values, [-0.5 * left, -left], atol=1e-5)
    assert np.allclose(pair.F.values, [0.5 * right, right], atol=1e-5)
    assert pair.P.is_terminal


def test_lines(unit_profile):
    pair = _pair(0.0, 0.0, unit_profile)
    line = make_line(pair, [0.0, 0.5, 1.0, 2.0], unit_profile)
    assert line.causal_type == "timelike"
    check = verify_line(line, unit_profile)
    assert check["passed"] and len(check["witnesses"]) == 6 and check["strictly_nested"]
    half = BoundaryPair(pair.P, None)
    hline = make_line(half, [0.0, 1.0, 3.0], unit_profile)
    assert hline.causal_type == "horismotic"
    hcheck = verify_line(hline, unit_profile)
    assert hcheck["passed"] and not hcheck["witnesses"]
    assert chronology_witness(half, half, unit_profile) is None
    with pytest.raises(InvalidInputError):
        make_line(pair, [], unit_profile)


def test_witness_event_is_between(unit_profile):
    a = _pair(0.0, 0.0, unit_profile)
    b = _pair(2.0, 0.0, unit_profile)
    w = chronology_witness(a, b, unit_profile)
    x = w.x
    assert w.t - 0.0 > abs(x) - 1e-12 and 2.0 - w.t > abs(x) - 1e-12


def test_jhat_distinct_and_collapse(unit_profile):
    half = WarpProfile.from_expression("0.5")
    reps = [_pair(w, 0.0, unit_profile).P for w in (0.0, 1.0, 2.0)]
    images = [jhat_op(r, w, half) for r, w in zip(reps, (0.0, 1.0, 2.0))]
    assert pairwise_distinct(images) == []
    assert np.allclose(images[1].values, 2 - np.abs(XS))
    ts = np.linspace(0, 40, 81)
    rays = [
        busemann_eval(CurveSample(ts, ts), unit_profile, EUCLID, PROBES, allow_lightlike=True),
        busemann_eval(CurveSample(ts, -ts), unit_profile, EUCLID, PROBES, allow_lightlike=True),
    ]
    ups = [jhat_op(TerminalSetRep("IP", r), math.inf, half) for r in rays]
    assert all(collapsed(u) for u in ups)
    assert pairwise_distinct(ups) == [(0, 1)]
    with pytest.raises(InvalidInputError):
        jhat_op(ups[0], 1.0, half)


def _fields(profile, weight):
    base = RandersField.euclidean(1)

    def metric(t, x):
        a = np.asarray(profile(np.asarray(t, dtype=float)), dtype=float)
        return ((weight * a * a + (1 - weight)) * np.ones(len(x)))[:, None, None]

    return TimeDependentRandersField(1, metric), base


def test_projection_when_squeezed_metric_is_narrow(logistic_profile):
    ft, f = _fields(logistic_profile, 0.0)
    errs = []
    for n in (501, 1001, 5001):
        s = np.linspace(0, 25, n)
        gamma = CurveSample(s, s - 1 + np.exp(-s))
        proj = canonical_projection(gamma, ft, f, logistic_profile, EUCLID, PROBES)
        errs.append(abs(proj.k_op - math.log(2)))
    # segment sums are second order in the step
    assert errs[0] / errs[1] > 3.5
    assert errs[2] < 1e-6
    assert proj.k_cl == 0.0 and np.array_equal(proj.t_cl, s)
    assert np.allclose(proj.P_cl.values, XS + 1, atol=1e-6)
    assert np.allclose(proj.shared_op.values, XS + 2, atol=1e-6)
    assert np.all(proj.t_cl <= s) and np.all(s <= proj.t_op)


def test_projection_when_squeezed_metric_is_wide(logistic_profile):
    s = np.linspace(0, 25, 5001)
    gamma = CurveSample(s, s - 1 + np.exp(-s))
    ft, f = _fields(logistic_profile, 1.0)
    proj = canonical_projection(gamma, ft, f, logistic_profile, EUCLID, PROBES)
    assert proj.k_op == pytest.approx(0.0, abs=1e-9)
    assert proj.k_cl == pytest.approx(1.0, abs=1e-5)
    assert proj.final_gap < 1e-6


def test_projection_errors(logistic_profile, unit_profile):
    s = np.linspace(0, 5, 11)
    ft, f = _fields(logistic_profile, 0.0)
    with pytest.raises(NotTimelikeError):
        canonical_projection(CurveSample(s, 2 * s), ft, f, logistic_profile, EUCLID, PROBES)
    with pytest.raises(InvalidInputError):
        canonical_projection(CurveSample(s[::-1], s, orientation="past"), ft, f, logistic_profile, EUCLID, PROBES)
    half = WarpProfile.from_expression("0.5")
    fth, fh = _fields(half, 0.5)
    with pytest.raises(ProjectionUndefinedError):
        canonical_projection(CurveSample(s, 0.5 * s), fth, fh, half, EUCLID, PROBES)
    finite = canonical_projection(CurveSample(s, 0.5 * s, omega=5.0), ft, f, logistic_profile, EUCLID, PROBES)
    assert finite.case == "finite"
    assert np.allclose(finite.P_cl.values, 5 - np.abs(XS - 2.5))


def test_strains(logistic_profile, unit_profile):
    assert strain_classes([]) == []
    a = as_g_set(_pair(0.0, 0.0, unit_profile).P, logistic_profile)
    b = as_g_set(_pair(1.0, 0.0, unit_profile).P, logistic_profile)
    a2 = as_g_set(_pair(0.0, 0.0, unit_profile).P, logistic_profile)
    assert st_related(a, a2) and not st_related(a, b)
    classes = strain_classes([a, b, a2])
    assert [len(c.members) for c in classes] == [2, 1]
    assert classes[0].spread() == 0.0
    assert strain_map_injective(classes)


def test_total_strain_and_column(logistic_profile, unit_profile):
    pair = _pair(0.0, 0.0, unit_profile)
    lifted = jbar(pair, logistic_profile)
    assert lifted.P.tag == "g" and total_strain_member(lifted, pair)
    other = _pair(1.0, 0.0, unit_profile)
    assert not total_strain_member(jbar(other, logistic_profile), pair)
    assert not total_strain_member(lifted, BoundaryPair(pair.P, None))
    line = make_line(pair, [0.0, 1.0, 2.0], unit_profile)
    col = classify_column(line, [jbar(p, logistic_profile) for p in line.samples], logistic_profile)
    assert col.causal_type == "timelike" and len(col.witnesses) == 3
    hline = make_line(BoundaryPair(pair.P, None), [0.0, 1.0], unit_profile)
    hcol = classify_column(hline, [jbar(p, logistic_profile) for p in hline.samples], logistic_profile)
    assert hcol.causal_type == "horismotic"
    with pytest.raises(InvalidInputError):
        classify_column(line, [lifted], logistic_profile)


def test_report_json(unit_profile, logistic_profile):
    pair = _pair(0.0, 0.0, unit_profile)
    line = make_line(pair, [0.0, 1.0], unit_profile)
    classes = strain_classes([as_g_set(pair.P, logistic_profile)])
    payload = json.loads(boundary_report([pair], [line], classes, {"e4": True}, unit_profile))
    assert payload["lines"][0]["passed"]
    assert payload["strain_classes"][0]["members"] == 1
    assert payload["condition_flags"] == {"e4": True}
