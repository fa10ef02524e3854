import json

import numpy as np
import pytest

from cboundary.completion import (
    DeclaredSequence,
    check_dq_generalized,
    classes_to_json,
    classify_boundary,
    dq,
    dq_estimate,
    dq_to_target,
    related,
)
from cboundary.distance import DistanceTable
from cboundary.errors import InvalidInputError, NotCauchyError
from cboundary.geometry import DirectedMesh, RandersField, build_weighted_graph


def _table(points, field):
    mesh = DirectedMesh.line(points)
    return mesh, DistanceTable.from_graph(build_weighted_graph(mesh, field))


def _seq(mesh, xs, label):
    return DeclaredSequence(tuple(mesh.nearest_vertex([x]) for x in xs), label)


N = np.arange(1, 21)


@pytest.fixture(scope="module")
def unit_interval():
    xs = np.concatenate([2.0**-N, 1.5 * 2.0**-N, 1 - 2.0**-N, [0.3]])
    mesh, table = _table(xs, RandersField.euclidean(1))
    return mesh, table


def test_equivalent_sequences_share_a_class(unit_interval):
    mesh, table = unit_interval
    a = _seq(mesh, 2.0**-N, "a")
    b = _seq(mesh, 1.5 * 2.0**-N, "b")
    assert related(a, b, table)
    classes = classify_boundary([a, b], table)
    assert len(classes) == 1 and len(classes[0].members) == 2
    assert classes[0].symmetrized


def test_endpoints_at_unit_distance(unit_interval):
    mesh, table = unit_interval
    left = _seq(mesh, 2.0**-N, "left")
    right = _seq(mesh, 1 - 2.0**-N, "right")
    est = dq_estimate(left, right, table)
    assert est.value == pytest.approx(1.0, abs=1e-5)
    assert est.variation < 1e-4
    classes = classify_boundary([left, right], table)
    assert len(classes) == 2
    assert check_dq_generalized(classes, table, [left, right]).passed


def test_constant_sequence_reduces_to_distance(unit_interval):
    mesh, table = unit_interval
    i, j = mesh.nearest_vertex([0.3]), mesh.nearest_vertex([0.5])
    a, b = DeclaredSequence.constant(i), DeclaredSequence.constant(j)
    assert dq(a, b, table) == table.d(i, j)
    assert dq_to_target(i, b, table) == table.d(i, j)


def test_non_cauchy_rejected(unit_interval):
    mesh, table = unit_interval
    jumpy = DeclaredSequence(tuple(mesh.nearest_vertex([x]) for x in [0.5, 0.25] * 8 + [0.5, 0.25]), "jumpy")
    with pytest.raises(NotCauchyError):
        dq(jumpy, jumpy, table)
    assert classify_boundary([jumpy], table) == []


def test_short_sequence_rejected():
    with pytest.raises(InvalidInputError):
        DeclaredSequence((1, 2, 3))


@pytest.fixture(scope="module")
def drift():
    # moving left is almost free near 0, moving right costs about 2/x^2
    xs = np.concatenate([2.0**-N, 1.5 * 2.0**-N])
    return _table(xs, RandersField.from_expressions("1", ["1/x^2"], 1))


def test_forward_only_sequence(drift):
    mesh, table = drift
    s = _seq(mesh, 2.0**-N, "down")
    assert s.is_forward_cauchy(table)
    assert not s.is_backward_cauchy(table)
    (cls,) = classify_boundary([s], table)
    assert cls.flags == {"forward": True, "backward": False, "symmetrized": False}


def test_one_sided_zero_breaks_separation(drift):
    mesh, table = drift
    a = _seq(mesh, 1.5 * 2.0**-N, "upper")
    b = _seq(mesh, 2.0**-N, "lower")
    assert dq(a, b, table) < 1e-6
    assert dq(b, a, table) > 1.0
    classes = classify_boundary([a, b], table)
    assert len(classes) == 2
    rep = check_dq_generalized(classes, table)
    assert not rep.passed and rep.separation


def test_classes_json(unit_interval):
    mesh, table = unit_interval
    left = _seq(mesh, 2.0**-N, "left")
    right = _seq(mesh, 1 - 2.0**-N, "right")
    payload = json.loads(classes_to_json(classify_boundary([left, right], table), table))
    assert [c["label"] for c in payload] == ["left", "right"]
    assert payload[0]["dq_matrix"][0] == 0.0
    assert payload[0]["flags"]["symmetrized"]
