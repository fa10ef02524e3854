"""Scenario files: YAML documents describing a mesh, a Randers field, a warp profile and jobs.

Example::

    name: strip
    mesh:
      grid: {lower: [0], upper: [10], shape: [11]}
    metric:
      h: "1"
      omega: ["0.2"]
    warp:
      expression: "1/(exp(-t)+1)"
    boundary_sequences:
      - label: left-end
        points: [[0.5], [0.25], ...]
    probes: all
    jobs:
      - name: dist
        kind: distance

Parsing returns a :class:`Scenario` in normalized form; ``dump_scenario``
writes that form back and re-parsing it yields an equal scenario.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from typing import Any

import yaml

from .completion import DeclaredSequence
from .errors import CBoundaryError, ExpressionError, InvalidInputError
from .expr import Expression
from .geometry import DirectedMesh, RandersField, TimeDependentRandersField, coordinate_names
from .warp import WarpProfile

log = logging.getLogger(__name__)

JOB_KINDS = ("distance", "chronology-batch", "busemann", "boundary", "conditions", "paper-scenario")
TOP_KEYS = {"name", "mesh", "metric", "warp", "boundary_sequences", "probes", "jobs"}


class ScenarioError(InvalidInputError):
    """Schema violations, each tagged with the field path it refers to."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{where}: {msg}" for where, msg in errors))


@dataclass
class Job:
    name: str
    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, **copy.deepcopy(self.params)}


@dataclass
class Scenario:
    name: str
    mesh: dict
    metric: dict
    warp: dict
    boundary_sequences: list[dict]
    probes: Any
    jobs: list[Job]
    source: str | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mesh": copy.deepcopy(self.mesh),
            "metric": copy.deepcopy(self.metric),
            "warp": copy.deepcopy(self.warp),
            "boundary_sequences": copy.deepcopy(self.boundary_sequences),
            "probes": copy.deepcopy(self.probes),
            "jobs": [j.to_dict() for j in self.jobs],
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, Scenario) and self.to_dict() == other.to_dict()

    # -- builders ---------------------------------------------------------

    def build_mesh(self) -> DirectedMesh:
        m = self.mesh
        if "grid" in m:
            g = m["grid"]
            return DirectedMesh.grid(g["lower"], g["upper"], g["shape"], g.get("diagonals", False))
        if "points" in m:
            return DirectedMesh.from_points(m["points"])
        e = m["explicit"]
        return DirectedMesh.explicit(e["vertices"], e["edges"], e.get("symmetrize", True))

    @property
    def dimension(self) -> int:
        m = self.mesh
        if "grid" in m:
            return len(m["grid"]["lower"])
        pts = m["points"] if "points" in m else m["explicit"]["vertices"]
        return len(pts[0])

    def build_field(self) -> RandersField:
        return RandersField.from_expressions(self.metric["h"], self.metric.get("omega"), self.dimension)

    def build_time_field(self) -> TimeDependentRandersField | None:
        td = self.metric.get("time_dependent")
        if td is None:
            return None
        fields = [RandersField.from_expressions(k["h"], k.get("omega"), self.dimension) for k in td["knots"]]
        return TimeDependentRandersField.from_knots([k["t"] for k in td["knots"]], fields, "scenario")

    def build_profile(self) -> WarpProfile:
        w = self.warp
        if "samples" in w:
            return WarpProfile.from_samples(w["samples"]["t"], w["samples"]["alpha"])
        return WarpProfile.from_expression(w["expression"])

    def build_sequences(self, mesh: DirectedMesh) -> list[DeclaredSequence]:
        out = []
        for s in self.boundary_sequences:
            pts = [p if isinstance(p, int) else mesh.nearest_vertex(p) for p in s["points"]]
            out.append(DeclaredSequence(tuple(pts), s["label"]))
        return out

    def build_probes(self, mesh: DirectedMesh) -> list[int]:
        if self.probes == "all":
            return list(range(mesh.n_vertices))
        return [p if isinstance(p, int) else mesh.nearest_vertex(p) for p in self.probes]

    def job(self, name: str) -> Job:
        for j in self.jobs:
            if j.name == name:
                return j
        raise ScenarioError([("jobs", f"no job named {name!r}")])


# ---------------------------------------------------------------------------
# parsing


def _num_list(v, where, errors, length=None):
    if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        errors.append((where, "expected a list of numbers"))
        return None
    if length is not None and len(v) != length:
        errors.append((where, f"expected {length} entries, got {len(v)}"))
    return [float(x) for x in v]


def _coord(p, where, errors):
    if isinstance(p, (int, float)) and not isinstance(p, bool):
        return [float(p)]
    return _num_list(p, where, errors)


def _point(p, where, errors):
    """Integers name vertices; lists (or bare floats in 1-D) are coordinates."""
    if isinstance(p, bool):
        errors.append((where, "expected a vertex index or a coordinate list"))
        return None
    if isinstance(p, int):
        return p
    if isinstance(p, float):
        return [p]
    return _num_list(p, where, errors)


def _norm_mesh(m, errors) -> dict:
    if not isinstance(m, dict):
        errors.append(("mesh", "section missing or not a mapping"))
        return {}
    kinds = [k for k in ("grid", "explicit", "points") if k in m]
    if len(kinds) != 1:
        errors.append(("mesh", "exactly one of grid, explicit, points is required"))
        return {}
    kind = kinds[0]
    body = m[kind]
    if kind == "grid":
        if not isinstance(body, dict):
            errors.append(("mesh.grid", "expected a mapping"))
            return {}
        lower = _num_list(body.get("lower"), "mesh.grid.lower", errors)
        upper = _num_list(body.get("upper"), "mesh.grid.upper", errors)
        shape = body.get("shape")
        if not isinstance(shape, list) or not all(isinstance(s, int) and s >= 1 for s in shape):
            errors.append(("mesh.grid.shape", "expected a list of positive integers"))
            shape = None
        if lower and upper and shape and not (len(lower) == len(upper) == len(shape)):
            errors.append(("mesh.grid", "lower, upper and shape must have the same length"))
        return {"grid": {"lower": lower, "upper": upper, "shape": shape, "diagonals": bool(body.get("diagonals", False))}}
    if kind == "points":
        pts = [_coord(p, f"mesh.points[{i}]", errors) for i, p in enumerate(body or [])]
        if len(pts) < 2:
            errors.append(("mesh.points", "need at least two points"))
        return {"points": pts}
    if not isinstance(body, dict):
        errors.append(("mesh.explicit", "expected a mapping"))
        return {}
    verts = [_coord(p, f"mesh.explicit.vertices[{i}]", errors) for i, p in enumerate(body.get("vertices") or [])]
    edges = body.get("edges") or []
    norm_edges = []
    for i, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) and 0 <= x < len(verts) for x in e)):
            errors.append((f"mesh.explicit.edges[{i}]", "expected a pair of vertex indices"))
        else:
            norm_edges.append([int(e[0]), int(e[1])])
    return {"explicit": {"vertices": verts, "edges": norm_edges, "symmetrize": bool(body.get("symmetrize", True))}}


def _expr_h(h, where, errors):
    if isinstance(h, (int, float)) and not isinstance(h, bool):
        return str(h)
    if isinstance(h, str):
        return h
    if isinstance(h, list) and all(isinstance(r, list) for r in h):
        return [[str(x) for x in r] for r in h]
    errors.append((where, "expected an expression or a square matrix of expressions"))
    return None


def _expr_omega(o, where, errors):
    if o is None:
        return None
    if isinstance(o, list):
        return [str(x) for x in o]
    errors.append((where, "expected a list of expressions"))
    return None


def _norm_metric(m, errors) -> dict:
    if m is None:
        return {"h": "1", "omega": None}
    if not isinstance(m, dict):
        errors.append(("metric", "expected a mapping"))
        return {}
    out = {"h": _expr_h(m.get("h", "1"), "metric.h", errors), "omega": _expr_omega(m.get("omega"), "metric.omega", errors)}
    td = m.get("time_dependent")
    if td is not None:
        knots = td.get("knots") if isinstance(td, dict) else None
        if not isinstance(knots, list) or not knots:
            errors.append(("metric.time_dependent.knots", "expected a nonempty list"))
        else:
            nk = []
            for i, k in enumerate(knots):
                where = f"metric.time_dependent.knots[{i}]"
                if not isinstance(k, dict) or not isinstance(k.get("t"), (int, float)):
                    errors.append((where, "each knot needs a numeric t"))
                    continue
                nk.append({"t": float(k["t"]), "h": _expr_h(k.get("h", "1"), where + ".h", errors),
                           "omega": _expr_omega(k.get("omega"), where + ".omega", errors)})
            out["time_dependent"] = {"knots": nk}
    return out


def _norm_warp(w, errors, warnings) -> dict:
    if w is None:
        warnings.append("no warp section: using alpha = 1")
        return {"expression": "1"}
    if not isinstance(w, dict) or ("expression" in w) == ("samples" in w):
        errors.append(("warp", "exactly one of expression, samples is required"))
        return {}
    if "expression" in w:
        return {"expression": str(w["expression"])}
    s = w["samples"]
    if not isinstance(s, dict):
        errors.append(("warp.samples", "expected a mapping with t and alpha"))
        return {}
    return {"samples": {"t": _num_list(s.get("t"), "warp.samples.t", errors),
                        "alpha": _num_list(s.get("alpha"), "warp.samples.alpha", errors)}}


def _norm_sequences(seqs, errors) -> list[dict]:
    if seqs is None:
        return []
    if not isinstance(seqs, list):
        errors.append(("boundary_sequences", "expected a list"))
        return []
    out = []
    for i, s in enumerate(seqs):
        where = f"boundary_sequences[{i}]"
        if not isinstance(s, dict) or not isinstance(s.get("points"), list):
            errors.append((where, "expected a mapping with a points list"))
            continue
        pts = [_point(p, f"{where}.points[{j}]", errors) for j, p in enumerate(s["points"])]
        if len(pts) < 8:
            errors.append((where + ".points", "need at least 8 points"))
        out.append({"label": str(s.get("label", f"seq{i}")), "points": pts})
    labels = [s["label"] for s in out]
    if len(set(labels)) != len(labels):
        errors.append(("boundary_sequences", "labels must be unique"))
    return out


def _norm_probes(p, errors):
    if p is None or p == "all":
        return "all"
    if not isinstance(p, list) or not p:
        errors.append(("probes", "expected 'all' or a nonempty list"))
        return "all"
    return [_point(x, f"probes[{i}]", errors) for i, x in enumerate(p)]


def _norm_jobs(jobs, errors, seq_labels) -> list[Job]:
    if jobs is None:
        return []
    if not isinstance(jobs, list):
        errors.append(("jobs", "expected a list"))
        return []
    out = []
    for i, j in enumerate(jobs):
        where = f"jobs[{i}]"
        if not isinstance(j, dict):
            errors.append((where, "expected a mapping"))
            continue
        kind = j.get("kind")
        if kind not in JOB_KINDS:
            errors.append((where + ".kind", f"unknown job kind {kind!r}; expected one of {', '.join(JOB_KINDS)}"))
            continue
        params = {k: copy.deepcopy(v) for k, v in j.items() if k not in ("name", "kind")}
        for ref in params.get("classes", []) or []:
            if ref not in seq_labels:
                errors.append((where + ".classes", f"unknown boundary sequence {ref!r}"))
        if kind == "paper-scenario" and not isinstance(params.get("scenario"), str):
            errors.append((where + ".scenario", "paper-scenario jobs need a scenario name"))
        if kind == "chronology-batch" and not ("pairs" in params or "csv" in params):
            errors.append((where, "chronology-batch jobs need pairs or csv"))
        if kind == "busemann" and not isinstance(params.get("curve"), dict):
            errors.append((where + ".curve", "busemann jobs need a curve with times and points"))
        out.append(Job(str(j.get("name", f"{kind}-{i}")), kind, params))
    names = [j.name for j in out]
    if len(set(names)) != len(names):
        errors.append(("jobs", "job names must be unique"))
    return out


def _metric_expressions(m: dict, where: str) -> list[tuple[str, str]]:
    out = []
    h = m.get("h")
    if isinstance(h, str):
        out.append((f"{where}.h", h))
    elif isinstance(h, list):
        out += [(f"{where}.h[{i}][{j}]", c) for i, row in enumerate(h) for j, c in enumerate(row)]
    out += [(f"{where}.omega[{i}]", c) for i, c in enumerate(m.get("omega") or [])]
    return out


def _check_buildable(sc: Scenario, errors):
    """Parse every expression and build the geometry once so errors surface with their field."""
    try:
        mesh = sc.build_mesh()
    except CBoundaryError as exc:
        errors.append(("mesh", str(exc)))
        return
    names = coordinate_names(sc.dimension)
    exprs = _metric_expressions(sc.metric, "metric")
    for k, knot in enumerate((sc.metric.get("time_dependent") or {}).get("knots", [])):
        exprs += _metric_expressions(knot, f"metric.time_dependent.knots[{k}]")
    for where, text in exprs:
        try:
            Expression(text, names)
        except ExpressionError as exc:
            errors.append((where, str(exc)))
    if "expression" in sc.warp:
        try:
            Expression(sc.warp["expression"], ("t",))
        except ExpressionError as exc:
            errors.append(("warp.expression", str(exc)))
    if errors:
        return
    for where, build in (("metric", sc.build_field), ("metric.time_dependent", sc.build_time_field),
                         ("warp", sc.build_profile)):
        try:
            build()
        except CBoundaryError as exc:
            errors.append((where, str(exc)))
    for where, build in (("boundary_sequences", sc.build_sequences), ("probes", sc.build_probes)):
        try:
            build(mesh)
        except (CBoundaryError, KeyError) as exc:
            errors.append((where, str(exc)))


def scenario_from_dict(doc: Any, source: str | None = None) -> Scenario:
    errors: list[tuple[str, str]] = []
    warnings: list[str] = []
    if not isinstance(doc, dict):
        raise ScenarioError([("<root>", "document must be a mapping")])
    for k in doc:
        if k not in TOP_KEYS:
            errors.append((str(k), "unknown section"))
    seqs = _norm_sequences(doc.get("boundary_sequences"), errors)
    sc = Scenario(
        name=str(doc.get("name", "scenario")),
        mesh=_norm_mesh(doc.get("mesh"), errors),
        metric=_norm_metric(doc.get("metric"), errors),
        warp=_norm_warp(doc.get("warp"), errors, warnings),
        boundary_sequences=seqs,
        probes=_norm_probes(doc.get("probes"), errors),
        jobs=_norm_jobs(doc.get("jobs"), errors, {s["label"] for s in seqs}),
        source=source,
        warnings=warnings,
    )
    if not errors:
        _check_buildable(sc, errors)
    if errors:
        raise ScenarioError(errors)
    for w in warnings:
        log.warning(w)
    return sc


def parse_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError([("<file>", str(exc))]) from exc
    return parse_scenario_text(text, path)


def parse_scenario_text(text: str, source: str | None = None) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "<yaml>"
        raise ScenarioError([(where, f"not valid YAML: {getattr(exc, 'problem', exc)}")]) from exc
    return scenario_from_dict(doc, source)


def dump_scenario(sc: Scenario) -> str:
    return yaml.safe_dump(sc.to_dict(), sort_keys=False, default_flow_style=None)
