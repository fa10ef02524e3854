"""Built-in reproductions used as regression fixtures.

Each ``run_*`` function is deterministic and returns a :class:`ScenarioReport`
whose checklist is evaluated in code; the report passes iff every item does.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boundary import (BoundaryPair, CanonicalProjection, TerminalSetRep, canonical_projection, classify_column,
                       jbar, jhat_op, make_line, pair_from_symmetrized_point, pairwise_distinct, strain_classes,
                       verify_line)
from .busemann import (BusemannSample, ProbeSet, busemann_eval, closed_form_point, ip_inclusion, limit_operator,
                       translate_cl_op)
from .chronology import CurveSample, Event, classify_curve, lightcone_ode_1d, sandwich_check
from .completion import DeclaredSequence, check_dq_generalized, classify_boundary
from .distance import DistanceTable, UniformLineDistance, check_generalized_axioms
from .geometry import DirectedMesh, RandersField, TimeDependentRandersField, build_weighted_graph
from .warp import WarpProfile, check_conditions, k_omega, solve_sK

LOGISTIC_ALPHA = "1/(exp(-t)+1)"


@dataclass
class Check:
    name: str
    passed: bool
    detail: object = None


@dataclass
class ScenarioReport:
    name: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    tables: dict[str, list[dict]] = field(default_factory=dict)

    def check(self, name: str, passed, detail=None) -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "data": self.data,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, default=_json_default, allow_nan=True)

    def write(self, outdir: str) -> list[str]:
        os.makedirs(outdir, exist_ok=True)
        paths = [os.path.join(outdir, "report.json")]
        with open(paths[0], "w") as fh:
            fh.write(self.to_json())
        for key, rows in self.tables.items():
            path = os.path.join(outdir, f"{key}.csv")
            with open(path, "w", newline="") as fh:
                fh.write(rows_to_csv(rows))
            paths.append(path)
        return paths


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# ---------------------------------------------------------------------------
# half-line with its endpoint removed


def halfplane_mesh(spacing: float = 0.25, depth: float = 32.0, levels: int = 40) -> DirectedMesh:
    uniform = -np.arange(spacing, depth + spacing / 2, spacing)
    dyadic = -(2.0 ** -np.arange(1, levels + 1))
    offset = -0.75 * (2.0 ** -np.arange(1, levels + 1))
    return DirectedMesh.line(np.concatenate([uniform, dyadic, offset]))


def _speed_limited_curve(mesh: DirectedMesh, start: float, stop: float, spacing: float) -> CurveSample:
    """Curve ``c(t) = start - (t + exp(-t) - 1)`` sampled where it meets mesh vertices."""
    xs = np.arange(start, stop - spacing / 2, -spacing)
    targets = 1.0 + (start - xs)  # t + exp(-t) at each vertex
    ts = [0.0]
    for y in targets[1:]:
        t = y - 1.0  # Newton from the left on a convex increasing function
        for _ in range(60):
            nt = t - (t + math.exp(-t) - y) / (1.0 - math.exp(-t))
            if nt == t:
                break
            t = nt
        ts.append(t)
    verts = [mesh.nearest_vertex([x]) for x in xs]
    return CurveSample.on_mesh(mesh, np.array(ts), verts)


def run_halfplane(spacing: float = 0.25, depth: float = 32.0, levels: int = 40,
                  K_grid: Sequence[float] = (-1.0, -0.5, 0.0, 0.5, 1.0)) -> ScenarioReport:
    """Negative half-line, unit warp: a single boundary point at zero carries a timelike line."""
    rep = ScenarioReport("halfplane")
    mesh = halfplane_mesh(spacing, depth, levels)
    field_ = RandersField.euclidean(1)
    plus = DistanceTable.from_graph(build_weighted_graph(mesh, field_, +1))
    minus = DistanceTable.from_graph(build_weighted_graph(mesh, field_, -1))
    unit = WarpProfile.unit()
    D = plus.matrix()
    rep.check("static symmetry: forward equals reverse-metric distance exactly", np.array_equal(D, minus.matrix()),
              {"max_abs": _max_abs(D, minus.matrix())})
    rep.check("forward table is symmetric", _max_abs(D, D.T) <= 1e-12, {"max_abs": _max_abs(D, D.T)})

    dyadic = [mesh.nearest_vertex([-(2.0 ** -n)]) for n in range(1, levels + 1)]
    offset = [mesh.nearest_vertex([-0.75 * 2.0 ** -n]) for n in range(1, levels + 1)]
    far = [mesh.nearest_vertex([-float(k)]) for k in range(1, 17)]
    seqs = [DeclaredSequence(tuple(dyadic), "dyadic"), DeclaredSequence(tuple(offset), "three-quarter"),
            DeclaredSequence(tuple(far), "to-minus-infinity")]
    classes = classify_boundary(seqs, plus)
    rep.check("exactly one boundary class", len(classes) == 1, {"count": len(classes)})
    cls = classes[0]
    rep.check("the class holds both sequences approaching zero", len(cls.members) == 2,
              [m.label for m in cls.members])
    rep.check("class flags: forward, backward, symmetrized", cls.symmetrized, cls.flags)
    dqrep = check_dq_generalized(classes, plus, seqs[:2])
    rep.check("extended distance is generalized on the class set", dqrep.passed, dqrep.as_dict())

    probe_ids = [i for i in range(mesh.n_vertices) if mesh.coords[i, 0] >= -8.0]
    probes = ProbeSet(tuple(probe_ids))
    px = mesh.coords[probe_ids, 0]
    pairs, lines = [], []
    for omega in (0.0, 1.0):
        pair = pair_from_symmetrized_point(omega, cls, unit, plus, probes, metric_minus=minus)
        err_p = _max_abs(pair.P.values, omega - np.abs(px))
        err_f = _max_abs(pair.F.values, omega + np.abs(px))
        rep.check(f"closed forms at the boundary point, omega={omega}", max(err_p, err_f) < 1e-9,
                  {"P_err": err_p, "F_err": err_f})
        line = make_line(pair, K_grid, unit)
        vl = verify_line(line, unit)
        rep.check(f"line over the boundary point (omega={omega}) is timelike with witnesses",
                  line.causal_type == "timelike" and vl["passed"], {"witnesses": len(vl["witnesses"])})
        pairs.append(pair)
        lines.append(line)

    interior = mesh.nearest_vertex([-1.0])
    ipair = pair_from_symmetrized_point(0.0, interior, unit, plus, probes, metric_minus=minus)
    iline = make_line(ipair, K_grid, unit)
    rep.check("interior point pair gives a timelike line", iline.causal_type == "timelike" and verify_line(iline, unit)["passed"])
    rep.check("interior pair is a past/future of a point (not terminal)", not ipair.P.is_terminal)

    bounded = CurveSample.on_mesh(mesh, np.arange(0.0, 65.0), [interior] * 65)
    b_bounded = busemann_eval(bounded, unit, plus, probes)
    rep.check("constant-position curve gives the infinite function", not b_bounded.finite, b_bounded.diagnostic)

    escaping = _speed_limited_curve(mesh, -1.0, -30.5, spacing)
    b_esc = busemann_eval(escaping, unit, plus, probes)
    err = _max_abs(b_esc.values, -px)
    rep.check("escaping curve has the finite function -x", b_esc.finite and err < 1e-6,
              {"max_err": err, "tail_increment": b_esc.tail_increment, "converged": b_esc.converged})
    half_pair = BoundaryPair(TerminalSetRep("IP", b_esc), None, False)
    hline = make_line(half_pair, K_grid, unit)
    hv = verify_line(hline, unit)
    rep.check("one-sided line is horismotic: strictly nested, no witness",
              hline.causal_type == "horismotic" and hv["passed"], hv)

    for line in lines + [hline]:
        lifted = [jbar(p, unit) for p in line.samples]
        col = classify_column(line, lifted, unit)
        rep.check(f"column type matches line type ({line.causal_type})", col.causal_type == line.causal_type,
                  {"column": col.causal_type})

    rep.data = {"vertices": mesh.n_vertices, "probes": len(probes), "classes": 1,
                "pairs": [p.describe()["origin_point"] for p in pairs]}
    rep.tables["escaping_curve"] = [{"t": float(t), "x": float(x)} for t, x in zip(escaping.times, escaping.positions[:, 0])]
    return rep


# ---------------------------------------------------------------------------
# static sanity on a punctured plane


def punctured_disc_mesh(rings: int = 30, spokes: int = 8) -> tuple[DirectedMesh, list[list[int]]]:
    """Rings of radius ``2**-j`` around a removed centre, joined along spokes and diagonals."""
    coords = []
    ids = np.arange(rings * spokes).reshape(rings, spokes)
    for j in range(rings):
        r = 2.0 ** -j
        for k in range(spokes):
            th = 2 * math.pi * k / spokes
            coords.append((r * math.cos(th), r * math.sin(th)))
    edges = []
    for j in range(rings):
        for k in range(spokes):
            a = ids[j, k]
            edges.append((a, ids[j, (k + 1) % spokes]))
            if j + 1 < rings:
                edges.append((a, ids[j + 1, k]))
                edges.append((a, ids[j + 1, (k + 1) % spokes]))
    e = np.array(edges)
    mesh = DirectedMesh(np.array(coords), np.vstack([e, e[:, ::-1]]))
    return mesh, [list(ids[:, k]) for k in range(spokes)]


def run_static_sanity() -> ScenarioReport:
    """No one-form: forward, reverse and symmetrized distances coincide; pairs exist at every class."""
    rep = ScenarioReport("static-sanity")
    mesh, spokes = punctured_disc_mesh()
    field_ = RandersField.conformal(2, lambda x: 1.2 + 0.5 * np.sin(3 * x[:, 0]) * np.cos(2 * x[:, 1]), label="static")
    gp = build_weighted_graph(mesh, field_, +1)
    gm = build_weighted_graph(mesh, field_, -1)
    plus = DistanceTable.from_graph(gp)
    minus = DistanceTable.from_graph(gm)
    D, Dm = plus.matrix(), minus.matrix()
    rep.check("max |d+ - d-| is exactly zero", float(np.max(np.abs(D - Dm))) == 0.0,
              {"max_abs": float(np.max(np.abs(D - Dm)))})
    sym = 0.5 * (D + D.T)
    rep.check("symmetrized equals forward (rounding level)", _max_abs(sym, D) <= 1e-12, {"max_abs": _max_abs(sym, D)})
    ax = check_generalized_axioms(plus)
    rep.check("generalized-distance axioms", ax.passed, ax.summary())

    seqs = [DeclaredSequence(tuple(s), f"spoke-{k}") for k, s in enumerate(spokes)]
    classes = classify_boundary(seqs, plus)
    rep.check("all spokes meet at one boundary class", len(classes) == 1 and len(classes[0].members) == len(seqs),
              {"classes": len(classes)})
    rep.check("the class is symmetrized", all(c.symmetrized for c in classes))
    dqrep = check_dq_generalized(classes, plus, seqs)
    rep.check("extended distance is generalized", dqrep.passed, dqrep.as_dict())

    unit = WarpProfile.unit()
    probes = ProbeSet(tuple(range(0, mesh.n_vertices, 3)))
    for c in classes:
        pair = pair_from_symmetrized_point(0.0, c, unit, plus, probes, metric_minus=minus)
        rep.check(f"pair exists over {c.label}", pair.s_related)
        rep.check("pair is symmetric (P + F = 0 at omega 0)", bool(np.all(pair.P.values + pair.F.values == 0.0)))
        line = make_line(pair, (-0.5, 0.0, 0.5), unit)
        rep.check("its line is timelike", line.causal_type == "timelike" and verify_line(line, unit)["passed"])
    rep.data = {"vertices": mesh.n_vertices, "edges": len(mesh.edges)}
    return rep


# ---------------------------------------------------------------------------
# warped example with a squeezed metric in the wedge


class _HermiteCurve:
    """Cubic Hermite interpolant of ``t(x)`` from samples and slopes (scalar evaluation)."""

    def __init__(self, xs: np.ndarray, ts: np.ndarray, slopes: np.ndarray):
        order = np.argsort(xs)
        self.x = xs[order].tolist()
        self.t = ts[order].tolist()
        self.m = slopes[order].tolist()

    def __call__(self, x: float) -> float:
        xs = self.x
        i = min(max(bisect.bisect_right(xs, x) - 1, 0), len(xs) - 2)
        h = xs[i + 1] - xs[i]
        u = (x - xs[i]) / h
        u2, u3 = u * u, u * u * u
        return ((2 * u3 - 3 * u2 + 1) * self.t[i] + (u3 - 2 * u2 + u) * h * self.m[i]
                + (-2 * u3 + 3 * u2) * self.t[i + 1] + (u3 - u2) * h * self.m[i + 1])


@dataclass
class WedgeGeometry:
    alpha: WarpProfile
    K_inf: float
    rho: _HermiteCurve
    rho_curve: CurveSample
    h: Callable[[float, float], float]
    field_t: TimeDependentRandersField


def wedge_geometry(step: float = 1e-3, x_min: float = -2.0, x_max: float = 20.0) -> WedgeGeometry:
    """Profile, the wide-cone lightlike curve ``rho`` and the blended metric ``h_t``.

    Above ``rho`` the metric is the wide-cone one (``h = alpha(t)^2``), below
    the diagonal it is the narrow-cone one (``h = 1``); in between ``h``
    interpolates linearly in ``t``.
    """
    alpha = WarpProfile.from_expression(LOGISTIC_ALPHA)
    K_inf = k_omega(alpha, math.inf)
    # rho is the boundary of {T(t) < x + K_inf}; start at its right end and run the ODE left
    t_end = solve_sK(alpha, 0.0, x_max + K_inf)
    op_h = lambda t, x: float(alpha(t)) ** 2  # noqa: E731
    rho_c = lightcone_ode_1d(op_h, Event(t_end, x_max), "left-past", x_min, step)
    xs, ts = rho_c.positions[:, 0][::-1], rho_c.times[::-1]
    slopes = np.asarray(alpha(ts), dtype=float)
    rho = _HermiteCurve(xs, ts, slopes)
    a = alpha.alpha

    def h(t: float, x: float) -> float:
        top = rho(x)
        if t >= top:
            v = a(t)
            return v * v
        if t <= x:
            return 1.0
        lam = (t - x) / (top - x)
        v = a(t)
        return (1.0 - lam) + lam * v * v

    def metric(t, x):
        vals = np.array([h(float(tt), float(xx)) for tt, xx in zip(np.atleast_1d(t), x[:, 0])])
        return vals[:, None, None]

    field_t = TimeDependentRandersField(1, metric, None, "wedge-blend")
    curve = CurveSample(ts, xs)
    return WedgeGeometry(alpha, K_inf, rho, curve, h, field_t)


def wedge_curve(geo: WedgeGeometry, k: float, step: float, x_min: float, x_max: float) -> CurveSample:
    """Lightlike curve of the blended metric through ``(k, 0)``, as ``t(x)`` over ``[x_min, x_max]``."""
    right = lightcone_ode_1d(geo.h, Event(k, 0.0), "right-future", x_max, step)
    left = lightcone_ode_1d(geo.h, Event(k, 0.0), "left-past", x_min, step)
    xs = np.concatenate([left.positions[:, 0][::-1], right.positions[1:, 0]])
    ts = np.concatenate([left.times[::-1], right.times[1:]])
    return CurveSample(ts, xs, truncated=left.truncated or right.truncated)


def _threshold_rep(probes: ProbeSet, values, label: str, projection=None) -> TerminalSetRep:
    sample = BusemannSample(probes, np.asarray(values, dtype=float), +1, "g", {"kind": "curve", "label": label})
    return TerminalSetRep("IP", sample, True, projection, label)


def run_example_strain(k_values: Sequence[float] | None = None, step: float = 1e-3, x_min: float = -2.0,
                       x_max: float = 20.0, probe_max: float = 5.0, probe_step: float = 0.25,
                       sequence_len: int = 16) -> ScenarioReport:
    """Several lightlike curves in the wedge share one wide-cone past: one strain, many members.

    ``k_values`` are starting heights at ``x = 0``; by default ``(0.2, 0.4, 0.6)``
    times the height of ``rho`` there.
    """
    rep = ScenarioReport("example-strain")
    geo = wedge_geometry(step, x_min, x_max)
    alpha = geo.alpha
    rep.check("warp constant at infinity is 1", abs(geo.K_inf - 1.0) < 1e-6, {"K_inf": geo.K_inf})
    flags = check_conditions(alpha)
    rep.check("integral conditions: both travel times infinite, forward warp constant finite, backward infinite",
              flags.intcond_future and flags.intcond_past and flags.e4 and flags.e4_prime is False,
              {k: v for k, v in flags.as_dict().items() if k != "diagnostics"})

    rx, rt = geo.rho_curve.positions[:, 0], geo.rho_curve.times
    rep.check("rho lies strictly above the diagonal", bool(np.all(rt > rx)), {"min_gap": float(np.min(rt - rx))})
    rep.check("rho approaches the diagonal", float(rt[-1] - rx[-1]) < 1e-6, {"final_gap": float(rt[-1] - rx[-1])})
    l0 = geo.rho(0.0)
    ks = sorted(k_values) if k_values is not None else [f * l0 for f in (0.2, 0.4, 0.6)]
    if not ks or any(not 0 < k < l0 for k in ks):
        raise ValueError(f"starting heights must lie in (0, {l0})")

    probes_x = np.round(np.arange(x_min, probe_max + probe_step / 2, probe_step), 12)
    probes = ProbeSet(tuple(float(p) for p in probes_x))
    metric = UniformLineDistance()
    euclid = RandersField.euclidean(1)

    snd = sandwich_check(geo.field_t, euclid, alpha, np.linspace(x_min, probe_max, 15).reshape(-1, 1),
                         np.array([[1.0], [-1.0]]), np.linspace(-1.0, 6.0, 15))
    rep.check("blended metric sits between the two warped metrics", snd.passed, snd.as_dict())

    curves = {}
    inside = True
    for k in ks:
        c = wedge_curve(geo, k, step, x_min, x_max)
        xs, ts = c.positions[:, 0], c.times
        top = np.array([geo.rho(x) for x in xs])
        ok = bool(np.all(xs < ts) and np.all(ts < top)) and not c.truncated
        inside &= ok
        curves[k] = c
        cls = classify_curve(c, geo.field_t, tol=1e-6)
        rep.check(f"curve from height {k:.6f} is lightlike", cls.label == "lightlike",
                  {"max_ratio_err": float(np.max(np.abs(cls.ratios - 1)))})
        rep.check(f"curve from height {k:.6f} stays inside the wedge", ok,
                  {"min_below": float(np.min(ts - xs)), "min_above": float(np.min(top - ts))})

    def thresholds(c):
        return np.interp(probes_x, c.positions[:, 0], c.times)

    diag = ProbeSet(probes.points)
    P_cl_lift = _threshold_rep(diag, probes_x, "diagonal")
    P_op = _threshold_rep(diag, [geo.rho(x) for x in probes_x], "rho")
    Pk = [_threshold_rep(diag, thresholds(curves[k]), f"k={k:.6f}") for k in ks]
    chain = [P_cl_lift] + Pk + [P_op]
    nested = all(ip_inclusion(a, b).strict_subset for a, b in zip(chain, chain[1:]))
    rep.check("strict nesting from the diagonal through every curve up to rho", nested)

    # canonical projections of the diagonal and of each wedge curve
    diag_curve = CurveSample(np.linspace(x_min, x_max, int(round((x_max - x_min) / 0.01)) + 1),
                             np.linspace(x_min, x_max, int(round((x_max - x_min) / 0.01)) + 1))
    projections: dict[str, CanonicalProjection] = {}
    for label, c in [("diagonal", diag_curve)] + [(f"k={k:.6f}", curves[k]) for k in ks]:
        projections[label] = canonical_projection(c, geo.field_t, euclid, alpha, metric, probes, allow_lightlike=True)
    members = [TerminalSetRep("IP", P_cl_lift.function, True, projections["diagonal"], "diagonal")]
    members += [TerminalSetRep("IP", p.function, True, projections[p.label], p.label) for p in Pk]
    expected = probes_x + 1.0
    dev = max(_max_abs(p.shared_op.values, expected) for p in projections.values())
    rep.check("every shared wide-cone past equals the diagonal's plus one", dev < 1e-4, {"max_dev": dev})
    sandwich_ok = all(bool(np.all(p.t_cl <= p.s) and np.all(p.s <= p.t_op)) for p in projections.values())
    rep.check("narrow time <= curve time <= wide time along every curve", sandwich_ok)
    gaps = {k: p.final_gap for k, p in projections.items()}
    rep.check("final narrow/wide gap below 1e-3", max(gaps.values()) < 1e-3, gaps)
    # from a start s0 the offsets are bounded by the warp constant still ahead, K_inf - K(s0)
    ahead = {k: geo.K_inf - k_omega(alpha, float(p.s[0])) for k, p in projections.items()}
    bounds = all(0 <= p.k_cl <= ahead[k] + 1e-6 and 0 <= p.k_op <= ahead[k] + 1e-6 for k, p in projections.items())
    rep.check("both offsets within [0, warp constant ahead of the start]", bounds,
              {k: (p.k_cl, p.k_op, ahead[k]) for k, p in projections.items()})
    shift_err = _max_abs(translate_cl_op(projections["diagonal"].P_cl.function, math.inf, alpha).values
                         - projections["diagonal"].P_cl.values, np.full(len(probes), geo.K_inf))
    rep.check("wide minus narrow function equals the warp constant on probes", shift_err < 1e-9, {"err": shift_err})

    classes = strain_classes(members)
    one = len(classes) == 1 and len(classes[0].members) == len(members)
    rep.check("exactly one strain holding the diagonal lift and every curve", one,
              {"classes": len(classes), "sizes": [len(c.members) for c in classes]})
    spread = max(c.spread() for c in classes)
    rep.check("strain members share the wide-cone past within 1e-6", spread < 1e-6, {"spread": spread})
    distinct = not pairwise_distinct(members, tol=1e-9)
    rep.check("non-surjectivity witness: at least four distinct sets over one wide-cone past",
              one and len(members) >= 4 and distinct, {"members": [m.label for m in members]})

    # non-continuity witness along points of the middle curve
    kmid = ks[len(ks) // 2]
    c = curves[kmid]
    ns = list(range(1, sequence_len + 1))
    cl_seq, g_seq = [], []
    for n in ns:
        ln = float(np.interp(n, c.positions[:, 0], c.times))
        cl_seq.append(BusemannSample(probes, ln - np.abs(probes_x - n), +1, "g"))
        vals = thresholds(c).copy()
        right = probes_x > n
        if right.any():
            branch = lightcone_ode_1d(geo.h, Event(ln, float(n)), "right-past", float(probes_x[-1]) + step, step)
            vals[right] = np.interp(probes_x[right], branch.positions[:, 0], branch.times)
        g_seq.append(BusemannSample(probes, vals, +1, "g"))
    line_cands = [BusemannSample(probes, probes_x + K, +1, "g") for K in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    cl_lim = limit_operator(line_cands, cl_seq)
    g_cands = [P_cl_lift.function] + [p.function for p in Pk]
    g_lim = limit_operator(g_cands, g_seq)
    witness = cl_lim == [2] and g_lim == [1 + ks.index(kmid)]
    rep.check("non-continuity witness: narrow pasts converge to the diagonal, g pasts to the curve", witness,
              {"cl_limit": cl_lim, "g_limit": g_lim, "candidates": "line shifts / diagonal lift and curves"})

    rep.data = {
        "K_inf": geo.K_inf, "l0": l0, "k_values": ks,
        "projections": {k: p.summary() for k, p in projections.items()},
        "probes": len(probes),
    }
    stride = max(1, int(round(0.05 / step)))
    rep.tables["rho"] = [{"x": float(x), "t": float(t)} for x, t in zip(rx[::stride], rt[::stride])]
    for k, cv in curves.items():
        rep.tables[f"gamma_k{ks.index(k)}"] = [{"x": float(x), "t": float(t)}
                                              for x, t in zip(cv.positions[::stride, 0], cv.times[::stride])]
    return rep


# ---------------------------------------------------------------------------
# constant warp: the forward warp constant diverges


def run_no_e4_collapse() -> ScenarioReport:
    """Constant warp below one: unbounded sets all collapse to the apex; bounded ones stay apart."""
    rep = ScenarioReport("no-e4-collapse")
    alpha = WarpProfile.from_expression("1/3^(1/2)")
    flags = check_conditions(alpha)
    rep.check("forward warp constant diverges", flags.e4 is False, {"e4": flags.e4})
    euclid = RandersField.euclidean(1)
    squeezed = TimeDependentRandersField.static(RandersField.constant([[0.5]]))
    snd = sandwich_check(squeezed, euclid, alpha, np.linspace(-3, 3, 7).reshape(-1, 1), np.array([[1.0], [-1.0]]),
                         [0.0, 1.0, 5.0])
    rep.check("squeezed metric lies between the warped ones", snd.passed, snd.as_dict())

    unit = WarpProfile.unit()
    metric = UniformLineDistance()
    probes = ProbeSet(tuple(float(x) for x in np.arange(-5.0, 5.01, 0.5)))
    ts = np.arange(0.0, 40.01, 0.5)
    unbounded = {
        "right-ray": CurveSample(ts, ts),
        "left-ray": CurveSample(ts, -ts),
        "slowing": CurveSample(ts, ts + np.exp(-ts) - 1.0),
    }
    collapsed_all = True
    images = []
    for name, curve in unbounded.items():
        b = busemann_eval(curve, unit, metric, probes, tag="cl", allow_lightlike=True)
        img = translate_cl_op(b, math.inf, alpha)
        ok = b.finite and not img.finite and "collapse" in img.diagnostic
        collapsed_all &= ok
        images.append(img)
        rep.check(f"{name}: finite narrow function, collapsed wide image", ok, img.diagnostic)
    rep.check("every unbounded set maps to the apex", collapsed_all)

    pts = [(1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (2.0, -1.0), (0.5, 3.0)]
    finite_imgs = []
    for omega, x in pts:
        b = closed_form_point(omega, x, +1, unit, metric, probes, tag="cl")
        finite_imgs.append(jhat_op(TerminalSetRep("IP", b), omega, alpha))
    clashes = pairwise_distinct(finite_imgs, tol=1e-9)
    rep.check("bounded sets keep pairwise distinct wide images", not clashes, {"clashes": clashes})
    c = math.sqrt(3.0) - 1.0
    err = max(_max_abs(img.values, (1 + c) * om - np.abs(np.array(probes.points) - x))
              for img, (om, x) in zip(finite_imgs, pts))
    rep.check("bounded images are the rescaled closed forms", err < 1e-9, {"max_err": err})
    rep.data = {"flags": {k: v for k, v in flags.as_dict().items() if k != "diagnostics"}}
    return rep


SCENARIOS = {
    "halfplane": run_halfplane,
    "example-strain": run_example_strain,
    "no-e4-collapse": run_no_e4_collapse,
    "static-sanity": run_static_sanity,
}
