"""Boundary objects: paired past/future sets, their lines, strains and columns.

Sets of the squeezed metric ``g`` (between the narrow-cone ``cl`` and the
wide-cone ``op`` warped metrics) are never computed directly. A ``g`` set is
carried by a function in the ``"g"`` normalization (``T(t) = t``) together
with its strain data: the unique narrow-cone set below it and the wide-cone
past they share.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .busemann import (BusemannSample, ProbeSet, TerminalSetRep, busemann_eval, closed_form_point, ip_inclusion,
                       reverse_of, shift, translate_cl_op)
from .chronology import CurveSample, Event
from .completion import CompletionClass
from .errors import (InvalidInputError, NotSPairableError, NotTimelikeError, ProjectionUndefinedError,
                     UndecidableError, UnsolvableError)
from .warp import WarpProfile, k_omega, primitive, solve_sK

EQ_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BoundaryPair:
    P: TerminalSetRep | None
    F: TerminalSetRep | None
    s_related: bool = False
    origin_point: tuple | None = None

    def __post_init__(self):
        if self.P is None and self.F is None:
            raise InvalidInputError("a boundary pair needs at least one nonempty component")
        if self.P is not None and self.P.kind != "IP":
            raise InvalidInputError("first component must be a past set")
        if self.F is not None and self.F.kind != "IF":
            raise InvalidInputError("second component must be a future set")

    def describe(self) -> dict:
        def comp(c):
            return None if c is None else {"tag": c.tag, "finite": c.function.finite,
                                           "values": [float(v) for v in c.values]}
        return {"P": comp(self.P), "F": comp(self.F), "s_related": self.s_related,
                "origin_point": None if self.origin_point is None else [str(x) for x in self.origin_point]}


def _normalizer(tag: str, profile: WarpProfile) -> WarpProfile:
    return profile if tag == "op" else WarpProfile.unit()


def pair_from_symmetrized_point(omega: float, target, profile: WarpProfile, metric, probes: ProbeSet,
                                metric_minus=None, tag: str | None = None) -> BoundaryPair:
    """Past and future sets generated at ``(omega, target)`` for a symmetrized class or an interior vertex.

    ``metric_minus`` defaults to the reverse of ``metric``; passing the
    distance of the reversed graph keeps static cases bitwise symmetric.
    """
    if isinstance(target, CompletionClass) and not target.symmetrized:
        raise NotSPairableError(f"class {target.label!r} is not in the symmetrized boundary ({target.flags})")
    minus = metric_minus if metric_minus is not None else reverse_of(metric)
    fp = closed_form_point(omega, target, +1, profile, metric, probes, tag)
    fm = closed_form_point(omega, target, -1, profile, minus, probes, tag)
    terminal = isinstance(target, CompletionClass)
    label = target.label if terminal else target
    return BoundaryPair(TerminalSetRep("IP", fp, terminal), TerminalSetRep("IF", fm, terminal), True, (omega, label))


def shift_pair(pair: BoundaryPair, K: float, profile: WarpProfile | None = None) -> BoundaryPair:
    def move(c):
        if c is None:
            return None
        return TerminalSetRep(c.kind, shift(c.function, K, profile), c.is_terminal, c.projection, c.label)

    origin = pair.origin_point
    if origin is not None and profile is not None and K != 0:
        origin = (solve_sK(profile, float(origin[0]), K), origin[1])
    return BoundaryPair(move(pair.P), move(pair.F), pair.s_related, origin)


@dataclass(frozen=True, eq=False)
class Line:
    base: BoundaryPair
    grid: tuple[float, ...]
    samples: tuple[BoundaryPair, ...]
    causal_type: str


def make_line(pair: BoundaryPair, K_grid: Sequence[float], profile: WarpProfile) -> Line:
    """Shift the pair along ``K_grid``; lines with both components are timelike."""
    grid = tuple(sorted(float(k) for k in K_grid))
    if not grid:
        raise InvalidInputError("empty shift grid")
    try:
        samples = tuple(shift_pair(pair, K, profile) for K in grid)
    except UnsolvableError as exc:
        raise UnsolvableError(f"shift not solvable: {exc}") from exc
    kind = "timelike" if pair.P is not None and pair.F is not None else "horismotic"
    return Line(pair, grid, samples, kind)


def chronology_witness(first: BoundaryPair, second: BoundaryPair, profile: WarpProfile,
                       tol: float = EQ_TOL) -> Event | None:
    """An event in the future set of ``first`` and the past set of ``second``, if one shows on the probes."""
    if first.F is None or second.P is None:
        return None
    f_lo, f_hi = first.F.values, second.P.values
    gap = f_hi - f_lo
    if not np.any(gap > tol):
        return None
    i = int(np.argmax(gap))
    norm = _normalizer(second.P.tag, profile)
    level = 0.5 * (f_lo[i] + f_hi[i])
    t = solve_sK(norm, 0.0, float(level)) if level != 0 else 0.0
    return Event(t, first.F.function.probes.points[i])


def verify_line(line: Line, profile: WarpProfile) -> dict:
    """Check the causal type claim on every ordered pair of samples."""
    witnesses = []
    missing = []
    nested = True
    for i in range(len(line.samples)):
        for j in range(i + 1, len(line.samples)):
            a, b = line.samples[i], line.samples[j]
            w = chronology_witness(a, b, profile)
            if w is None:
                missing.append((line.grid[i], line.grid[j]))
            else:
                witnesses.append({"from": line.grid[i], "to": line.grid[j], "event": [w.t, _jsonable(w.x)]})
            for comp in ("P", "F"):
                ca, cb = getattr(a, comp), getattr(b, comp)
                if ca is not None and cb is not None:
                    inc = ip_inclusion(ca, cb)
                    want = inc.strict_subset if comp == "P" else inc.strict_superset
                    nested = nested and want
    if line.causal_type == "timelike":
        ok = not missing
    else:
        ok = not witnesses and nested
    return {"causal_type": line.causal_type, "passed": ok, "witnesses": witnesses, "missing": missing,
            "strictly_nested": nested}


def _jsonable(x):
    return x.item() if isinstance(x, np.generic) else x


# ---------------------------------------------------------------------------
# narrow-to-wide map


def jhat_op(P_cl: TerminalSetRep, omega: float, profile: WarpProfile) -> TerminalSetRep:
    """Wide-cone past of a narrow-cone past set; collapses to the apex when the warp constant diverges."""
    if P_cl.tag != "cl":
        raise InvalidInputError("expected a narrow-cone set")
    return TerminalSetRep(P_cl.kind, translate_cl_op(P_cl.function, omega, profile), P_cl.is_terminal)


def collapsed(rep: TerminalSetRep) -> bool:
    return not rep.function.finite and "collapse" in rep.function.diagnostic


def pairwise_distinct(reps: Sequence[TerminalSetRep], tol: float = EQ_TOL) -> list[tuple[int, int]]:
    """Pairs of indices whose functions agree within ``tol`` (empty list: injective on the family)."""
    clashes = []
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            a, b = reps[i].values, reps[j].values
            if np.all(np.isinf(a)) and np.all(np.isinf(b)) and np.all(a == b):
                clashes.append((i, j))
            elif np.all(np.abs(a - b) <= tol):
                clashes.append((i, j))
    return clashes


# ---------------------------------------------------------------------------
# canonical projection


@dataclass(frozen=True, eq=False)
class CanonicalProjection:
    """Strain data of a ``g`` past set: the narrow-cone set below it and the shared wide-cone past."""

    P_cl: TerminalSetRep
    shared_op: BusemannSample
    k_cl: float = 0.0
    k_op: float = 0.0
    s: np.ndarray = field(default_factory=lambda: np.zeros(0))
    t_cl: np.ndarray = field(default_factory=lambda: np.zeros(0))
    t_op: np.ndarray = field(default_factory=lambda: np.zeros(0))
    case: str = "unbounded"
    final_gap: float = 0.0
    op_deviation: float = 0.0
    tails: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {"case": self.case, "k_cl": self.k_cl, "k_op": self.k_op, "final_gap": self.final_gap,
                "op_deviation": self.op_deviation, "tails": self.tails}


def canonical_projection(gamma: CurveSample, field_t, field, profile: WarpProfile, metric, probes: ProbeSet,
                         allow_lightlike: bool = False, tol: float = 1e-9) -> CanonicalProjection:
    """Narrow-cone and wide-cone reparameterizations of a ``g``-causal curve ``s -> (s, c(s))``.

    Along each segment ``r = F(dc) / F_s(dc)`` lies in ``[1, 1/alpha(s)]``.
    The narrow-cone time runs at rate ``r`` and ends ``k_cl`` below ``s``;
    the wide-cone time runs at ``alpha * r`` and ends ``k_op`` above. The
    part of both constants beyond the last sample is estimated from the
    last segment's position inside the sandwich, scaled by the remaining
    warp constant. The narrow-cone past of the reparameterized curve is the
    projection; its translation by the full warp constant is the shared
    wide-cone past.
    """
    if gamma.orientation != "future":
        raise InvalidInputError("canonical projection needs a future-directed curve")
    s = gamma.times
    pos = gamma.positions
    ds = np.diff(s)
    dc = np.diff(pos, axis=0)
    mid_s = 0.5 * (s[1:] + s[:-1])
    mid_x = 0.5 * (pos[1:] + pos[:-1])
    F = field.norm(mid_x, dc, +1)
    Fs = field_t.norm(mid_s, mid_x, dc, +1)
    speed = Fs / ds
    limit = 1.0 + (1e-6 if allow_lightlike else 0.0)
    if np.any(speed >= limit) if not allow_lightlike else np.any(speed > limit):
        k = int(np.argmax(speed))
        raise NotTimelikeError(f"segment {k} has speed {speed[k]} for the squeezed metric")
    alpha = np.asarray(profile(mid_s), dtype=float) * np.ones_like(mid_s)
    r = np.where(Fs > 0, F / np.where(Fs > 0, Fs, 1.0), 1.0)
    if np.any(r < 1 - tol) or np.any(r > 1 / alpha + tol):
        k = int(np.argmax((r < 1 - tol) | (r > 1 / alpha + tol)))
        raise InvalidInputError(f"cone sandwich fails on segment {k}: ratio {r[k]}, 1/alpha {1 / alpha[k]}")
    r = np.clip(r, 1.0, 1.0 / alpha)

    if math.isfinite(gamma.omega):
        return _finite_projection(gamma, profile, metric, probes)

    K_inf = k_omega(profile, math.inf)
    if not math.isfinite(K_inf):
        raise ProjectionUndefinedError("warp constant diverges; narrow and wide times cannot be matched")
    a = (r - 1.0) * ds
    b = (1.0 - alpha * r) * ds
    S = float(s[-1])
    rest = max(0.0, K_inf - k_omega(profile, S))
    excess_last = 1.0 / alpha[-1] - 1.0
    rho_cl = (r[-1] - 1.0) / excess_last if excess_last > 0 else 0.0
    rho_op = (1.0 - alpha[-1] * r[-1]) / excess_last if excess_last > 0 else 0.0
    tail_cl, tail_op = rho_cl * rest, rho_op * rest
    k_cl = float(a.sum() + tail_cl)
    k_op = float(b.sum() + tail_op)
    A = np.concatenate([[0.0], np.cumsum(a)])
    B = np.concatenate([[0.0], np.cumsum(b)])
    rem_cl = np.maximum(k_cl - A, 0.0)
    rem_op = np.maximum(k_op - B, 0.0)
    t_cl = s - rem_cl
    t_op = s + rem_op
    gap = t_op - t_cl
    if np.any(np.diff(gap) > 1e-12):
        raise UndecidableError("narrow/wide gap is not shrinking along the curve")

    keys = gamma.keys()
    cl_curve = CurveSample(t_cl, pos, math.inf, "future", gamma.vertices)
    b_cl = busemann_eval(cl_curve, WarpProfile.unit(), metric, probes, tag="cl", allow_lightlike=True)
    P_cl = TerminalSetRep("IP", b_cl, True)
    shared = translate_cl_op(b_cl, math.inf, profile)
    # cross-check: the wide-cone curve's own approximant at the last sample
    op_vals = primitive(profile, float(t_op[-1])) - metric.d_to(list(probes.points), keys[-1])
    deviation = float(np.max(np.abs(op_vals - shared.values))) if shared.finite else math.inf
    return CanonicalProjection(P_cl, shared, k_cl, k_op, s.copy(), t_cl, t_op, "unbounded", float(gap[-1]), deviation,
                               {"cl": tail_cl, "op": tail_op, "remaining_warp": rest})


def _finite_projection(gamma: CurveSample, profile, metric, probes) -> CanonicalProjection:
    """Curves ending at finite time: both sides are the closed forms at the endpoint."""
    end = gamma.keys()[-1]
    omega = float(gamma.omega)
    b_cl = closed_form_point(omega, end, +1, WarpProfile.unit(), metric, probes, tag="cl")
    shared = closed_form_point(omega, end, +1, profile, metric, probes, tag="op")
    s = gamma.times
    return CanonicalProjection(TerminalSetRep("IP", b_cl, True), shared, 0.0, 0.0, s.copy(), s.copy(), s.copy(),
                               "finite", 0.0, 0.0, {})


def projection_from_pair_component(rep_cl: TerminalSetRep, profile: WarpProfile) -> CanonicalProjection:
    """Strain data seeded by a narrow-cone set: the set itself and its wide-cone translate."""
    omega = rep_cl.function.origin.get("omega", math.inf)
    if rep_cl.kind == "IF" and math.isinf(omega):
        omega = -math.inf
    shared = translate_cl_op(rep_cl.function, omega, profile)
    return CanonicalProjection(rep_cl, shared, case="seeded")


def as_g_set(rep_cl: TerminalSetRep, profile: WarpProfile, label: str = "") -> TerminalSetRep:
    """``g`` set seeded by a narrow-cone set, represented by its lower bound function.

    The narrow-cone set is contained in the ``g`` set it generates, so its
    function is a valid inner estimate (exact when ``g`` is the narrow-cone metric).
    """
    f = rep_cl.function
    g_fun = BusemannSample(f.probes, f.values, f.sign, "g", dict(f.origin, bound="inner"))
    return TerminalSetRep(rep_cl.kind, g_fun, rep_cl.is_terminal, projection_from_pair_component(rep_cl, profile),
                          label or rep_cl.label)


def jbar(pair_cl: BoundaryPair, profile: WarpProfile) -> BoundaryPair:
    """Lift a narrow-cone boundary pair to ``g``.

    Empty components stay empty; two-sided pairs use the maximal
    construction seeded from their narrow-cone components.
    """
    P = as_g_set(pair_cl.P, profile) if pair_cl.P is not None else None
    F = as_g_set(pair_cl.F, profile) if pair_cl.F is not None else None
    return BoundaryPair(P, F, pair_cl.s_related, pair_cl.origin_point)


# ---------------------------------------------------------------------------
# strains


def _projection_of(rep: TerminalSetRep) -> CanonicalProjection:
    if not isinstance(rep.projection, CanonicalProjection):
        raise UndecidableError(f"no canonical projection for {rep.label or 'set'}")
    return rep.projection


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if np.all(np.isinf(a)) or np.all(np.isinf(b)):
        return bool(np.all(a == b))
    return bool(np.all(np.abs(a - b) <= tol))


def st_related(P1: TerminalSetRep, P2: TerminalSetRep, tol: float = EQ_TOL) -> bool:
    """Same shared wide-cone past and same narrow-cone set, lying below both."""
    p1, p2 = _projection_of(P1), _projection_of(P2)
    if P1.function.probes != P2.function.probes:
        raise InvalidInputError("sets live on different probe sets")
    if not _close(p1.shared_op.values, p2.shared_op.values, tol):
        return False
    if not _close(p1.P_cl.values, p2.P_cl.values, tol):
        return False
    sign = 1.0 if P1.kind == "IP" else -1.0
    below = all(bool(np.all(sign * p.P_cl.values <= sign * m.values + tol)) for p, m in ((p1, P1), (p2, P2)))
    return below


@dataclass(frozen=True, eq=False)
class StrainClass:
    members: tuple[TerminalSetRep, ...]
    canonical_cl: TerminalSetRep
    shared_op: BusemannSample

    def spread(self) -> float:
        """Largest deviation of a member's shared past from the class value."""
        return max(float(np.max(np.abs(_projection_of(m).shared_op.values - self.shared_op.values)))
                   for m in self.members)


def strain_classes(tips: Sequence[TerminalSetRep], tol: float = EQ_TOL) -> list[StrainClass]:
    groups: list[list[TerminalSetRep]] = []
    for tip in tips:
        for g in groups:
            if st_related(g[0], tip, tol):
                g.append(tip)
                break
        else:
            groups.append([tip])
    out = []
    for g in groups:
        p = _projection_of(g[0])
        out.append(StrainClass(tuple(g), p.P_cl, p.shared_op))
    return out


def strain_map_injective(classes: Sequence[StrainClass], tol: float = EQ_TOL) -> bool:
    """Distinct strains must have distinct wide-cone pasts."""
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            if _close(classes[i].shared_op.values, classes[j].shared_op.values, tol):
                return False
    return True


def _in_fiber(rep: TerminalSetRep, rep_cl: TerminalSetRep, tol: float) -> bool:
    p = _projection_of(rep)
    if not _close(p.P_cl.values, rep_cl.values, tol):
        return False
    sign = 1.0 if rep.kind == "IP" else -1.0
    return bool(np.all(sign * rep_cl.values <= sign * rep.values + tol))


def total_strain_member(pair: BoundaryPair, pair_cl: BoundaryPair, tol: float = EQ_TOL) -> bool:
    """Four-clause membership of a ``g`` pair over a narrow-cone pair."""
    if pair.P is not None and pair_cl.P is not None and not _in_fiber(pair.P, pair_cl.P, tol):
        return False
    if pair.F is not None and pair_cl.F is not None and not _in_fiber(pair.F, pair_cl.F, tol):
        return False
    if pair_cl.P is None and pair.P is not None:
        return False
    if pair_cl.F is None and pair.F is not None:
        return False
    return True


@dataclass(frozen=True)
class ColumnResult:
    causal_type: str  # "timelike" | "horismotic" | "inconclusive"
    witnesses: tuple
    members_ok: bool


def classify_column(line_cl: Line, lifted: Sequence[BoundaryPair], profile: WarpProfile) -> ColumnResult:
    """Causal type of a lifted line, with interior witness events for the timelike case."""
    if len(lifted) != len(line_cl.samples):
        raise InvalidInputError("one lifted pair per line sample is required")
    members_ok = all(total_strain_member(p, q) for p, q in zip(lifted, line_cl.samples))
    if not members_ok:
        raise InvalidInputError("lifted pairs are not members of the successive total strains")
    base = line_cl.base
    if base.P is None or base.F is None:
        for i in range(len(lifted)):
            for j in range(i + 1, len(lifted)):
                if chronology_witness(lifted[i], lifted[j], profile) is not None:
                    return ColumnResult("inconclusive", (), members_ok)
        return ColumnResult("horismotic", (), members_ok)
    witnesses = []
    for i in range(len(lifted)):
        for j in range(i + 1, len(lifted)):
            w = chronology_witness(lifted[i], lifted[j], profile)
            if w is None:
                return ColumnResult("inconclusive", tuple(witnesses), members_ok)
            witnesses.append((line_cl.grid[i], line_cl.grid[j], w.t, _jsonable(w.x)))
    return ColumnResult("timelike", tuple(witnesses), members_ok)


def boundary_report(pairs: Sequence[BoundaryPair] = (), lines: Sequence[Line] = (),
                    classes: Sequence[StrainClass] = (), flags: dict | None = None,
                    profile: WarpProfile | None = None) -> str:
    profile = profile or WarpProfile.unit()
    payload = {
        "tolerances": {"function_equality": EQ_TOL},
        "condition_flags": flags or {},
        "pairs": [p.describe() for p in pairs],
        "lines": [dict(verify_line(l, profile), grid=list(l.grid)) for l in lines],
        "strain_classes": [{"members": len(c.members), "shared_op": [float(v) for v in c.shared_op.values],
                            "spread": c.spread()} for c in classes],
    }
    return json.dumps(payload, indent=2, default=float)
