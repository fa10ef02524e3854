"""Chronology in warped products, causal character of curves, cone sandwiches and 1+1 lightcone ODEs.

For the metric ``-dt^2 + alpha(t)^2 * (Fermat data)`` two events satisfy
``(t0, x0) << (t1, x1)`` exactly when ``d(x0, x1) < int_{t0}^{t1} ds/alpha``.
Comparisons use a strictness margin; the tolerance shell is reported as its
own state (horismos).
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateSegmentError, InvalidInputError, InvalidMetricError, VertexLookupError
from .geometry import RandersField, TimeDependentRandersField
from .warp import WarpProfile, primitive

CHRON_TOL = 1e-9
ODE_STEP = 1e-3


class Relation(enum.Enum):
    CHRONOLOGICAL = "chronological"
    HORISMOTIC = "horismotic"
    UNRELATED = "unrelated"


@dataclass(frozen=True)
class Event:
    t: float
    x: object  # vertex index, or coordinate for 1-D continuous settings


@dataclass(frozen=True, eq=False)
class CurveSample:
    """Samples ``(times[i], positions[i])`` of a curve ``t -> (t, c(t))``.

    ``times`` increase for future orientation and decrease for past
    orientation. ``positions`` are coordinates ``(N, d)``; ``vertices``
    optionally names the mesh vertex of each sample.
    """

    times: np.ndarray
    positions: np.ndarray
    omega: float = math.inf
    orientation: str = "future"
    vertices: tuple[int, ...] | None = None
    truncated: bool = False

    def __post_init__(self):
        ts = np.asarray(self.times, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos.reshape(-1, 1)
        if ts.ndim != 1 or len(ts) < 2 or len(pos) != len(ts):
            raise InvalidInputError("curve needs at least two samples with matching positions")
        if self.orientation not in ("future", "past"):
            raise InvalidInputError("orientation must be 'future' or 'past'")
        steps = np.diff(ts) if self.orientation == "future" else -np.diff(ts)
        if np.any(steps <= 0):
            raise InvalidInputError("curve times must be strictly monotone in the orientation")
        if self.vertices is not None and len(self.vertices) != len(ts):
            raise InvalidInputError("vertex list must match the samples")
        object.__setattr__(self, "times", ts)
        object.__setattr__(self, "positions", pos)
        if self.vertices is not None:
            object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))

    @classmethod
    def on_mesh(cls, mesh, times, vertices, omega: float = math.inf, orientation: str = "future") -> "CurveSample":
        vs = [int(v) for v in vertices]
        if any(not 0 <= v < mesh.n_vertices for v in vs):
            raise VertexLookupError("curve vertex outside the mesh")
        return cls(np.asarray(times, dtype=float), mesh.coords[vs], omega, orientation, tuple(vs))

    def __len__(self) -> int:
        return len(self.times)

    def keys(self) -> list:
        """Metric keys of the samples: vertices when known, else 1-D coordinates."""
        if self.vertices is not None:
            return list(self.vertices)
        if self.positions.shape[1] != 1:
            raise InvalidInputError("curve without vertices must be one-dimensional")
        return self.positions[:, 0].tolist()


def relation(e0: Event, e1: Event, profile: WarpProfile, table, tol: float = CHRON_TOL) -> Relation:
    """Three-state chronology between two events of the warped spacetime."""
    if e1.t < e0.t:
        return Relation.UNRELATED
    lhs = table.d(e0.x, e1.x)
    rhs = primitive(profile, e1.t) - primitive(profile, e0.t)
    if lhs < rhs - tol:
        return Relation.CHRONOLOGICAL
    if abs(lhs - rhs) <= tol:
        return Relation.HORISMOTIC
    return Relation.UNRELATED


def chron_related(e0: Event, e1: Event, profile: WarpProfile, table, tol: float = CHRON_TOL) -> bool:
    """``e0 << e1``: forward distance strictly below the travel time."""
    return relation(e0, e1, profile, table, tol) is Relation.CHRONOLOGICAL


def relation_matrix(times: Sequence[float], profile: WarpProfile, distances: np.ndarray,
                    tol: float = CHRON_TOL) -> np.ndarray:
    """Vectorized relations on the product grid ``times x vertices``.

    Event ``(i, a)`` is ``(times[i], vertex a)``. Returns an int array
    ``R[i, a, j, b]`` with 1 chronological, 0 horismotic, -1 unrelated.
    """
    T = np.array([primitive(profile, float(t)) for t in times])
    travel = T[None, :] - T[:, None]  # [i, j]
    ordered = np.asarray(times)[None, :] >= np.asarray(times)[:, None]
    lhs = distances[None, :, None, :]
    rhs = travel[:, None, :, None]
    out = np.where(lhs < rhs - tol, 1, np.where(np.abs(lhs - rhs) <= tol, 0, -1)).astype(np.int8)
    out[~np.broadcast_to(ordered[:, None, :, None], out.shape)] = -1
    return out


# ---------------------------------------------------------------------------
# causal character of sampled curves

LABELS = ("timelike", "lightlike", "causal", "noncausal")


@dataclass(frozen=True)
class CurveClassification:
    label: str
    segments: tuple[str, ...]
    ratios: np.ndarray


def classify_curve(curve: CurveSample, field, profile: WarpProfile | None = None, tol: float = 1e-9) -> CurveClassification:
    """Causal character of each segment and of the whole curve.

    With a stationary ``field`` the segment speed is ``alpha(t_mid) * F(dc)``
    (``alpha = 1`` when no profile is given); with a time-dependent field it
    is ``F_t(dc)``. The speed divided by ``|dt|`` is compared with 1:
    below ``1 - tol`` timelike, within ``tol`` lightlike, above noncausal.
    A curve mixing timelike and lightlike segments is causal.
    """
    ts, pos = curve.times, curve.positions
    dt = np.diff(ts)
    dc = np.diff(pos, axis=0)
    if np.any((dt == 0) & np.all(dc == 0, axis=1)):
        raise DegenerateSegmentError("zero-length curve segment")
    sign = 1 if curve.orientation == "future" else -1
    mid_t = 0.5 * (ts[1:] + ts[:-1])
    mid_x = 0.5 * (pos[1:] + pos[:-1])
    if isinstance(field, TimeDependentRandersField):
        speed = field.norm(mid_t, mid_x, dc, sign)
    else:
        speed = field.norm(mid_x, dc, sign)
        if profile is not None:
            speed = speed * np.asarray(profile(mid_t), dtype=float)
    ratio = speed / np.abs(dt)
    seg = np.where(ratio < 1 - tol, "timelike", np.where(ratio <= 1 + tol, "lightlike", "noncausal"))
    kinds = set(seg.tolist())
    if "noncausal" in kinds:
        label = "noncausal"
    elif kinds == {"timelike"}:
        label = "timelike"
    elif kinds == {"lightlike"}:
        label = "lightlike"
    else:
        label = "causal"
    return CurveClassification(label, tuple(seg.tolist()), ratio)


# ---------------------------------------------------------------------------
# cone sandwich


@dataclass(frozen=True)
class SandwichReport:
    lower_slack: float  # min of F_t - alpha F
    upper_slack: float  # min of F - F_t
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return self.lower_slack >= -self.tol and self.upper_slack >= -self.tol

    def as_dict(self) -> dict:
        return {"lower_slack": self.lower_slack, "upper_slack": self.upper_slack, "passed": self.passed}


def sandwich_check(field_t: TimeDependentRandersField, field: RandersField, profile: WarpProfile,
                   points: np.ndarray, vectors: np.ndarray, times: Sequence[float]) -> SandwichReport:
    """Minimum slack of ``alpha F <= F_t <= F`` over every point, vector, time and sign."""
    pts = np.asarray(points, dtype=float).reshape(-1, field.dimension)
    vecs = np.asarray(vectors, dtype=float).reshape(-1, field.dimension)
    P = np.repeat(pts, len(vecs), axis=0)
    V = np.tile(vecs, (len(pts), 1))
    lo = hi = math.inf
    for t in times:
        a = float(profile(t))
        for sign in (1, -1):
            F = field.norm(P, V, sign)
            Ft = field_t.norm(np.full(len(P), t), P, V, sign)
            lo = min(lo, float(np.min(Ft - a * F)))
            hi = min(hi, float(np.min(F - Ft)))
    return SandwichReport(lo, hi)


@dataclass(frozen=True)
class BoundsVerdict:
    cl_related: bool
    op_related: bool

    @property
    def verdict(self) -> str:
        if self.cl_related:
            return "related"
        if not self.op_related:
            return "unrelated"
        return "indeterminate"


def chron_bounds_general(e0: Event, e1: Event, table_cl, table_op, profile: WarpProfile,
                         tol: float = CHRON_TOL) -> BoundsVerdict:
    """Sufficient and necessary tests for chronology of a metric squeezed between the two warped ones."""
    cl = chron_related(e0, e1, WarpProfile.unit(), table_cl, tol)
    op = chron_related(e0, e1, profile, table_op, tol)
    return BoundsVerdict(cl, op)


def batch_chronology(rows: Sequence[tuple[float, object, float, object]], table, profile: WarpProfile,
                     table_op=None, tol: float = CHRON_TOL) -> list[dict]:
    out = []
    for t0, x0, t1, x1 in rows:
        v = chron_bounds_general(Event(t0, x0), Event(t1, x1), table, table_op or table, profile, tol)
        out.append({"cl": v.cl_related, "op": v.op_related, "verdict": v.verdict})
    return out


def verdicts_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    extra = [k for k in (rows[0] if rows else {}) if k not in ("cl", "op", "verdict")]
    w = csv.DictWriter(buf, fieldnames=extra + ["cl", "op", "verdict"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# 1+1 lightcone ODE

BRANCHES = {
    # branch: (x direction, slope sign of dt/dx)
    "right-future": (+1, +1),
    "left-future": (-1, -1),
    "right-past": (+1, -1),
    "left-past": (-1, +1),
}


def rk4(f: Callable[[float, float], float], x0: float, y0: float, x1: float, step: float,
        bail: Callable[[float, float], bool] | None = None):
    """Classical fixed-step Runge-Kutta for scalar ``dy/dx = f(x, y)`` from ``x0`` to ``x1``.

    The step is adjusted to divide the interval evenly. Stops early when the
    state stops being finite or ``bail(x, y)`` is true. Returns ``(xs, ys, completed)``.
    """
    n = max(1, int(math.ceil(abs(x1 - x0) / step - 1e-9)))
    h = (x1 - x0) / n
    xs = [x0]
    ys = [y0]
    x, y = x0, y0
    for i in range(n):
        k1 = f(x, y)
        k2 = f(x + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(x + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(x + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x = x0 + (i + 1) * h
        if not math.isfinite(y) or (bail is not None and bail(x, y)):
            return np.array(xs), np.array(ys), False
        xs.append(x)
        ys.append(y)
    return np.array(xs), np.array(ys), True


def lightcone_ode_1d(h_t: Callable[[float, float], float], start: Event, branch: str, x_end: float,
                     step: float = ODE_STEP, t_cap: float = 1e12) -> CurveSample:
    """Lightlike curve of ``-dt^2 + h_t(x) dx^2`` through ``start`` on one branch.

    Integrates ``dt/dx = s * sqrt(h_t)`` in the position ``x`` with classical
    RK4 and returns samples ordered along the branch's time orientation.
    Non-positive ``h_t`` raises; blow-up yields a truncated curve.
    """
    if branch not in BRANCHES:
        raise InvalidInputError(f"unknown branch {branch!r}")
    xdir, slope = BRANCHES[branch]
    x0 = float(start.x)
    if (x_end - x0) * xdir <= 0:
        raise InvalidInputError(f"x_end must lie on the {branch} side of the start")

    def rhs(x, t):
        h = h_t(t, x)
        if not h > 0:
            raise InvalidMetricError(f"h_t({t}, {x}) = {h} is not positive")
        return slope * math.sqrt(h)

    xs, ts, done = rk4(rhs, x0, float(start.t), float(x_end), step, bail=lambda x, t: abs(t) > t_cap)
    orientation = "future" if branch.endswith("future") else "past"
    return CurveSample(ts, xs, orientation=orientation, truncated=not done)
