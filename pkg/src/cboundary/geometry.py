"""Discretized base manifold and Randers metrics on it.

A Randers field is given by a Riemannian metric ``h`` (a symmetric positive
definite matrix field) and a one-form ``omega`` (a covector field). Its two
Finsler norms are::

    F+(v) = sqrt(h(v, v) + omega(v)**2) + omega(v)
    F-(v) = sqrt(h(v, v) + omega(v)**2) - omega(v) = F+(-v)

Every field callable is vectorized: it receives an ``(m, d)`` array of points
(and, for time-dependent fields, an ``(m,)`` array of times) and returns
``(m, d, d)`` matrices or ``(m, d)`` covectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateEdgeError, InvalidFieldError, InvalidInputError, VertexLookupError
from .expr import Expression

MatrixField = Callable[[np.ndarray], np.ndarray]
CovectorField = Callable[[np.ndarray], np.ndarray]


def _as_points(x, dim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, dim) if dim > 1 or arr.size != 1 else arr.reshape(1, 1)
    if arr.shape[-1] != dim:
        raise InvalidInputError(f"expected points of dimension {dim}, got shape {arr.shape}")
    return arr


def _unit_scale(vec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split vectors into max-norm scale and rescaled direction, so squaring cannot underflow."""
    scale = np.max(np.abs(vec), axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale, vec / safe[:, None]


def _randers(hvv: np.ndarray, wv: np.ndarray, sign: int) -> np.ndarray:
    if not (np.all(np.isfinite(hvv)) and np.all(np.isfinite(wv))):
        raise InvalidFieldError("metric data is not finite")
    if np.any(hvv < 0):
        raise InvalidFieldError("h(v, v) is negative")
    root = np.sqrt(hvv + wv * wv)
    sw = sign * wv
    # rationalized form avoids cancellation when omega dominates
    denom = root - sw
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(sw >= 0, root + sw, np.where(denom > 0, hvv / safe, 0.0))


@dataclass(frozen=True, eq=False)
class RandersField:
    """Stationary Randers data ``(h, omega)`` on a ``dimension``-dimensional domain."""

    dimension: int
    metric: MatrixField
    one_form: CovectorField | None = None
    label: str = ""

    @classmethod
    def constant(cls, h, omega=None, label: str = "") -> "RandersField":
        H = np.atleast_2d(np.asarray(h, dtype=float))
        d = H.shape[0]
        W = np.zeros(d) if omega is None else np.asarray(omega, dtype=float).reshape(d)
        return cls(
            d,
            lambda x: np.broadcast_to(H, (len(x), d, d)),
            lambda x: np.broadcast_to(W, (len(x), d)),
            label or "constant",
        )

    @classmethod
    def euclidean(cls, dim: int = 1) -> "RandersField":
        return cls.constant(np.eye(dim), None, "euclidean")

    @classmethod
    def conformal(cls, dim: int, factor: Callable[[np.ndarray], np.ndarray], omega: CovectorField | None = None,
                  label: str = "") -> "RandersField":
        """``h = factor(x) * identity``."""
        eye = np.eye(dim)
        return cls(dim, lambda x: np.asarray(factor(x), dtype=float)[:, None, None] * eye, omega, label)

    @classmethod
    def from_expressions(cls, h: str | Sequence[Sequence[str]], omega: Sequence[str] | None, dim: int) -> "RandersField":
        """Build from expression strings in the coordinates ``x1..xd`` (``x`` is an alias of ``x1``).

        ``h`` is either one string (a conformal factor) or a d-by-d nested list.
        """
        names = coordinate_names(dim)
        H = _expression_matrix(h, dim, names)
        W = _expression_vector(omega, dim, names)

        def metric(x):
            cols = [x[:, i] for i in range(dim)]
            args = cols + [cols[0]]
            return _eval_matrix(H, args, len(x), dim)

        def form(x):
            cols = [x[:, i] for i in range(dim)]
            args = cols + [cols[0]]
            return _eval_vector(W, args, len(x), dim)

        return cls(dim, metric, form, "expressions")

    def data(self, x) -> tuple[np.ndarray, np.ndarray]:
        pts = _as_points(x, self.dimension)
        H = np.asarray(self.metric(pts), dtype=float)
        W = np.zeros((len(pts), self.dimension)) if self.one_form is None else np.asarray(self.one_form(pts), dtype=float)
        return H.reshape(len(pts), self.dimension, self.dimension), W.reshape(len(pts), self.dimension)

    def norm(self, x, v, sign: int = +1) -> np.ndarray:
        """Vectorized ``F^sign`` at points ``x`` on vectors ``v`` (both ``(m, d)``)."""
        pts = _as_points(x, self.dimension)
        vec = _as_points(v, self.dimension)
        H, W = self.data(pts)
        scale, u = _unit_scale(vec)
        hvv = np.einsum("mi,mij,mj->m", u, H, u)
        wv = np.einsum("mi,mi->m", W, u)
        return scale * _randers(hvv, wv, sign)


@dataclass(frozen=True, eq=False)
class TimeDependentRandersField:
    """Randers data ``(h_t, omega_t)`` depending on a time coordinate.

    The callables take ``(t, x)`` with ``t`` of shape ``(m,)``.
    """

    dimension: int
    metric: Callable[[np.ndarray, np.ndarray], np.ndarray]
    one_form: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    label: str = ""
    knots: tuple[float, ...] | None = field(default=None)

    @classmethod
    def from_knots(cls, times: Sequence[float], fields: Sequence[RandersField], label: str = "") -> "TimeDependentRandersField":
        """Linear interpolation in ``t`` between stationary fields; constant beyond the end knots."""
        ts = np.asarray(times, dtype=float)
        if len(ts) != len(fields) or len(ts) < 1 or np.any(np.diff(ts) <= 0):
            raise InvalidFieldError("knot times must be strictly increasing and match the fields")
        dims = {f.dimension for f in fields}
        if len(dims) != 1:
            raise InvalidFieldError("all knot fields must share a dimension")
        dim = dims.pop()

        def weights(t):
            t = np.clip(np.asarray(t, dtype=float), ts[0], ts[-1])
            j = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, max(len(ts) - 2, 0))
            if len(ts) == 1:
                return j, np.zeros_like(t)
            lam = (t - ts[j]) / (ts[j + 1] - ts[j])
            return j, lam

        def blend(t, x, which):
            t = np.broadcast_to(np.asarray(t, dtype=float), (len(x),))
            j, lam = weights(t)
            out = None
            for k, f in enumerate(fields):
                H, W = f.data(x)
                val = H if which == 0 else W
                wk = np.where(j == k, 1.0 - lam, 0.0) + np.where(j + 1 == k, lam, 0.0)
                if len(ts) == 1:
                    wk = np.ones_like(t)
                term = val * wk.reshape((-1,) + (1,) * (val.ndim - 1))
                out = term if out is None else out + term
            return out

        return cls(dim, lambda t, x: blend(t, x, 0), lambda t, x: blend(t, x, 1), label or "knots", tuple(ts.tolist()))

    @classmethod
    def static(cls, base: RandersField) -> "TimeDependentRandersField":
        return cls(base.dimension, lambda t, x: base.data(x)[0], lambda t, x: base.data(x)[1], base.label)

    def at(self, t: float) -> RandersField:
        return RandersField(
            self.dimension,
            lambda x: self.metric(np.full(len(x), t), x),
            None if self.one_form is None else (lambda x: self.one_form(np.full(len(x), t), x)),
            f"{self.label}@{t}",
        )

    def norm(self, t, x, v, sign: int = +1) -> np.ndarray:
        pts = _as_points(x, self.dimension)
        vec = _as_points(v, self.dimension)
        ts = np.broadcast_to(np.asarray(t, dtype=float), (len(pts),))
        H = np.asarray(self.metric(ts, pts), dtype=float).reshape(len(pts), self.dimension, self.dimension)
        if self.one_form is None:
            W = np.zeros((len(pts), self.dimension))
        else:
            W = np.asarray(self.one_form(ts, pts), dtype=float).reshape(len(pts), self.dimension)
        scale, u = _unit_scale(vec)
        hvv = np.einsum("mi,mij,mj->m", u, H, u)
        wv = np.einsum("mi,mi->m", W, u)
        return scale * _randers(hvv, wv, sign)


def eval_randers(field, x, v, sign: int = +1, time: float | None = None) -> float:
    """``F^sign`` of the tangent vector ``v`` at the point ``x``.

    Pass ``time`` for a :class:`TimeDependentRandersField`. Returns a float
    for a single vector, an array for stacked input.
    """
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    timed = isinstance(field, TimeDependentRandersField)
    if time is not None and not timed:
        raise InvalidFieldError("a time was given but the field has no time-dependent data")
    if time is None and timed:
        raise InvalidFieldError("time-dependent field needs a time")
    single = np.ndim(v) <= 1
    out = field.norm(time, x, v, sign) if timed else field.norm(x, v, sign)
    return float(out[0]) if single else out


def coordinate_names(dim: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(dim)) + ("x",)


def _expression_matrix(h, dim, names):
    if isinstance(h, str):
        e = Expression(h, names)
        return [[e if i == j else None for j in range(dim)] for i in range(dim)]
    rows = [[Expression(str(c), names) for c in row] for row in h]
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise InvalidFieldError(f"metric matrix must be {dim}x{dim}")
    return rows


def _expression_vector(omega, dim, names):
    if omega is None:
        return [None] * dim
    if isinstance(omega, str):
        omega = [omega]
    if len(omega) != dim:
        raise InvalidFieldError(f"one-form needs {dim} components")
    return [Expression(str(c), names) for c in omega]


def _eval_matrix(H, args, m, dim):
    out = np.zeros((m, dim, dim))
    for i, j in itertools.product(range(dim), range(dim)):
        if H[i][j] is not None:
            out[:, i, j] = H[i][j](*args)
    return out


def _eval_vector(W, args, m, dim):
    out = np.zeros((m, dim))
    for i in range(dim):
        if W[i] is not None:
            out[:, i] = W[i](*args)
    return out


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True, eq=False)
class DirectedMesh:
    """Vertices with coordinates and directed edges closed under reversal."""

    coords: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        n = len(coords)
        if n == 0:
            raise InvalidInputError("mesh needs at least one vertex")
        if not np.all(np.isfinite(coords)):
            raise InvalidInputError("vertex coordinates must be finite")
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise InvalidInputError("edge refers to an unknown vertex")
        edges = np.unique(edges, axis=0) if len(edges) else edges
        forward = {(int(u), int(v)) for u, v in edges}
        missing = [(v, u) for u, v in forward if (v, u) not in forward]
        if missing:
            raise InvalidInputError(f"edge {missing[0][::-1]} has no companion edge")
        if n > 1:
            adj = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
            ncomp, _ = connected_components(adj, directed=False)
            if ncomp != 1:
                raise InvalidInputError(f"mesh is not connected ({ncomp} components)")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "edges", edges)
        coords.setflags(write=False)
        edges.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def dimension(self) -> int:
        return self.coords.shape[1]

    @property
    def displacements(self) -> np.ndarray:
        return self.coords[self.edges[:, 1]] - self.coords[self.edges[:, 0]]

    @classmethod
    def explicit(cls, vertices, edges, symmetrize: bool = False) -> "DirectedMesh":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if symmetrize:
            e = np.vstack([e, e[:, ::-1]])
        return cls(np.asarray(vertices, dtype=float), e)

    @classmethod
    def line(cls, points: Sequence[float]) -> "DirectedMesh":
        """Path graph through sorted 1-D points (duplicates removed)."""
        pts = np.unique(np.asarray(points, dtype=float))
        idx = np.arange(len(pts) - 1)
        e = np.concatenate([np.stack([idx, idx + 1], 1), np.stack([idx + 1, idx], 1)])
        return cls(pts.reshape(-1, 1), e)

    @classmethod
    def grid(cls, lower: Sequence[float], upper: Sequence[float], shape: Sequence[int], diagonals: bool = False) -> "DirectedMesh":
        """Regular grid on a box; axis neighbours, plus diagonal ones on request."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        shape = tuple(int(s) for s in np.atleast_1d(shape))
        if not (len(lower) == len(upper) == len(shape)) or min(shape) < 1:
            raise InvalidInputError("grid bounds and shape must agree and be positive")
        axes = [np.linspace(lo, hi, s) for lo, hi, s in zip(lower, upper, shape)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(shape))
        ids = np.arange(mesh.shape[0]).reshape(shape)
        steps = [s for s in itertools.product((-1, 0, 1), repeat=len(shape)) if any(s)]
        if not diagonals:
            steps = [s for s in steps if sum(map(abs, s)) == 1]
        pairs = []
        for step in steps:
            src = tuple(slice(max(0, -k), n - max(0, k)) for k, n in zip(step, shape))
            dst = tuple(slice(max(0, k), n - max(0, -k)) for k, n in zip(step, shape))
            pairs.append(np.stack([ids[src].ravel(), ids[dst].ravel()], 1))
        e = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
        return cls(mesh, e)

    @classmethod
    def from_points(cls, points) -> "DirectedMesh":
        """Delaunay-connected mesh over scattered points (a path graph in 1-D)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1 or pts.shape[1] == 1:
            return cls.line(pts.ravel())
        from scipy.spatial import Delaunay

        tri = Delaunay(pts)
        e = set()
        for simplex in tri.simplices:
            for a, b in itertools.combinations(simplex, 2):
                e.add((int(a), int(b)))
                e.add((int(b), int(a)))
        return cls(pts, np.array(sorted(e)))

    def nearest_vertex(self, point, tol: float = 1e-9) -> int:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        if p.shape != (self.dimension,):
            raise VertexLookupError(f"point {point} has wrong dimension")
        dist = np.linalg.norm(self.coords - p, axis=1)
        i = int(np.argmin(dist))
        if dist[i] > tol:
            raise VertexLookupError(f"no mesh vertex within {tol} of {point}")
        return i


# ---------------------------------------------------------------------------
# weighted graphs


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Directed graph with positive edge weights on vertices ``0..n-1``."""

    n: int
    tails: np.ndarray
    heads: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for name in ("tails", "heads"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if not (len(self.tails) == len(self.heads) == len(self.weights)):
            raise InvalidInputError("edge arrays must have equal length")
        if len(self.tails) and (min(self.tails.min(), self.heads.min()) < 0 or max(self.tails.max(), self.heads.max()) >= self.n):
            raise InvalidInputError("edge refers to an unknown vertex")
        if np.any(~np.isfinite(self.weights)) or np.any(self.weights <= 0):
            raise InvalidInputError("edge weights must be finite and positive")

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int, float]]) -> "WeightedGraph":
        if not edges:
            return cls(n, np.zeros(0), np.zeros(0), np.zeros(0))
        u, v, w = zip(*edges)
        return cls(n, np.array(u), np.array(v), np.array(w, dtype=float))

    def transpose(self) -> "WeightedGraph":
        return WeightedGraph(self.n, self.heads, self.tails, self.weights)

    def csr(self) -> csr_matrix:
        """Sparse adjacency keeping the lightest of any parallel edges."""
        order = np.lexsort((self.weights, self.heads, self.tails))
        u, v, w = self.tails[order], self.heads[order], self.weights[order]
        if len(u):
            keep = np.ones(len(u), dtype=bool)
            keep[1:] = (u[1:] != u[:-1]) | (v[1:] != v[:-1])
            u, v, w = u[keep], v[keep], w[keep]
        return csr_matrix((w, (u, v)), shape=(self.n, self.n))

    def edge_dict(self) -> dict[tuple[int, int], float]:
        out: dict[tuple[int, int], float] = {}
        for u, v, w in zip(self.tails.tolist(), self.heads.tolist(), self.weights.tolist()):
            if (u, v) not in out or w < out[(u, v)]:
                out[(u, v)] = w
        return out


def build_weighted_graph(mesh: DirectedMesh, field, sign: int = +1, time: float | None = None,
                         rule: str = "midpoint") -> WeightedGraph:
    """Weight each edge ``u -> v`` by ``F^sign`` applied to its displacement.

    ``rule="midpoint"`` evaluates the field at the edge midpoint, which makes
    the ``-`` graph exactly the transpose of the ``+`` graph; ``rule="tail"``
    evaluates it at ``u``.
    """
    disp = mesh.displacements
    if len(disp) and np.any(np.all(disp == 0, axis=1)):
        k = int(np.argmax(np.all(disp == 0, axis=1)))
        raise DegenerateEdgeError(f"edge {tuple(mesh.edges[k])} has zero length")
    u, v = mesh.edges[:, 0], mesh.edges[:, 1]
    if rule == "midpoint":
        where = 0.5 * (mesh.coords[u] + mesh.coords[v])
    elif rule == "tail":
        where = mesh.coords[u]
    else:
        raise InvalidInputError(f"unknown evaluation rule {rule!r}")
    if field.dimension != mesh.dimension:
        raise InvalidFieldError("field and mesh dimensions differ")
    if len(disp) == 0:
        return WeightedGraph(mesh.n_vertices, u, v, np.zeros(0))
    w = eval_randers(field, where, disp, sign, time)
    w = np.atleast_1d(w)
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise InvalidFieldError("field produced a non-positive or non-finite edge weight")
    return WeightedGraph(mesh.n_vertices, u, v, w)
