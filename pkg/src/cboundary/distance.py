"""Directed graph distances: forward, reverse and symmetrized, plus axiom checks.

Unreachable targets are ``math.inf``; sums with it saturate. Shortest paths
use scipy's Dijkstra per source. Tables up to ``FULL_TABLE_LIMIT`` vertices
are computed in full; larger ones compute rows on demand and cache them.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import InvalidInputError, VertexLookupError
from .geometry import WeightedGraph

FULL_TABLE_LIMIT = 2000
AXIOM_TOL = 1e-9


class QuasiMetric(Protocol):
    """Anything that can report forward distances between keyed points."""

    def d(self, a, b) -> float: ...

    def d_to(self, points: Sequence, b) -> np.ndarray: ...

    def d_from(self, a, points: Sequence) -> np.ndarray: ...


def _check_vertex(graph_n: int, v) -> int:
    try:
        i = int(v)
    except (TypeError, ValueError):
        raise VertexLookupError(f"unknown vertex {v!r}") from None
    if i != v or not 0 <= i < graph_n:
        raise VertexLookupError(f"unknown vertex {v!r}")
    return i


def _rows(graph: WeightedGraph, sources) -> np.ndarray:
    return dijkstra(graph.csr(), directed=True, indices=sources)


def shortest_distance(graph: WeightedGraph, source: int, target: int) -> float:
    """Least total weight of a directed path from ``source`` to ``target``."""
    s = _check_vertex(graph.n, source)
    t = _check_vertex(graph.n, target)
    if s == t:
        return 0.0
    return float(_rows(graph, s)[t])


@dataclass(eq=False)
class DistanceTable:
    """Forward distances ``d(i, j)`` between vertices of one graph.

    ``transposed`` tables report ``d(j, i)`` of the underlying graph; they
    are how reverse distances are represented without copying.
    """

    graph: WeightedGraph
    mode: str = "auto"
    transposed: bool = False
    _matrix: np.ndarray | None = field(default=None, repr=False)
    _rows: dict = field(default_factory=dict, repr=False)
    _cols: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.mode == "auto":
            self.mode = "full" if self.graph.n <= FULL_TABLE_LIMIT else "on-demand"
        if self.mode not in ("full", "on-demand"):
            raise InvalidInputError(f"unknown table mode {self.mode!r}")
        if self.mode == "full" and self._matrix is None:
            mat = _rows(self.graph, np.arange(self.graph.n)) if self.graph.n else np.zeros((0, 0))
            self._matrix = mat
            mat.setflags(write=False)

    @classmethod
    def from_graph(cls, graph: WeightedGraph, mode: str = "auto") -> "DistanceTable":
        return cls(graph, mode)

    @property
    def n(self) -> int:
        return self.graph.n

    def _base_row(self, i: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[i]
        if i not in self._rows:
            self._rows[i] = _rows(self.graph, i)
        return self._rows[i]

    def _base_col(self, j: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[:, j]
        if j not in self._cols:
            self._cols[j] = _rows(self.graph.transpose(), j)
        return self._cols[j]

    def row(self, i) -> np.ndarray:
        """Distances from ``i`` to every vertex."""
        i = _check_vertex(self.n, i)
        return self._base_col(i) if self.transposed else self._base_row(i)

    def column(self, j) -> np.ndarray:
        """Distances from every vertex to ``j``."""
        j = _check_vertex(self.n, j)
        return self._base_row(j) if self.transposed else self._base_col(j)

    def d(self, a, b) -> float:
        return float(self.row(a)[_check_vertex(self.n, b)])

    def d_to(self, points, b) -> np.ndarray:
        idx = np.asarray([_check_vertex(self.n, p) for p in points], dtype=np.int64)
        return self.column(b)[idx]

    def d_from(self, a, points) -> np.ndarray:
        idx = np.asarray([_check_vertex(self.n, p) for p in points], dtype=np.int64)
        return self.row(a)[idx]

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            raise InvalidInputError("full matrix unavailable for on-demand tables")
        return self._matrix.T if self.transposed else self._matrix

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for i in range(self.n):
            w.writerow(["inf" if math.isinf(x) else repr(float(x)) for x in self.row(i)])
        return buf.getvalue()

    @staticmethod
    def matrix_from_csv(text: str) -> np.ndarray:
        rows = [[float(c) for c in r] for r in csv.reader(io.StringIO(text)) if r]
        return np.array(rows, dtype=float)


def reverse_distance(table: DistanceTable) -> DistanceTable:
    """Table of ``d_rev(x, y) = d(y, x)``; exact transpose, an involution."""
    return DistanceTable(table.graph, table.mode, not table.transposed, table._matrix, table._rows, table._cols)


@dataclass(frozen=True, eq=False)
class SymmetrizedView:
    """``ds(x, y) = (d(x, y) + d(y, x)) / 2`` over a backing table."""

    backing: DistanceTable

    def d(self, a, b) -> float:
        return 0.5 * (self.backing.d(a, b) + self.backing.d(b, a))

    def matrix(self) -> np.ndarray:
        m = self.backing.matrix()
        return 0.5 * (m + m.T)


def symmetrize(table: DistanceTable, verify: bool = True) -> SymmetrizedView:
    """Symmetrized view; with ``verify`` the backing table's axioms are checked first."""
    if verify and table.mode == "full":
        rep = check_generalized_axioms(table)
        if not rep.separation_ok or not rep.triangle_ok:
            raise InvalidInputError(f"backing table violates the quasi-distance axioms: {rep.summary()}")
    return SymmetrizedView(table)


@dataclass
class AxiomReport:
    separation: list = field(default_factory=list)
    triangle: list = field(default_factory=list)
    convergence_equivalence: list = field(default_factory=list)
    comparability: float = 1.0
    tol: float = AXIOM_TOL

    @property
    def separation_ok(self) -> bool:
        return not self.separation

    @property
    def triangle_ok(self) -> bool:
        return not self.triangle

    @property
    def convergence_ok(self) -> bool:
        return not self.convergence_equivalence

    @property
    def passed(self) -> bool:
        return self.separation_ok and self.triangle_ok and self.convergence_ok

    def summary(self) -> dict:
        return {
            "separation": self.separation_ok,
            "triangle": self.triangle_ok,
            "convergence_equivalence": self.convergence_ok,
            "witnesses": {
                "separation": self.separation[:5],
                "triangle": self.triangle[:5],
                "convergence_equivalence": self.convergence_equivalence[:5],
            },
            "tolerance": self.tol,
        }


def _matrix_of(table) -> np.ndarray:
    if isinstance(table, DistanceTable):
        return table.matrix()
    return np.asarray(table, dtype=float)


def check_generalized_axioms(table, sample_sequences: Iterable[tuple[int, Sequence[int]]] = (),
                             tol: float = AXIOM_TOL, max_witnesses: int = 20) -> AxiomReport:
    """Check separation, triangle inequality and two-sided convergence.

    ``table`` is a full :class:`DistanceTable` or a square array.
    ``sample_sequences`` holds ``(x, [x_0, x_1, ...])`` pairs; for each the
    tail (last quarter) values of ``d(x, x_n)`` and ``d(x_n, x)`` are
    compared: one may vanish within ``tol`` only if the other does.
    """
    D = _matrix_of(table)
    n = D.shape[0]
    rep = AxiomReport(tol=tol)
    diag = np.diag(D)
    for i in np.nonzero(np.abs(diag) > tol)[0][:max_witnesses]:
        rep.separation.append(("nonzero-self", int(i), float(diag[i])))
    zero_pair = (D <= tol) & (D.T <= tol)
    np.fill_diagonal(zero_pair, False)
    for i, j in zip(*np.nonzero(np.triu(zero_pair))):
        if len(rep.separation) >= max_witnesses:
            break
        rep.separation.append(("zero-both-ways", int(i), int(j)))
    for y in range(n):
        via = D[:, y, None] + D[None, y, :]
        bad = D > via + tol
        if bad.any():
            for x, z in zip(*np.nonzero(bad)):
                rep.triangle.append((int(x), y, int(z), float(D[x, z]), float(via[x, z])))
                if len(rep.triangle) >= max_witnesses:
                    break
        if len(rep.triangle) >= max_witnesses:
            break
    ratio = 1.0
    for x, seq in sample_sequences:
        seq = list(seq)
        tail = seq[len(seq) - max(1, len(seq) // 4):]
        fwd = np.array([D[x, p] for p in tail])
        bwd = np.array([D[p, x] for p in tail])
        f0, b0 = bool(np.all(fwd <= tol)), bool(np.all(bwd <= tol))
        if f0 != b0:
            rep.convergence_equivalence.append((int(x), tuple(int(p) for p in tail), float(fwd.max()), float(bwd.max())))
        pos = (fwd > 0) & (bwd > 0) & np.isfinite(fwd) & np.isfinite(bwd)
        if pos.any():
            ratio = max(ratio, float(np.max(np.maximum(fwd[pos] / bwd[pos], bwd[pos] / fwd[pos]))))
    rep.comparability = ratio
    return rep


# ---------------------------------------------------------------------------
# exact distance on the real line for constant Randers data


@dataclass(frozen=True)
class UniformLineDistance:
    """Exact ``d(a, b)`` on an interval of the real line with constant Finsler speeds.

    Moving right costs ``right`` per unit length, moving left ``left``. The
    keys are coordinates (floats). Used for continuous 1-D examples.
    """

    right: float = 1.0
    left: float = 1.0

    def __post_init__(self):
        if not (self.right > 0 and self.left > 0):
            raise InvalidInputError("speeds must be positive")

    def d(self, a, b) -> float:
        delta = float(b) - float(a)
        return delta * self.right if delta >= 0 else -delta * self.left

    def d_to(self, points, b) -> np.ndarray:
        delta = float(b) - np.asarray(points, dtype=float)
        return np.where(delta >= 0, delta * self.right, -delta * self.left)

    def d_from(self, a, points) -> np.ndarray:
        delta = np.asarray(points, dtype=float) - float(a)
        return np.where(delta >= 0, delta * self.right, -delta * self.left)

    def reverse(self) -> "UniformLineDistance":
        return UniformLineDistance(self.left, self.right)
