"""Declared Cauchy sequences, completion classes and the extended distance between them.

Boundary points are not discovered; callers declare sequences of mesh
vertices that approach the boundary. Limits are read off the tail of each
finite sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distance import AXIOM_TOL, reverse_distance
from .errors import InvalidInputError, NotCauchyError

TAIL_TOL = 1e-4
TAIL_K = 4
DQ_CAP = 1e12


def _quarter(n: int) -> int:
    return max(2, n // 4)


@dataclass(frozen=True)
class DeclaredSequence:
    """A finite prefix ``x_0, x_1, ...`` of a sequence of mesh vertices."""

    points: tuple[int, ...]
    label: str = ""
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points)
        if len(pts) < 8:
            raise InvalidInputError(f"sequence {self.label!r} needs at least 8 points, got {len(pts)}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def constant(cls, vertex: int, label: str = "", length: int = 8) -> "DeclaredSequence":
        return cls(tuple([vertex] * length), label or f"const:{vertex}")

    @property
    def tail(self) -> tuple[int, ...]:
        return self.points[len(self.points) - _quarter(len(self.points)):]

    def tail_spread(self, table) -> float:
        """``sup d(x_n, x_m)`` over tail indices ``n <= m``."""
        tail = self.tail
        worst = 0.0
        for a, p in enumerate(tail):
            vals = table.d_from(p, tail[a:])
            worst = max(worst, float(np.max(vals)))
        return worst

    def is_forward_cauchy(self, table) -> bool:
        return self.tail_spread(table) <= self.tail_tol

    def is_backward_cauchy(self, table) -> bool:
        return self.tail_spread(reverse_distance(table)) <= self.tail_tol


@dataclass(frozen=True)
class DQEstimate:
    value: float
    variation: float


def dq_estimate(a: DeclaredSequence, b: DeclaredSequence, table, k: int = TAIL_K, cap: float = DQ_CAP,
                check: bool = True) -> DQEstimate:
    """Iterated limit ``lim_n lim_m d(a_n, b_m)`` read from the sequence tails.

    The value is ``d`` at the last indices; ``variation`` is the largest
    deviation from it over the last ``k`` diagonal pairs.
    """
    if check:
        for s in (a, b):
            if not s.is_forward_cauchy(table):
                raise NotCauchyError(f"sequence {s.label!r} fails the Cauchy tail check")
    k = max(1, min(k, len(a.points), len(b.points)))
    vals = np.array([table.d(a.points[-j], b.points[-j]) for j in range(k, 0, -1)])
    last = float(vals[-1])
    if not math.isfinite(last) or last > cap:
        return DQEstimate(math.inf, math.inf)
    finite = vals[np.isfinite(vals)]
    variation = float(np.max(np.abs(finite - last))) if len(finite) == len(vals) else math.inf
    return DQEstimate(last, variation)


def dq(a: DeclaredSequence, b: DeclaredSequence, table, **kw) -> float:
    return dq_estimate(a, b, table, **kw).value


def dq_to_target(point: int, target, table) -> float:
    """``lim_m d(point, y_m)``: distance from a vertex to a vertex or a declared class."""
    if isinstance(target, CompletionClass):
        target = target.representative
    if isinstance(target, DeclaredSequence):
        return table.d(point, target.points[-1])
    return table.d(point, target)


@dataclass
class CompletionClass:
    members: list[DeclaredSequence]
    forward: bool
    backward: bool
    label: str = ""

    @property
    def symmetrized(self) -> bool:
        return self.forward and self.backward

    @property
    def representative(self) -> DeclaredSequence:
        return self.members[0]

    @property
    def flags(self) -> dict:
        return {"forward": self.forward, "backward": self.backward, "symmetrized": self.symmetrized}


def related(a: DeclaredSequence, b: DeclaredSequence, table, tol: float | None = None) -> bool:
    """Both iterated limits between ``a`` and ``b`` vanish within tolerance."""
    tol = max(a.tail_tol, b.tail_tol) if tol is None else tol
    return dq(a, b, table, check=False) <= tol and dq(b, a, table, check=False) <= tol


def classify_boundary(sequences: Sequence[DeclaredSequence], table, tol: float | None = None) -> list[CompletionClass]:
    """Partition declared sequences into completion classes.

    Forward-Cauchy sequences are compared with ``d``, backward-only ones with
    the reverse distance; a sequence joins the first class whose
    representative it is related to.
    """
    rev = reverse_distance(table)
    flagged = [(s, s.is_forward_cauchy(table), s.is_backward_cauchy(table)) for s in sequences]
    classes: list[tuple[CompletionClass, list[bool], list[bool]]] = []
    for s, fw, bw in flagged:
        if not (fw or bw):
            continue
        metric = table if fw else rev
        for cls, fws, bws in classes:
            rep = cls.representative
            same_side = fws[0] if fw else (bws[0] and not fws[0])
            if same_side and related(rep, s, metric, tol):
                cls.members.append(s)
                fws.append(fw)
                bws.append(bw)
                break
        else:
            classes.append((CompletionClass([s], fw, bw, s.label), [fw], [bw]))
    out = []
    for cls, fws, bws in classes:
        cls.forward = all(fws)
        cls.backward = all(bws)
        out.append(cls)
    return out


def dq_matrix(classes: Sequence[CompletionClass], table) -> np.ndarray:
    reps = [c.representative for c in classes]
    return np.array([[dq(a, b, table, check=False) for b in reps] for a in reps], dtype=float).reshape(len(reps), len(reps))


@dataclass
class DQReport:
    triangle: list = field(default_factory=list)
    separation: list = field(default_factory=list)
    convergence_equivalence: list = field(default_factory=list)
    tol: float = AXIOM_TOL

    @property
    def passed(self) -> bool:
        return not (self.triangle or self.separation or self.convergence_equivalence)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "triangle": self.triangle, "separation": self.separation,
                "convergence_equivalence": self.convergence_equivalence, "tolerance": self.tol}


def check_dq_generalized(classes: Sequence[CompletionClass], table, sequences: Sequence[DeclaredSequence] = (),
                         tol: float | None = None) -> DQReport:
    """Test the extended distance on the finite class set.

    * triangle inequality between class representatives;
    * separation: distinct classes may not be at distance ~0 in either direction
      (a one-sided zero breaks the two-sided convergence property for the
      constant sequence at the target);
    * convergence equivalence against every declared sequence: ``d(a, x_n) -> 0``
      iff ``d(x_n, a) -> 0``.
    """
    tol = TAIL_TOL if tol is None else tol
    rep = DQReport(tol=tol)
    D = dq_matrix(classes, table)
    n = len(classes)
    labels = [c.label for c in classes]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(n):
                if D[i, k] > D[i, j] + D[j, k] + tol:
                    rep.triangle.append((labels[i], labels[j], labels[k]))
            if D[i, j] <= tol or D[j, i] <= tol:
                rep.separation.append((labels[i], labels[j], float(D[i, j]), float(D[j, i])))
    for c in classes:
        end = c.representative.points[-1]
        for s in sequences:
            tail = s.tail
            fwd = np.array([table.d(end, p) for p in tail])
            bwd = np.array([table.d(p, end) for p in tail])
            if bool(np.all(fwd <= tol)) != bool(np.all(bwd <= tol)):
                rep.convergence_equivalence.append((c.label, s.label, float(fwd.max()), float(bwd.max())))
    return rep


def classes_to_json(classes: Sequence[CompletionClass], table) -> str:
    D = dq_matrix(classes, table)
    payload = [
        {
            "label": c.label,
            "members": [{"label": m.label, "points": list(m.points)} for m in c.members],
            "flags": c.flags,
            "dq_matrix": [None if math.isinf(x) else float(x) for x in D[i]],
        }
        for i, c in enumerate(classes)
    ]
    return json.dumps(payload, indent=2)
