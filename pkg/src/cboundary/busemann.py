"""Busemann-type functions sampled on probe points, and the past/future sets they define.

A function ``f`` on the base stands for the set ``{(t, x) : T(t) < f(x)}``
(a past set) or ``{(t, x) : T(t) > f(x)}`` (a future set), where ``T`` is the
travel-time primitive of the profile that normalizes the function. The
``tag`` of a sample names that normalization: ``"cl"`` and ``"g"`` use
``T(t) = t``, ``"op"`` uses the warp profile.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .chronology import CurveSample
from .completion import CompletionClass, DeclaredSequence
from .distance import DistanceTable, UniformLineDistance, reverse_distance
from .errors import IncompatibleError, InvalidInputError, MissingClassError, NotTimelikeError
from .warp import WarpProfile, k_omega, primitive, solve_sK

CONV_TOL = 1e-6
INCLUSION_TOL = 1e-9
SPEED_TOL = 1e-12


def reverse_of(metric):
    """The reverse distance of a table or of an exact line distance."""
    if isinstance(metric, DistanceTable):
        return reverse_distance(metric)
    if isinstance(metric, UniformLineDistance):
        return metric.reverse()
    raise InvalidInputError(f"cannot reverse {type(metric).__name__}")


@dataclass(frozen=True)
class ProbeSet:
    points: tuple

    def __post_init__(self):
        pts = tuple(p.item() if isinstance(p, np.generic) else p for p in self.points)
        if not pts:
            raise InvalidInputError("probe set is empty")
        if len(set(pts)) != len(pts):
            raise InvalidInputError("probe set has duplicates")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class BusemannSample:
    """Values of a Busemann-type function on a probe set.

    ``values = base + offset``; shifts only touch ``offset`` so that
    successive shifts compose exactly.
    """

    probes: ProbeSet
    base: np.ndarray
    sign: int = +1
    tag: str = "cl"
    origin: dict = field(default_factory=dict)
    offset: float = 0.0
    tail_increment: float = 0.0
    converged: bool = True
    diagnostic: str = ""

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float).reshape(-1)
        if len(base) != len(self.probes):
            raise InvalidInputError("one value per probe is required")
        inf = np.isinf(base)
        if inf.any() and not inf.all():
            raise InvalidInputError("a Busemann sample is either finite everywhere or infinite everywhere")
        if np.isnan(base).any():
            raise InvalidInputError("NaN in Busemann sample")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)

    @property
    def values(self) -> np.ndarray:
        return self.base + self.offset

    @property
    def finite(self) -> bool:
        return not bool(np.isinf(self.base).any())

    @classmethod
    def infinite(cls, probes: ProbeSet, sign: int, tag: str, origin: dict | None = None, diagnostic: str = "") -> "BusemannSample":
        return cls(probes, np.full(len(probes), sign * math.inf), sign, tag, origin or {}, diagnostic=diagnostic)

    def metadata(self) -> dict:
        origin = {k: (v if isinstance(v, (int, float, str, type(None))) else str(v)) for k, v in self.origin.items()
                  if k != "curve"}
        return {"sign": self.sign, "tag": self.tag, "finite": self.finite, "offset": self.offset,
                "tail_increment": self.tail_increment, "converged": self.converged,
                "diagnostic": self.diagnostic, "origin": origin}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata()) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["probe", "value"])
        for p, v in zip(self.probes.points, self.values):
            w.writerow([p, "inf" if v == math.inf else "-inf" if v == -math.inf else repr(float(v))])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class TerminalSetRep:
    """A past (``IP``) or future (``IF``) set given by its defining function."""

    kind: str
    function: BusemannSample
    is_terminal: bool = True
    projection: object = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("IP", "IF"):
            raise InvalidInputError("kind must be 'IP' or 'IF'")
        expected = 1 if self.kind == "IP" else -1
        if self.function.sign != expected:
            raise InvalidInputError(f"{self.kind} needs a sample of sign {expected:+d}")

    @property
    def values(self) -> np.ndarray:
        return self.function.values

    @property
    def tag(self) -> str:
        return self.function.tag


# ---------------------------------------------------------------------------
# evaluation


def _travel(profile: WarpProfile, times: np.ndarray) -> np.ndarray:
    return np.array([primitive(profile, float(t)) for t in times])


def speed_violations(curve: CurveSample, profile: WarpProfile, metric, allow_lightlike: bool = False,
                     tol: float = SPEED_TOL) -> list[int]:
    """Segments breaking ``d(c_i, c_{i+1}) < travel time`` (``<=`` when lightlike steps are allowed)."""
    keys = curve.keys()
    T = _travel(profile, curve.times)
    bad = []
    for i in range(len(keys) - 1):
        if curve.orientation == "future":
            dist, dT = metric.d(keys[i], keys[i + 1]), T[i + 1] - T[i]
        else:
            dist, dT = metric.d(keys[i + 1], keys[i]), T[i] - T[i + 1]
        ok = dist <= dT + tol * max(1.0, dT) if allow_lightlike else dist < dT
        if not ok:
            bad.append(i)
    return bad


def partial_values(curve: CurveSample, profile: WarpProfile, metric, probes: ProbeSet) -> np.ndarray:
    """Matrix of the approximants at every sample (rows) and probe (columns).

    Future curves give ``T(t_i) - d(x, c_i)``, past curves ``T(t_i) + d(c_i, x)``.
    """
    keys = curve.keys()
    T = _travel(profile, curve.times)
    pts = list(probes.points)
    out = np.empty((len(keys), len(pts)))
    for i, c in enumerate(keys):
        if curve.orientation == "future":
            out[i] = T[i] - metric.d_to(pts, c)
        else:
            out[i] = T[i] + metric.d_from(c, pts)
    return out


def busemann_eval(curve: CurveSample, profile: WarpProfile, metric, probes: ProbeSet, tag: str | None = None,
                  allow_lightlike: bool = False, conv_tol: float = CONV_TOL) -> BusemannSample:
    """Busemann function of a speed-bounded curve, read at its last sample.

    The approximants are monotone in the sample index, so the truncation
    error is one-sided; ``tail_increment`` is the change over the last
    doubling of the time range. A curve whose approximants keep growing at
    least half as fast as the travel time (and never settle) has the
    infinite function (the whole spacetime).
    """
    bad = speed_violations(curve, profile, metric, allow_lightlike)
    if bad:
        raise NotTimelikeError(f"speed bound fails on segments {bad[:5]}")
    sign = 1 if curve.orientation == "future" else -1
    tag = tag or ("cl" if profile.constant == 1.0 else profile.label)
    vals = partial_values(curve, profile, metric, probes)
    ts = curve.times
    half = ts[0] + 0.5 * (ts[-1] - ts[0])
    mid = int(np.argmin(np.abs(ts - half)))
    if mid == len(ts) - 1:
        mid = max(0, len(ts) - 2)
    inc = float(np.max(np.abs(vals[-1] - vals[mid])))
    T_last, T_mid = primitive(profile, float(ts[-1])), primitive(profile, float(ts[mid]))
    origin = {"kind": "curve", "curve": curve, "omega": curve.omega}
    converged = inc < conv_tol
    if not converged and math.isinf(curve.omega) and inc >= 0.5 * abs(T_last - T_mid):
        return BusemannSample.infinite(probes, sign, tag, origin, diagnostic="approximants grow with the travel time")
    return BusemannSample(probes, vals[-1], sign, tag, origin, tail_increment=inc, converged=converged)


def _target_key(target):
    if isinstance(target, CompletionClass):
        return target.representative.points[-1]
    if isinstance(target, DeclaredSequence):
        return target.points[-1]
    if target is None or isinstance(target, str):
        raise MissingClassError(f"no declared sequence for target {target!r}")
    return target


def closed_form_point(omega: float, target, sign: int, profile: WarpProfile, metric, probes: ProbeSet,
                      tag: str | None = None) -> BusemannSample:
    """Function of the set generated at ``(omega, target)``.

    ``metric`` is the distance matching the sign (forward for ``+1``,
    reverse for ``-1``); values are ``T(omega) - sign * dq(probe, target)``.
    """
    if not math.isfinite(omega):
        raise InvalidInputError("omega must be finite for a point")
    key = _target_key(target)
    T = primitive(profile, float(omega))
    dist = metric.d_to(list(probes.points), key)
    tag = tag or ("cl" if profile.constant == 1.0 else profile.label)
    label = target.label if isinstance(target, (CompletionClass, DeclaredSequence)) else key
    origin = {"kind": "point", "omega": float(omega), "target": label}
    return BusemannSample(probes, T - sign * dist, sign, tag, origin)


def shift(sample: BusemannSample, K: float, profile: WarpProfile | None = None, metric=None) -> BusemannSample:
    """Act by ``K`` on the function: values move by ``K``.

    For curve origins the time-reparameterized curve is attached (and its
    speed bound re-checked when ``metric`` is given); for point origins the
    moved time coordinate is recorded.
    """
    if isinstance(K, bool) or not isinstance(K, (int, float, np.floating, np.integer)) or not math.isfinite(K):
        raise InvalidInputError(f"shift must be a finite real, got {K!r}")
    if not sample.finite:
        raise InvalidInputError("cannot shift an infinite sample")
    K = float(K)
    origin = dict(sample.origin)
    if profile is not None and K != 0.0:
        if origin.get("kind") == "curve":
            curve: CurveSample = origin["curve"]
            new_times = np.array([solve_sK(profile, float(t), K) for t in curve.times])
            new_omega = curve.omega if math.isinf(curve.omega) else solve_sK(profile, curve.omega, K)
            moved = CurveSample(new_times, curve.positions, new_omega, curve.orientation, curve.vertices)
            if metric is not None:
                bad = speed_violations(moved, profile, metric, allow_lightlike=True)
                if bad:
                    raise NotTimelikeError(f"reparameterized curve breaks the speed bound on {bad[:5]}")
            origin["curve"] = moved
            origin["omega"] = new_omega
        elif origin.get("kind") == "point":
            origin["omega"] = solve_sK(profile, origin["omega"], K)
    return replace(sample, offset=sample.offset + K, origin=origin)


def translate_cl_op(sample: BusemannSample, omega: float, profile: WarpProfile) -> BusemannSample:
    """Move a narrow-cone function to the wide-cone normalization: add ``k_omega(omega)``.

    When the warp constant diverges the image is the infinite sample and
    the diagnostic records the collapse onto the apex point.
    """
    if sample.tag != "cl":
        raise IncompatibleError(f"expected a 'cl' sample, got {sample.tag!r}")
    K = k_omega(profile, omega)
    origin = dict(sample.origin, translated_from="cl", omega=omega)
    if math.isinf(K):
        return BusemannSample.infinite(sample.probes, sample.sign, "op", origin,
                                       diagnostic="warp constant diverges: image collapses to the apex")
    if not sample.finite:
        return replace(sample, tag="op", origin=origin)
    return BusemannSample(sample.probes, sample.values + K, sample.sign, "op", origin)


def retag(sample: BusemannSample, tag: str, source: WarpProfile, target: WarpProfile) -> BusemannSample:
    """Re-express a function in another time normalization (same underlying set)."""
    if not sample.finite:
        return replace(sample, tag=tag)
    times = [solve_sK(source, 0.0, float(v)) for v in sample.values]
    vals = [primitive(target, t) for t in times]
    return BusemannSample(sample.probes, np.array(vals), sample.sign, tag, dict(sample.origin))


# ---------------------------------------------------------------------------
# order and limits


@dataclass(frozen=True)
class InclusionResult:
    relation: str  # "equal" | "subset" | "superset" | "incomparable"
    strict_subset: bool
    strict_superset: bool


def _check_compatible(a: TerminalSetRep, b: TerminalSetRep):
    if a.kind != b.kind:
        raise IncompatibleError("cannot compare a past set with a future set")
    if a.tag != b.tag:
        raise IncompatibleError(f"different normalizations {a.tag!r} and {b.tag!r}")
    if a.function.probes != b.function.probes:
        raise IncompatibleError("samples live on different probe sets")


def ip_inclusion(a: TerminalSetRep, b: TerminalSetRep, tol: float = INCLUSION_TOL) -> InclusionResult:
    """Inclusion between two sets from the pointwise order of their functions."""
    _check_compatible(a, b)
    fa, fb = a.values, b.values
    if a.kind == "IF":
        fa, fb = -fa, -fb
    a_in_b = bool(np.all(fa <= fb + tol))
    b_in_a = bool(np.all(fb <= fa + tol))
    strict_ab = a_in_b and bool(np.any(fa < fb - tol))
    strict_ba = b_in_a and bool(np.any(fb < fa - tol))
    if a_in_b and b_in_a:
        rel = "equal"
    elif a_in_b:
        rel = "subset"
    elif b_in_a:
        rel = "superset"
    else:
        rel = "incomparable"
    return InclusionResult(rel, strict_ab, strict_ba)


def window_bounds(sequence: Sequence[BusemannSample], window: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise min and max over the last ``window`` samples (last quarter by default)."""
    if not sequence:
        raise InvalidInputError("empty sequence")
    w = window or max(1, len(sequence) // 4)
    tail = np.array([s.values for s in sequence[-w:]])
    return tail.min(axis=0), tail.max(axis=0)


def limit_operator(candidates: Sequence[BusemannSample], sequence: Sequence[BusemannSample], kind: str = "future",
                   window: int | None = None, tol: float = CONV_TOL) -> list[int]:
    """Indices of the candidates selected as limits of ``sequence``.

    Future kind keeps ``f`` with ``f <= liminf`` that is maximal among
    candidates lying between ``f`` and ``limsup``; past kind is the mirror
    image. The answer is relative to the given candidate family.
    """
    if not candidates:
        raise InvalidInputError("empty candidate family")
    if kind not in ("future", "past"):
        raise InvalidInputError("kind must be 'future' or 'past'")
    probes = candidates[0].probes
    if any(c.probes != probes for c in candidates) or any(s.probes != probes for s in sequence):
        raise IncompatibleError("candidates and sequence must share probes")
    lo, hi = window_bounds(sequence, window)
    vals = [c.values for c in candidates]
    if kind == "past":
        vals = [-v for v in vals]
        lo, hi = -hi, -lo
    chosen = []
    for i, f in enumerate(vals):
        if not np.all(f <= lo + tol):
            continue
        dominated = False
        for j, g in enumerate(vals):
            if j == i or np.all(np.abs(g - f) <= tol):
                continue
            if np.all(f <= g + tol) and np.all(g <= hi + tol):
                dominated = True
                break
        if not dominated:
            chosen.append(i)
    return chosen
