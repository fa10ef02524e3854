"""Time factor profiles and their integral transforms.

A profile is a positive function alpha(t). The toolkit needs

* the travel time ``T(t0, t1) = int_{t0}^{t1} ds / alpha(s)``,
* the warp constant ``K(omega) = int_0^omega (1/alpha - 1) ds``,
* the inverse problem ``int_t^s dr / alpha = K`` for ``s``,
* decisions on whether the improper versions of these integrals converge.

Quadrature is a hand-written adaptive Simpson rule; improper integrals are
summed over doubling windows with an explicit growth test so that every
decision terminates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidProfileError, UndecidableError, UnsolvableError
from .expr import Expression

log = logging.getLogger(__name__)

QUAD_TOL = 1e-9
MAX_DEPTH = 40
MAX_DOUBLINGS = 60
GROWTH_FACTOR = 0.9
GROWTH_RUN = 6


# ---------------------------------------------------------------------------
# quadrature


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    max_depth: int = MAX_DEPTH,
    rel_tol: float = 1e-13,
) -> float:
    """Integrate ``f`` over [a, b] with adaptive Simpson and Richardson correction.

    Each panel is accepted when the two-halves estimate differs from the
    whole-panel estimate by at most ``15 * tol_panel`` or by a relative
    amount ``rel_tol``; the tolerance is split evenly between children.
    Uses an explicit stack, so ``max_depth`` is the only recursion guard.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth, rel_tol)
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - est
        if depth >= max_depth or abs(delta) <= 15.0 * eps or abs(delta) <= rel_tol * abs(left + right):
            total += left + right + delta / 15.0
            continue
        if not math.isfinite(delta):
            total += left + right
            continue
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return total


@dataclass(frozen=True)
class ImproperResult:
    """Outcome of an improper integral over [a, +inf) or (-inf, a]."""

    value: float
    status: str  # "convergent" | "divergent" | "indeterminate"
    windows: int
    increments: tuple[float, ...] = ()

    @property
    def converges(self) -> bool | None:
        return {"convergent": True, "divergent": False}.get(self.status)


def improper_integral(
    f: Callable[[float], float],
    a: float,
    direction: int = +1,
    tol: float = QUAD_TOL,
    max_doublings: int = MAX_DOUBLINGS,
) -> ImproperResult:
    """Integrate ``f`` from ``a`` towards ``direction * inf``.

    Windows have lengths 1, 1, 2, 4, 8, ... . The integral is convergent
    once two consecutive window increments drop below ``tol / 10`` while
    shrinking; the remaining tail is estimated geometrically. It is
    divergent when for ``GROWTH_RUN`` consecutive doublings the increment
    stays above ``tol`` and is at least ``GROWTH_FACTOR`` times the
    previous one (constant-rate and logarithmic divergence both qualify).
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    g = f if direction == 1 else (lambda u: f(-u))
    start = a if direction == 1 else -a
    total = 0.0
    increments: list[float] = []
    growth = 0
    small = 0
    edge = 0.0
    for k in range(max_doublings):
        width = 1.0 if k == 0 else max(1.0, edge)
        lo, hi = start + edge, start + edge + width
        inc = adaptive_simpson(g, lo, hi, tol=tol)
        if not math.isfinite(inc):
            return ImproperResult(math.inf, "divergent", k + 1, tuple(increments))
        total += inc
        increments.append(inc)
        edge += width
        mag = abs(inc)
        if k > 0:
            prev = abs(increments[-2])
            if mag > tol and mag >= GROWTH_FACTOR * prev:
                growth += 1
            else:
                growth = 0
            if mag <= 0.1 * tol and mag <= prev + 1e-300:
                small += 1
            else:
                small = 0
        if growth >= GROWTH_RUN:
            sign = 1.0 if total > 0 else -1.0
            return ImproperResult(sign * math.inf, "divergent", k + 1, tuple(increments))
        if small >= 2:
            prev = abs(increments[-2])
            ratio = mag / prev if prev > 0 else 0.0
            tail = inc * ratio / (1.0 - ratio) if ratio < 1.0 else 0.0
            return ImproperResult(total + tail, "convergent", k + 1, tuple(increments))
    return ImproperResult(total, "indeterminate", max_doublings, tuple(increments))


# ---------------------------------------------------------------------------
# profiles


@dataclass(eq=False)
class WarpProfile:
    """A positive time factor alpha(t), from an expression or a sample table.

    Sample tables are interpolated linearly and held constant outside the
    sampled range.
    """

    alpha: Callable[[float], float]
    label: str = "custom"
    expression: str | None = None
    samples: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    constant: float | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_expression(cls, text: str, label: str | None = None) -> "WarpProfile":
        ex = Expression(text, ("t",))
        const = None
        if ex.is_constant:
            const = ex.constant_value()
            if not (math.isfinite(const) and const > 0):
                raise InvalidProfileError(f"constant profile must be positive, got {const}")
        return cls(alpha=ex, label=label or text, expression=text, constant=const)

    @classmethod
    def from_samples(cls, times: Sequence[float], values: Sequence[float], label: str = "samples") -> "WarpProfile":
        ts = np.asarray(times, dtype=float)
        vs = np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.shape != vs.shape or len(ts) < 2:
            raise InvalidProfileError("sample table needs matching 1-D arrays of length >= 2")
        if np.any(np.diff(ts) <= 0):
            raise InvalidProfileError("sample times must be strictly increasing")
        if np.any(~np.isfinite(vs)) or np.any(vs <= 0):
            raise InvalidProfileError("sample values must be finite and positive")

        def alpha(t):
            return np.interp(t, ts, vs) if isinstance(t, np.ndarray) else float(np.interp(t, ts, vs))

        const = float(vs[0]) if np.all(vs == vs[0]) else None
        return cls(alpha=alpha, label=label, samples=(tuple(ts.tolist()), tuple(vs.tolist())), constant=const)

    @classmethod
    def unit(cls) -> "WarpProfile":
        return cls.from_expression("1", label="cl")

    def __call__(self, t):
        return self.alpha(t)

    def inverse(self, t: float) -> float:
        """1/alpha(t), rejecting non-positive or non-finite values."""
        a = self.alpha(t)
        if not (a > 0) or not math.isfinite(a):
            raise InvalidProfileError(f"alpha({t}) = {a} is not positive and finite")
        return 1.0 / a

    def excess(self, t: float) -> float:
        return self.inverse(t) - 1.0

    def validate(self, lo: float = -50.0, hi: float = 50.0, n: int = 2001, require_le_one: bool = False) -> bool:
        """Check positivity on a sample grid; returns whether alpha <= 1 there."""
        ts = np.linspace(lo, hi, n)
        vals = np.asarray(self.alpha(ts), dtype=float) * np.ones_like(ts)
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            bad = ts[np.argmax(~np.isfinite(vals) | (vals <= 0))]
            raise InvalidProfileError(f"alpha is not positive near t = {bad}")
        le_one = bool(np.all(vals <= 1.0 + 1e-15))
        if require_le_one and not le_one:
            bad = ts[np.argmax(vals > 1.0 + 1e-15)]
            raise InvalidProfileError(f"alpha exceeds 1 near t = {bad}")
        return le_one

    def to_dict(self) -> dict:
        if self.expression is not None:
            return {"expression": self.expression}
        assert self.samples is not None
        return {"samples": {"t": list(self.samples[0]), "alpha": list(self.samples[1])}}


def _improper(profile: WarpProfile, fn_name: str, a: float, direction: int) -> ImproperResult:
    key = (fn_name, a, direction)
    if key not in profile._cache:
        f = profile.inverse if fn_name == "inverse" else profile.excess
        profile._cache[key] = improper_integral(f, a, direction)
    return profile._cache[key]


def time_integral(profile: WarpProfile, t0: float, t1: float, tol: float = 1e-10) -> float:
    """Travel time ``int_{t0}^{t1} ds/alpha``; antisymmetric in its limits.

    Infinite limits give the improper value, +inf (or -inf) when divergent.
    """
    if t0 == t1:
        return 0.0
    if t0 > t1:
        return -time_integral(profile, t1, t0, tol)
    if profile.constant is not None:
        return (t1 - t0) / profile.constant
    if math.isinf(t0) and math.isinf(t1):
        return time_integral(profile, -math.inf, 0.0, tol) + time_integral(profile, 0.0, math.inf, tol)
    if math.isinf(t1):
        res = _improper(profile, "inverse", t0, +1)
        if res.status == "indeterminate":
            raise UndecidableError(f"improper travel time from {t0} undecided after {res.windows} windows")
        return math.inf if res.status == "divergent" else res.value
    if math.isinf(t0):
        res = _improper(profile, "inverse", t1, -1)
        if res.status == "indeterminate":
            raise UndecidableError(f"improper travel time to {t1} undecided after {res.windows} windows")
        return math.inf if res.status == "divergent" else res.value
    return adaptive_simpson(profile.inverse, t0, t1, tol=tol)


def primitive(profile: WarpProfile, t: float) -> float:
    """``time_integral(profile, 0, t)``, memoized per profile."""
    key = ("primitive", t)
    val = profile._cache.get(key)
    if val is None:
        val = time_integral(profile, 0.0, t)
        profile._cache[key] = val
    return val


def k_omega(profile: WarpProfile, omega: float, tol: float = 1e-10) -> float:
    """Warp constant ``int_0^omega (1/alpha - 1) ds`` (signed for omega < 0).

    ``omega = -inf`` gives minus the improper integral over the negative
    half-line, which past-directed functions need.
    """
    if math.isnan(omega):
        raise InvalidProfileError("omega must not be NaN")
    if omega == 0:
        return 0.0
    if profile.constant is not None:
        rate = 1.0 / profile.constant - 1.0
        if math.isinf(omega):
            return 0.0 if rate == 0 else math.copysign(math.inf, rate * omega)
        return omega * rate
    if math.isinf(omega):
        direction = 1 if omega > 0 else -1
        res = _improper(profile, "excess", 0.0, direction)
        if res.status == "indeterminate":
            log.warning("warp constant undecided after %d windows; returning partial sum", res.windows)
        return direction * res.value
    return adaptive_simpson(profile.excess, 0.0, omega, tol=tol)


@dataclass(frozen=True)
class ConditionFlags:
    """Tri-state flags (True / False / None for undecided) plus diagnostics."""

    intcond_future: bool | None
    intcond_past: bool | None
    e4: bool | None
    e4_prime: bool | None
    alpha_le_1: bool
    diagnostics: dict

    def as_dict(self) -> dict:
        return {
            "intcond_future": self.intcond_future,
            "intcond_past": self.intcond_past,
            "e4": self.e4,
            "e4_prime": self.e4_prime,
            "alpha_le_1": self.alpha_le_1,
            "diagnostics": self.diagnostics,
        }


def check_conditions(profile: WarpProfile) -> ConditionFlags:
    """Decide divergence of the travel time and convergence of the warp constant, both ways.

    ``intcond_*``: travel time to +inf / from -inf is infinite.
    ``e4``: ``int_0^inf (1/alpha - 1)`` finite; ``e4_prime``: same on (-inf, 0].
    """
    le_one = profile.validate()
    fut = _improper(profile, "inverse", 0.0, +1)
    past = _improper(profile, "inverse", 0.0, -1)
    ex_f = _improper(profile, "excess", 0.0, +1)
    ex_p = _improper(profile, "excess", 0.0, -1)
    intcond_future = None if fut.status == "indeterminate" else fut.status == "divergent"
    intcond_past = None if past.status == "indeterminate" else past.status == "divergent"
    e4 = ex_f.converges
    e4_prime = ex_p.converges
    diagnostics = {
        name: {"status": r.status, "value": r.value, "windows": r.windows}
        for name, r in (("travel_future", fut), ("travel_past", past), ("excess_future", ex_f), ("excess_past", ex_p))
    }
    # a finite excess forces an infinite travel time: int 1/alpha = int (1/alpha - 1) + int 1
    if e4 is True:
        assert intcond_future is not False, "finite warp constant but finite travel time"
        intcond_future = True
    if e4_prime is True:
        assert intcond_past is not False, "finite past warp constant but finite travel time"
        intcond_past = True
    return ConditionFlags(intcond_future, intcond_past, e4, e4_prime, le_one, diagnostics)


def solve_sK(profile: WarpProfile, t: float, K: float, tol: float = 1e-9) -> float:
    """Return ``s`` with ``int_t^s dr/alpha = K``.

    Brackets by doubling the search width, then refines with safeguarded
    Newton steps (the derivative of the travel time is ``1/alpha(s)``).
    """
    if not math.isfinite(K) or not math.isfinite(t):
        raise UnsolvableError(f"t and K must be finite, got t={t}, K={K}")
    if K == 0:
        return t
    if profile.constant is not None:
        return t + K * profile.constant
    direction = 1.0 if K > 0 else -1.0
    target = abs(K)

    def gap(s: float) -> float:
        return direction * time_integral(profile, t, s, tol=tol * 1e-3) - target

    width = max(1.0, target * profile(t))
    lo, hi = t, t + direction * width
    g_hi = gap(hi)
    while g_hi < 0:
        if width > 2.0**MAX_DOUBLINGS:
            raise UnsolvableError("travel time does not reach K on this side")
        lo = hi
        width *= 2.0
        hi = t + direction * width
        g_hi = gap(hi)
        if g_hi < 0 and width > 2.0**8:
            # the whole half-line may have finite travel time
            res = _improper(profile, "inverse", t, int(direction))
            if res.status == "convergent" and res.value < target:
                raise UnsolvableError(f"travel time from {t} is bounded by {res.value} < {target}")
    a, b = (lo, hi) if lo < hi else (hi, lo)
    s = 0.5 * (a + b)
    for _ in range(200):
        g = gap(s)
        if abs(g) <= 1e-3 * tol:
            return s
        # the gap is increasing in direction * s
        if (g < 0) == (direction > 0):
            a = s
        else:
            b = s
        step = -g * profile(s) * direction
        cand = s + step
        s = cand if a < cand < b else 0.5 * (a + b)
        if b - a < 1e-15 * max(1.0, abs(s)):
            return s
    return s
