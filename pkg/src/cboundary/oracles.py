"""Brute-force cross-checks, kept deliberately naive and independent of the fast paths."""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np


def enumerate_path_distance(n: int, weights: Mapping[tuple[int, int], float], source: int, target: int) -> float:
    """Minimum weight over every simple directed path from ``source`` to ``target``."""
    if source == target:
        return 0.0
    out: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n)}
    for (u, v), w in weights.items():
        out[u].append((v, w))
    best = math.inf
    stack = [(source, 0.0, frozenset([source]))]
    while stack:
        u, acc, seen = stack.pop()
        for v, w in out[u]:
            if v in seen:
                continue
            total = acc + w
            if v == target:
                best = min(best, total)
            else:
                stack.append((v, total, seen | {v}))
    return best


def floyd_warshall(n: int, weights: Mapping[tuple[int, int], float]) -> np.ndarray:
    D = np.full((n, n), math.inf)
    np.fill_diagonal(D, 0.0)
    for (u, v), w in weights.items():
        if u != v:
            D[u, v] = min(D[u, v], w)
    for k in range(n):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return D


def grid_timelike_reach(n_t: int, n_x: int) -> np.ndarray:
    """Reachability by timelike lattice paths on a unit ``n_t`` by ``n_x`` strip.

    Paths move one time step at a time and at most one cell sideways; a
    path counts as timelike when it contains at least one purely vertical
    step. ``R[t0, x0, t1, x1]`` is True iff such a path joins the events.
    """
    R = np.zeros((n_t, n_x, n_t, n_x), dtype=bool)
    for t0 in range(n_t):
        for x0 in range(n_x):
            light = np.zeros(n_x, dtype=bool)  # reached using diagonal steps only
            timed = np.zeros(n_x, dtype=bool)  # reached with a vertical step
            light[x0] = True
            for t in range(t0 + 1, n_t):
                spread_t = timed.copy()
                spread_t[1:] |= timed[:-1]
                spread_t[:-1] |= timed[1:]
                new_timed = spread_t | light  # a vertical step from a lightlike prefix
                new_light = np.zeros(n_x, dtype=bool)
                new_light[1:] |= light[:-1]
                new_light[:-1] |= light[1:]
                light, timed = new_light, new_timed
                R[t0, x0, t] = timed
    return R
