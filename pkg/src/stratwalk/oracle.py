"""Brute-force evolution of the full walk on all ``2**n - 1`` states.

Independent of the lumped kernels: each step averages the ``n(n-1)``
deterministic pair moves, each of which is an involution of the cube.
"""
from __future__ import annotations

import math

import numpy as np

from .cube import CubeState
from .errors import PreconditionError

MAX_ORACLE_N = 12


class FullChainOracle:
    """Dense law of ``Z_t``; entry ``x`` is the mass on packed state ``x``."""

    def __init__(self, n: int):
        if not 2 <= n <= MAX_ORACLE_N:
            raise PreconditionError(f"oracle supports 2 <= n <= {MAX_ORACLE_N}, got {n}")
        self.n = n
        x = np.arange(1 << n, dtype=np.int64)
        self._perms = [x ^ (((x >> i) & 1) << j)
                       for i in range(n) for j in range(n) if i != j]

    def point(self, start: CubeState) -> np.ndarray:
        if start.n != self.n:
            raise PreconditionError("start dimension does not match oracle")
        p = np.zeros(1 << self.n)
        p[start.bits] = 1.0
        return p

    def apply(self, p: np.ndarray) -> np.ndarray:
        # each move is an involution, so pulling back equals pushing forward
        out = np.zeros_like(p)
        for perm in self._perms:
            out += p[perm]
        return out / len(self._perms)

    def stationary(self) -> np.ndarray:
        pi = np.full(1 << self.n, 1.0 / ((1 << self.n) - 1))
        pi[0] = 0.0
        return pi

    def evolve(self, start: CubeState, t: int) -> np.ndarray:
        p = self.point(start)
        for _ in range(t):
            p = self.apply(p)
        return p

    def tv_curve(self, start: CubeState, t_max: int) -> np.ndarray:
        pi = self.stationary()
        p = self.point(start)
        out = [0.5 * math.fsum(np.abs(p - pi))]
        for _ in range(t_max):
            p = self.apply(p)
            out.append(0.5 * math.fsum(np.abs(p - pi)))
        return np.array(out)


def oracle_evolve(n: int, start: CubeState, t: int) -> np.ndarray:
    return FullChainOracle(n).evolve(start, t)


def block_lift(n: int, m: int, w_probs, w_labels) -> np.ndarray:
    """Spread a block-count law uniformly over the vertices of each class.

    This is the law of ``Z_t`` when the start vertex has its ones exactly on
    the first ``m`` coordinates.
    """
    x = np.arange(1 << n, dtype=np.int64)
    top = np.bitwise_count(x & ((1 << m) - 1)).astype(np.int64)
    bot = np.bitwise_count(x >> m).astype(np.int64)
    lookup = np.zeros((m + 1, n - m + 1))
    for (a, b), q in zip(w_labels, w_probs):
        lookup[a, b] = q / (math.comb(m, a) * math.comb(n - m, b))
    out = lookup[top, bot]
    out[0] = 0.0
    return out
