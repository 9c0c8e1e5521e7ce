"""Couplings of two copies of the walk.

Two constructions are provided:

* the Hamming coupling, which pairs a weight chain with a second copy and
  anti-correlates their move indicators as strongly as the marginals allow,
  merging the chains once they meet;
* the pairing coupling of two full walks with equal weight, which matches
  ones with ones and zeros with zeros by a fresh uniform permutation each
  step and replays the first walk's move through that matching.

The pairing coupling exists in two forms. ``pair_coupled_step`` materialises
the permutation on actual cube states. The ``*_w`` batch functions sample
only the block memberships of ``i, j, pi(i), pi(j)``, which is all the block
counts depend on, and run many couplings in lockstep.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .cube import CubeState, OrderedPair, block_counts, hamming, sample_pair, step
from .errors import PreconditionError
from .lumped import h_stationary
from .rng import RngStream, StreamBatch


def default_t_cap(n: int) -> int:
    return math.ceil(50 * n * math.log(n))


class CouplingOutcome(NamedTuple):
    tau: int | None  # None when the cap was hit first
    capped: bool


# ------------------------------------------------------------ Hamming coupling

@dataclass(frozen=True)
class HCouplingState:
    n: int
    h1: int
    h2: int
    met: bool = False

    def __post_init__(self):
        if not (1 <= self.h1 <= self.n and 1 <= self.h2 <= self.n):
            raise PreconditionError(f"weights ({self.h1}, {self.h2}) outside 1..{self.n}")
        if self.met and self.h1 != self.h2:
            raise PreconditionError("met chains must have equal weight")
        if self.h1 == self.h2 and not self.met:
            object.__setattr__(self, "met", True)


def _h_move(h, moves, d):
    # a moving chain goes down iff the target coordinate is another one
    return np.where(moves, np.where(d < h - 1, h - 1, h + 1), h)


def h_coupled_step(state: HCouplingState, rng: RngStream) -> HCouplingState:
    """One joint step; always consumes three draws.

    A shared uniform slot ``r`` in ``[0, n)`` moves chain 1 when ``r < h1``
    and chain 2 when ``r >= n - h2``, which makes both chains move only when
    ``h1 + h2 > n``. Directions are drawn independently.
    """
    n, h1, h2 = state.n, state.h1, state.h2
    r, d1, d2 = rng.below(n), rng.below(n - 1), rng.below(n - 1)
    if state.met:
        h = int(_h_move(h1, r < h1, d1))
        return HCouplingState(n, h, h, True)
    h1 = int(_h_move(h1, r < h1, d1))
    h2 = int(_h_move(h2, r >= n - h2, d2))
    return HCouplingState(n, h1, h2, h1 == h2)


def h_coupled_step_batch(n, h1, h2, met, batch: StreamBatch):
    r, d1, d2 = batch.below(n), batch.below(n - 1), batch.below(n - 1)
    new1 = _h_move(h1, r < h1, d1)
    new2 = np.where(met, new1, _h_move(h2, r >= n - h2, d2))
    return new1, new2, met | (new1 == new2)


def _stationary_cdf(n: int) -> list[float]:
    return np.cumsum(h_stationary(n).p).tolist()


def h_coupling_time(n: int, h_start: int, rng: RngStream,
                    t_cap: int | None = None) -> CouplingOutcome:
    """Meeting time of a chain from ``h_start`` and one from stationarity.

    The stationary weight is drawn with the stream's first draw.
    """
    t_cap = default_t_cap(n) if t_cap is None else t_cap
    cdf = _stationary_cdf(n)
    h2 = min(bisect.bisect_right(cdf, rng.random()), n - 1) + 1
    state = HCouplingState(n, h_start, h2)
    for t in range(t_cap + 1):
        if state.met:
            return CouplingOutcome(t, False)
        if t == t_cap:
            break
        state = h_coupled_step(state, rng)
    return CouplingOutcome(None, True)


def h_coupling_times(n: int, h_start, seed: int, runs: int,
                     t_cap: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Batched ``h_coupling_time`` over stream ids ``0..runs-1``.

    Returns ``(tau, capped)``; ``tau`` is ``-1`` where capped. Row ``r``
    equals ``h_coupling_time(n, h_start, RngStream(seed, r), t_cap)``.
    """
    t_cap = default_t_cap(n) if t_cap is None else t_cap
    batch = StreamBatch.range(seed, runs)
    cdf = np.array(_stationary_cdf(n))
    h2 = np.minimum(np.searchsorted(cdf, batch.random(), side="right"), n - 1) + 1
    h1 = np.broadcast_to(np.asarray(h_start, dtype=np.int64), (runs,)).copy()
    met = h1 == h2
    tau = np.where(met, 0, -1)
    for t in range(1, t_cap + 1):
        if met.all():
            break
        h1, h2, met = h_coupled_step_batch(n, h1, h2, met, batch)
        tau[(tau < 0) & met] = t
    return tau, tau < 0


# ------------------------------------------------------------ pairing coupling

def canonical_vertex(n: int, m: int, a: int, b: int) -> CubeState:
    """Vertex with ones on ``[0, a)`` and ``[m, m + b)``."""
    return CubeState(n, ((1 << a) - 1) | (((1 << b) - 1) << m))


def worst_partner(n: int, xbar: int) -> tuple[int, int]:
    """Block counts of the partner start that maximises the initial gap."""
    return max(0, 2 * xbar - n), min(xbar, n - xbar)


@dataclass(frozen=True)
class PairCouplingState:
    z: CubeState
    zt: CubeState
    m: int
    matched: bool = False

    def __post_init__(self):
        if self.z.n != self.zt.n:
            raise PreconditionError("coupled states differ in dimension")
        if hamming(self.z) != hamming(self.zt):
            raise PreconditionError("coupled states must have equal weight")
        (x, y), (xt, yt) = self.blocks
        if x < xt:
            raise PreconditionError("first chain must hold at least as many top ones")
        if self.matched and x != xt:
            raise PreconditionError("matched phase requires equal block counts")
        if x == xt and not self.matched:
            object.__setattr__(self, "matched", True)

    @property
    def blocks(self):
        return block_counts(self.z, self.m), block_counts(self.zt, self.m)

    @property
    def gap(self) -> int:
        (x, _), (xt, _) = self.blocks
        return x - xt

    @property
    def phase(self) -> str:
        return "post-match" if self.matched else "pre-match"


def _shuffle(items: list, rng: RngStream) -> list:
    items = list(items)
    for k in range(len(items) - 1, 0, -1):
        r = rng.below(k + 1)
        items[k], items[r] = items[r], items[k]
    return items


def coupling_permutation(state: PairCouplingState, rng: RngStream) -> list[int]:
    """Uniform bit-preserving matching ``pi`` with ``z(i) == zt(pi(i))``.

    After matching, the permutation also preserves blocks.
    """
    n, m = state.z.n, state.m

    def key(s, i):
        return (s.bit(i), i < m) if state.matched else (s.bit(i),)

    groups: dict = {}
    for i in range(n):
        groups.setdefault(key(state.z, i), ([], []))[0].append(i)
    for i in range(n):
        groups[key(state.zt, i)][1].append(i)
    pi = [0] * n
    for k in sorted(groups):
        src, dst = groups[k]
        for i, p in zip(src, _shuffle(dst, rng)):
            pi[i] = p
    return pi


def pair_coupled_step(state: PairCouplingState, rng: RngStream) -> PairCouplingState:
    pi = coupling_permutation(state, rng)
    i, j = sample_pair(rng, state.z.n)
    z = step(state.z, OrderedPair(i, j))
    zt = step(state.zt, OrderedPair(pi[i], pi[j]))
    return PairCouplingState(z, zt, state.m,
                             state.matched or block_counts(z, state.m) == block_counts(zt, state.m))


def gap_move_probs(n: int, m: int, X: int, Y: int, Xt: int, Yt: int) -> tuple[Fraction, Fraction]:
    """Exact probabilities that the top-block gap rises or falls by one."""
    H = X + Y
    if H != Xt + Yt or H < 1 or X < Xt:
        raise PreconditionError("inconsistent block counts")
    if not (0 <= X <= m and 0 <= Xt <= m and 0 <= Y <= n - m and 0 <= Yt <= n - m):
        raise PreconditionError("block counts out of range")
    F = Fraction
    lead = F(H, n)
    if H < n:
        zeros = F(n - H, n - 1)
        up0 = zeros * F(m - X, n - H) * F(n - m - Yt, n - H)
        dn0 = zeros * F(m - Xt, n - H) * F(n - m - Y, n - H)
    else:
        up0 = dn0 = F(0)
    ones = F(H - 1, n - 1)
    up1 = ones * F(Y, H) * F(Xt, H)
    dn1 = ones * F(X, H) * F(Yt, H)
    return lead * (up0 + up1), lead * (dn0 + dn1)


# ---------------------------------------------------------- lazy block coupling

def _pick(r, counts):
    """Category index of slot ``r`` given per-category counts (rows)."""
    edges = np.cumsum(counts, axis=0)
    return (r[None, :] >= edges).sum(axis=0)


def pair_coupled_step_w(n: int, m: int, X, Y, Xt, Yt, matched, batch: StreamBatch):
    """Lockstep pairing-coupling step on block counts; four draws per row."""
    H = X + Y
    # categories: 0 top one, 1 top zero, 2 bottom one, 3 bottom zero
    counts = np.stack([X, m - X, Y, n - m - Y])
    ci = _pick(batch.below(n), counts)
    rows = np.arange(len(X))
    counts[ci, rows] -= 1
    cj = _pick(batch.below(n - 1), counts)
    bit_i = ci % 2 == 0
    bit_j, top_j = (cj % 2 == 0), cj < 2
    same = bit_i == bit_j

    pool_i = np.where(bit_i, H, n - H)
    tops_i = np.where(bit_i, Xt, m - Xt)
    ptop_i = batch.below(pool_i) < tops_i
    pool_j = np.where(bit_j, H, n - H) - same
    tops_j = np.where(bit_j, Xt, m - Xt) - (same & ptop_i)
    ptop_j = batch.below(pool_j) < tops_j
    ptop_j = np.where(matched, top_j, ptop_j)

    delta = np.where(bit_i, 1 - 2 * bit_j.astype(np.int64), 0)
    X = X + np.where(top_j, delta, 0)
    Y = Y + np.where(top_j, 0, delta)
    Xt = Xt + np.where(ptop_j, delta, 0)
    Yt = Yt + np.where(ptop_j, 0, delta)
    return X, Y, Xt, Yt, matched | (X == Xt)


@dataclass
class GapTrace:
    """Per-step ``(t, H_t, gap_t, M_t)`` up to and including the meeting time."""

    t: list = field(default_factory=list)
    h: list = field(default_factory=list)
    gap: list = field(default_factory=list)
    mart: list = field(default_factory=list)

    def append(self, t, h, gap, mart):
        self.t.append(t)
        self.h.append(h)
        self.gap.append(gap)
        self.mart.append(mart)

    def __len__(self):
        return len(self.t)


def coupling_time(n: int, start_z: CubeState, start_zt: CubeState, rng: RngStream,
                  t_cap: int | None = None) -> tuple[CouplingOutcome, GapTrace]:
    """Run the explicit pairing coupling until the block gap closes.

    The split point is the weight of ``start_z``, whose ones are expected
    on the leading coordinates.
    """
    if start_z.n != n or start_zt.n != n:
        raise PreconditionError("start dimension mismatch")
    if hamming(start_z) != hamming(start_zt):
        raise PreconditionError("coupled starts must have equal weight")
    t_cap = default_t_cap(n) if t_cap is None else t_cap
    m = hamming(start_z)
    if m == n:
        trace = GapTrace()
        trace.append(0, n, 0, 0.0)
        return CouplingOutcome(0, False), trace
    state = PairCouplingState(start_z, start_zt, m)
    trace = GapTrace()
    log_weight = 0.0
    for t in range(t_cap + 1):
        h, gap = hamming(state.z), state.gap
        if gap == 0:
            trace.append(t, h, 0, 0.0)
            return CouplingOutcome(t, False), trace
        trace.append(t, h, gap, gap * math.exp(log_weight))
        if t == t_cap:
            break
        log_weight += (2 * h - 1) / n**2
        state = pair_coupled_step(state, rng)
    return CouplingOutcome(None, True), trace


@dataclass
class BlockCouplingRuns:
    """Results of ``coupling_times_w``; ``tau == -1`` marks capped runs."""

    n: int
    m: int
    tau: np.ndarray
    capped: np.ndarray
    mart_at: dict  # t -> M_t per run
    traces: list | None = None  # per-step (h, gap, mart) arrays


def coupling_times_w(n: int, m: int, start: tuple[int, int, int, int], seed: int,
                     runs: int, t_cap: int | None = None, record_at=(),
                     trace: bool = False) -> BlockCouplingRuns:
    """Lockstep pairing couplings from block counts ``(X, Y, Xt, Yt)``."""
    X0, Y0, Xt0, Yt0 = start
    if (X0 + Y0 != Xt0 + Yt0 or X0 < Xt0 or X0 + Y0 < 1
            or not (0 <= Xt0 <= X0 <= m and 0 <= min(Y0, Yt0) <= max(Y0, Yt0) <= n - m)):
        raise PreconditionError(f"inconsistent coupled block counts {start}")
    t_cap = default_t_cap(n) if t_cap is None else t_cap
    batch = StreamBatch.range(seed, runs)
    full = np.full(runs, 0, dtype=np.int64)
    X, Y, Xt, Yt = (full + v for v in start)
    matched = X == Xt
    tau = np.where(matched, 0, -1)
    log_w = np.zeros(runs)
    record_at = set(record_at)
    mart_at = {}
    steps = []
    horizon = max([t_cap, *record_at])
    for t in range(horizon + 1):
        H = X + Y
        gap = X - Xt
        mart = np.where(matched, 0.0, gap * np.exp(log_w))
        if t in record_at:
            mart_at[t] = mart
        if trace:
            steps.append((H.copy(), gap.copy(), mart))
        if t == horizon or (matched.all() and t >= max(record_at, default=0)):
            break
        log_w = log_w + (2 * H - 1) / n**2
        X, Y, Xt, Yt, new = pair_coupled_step_w(n, m, X, Y, Xt, Yt, matched, batch)
        tau[(tau < 0) & new & (t + 1 <= t_cap)] = t + 1
        matched = new
    return BlockCouplingRuns(n, m, tau, tau < 0, mart_at, steps if trace else None)
