"""Exact analysis of the Hamming chain and the two-block chain.

The Hamming chain lives on weights ``1..n``. The two-block chain with split
``m`` tracks ``(a, b)``: ones among the first ``m`` coordinates and among
the remaining ``n - m``. Both are lumpings of the full walk, so total
variation computed on them is the full walk's total variation from any
start whose law is symmetric within each lumped class.

Kernels hold float64 arrays by default, or arrays of ``Fraction`` when
built with ``exact=True``; every operation here works with either.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import PreconditionError

MAX_W_STATES = 1 << 24


class StateSpaceTooLarge(PreconditionError):
    pass


def _const(x, exact):
    return Fraction(x) if exact else float(x)


def _array(values, exact):
    return np.array(values, dtype=object if exact else np.float64)


def _neumaier(s, c, x):
    t = s + x
    c = c + np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
    return t, c


class _StencilKernel:
    """A kernel stored as a diagonal plus a few injective moves."""

    space: tuple
    stay: np.ndarray
    _moves: list  # (src_index, dst_index, prob)

    @property
    def exact(self) -> bool:
        return self.stay.dtype == object

    @property
    def size(self) -> int:
        return len(self.stay)

    def apply(self, p: np.ndarray) -> np.ndarray:
        """One step of ``p -> p P`` with compensated accumulation."""
        out = p * self.stay
        comp = np.zeros_like(out)
        for src, dst, prob in self._moves:
            term = np.zeros_like(out)
            term[dst] = p[src] * prob
            out, comp = _neumaier(out, comp, term)
        return out + comp

    def row(self, label) -> dict:
        i = self.index(label)
        labels = self.labels()
        r = {}
        if self.stay[i] != 0:
            r[label] = self.stay[i]
        for src, dst, prob in self._moves:
            hit = np.nonzero(src == i)[0]
            for h in hit:
                if prob[h] != 0:
                    r[labels[dst[h]]] = prob[h]
        return r

    def dense(self) -> np.ndarray:
        P = np.zeros((self.size, self.size), dtype=self.stay.dtype)
        if self.exact:
            P[:] = Fraction(0)
        P[np.arange(self.size), np.arange(self.size)] = self.stay
        for src, dst, prob in self._moves:
            P[src, dst] = prob
        return P


@dataclass(frozen=True)
class DistVector:
    """Probability vector over a lumped state space."""

    space: tuple
    p: np.ndarray

    def __post_init__(self):
        p = self.p
        if p.dtype != object:
            if p.min(initial=0.0) < -1e-15:
                raise PreconditionError("negative probability mass")
            np.maximum(p, 0.0, out=p)
            total = math.fsum(p)
        else:
            if any(x < 0 for x in p):
                raise PreconditionError("negative probability mass")
            total = sum(p)
        if abs(total - 1) > 1e-12:
            raise PreconditionError(f"mass {total!r} is not 1")

    def __len__(self) -> int:
        return len(self.p)


# ---------------------------------------------------------------- Hamming chain

class HKernel(_StencilKernel):
    """Birth-and-death kernel of the Hamming weight; index ``k - 1``."""

    def __init__(self, n: int, up, down, stay):
        self.n = n
        self.space = ("H", n)
        self.up, self.down, self.stay = up, down, stay
        idx = np.arange(n)
        self._moves = [(idx[:-1], idx[1:], up[:-1]), (idx[1:], idx[:-1], down[1:])]

    def labels(self) -> list:
        return list(range(1, self.n + 1))

    def index(self, k: int) -> int:
        if not 1 <= k <= self.n:
            raise PreconditionError(f"weight {k} outside 1..{self.n}")
        return k - 1


def h_kernel(n: int, exact: bool = False) -> HKernel:
    if n < 2:
        raise PreconditionError(f"need n >= 2, got {n}")
    N = n * (n - 1)
    if exact:
        up = [Fraction(k * (n - k), N) for k in range(1, n + 1)]
        down = [Fraction(k * (k - 1), N) for k in range(1, n + 1)]
        stay = [Fraction(n - k, n) for k in range(1, n + 1)]
    else:
        k = np.arange(1, n + 1, dtype=np.float64)
        up = k * (n - k) / N
        down = k * (k - 1) / N
        stay = (n - k) / n
    return HKernel(n, _array(up, exact), _array(down, exact), _array(stay, exact))


def _binomial_pmf(n: int, exact: bool) -> list:
    # C(n, k) / 2**n with exact big-integer division, no overflow at any n
    two_n = 1 << n
    if exact:
        return [Fraction(math.comb(n, k), two_n) for k in range(n + 1)]
    return [math.comb(n, k) / two_n for k in range(n + 1)]


def h_stationary(n: int, exact: bool = False) -> DistVector:
    if n < 2:
        raise PreconditionError(f"need n >= 2, got {n}")
    if exact:
        p = [Fraction(math.comb(n, k), 2**n - 1) for k in range(1, n + 1)]
    else:
        scale = (1 << n) / ((1 << n) - 1)
        p = [q * scale for q in _binomial_pmf(n, False)[1:]]
    return DistVector(("H", n), _array(p, exact))


# -------------------------------------------------------------- two-block chain

def w_space_size(n: int, m: int) -> int:
    return (m + 1) * (n - m + 1) - 1


class WKernel(_StencilKernel):
    """Kernel of the block counts ``(a, b)`` for split point ``m``.

    States are ordered by ``a`` then ``b`` with ``(0, 0)`` removed, so
    ``(a, b)`` sits at index ``a * (n - m + 1) + b - 1``.
    """

    def __init__(self, n: int, m: int, exact: bool = False):
        if n < 2 or not 1 <= m <= n - 1:
            raise PreconditionError(f"invalid (n, m) = ({n}, {m})")
        size = w_space_size(n, m)
        if size > MAX_W_STATES:
            raise StateSpaceTooLarge(
                f"{size} block states exceed the cap of {MAX_W_STATES}; "
                "use Monte Carlo simulation instead")
        self.n, self.m = n, m
        self.space = ("W", n, m)
        r = n - m + 1
        a, b = np.divmod(np.arange(1, size + 1), r)
        self.a, self.b = a, b
        h = a + b
        N = n * (n - 1)
        if exact:
            def frac(num, den):
                return _array([Fraction(int(x), den) for x in num], True)
        else:
            def frac(num, den):
                return num.astype(np.float64) / den
        self.stay = frac(n - h, n)
        idx = np.arange(size)
        moves = []
        for mask, delta, num in (
            (a < m, r, h * (m - a)),
            (a > 0, -r, a * (h - 1)),
            (b < n - m, 1, h * (n - m - b)),
            (b > 0, -1, b * (h - 1)),
        ):
            # moves into (0, 0) always carry zero probability
            keep = mask & (idx + delta >= 0)
            moves.append((idx[keep], idx[keep] + delta, frac(num[keep], N)))
        self._moves = moves

    def labels(self) -> list:
        return list(zip(self.a.tolist(), self.b.tolist()))

    def index(self, state) -> int:
        a, b = state
        if not (0 <= a <= self.m and 0 <= b <= self.n - self.m) or a + b == 0:
            raise PreconditionError(f"{state} is not a block state for m={self.m}")
        return a * (self.n - self.m + 1) + b - 1


def w_kernel(n: int, m: int, exact: bool = False) -> WKernel:
    return WKernel(n, m, exact)


def w_stationary(n: int, m: int, exact: bool = False) -> DistVector:
    if n < 2 or not 1 <= m <= n - 1:
        raise PreconditionError(f"invalid (n, m) = ({n}, {m})")
    if w_space_size(n, m) > MAX_W_STATES:
        raise StateSpaceTooLarge("block state space over the cap")
    top = _binomial_pmf(m, exact)
    bot = _binomial_pmf(n - m, exact)
    if exact:
        scale = Fraction(2**n, 2**n - 1)
        grid = np.array([[x * y * scale for y in bot] for x in top], dtype=object)
    else:
        scale = (1 << n) / ((1 << n) - 1)
        grid = np.outer(top, bot) * scale
    return DistVector(("W", n, m), grid.ravel()[1:].copy())


# ---------------------------------------------------------------- distributions

def point_mass(kernel, label) -> DistVector:
    p = np.zeros(kernel.size, dtype=kernel.stay.dtype)
    if kernel.exact:
        p[:] = Fraction(0)
        p[kernel.index(label)] = Fraction(1)
    else:
        p[kernel.index(label)] = 1.0
    return DistVector(kernel.space, p)


def evolve(kernel, dist: DistVector, t: int) -> DistVector:
    if dist.space != kernel.space:
        raise PreconditionError(f"distribution on {dist.space}, kernel on {kernel.space}")
    if t < 0:
        raise PreconditionError("t must be >= 0")
    p = dist.p
    for _ in range(t):
        p = kernel.apply(p)
    return DistVector(dist.space, p) if t else dist


def tv(p: DistVector, q: DistVector):
    if p.space != q.space:
        raise PreconditionError(f"cannot compare {p.space} with {q.space}")
    diff = np.abs(p.p - q.p)
    if diff.dtype == object:
        return sum(diff) / 2
    return 0.5 * math.fsum(diff)


def _chain(n, chain, m, exact):
    if chain == "h":
        return h_kernel(n, exact), h_stationary(n, exact)
    if chain == "w":
        if m is None:
            raise PreconditionError("the two-block chain needs a split point m")
        return w_kernel(n, m, exact), w_stationary(n, m, exact)
    raise PreconditionError(f"unknown chain {chain!r}")


def exact_tv_curve(n: int, t_max: int, *, chain: str = "h", start=1,
                   m: int | None = None, exact: bool = False) -> np.ndarray:
    """Distance to stationarity at ``t = 0..t_max``.

    For ``chain="w"`` started at ``(m, 0)`` this is the full walk's distance
    from any vertex of weight ``m``.
    """
    kernel, pi = _chain(n, chain, m, exact)
    p = point_mass(kernel, start).p
    out = [tv(DistVector(pi.space, p), pi)]
    for _ in range(t_max):
        p = kernel.apply(p)
        out.append(0.5 * math.fsum(np.abs(p - pi.p)) if not exact
                   else sum(np.abs(p - pi.p)) / 2)
    return np.array(out, dtype=object if exact else np.float64)


def worst_start_curve(n: int, t_max: int, weights: Sequence[int]) -> tuple[np.ndarray, int]:
    """Largest full-walk curve over the given start weights.

    Returns the pointwise maximum and the weight whose curve dominates at
    the most times. Weight ``n`` uses the Hamming chain (the all-ones vertex
    is fixed by every coordinate permutation).
    """
    curves = {}
    for w in sorted(set(weights)):
        if w == n:
            curves[w] = exact_tv_curve(n, t_max, chain="h", start=n)
        else:
            curves[w] = exact_tv_curve(n, t_max, chain="w", start=(w, 0), m=w)
    stack = np.vstack(list(curves.values()))
    best = list(curves)[int(np.bincount(stack.argmax(axis=0)).argmax())]
    return stack.max(axis=0), best


def tmix(n: int, eps: float, *, chain: str = "h", start=1, m: int | None = None) -> int:
    """Least ``t`` with distance at most ``eps``: doubling, then bisection."""
    if not 0 < eps < 1:
        raise PreconditionError(f"eps must lie in (0, 1), got {eps}")
    kernel, pi = _chain(n, chain, m, False)

    def dist(p):
        return 0.5 * math.fsum(np.abs(p - pi.p))

    lo_p = point_mass(kernel, start).p
    if dist(lo_p) <= eps:
        return 0
    lo, hi, p, t = 0, 1, lo_p, 0
    while True:
        while t < hi:
            p = kernel.apply(p)
            t += 1
        if dist(p) <= eps:
            break
        lo, lo_p = hi, p
        hi *= 2
    # invariant: d(lo) > eps >= d(hi), lo_p is the law at lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        p = lo_p
        for _ in range(mid - lo):
            p = kernel.apply(p)
        if dist(p) <= eps:
            hi = mid
        else:
            lo, lo_p = mid, p
    return hi


# --------------------------------------------------------------- hitting times

def hitting_mean_formula(n: int, ell: int, exact: bool = False):
    """Expected time to climb from weight ``ell - 1`` to ``ell``.

    Stationary ratios come from ``pi(i-1)/pi(i) = i/(n-i+1)``.
    """
    if not 2 <= ell <= n:
        raise PreconditionError(f"need 2 <= ell <= n, got ell={ell}, n={n}")
    one = _const(1, exact)
    ratio, total = one, 0 * one
    for i in range(ell, 1, -1):
        ratio = ratio * i / (n - i + 1)
        total += ratio
    down = one * ell * (ell - 1) / (n * (n - 1))
    return total / down


@dataclass(frozen=True)
class HittingMoments:
    """Moments of the hitting time of ``target``; arrays indexed by start - 1."""

    target: int
    mean: np.ndarray
    second_moment: np.ndarray
    variance: np.ndarray


def _solve_below(up, down, rhs):
    """``(I - Q) x = rhs`` on weights ``1..k-1`` with ``k`` absorbing.

    Eliminates from the reflecting end at weight 1, where the unknowns are
    the increments ``x_j - x_{j+1}``; every operation adds positive terms,
    so no cancellation occurs however large the hitting times get.
    """
    inc, prev = [], 0
    for u, d, r in zip(up, down, rhs):
        prev = (r + d * prev) / u
        inc.append(prev)
    x, acc = [], 0
    for g in reversed(inc):
        acc = acc + g
        x.append(acc)
    return x[::-1]


def _solve_above(up, down, rhs):
    """Same system on weights ``k+1..n``, eliminated from weight ``n``."""
    inc, nxt = [], 0
    for u, d, r in zip(reversed(up), reversed(down), reversed(rhs)):
        nxt = (r + u * nxt) / d
        inc.append(nxt)
    x, acc = [], 0
    for g in reversed(inc):
        acc = acc + g
        x.append(acc)
    return x


def hitting_moments(kernel: HKernel, target: int) -> HittingMoments:
    """Mean, second moment and variance of the hitting time of ``target``.

    Solves ``(I - Q) mean = 1`` and ``(I - Q) second = 1 + 2 Q mean`` on
    the chain with ``target`` made absorbing.
    """
    n = kernel.n
    kernel.index(target)
    up, down = kernel.up.tolist(), kernel.down.tolist()
    zero = Fraction(0) if kernel.exact else 0.0
    lo = slice(0, target - 1)
    hi = slice(target, n)
    mean_lo = _solve_below(up[lo], down[lo], [1] * (target - 1))
    mean_hi = _solve_above(up[hi], down[hi], [1] * (n - target))
    # 1 + 2 Q mean = 2 mean - 1 off the target
    sec_lo = _solve_below(up[lo], down[lo], [2 * x - 1 for x in mean_lo])
    sec_hi = _solve_above(up[hi], down[hi], [2 * x - 1 for x in mean_hi])
    dtype = kernel.stay.dtype
    mean = np.array(mean_lo + [zero] + mean_hi, dtype=dtype)
    second = np.array(sec_lo + [zero] + sec_hi, dtype=dtype)
    var = second - mean * mean
    if not kernel.exact:
        var = np.maximum(var, 0.0)
    return HittingMoments(target, mean, second, var)


# ----------------------------------------------------------------------- drift

@dataclass(frozen=True)
class HDrift:
    """One-step conditional moments of the weight and of ``D = n/2 - H``."""

    n: int
    k: int
    mean_dH: object
    mean_dD: object
    second_dD: object  # E[D'^2 - D^2 | H = k]


def h_drift(kernel: HKernel, k: int) -> HDrift:
    i = kernel.index(k)
    up, down = kernel.up[i], kernel.down[i]
    D = Fraction(kernel.n, 2) - k if kernel.exact else kernel.n / 2 - k
    # (D + d)^2 - D^2 per move, written without the cancelling squares
    second = up * (1 - 2 * D) + down * (1 + 2 * D)
    return HDrift(kernel.n, k, up - down, down - up, second)


def drift_mean_closed(n: int, k: int, exact: bool = False):
    """``E[D' - D | H = k] = -k(n - 2k + 1) / (n(n - 1))``."""
    return _const(-k * (n - 2 * k + 1), exact) / (n * (n - 1))


def drift_second_closed(n: int, k: int, exact: bool = False):
    D = _const(n, exact) / 2 - k
    return -4 * k * D * (D + _const(1, exact) / 2) / (n * (n - 1)) + _const(k, exact) / n


def drift_mean_bound(n: int, k: int, exact: bool = False):
    """Upper bound ``-D/n + 2 D^2 / (n(n-1))`` on the mean drift of ``D``."""
    D = _const(n, exact) / 2 - k
    return -D / n + 2 * D * D / (n * (n - 1))
