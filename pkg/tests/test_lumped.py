import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stratwalk.cube import CubeState, OrderedPair, block_counts, step
from stratwalk.errors import PreconditionError
from stratwalk.lumped import (DistVector, StateSpaceTooLarge, drift_mean_bound,
                              drift_mean_closed, drift_second_closed, evolve,
                              exact_tv_curve, h_drift, h_kernel, h_stationary,
                              hitting_mean_formula, hitting_moments, point_mass, tmix,
                              tv, w_kernel, w_space_size, w_stationary, worst_start_curve)
from stratwalk.oracle import FullChainOracle, block_lift


# ---------------------------------------------------------------- kernels

def test_h_kernel_examples():
    k = h_kernel(4, exact=True)
    assert (k.up[1], k.down[1], k.stay[1]) == (F(1, 3), F(1, 6), F(1, 2))
    k3 = h_kernel(3, exact=True)
    assert k3.down[0] == 0
    assert (k3.up[2], k3.down[2], k3.stay[2]) == (0, 1, 0)


@pytest.mark.parametrize("n", [2, 5, 64, 1000])
def test_h_kernel_float_rows(n):
    k = h_kernel(n)
    assert np.abs(k.up + k.down + k.stay - 1).max() <= 1e-15
    assert k.down[0] == 0 and k.up[-1] == 0


def test_h_stationary_examples():
    assert list(h_stationary(3, exact=True).p) == [F(3, 7), F(3, 7), F(1, 7)]
    pi3 = h_stationary(3, exact=True)
    assert tv(point_mass(h_kernel(3, True), 1), pi3) == F(4, 7)


@pytest.mark.parametrize("n", [2, 7, 100, 4096])
def test_h_stationary_fixed_point(n):
    k, pi = h_kernel(n), h_stationary(n)
    assert np.abs(k.apply(pi.p) - pi.p).sum() <= 1e-12
    assert np.all(np.isfinite(pi.p))


def test_w_kernel_worked_row():
    row = w_kernel(4, 2, exact=True).row((1, 1))
    assert row == {(2, 1): F(1, 6), (0, 1): F(1, 12), (1, 2): F(1, 6),
                   (1, 0): F(1, 12), (1, 1): F(1, 2)}


def test_w_kernel_all_ones_has_no_up_moves():
    n, m = 7, 3
    row = w_kernel(n, m, exact=True).row((m, n - m))
    assert all(a + b <= n for a, b in row)
    assert (m, n - m) not in row  # stay is (n - n)/n = 0


def _representative(n, m, a, b):
    return CubeState(n, ((1 << a) - 1) | (((1 << b) - 1) << m))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_w_kernel_matches_pair_enumeration(n):
    for m in range(1, n):
        kern = w_kernel(n, m, exact=True)
        for a, b in kern.labels():
            s = _representative(n, m, a, b)
            enum = {}
            for i in range(n):
                for j in range(n):
                    if i != j:
                        w = block_counts(step(s, OrderedPair(i, j)), m)
                        enum[w] = enum.get(w, 0) + F(1, n * (n - 1))
            assert kern.row((a, b)) == enum
            assert kern.stay[kern.index((a, b))] == F(n - a - b, n)


@pytest.mark.parametrize("n", [2, 3, 9, 33, 64])
def test_lumping_consistency(n):
    hk = h_kernel(n)
    for m in range(1, n):
        wk = w_kernel(n, m)
        P = wk.dense()
        labels = wk.labels()
        weight = np.array([a + b for a, b in labels])
        for src, (a, b) in enumerate(labels):
            k = a + b
            for dst_k, expect in ((k + 1, hk.up), (k - 1, hk.down), (k, hk.stay)):
                if 1 <= dst_k <= n:
                    assert abs(P[src, weight == dst_k].sum() - expect[k - 1]) <= 1e-14


def test_w_kernel_rows_sum_to_one():
    P = w_kernel(12, 5).dense()
    assert np.abs(P.sum(axis=1) - 1).max() <= 1e-15


def test_w_stationary_examples():
    pi = w_stationary(3, 1, exact=True)
    labels = w_kernel(3, 1).labels()
    got = dict(zip(labels, pi.p))
    assert got == {(1, 0): F(1, 7), (0, 1): F(2, 7), (1, 1): F(2, 7),
                   (0, 2): F(1, 7), (1, 2): F(1, 7)}


@pytest.mark.parametrize("n,m", [(5, 2), (40, 13), (300, 150)])
def test_w_stationary_marginal_and_fixed_point(n, m):
    wk, pi = w_kernel(n, m), w_stationary(n, m)
    assert np.abs(wk.apply(pi.p) - pi.p).sum() <= 1e-12
    weight = np.array([a + b for a, b in wk.labels()])
    marg = np.bincount(weight, weights=pi.p)[1:]
    assert np.abs(marg - h_stationary(n).p).max() <= 1e-14


@pytest.mark.parametrize("n", [3, 10, 64])
def test_detailed_balance(n):
    hk, pi = h_kernel(n, exact=True), h_stationary(n, exact=True).p
    for k in range(n - 1):
        assert pi[k] * hk.up[k] == pi[k + 1] * hk.down[k + 1]
    m = n // 2
    wk, pw = w_kernel(n, m), w_stationary(n, m).p
    P = wk.dense()
    flow = pw[:, None] * P
    assert np.abs(flow - flow.T).max() <= 1e-12


def test_memory_guard():
    with pytest.raises(StateSpaceTooLarge):
        w_kernel(10_000, 5_000)
    assert w_space_size(4, 2) == 8


# ----------------------------------------------------------- distributions

def test_evolve_examples():
    hk = h_kernel(3, exact=True)
    d = point_mass(hk, 1)
    assert evolve(hk, d, 0) is d
    assert list(evolve(hk, d, 1).p) == [F(2, 3), F(1, 3), 0]
    with pytest.raises(PreconditionError):
        evolve(w_kernel(3, 1), d, 1)


@pytest.mark.parametrize("n", [5, 8, 10])
def test_w_evolve_matches_full_chain(n):
    oracle = FullChainOracle(n)
    for m in (1, n // 2):
        wk = w_kernel(n, m)
        start = _representative(n, m, m, 0)
        q, p = point_mass(wk, (m, 0)).p, oracle.point(start)
        for t in range(60):
            assert np.abs(block_lift(n, m, q, wk.labels()) - p).max() <= 1e-10
            q, p = wk.apply(q), oracle.apply(p)


def test_mass_conserved_over_long_runs():
    hk = h_kernel(512)
    d = evolve(hk, point_mass(hk, 1), 20_000)
    assert abs(math.fsum(d.p) - 1) <= 1e-12
    wk = w_kernel(512, 1)
    d = evolve(wk, point_mass(wk, (1, 0)), 20_000)
    assert abs(math.fsum(d.p) - 1) <= 1e-12


def test_dist_vector_validation():
    with pytest.raises(PreconditionError):
        DistVector(("H", 2), np.array([0.7, 0.7]))
    with pytest.raises(PreconditionError):
        DistVector(("H", 2), np.array([1.1, -0.1]))


@st.composite
def two_dists(draw):
    n = draw(st.integers(2, 30))
    vals = st.floats(0.001, 1.0)
    a = np.array(draw(st.lists(vals, min_size=n, max_size=n)))
    b = np.array(draw(st.lists(vals, min_size=n, max_size=n)))
    return DistVector(("H", n), a / a.sum()), DistVector(("H", n), b / b.sum())


@given(two_dists())
def test_tv_properties(pq):
    p, q = pq
    assert tv(p, p) == 0
    assert tv(p, q) == pytest.approx(tv(q, p), abs=1e-15)
    assert abs(tv(p, q) - math.fsum(np.maximum(p.p - q.p, 0))) <= 1e-14
    assert 0 <= tv(p, q) <= 1


# ------------------------------------------------------------------ curves

def test_curve_examples():
    d = exact_tv_curve(3, 5, chain="h", start=1, exact=True)
    assert d[0] == F(4, 7)


@pytest.mark.parametrize("n", [6, 10])
def test_w_curve_equals_full_chain_curve(n):
    t_max = math.ceil(3 * n * math.log(n))
    lumped = exact_tv_curve(n, t_max, chain="w", start=(1, 0), m=1)
    full = FullChainOracle(n).tv_curve(CubeState(n, 1), t_max)
    assert np.abs(lumped - full).max() <= 1e-10


@pytest.mark.parametrize("kw", [
    dict(chain="h", start=1), dict(chain="h", start=20),
    dict(chain="w", start=(1, 0), m=1), dict(chain="w", start=(3, 7), m=15),
])
def test_curves_non_increasing(kw):
    d = exact_tv_curve(40, 600, **kw)
    assert np.all(np.diff(d) <= 1e-12)


def test_worst_start_sweep():
    n = 16
    curve, best = worst_start_curve(n, 200, [1, n // 4, n // 2, n])
    assert best == 1
    single = exact_tv_curve(n, 200, chain="w", start=(1, 0), m=1)
    assert np.array_equal(curve[: len(single)] >= single, np.ones(201, bool))


def test_tmix_examples():
    assert tmix(3, 0.6, chain="h", start=1) == 0
    assert tmix(3, 0.57) >= 1  # d(0) = 4/7 > 0.57
    for n in (10, 50):
        assert tmix(n, 0.1) >= tmix(n, 0.25)
        with pytest.raises(PreconditionError):
            tmix(n, 1.0)


@pytest.mark.parametrize("n,eps,kw", [
    (20, 0.25, dict(chain="h", start=1)),
    (33, 0.1, dict(chain="w", start=(1, 0), m=1)),
    (33, 0.5, dict(chain="w", start=(4, 2), m=9)),
])
def test_tmix_matches_linear_scan(n, eps, kw):
    d = exact_tv_curve(n, 2000, **kw)
    assert tmix(n, eps, **kw) == int(np.argmax(d <= eps))


# ----------------------------------------------------------- hitting times

def test_hitting_formula_small():
    assert hitting_mean_formula(3, 2, exact=True) == 3
    assert hitting_mean_formula(3, 3, exact=True) == 6
    with pytest.raises(PreconditionError):
        hitting_mean_formula(3, 1)


@pytest.mark.parametrize("n", [16, 64, 256])
def test_hitting_formula_bound(n):
    # beta = 1/2: k <= n/4
    for k in range(2, n // 4 + 1):
        assert hitting_mean_formula(n, k) <= n * (n - 1) / ((k - 1) * (n - 2 * k + 1)) * (1 + 1e-12)


def test_hitting_moments_small():
    hm = hitting_moments(h_kernel(3, exact=True), 2)
    assert hm.mean[0] == 3 and hm.variance[0] == 6 and hm.mean[1] == 0
    hm = hitting_moments(h_kernel(3, exact=True), 3)
    assert hm.mean[0] == 9
    assert all(v >= 0 for v in hm.variance)


def _geometric_sum_oracle(n, k):
    # brute force: truncated series sum_t P(T > t) by evolving the absorbed chain
    hk = h_kernel(n)
    p = np.zeros(n)
    p[0] = 1.0
    mean = 0.0
    for _ in range(200_000):
        alive = p.copy()
        alive[k - 1] = 0.0
        mass = alive.sum()
        if mass < 1e-15:
            break
        mean += mass
        p = hk.apply(alive)
    return mean


@pytest.mark.parametrize("n,k", [(8, 3), (12, 6), (20, 7)])
def test_hitting_mean_against_survival_sum(n, k):
    hm = hitting_moments(h_kernel(n), k)
    assert hm.mean[0] == pytest.approx(_geometric_sum_oracle(n, k), rel=1e-9)


@settings(deadline=None, max_examples=30)
@given(st.integers(2, 80).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))))
def test_hitting_exact_and_float_agree(args):
    n, k = args
    a = hitting_moments(h_kernel(n), k)
    b = hitting_moments(h_kernel(n, exact=True), k)
    assert np.allclose(a.mean, np.array(b.mean, dtype=float), rtol=1e-10)
    assert np.allclose(a.variance, np.array(b.variance, dtype=float), rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("n", [60, 120, 240, 480])
def test_variance_bound(n):
    hm = hitting_moments(h_kernel(n), n // 3)
    assert hm.variance[0] / n**2 <= 10


def test_increment_variance_constant_bounded():
    # v_{k+1} k^2 / n^2 over k < n/3 stays within twice its n = 64 value
    def c(n):
        kern = h_kernel(n)
        return max(hitting_moments(kern, k + 1).variance[k - 1] * k * k / n**2
                   for k in range(1, n // 3))
    base = c(64)
    assert all(c(n) <= 2 * base for n in (128, 256, 512))


# -------------------------------------------------------------------- drift

def test_drift_examples():
    d = h_drift(h_kernel(2, exact=True), 1)
    assert d.mean_dH == F(1, 2)
    for n in (4, 10, 64):
        d = h_drift(h_kernel(n, exact=True), n // 2)
        assert d.mean_dH == F(n // 2, n * (n - 1)) and d.mean_dD < 0


@pytest.mark.parametrize("n", [4, 17, 64])
def test_drift_closed_forms(n):
    kern, exact = h_kernel(n), h_kernel(n, exact=True)
    for k in range(1, n + 1):
        assert abs(h_drift(kern, k).second_dD - drift_second_closed(n, k)) <= 1e-14
        d = h_drift(exact, k)
        assert d.second_dD == drift_second_closed(n, k, exact=True)
        assert d.mean_dD == drift_mean_closed(n, k, exact=True)


@pytest.mark.parametrize("n", [8, 9, 100, 512])
def test_drift_bound_direction(n):
    exact = h_kernel(n, exact=True)
    for k in range(1, n // 2 + 1):
        assert h_drift(exact, k).mean_dD <= drift_mean_bound(n, k, exact=True)
