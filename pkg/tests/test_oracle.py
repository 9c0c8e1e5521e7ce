import math

import numpy as np
import pytest

from stratwalk.cube import CubeState
from stratwalk.errors import PreconditionError
from stratwalk.lumped import evolve, exact_tv_curve, point_mass, w_kernel
from stratwalk.oracle import FullChainOracle, block_lift, oracle_evolve


def test_one_step_from_100():
    p = oracle_evolve(3, CubeState.from_string("100"), 1)
    expect = np.zeros(8)
    expect[0b001] = 4 / 6
    expect[CubeState.from_string("110").bits] = 1 / 6
    expect[CubeState.from_string("101").bits] = 1 / 6
    assert np.allclose(p, expect, atol=1e-15)


def test_zero_steps_is_point_mass():
    start = CubeState.from_string("0110")
    p = oracle_evolve(4, start, 0)
    assert p[start.bits] == 1.0 and p.sum() == 1.0


def test_size_guard():
    with pytest.raises(PreconditionError):
        FullChainOracle(13)
    with pytest.raises(PreconditionError):
        FullChainOracle(4).point(CubeState.from_string("101"))


def test_stationary_is_fixed():
    orc = FullChainOracle(7)
    pi = orc.stationary()
    assert np.abs(orc.apply(pi) - pi).max() < 1e-16
    assert pi[0] == 0


@pytest.mark.parametrize("n,m", [(4, 1), (5, 2), (7, 3)])
def test_matches_block_chain(n, m):
    orc = FullChainOracle(n)
    start = CubeState.from_ones(n, range(m))
    p = orc.point(start)
    kern = w_kernel(n, m)
    d = point_mass(kern, (m, 0))
    for _ in range(201):
        assert np.abs(p - block_lift(n, m, d.p, kern.labels())).max() <= 1e-12
        p = orc.apply(p)
        d = evolve(kern, d, 1)


def test_tv_curve_agrees_with_lumped():
    n = 8
    t_max = math.ceil(3 * n * math.log(n))
    full = FullChainOracle(n).tv_curve(CubeState.from_string("10000000"), t_max)
    lumped = exact_tv_curve(n, t_max, chain="w", start=(1, 0), m=1)
    assert np.abs(full - lumped).max() <= 1e-10
