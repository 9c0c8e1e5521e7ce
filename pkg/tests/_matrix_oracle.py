"""Exact law of the row-addition walk on GF(2) matrices by state enumeration."""
import numpy as np

from stratwalk.cube import OrderedPair
from stratwalk.lumped import w_kernel
from stratwalk.matrix_walk import BitMatrix, matrix_step
from stratwalk.oracle import block_lift


def matrix_chain(n):
    """Reachable matrices from the identity and, per state, its successors."""
    pairs = [OrderedPair(i, j) for i in range(n) for j in range(n) if i != j]
    start = BitMatrix.identity(n)
    index = {start.rows: 0}
    states = [start]
    succ = []
    k = 0
    while k < len(states):
        row = []
        for pair in pairs:
            nxt = matrix_step(states[k], pair)
            if nxt.rows not in index:
                index[nxt.rows] = len(states)
                states.append(nxt)
            row.append(index[nxt.rows])
        succ.append(row)
        k += 1
    return states, np.array(succ)


def column_laws(n, t_max):
    """``laws[t][c]`` is the law of column ``c`` at time ``t`` over packed vectors."""
    states, succ = matrix_chain(n)
    p = np.zeros(len(states))
    p[0] = 1.0
    cols = np.array([[A.column(c) for c in range(n)] for A in states])
    laws = []
    for t in range(t_max + 1):
        laws.append([np.bincount(cols[:, c], weights=p, minlength=1 << n) for c in range(n)])
        q = np.zeros_like(p)
        for k in range(succ.shape[1]):
            np.add.at(q, succ[:, k], p / succ.shape[1])
        p = q
    return len(states), laws


def lifted_column_law(n, c, w_law):
    """Law of ``Z_t`` started at ``e_c`` from the m=1 block law (block = coordinate 0)."""
    lifted = block_lift(n, 1, w_law.p, w_kernel(n, 1).labels())
    x = np.arange(1 << n)
    # swap coordinates 0 and c
    b0 = x & 1
    bc = (x >> c) & 1
    y = x ^ ((b0 ^ bc) | ((b0 ^ bc) << c))
    return lifted[y]

