"""Row-addition walk on invertible GF(2) matrices and the replay protocol.

The prover walks from the identity by adding row ``i`` into row ``j`` for
uniformly chosen ordered pairs, publishes the final matrix, and later
answers a challenge ``x`` with ``A x`` by replaying the same row operations
on ``x`` alone. Cost is tracked in abstract operation units: one unit per
replayed bit update, one per 64-bit word AND+popcount for the naive product.

Rows and vectors are packed ints; bit ``c`` is column/coordinate ``c``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .cube import CubeState, MoveLog, OrderedPair, check_pair, sample_pair
from .errors import PreconditionError
from .rng import RngStream

WORD = 64


class OpCounter:
    def __init__(self):
        self.ops = 0


@dataclass(frozen=True)
class BitMatrix:
    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.n or any(r < 0 or r >> self.n for r in self.rows):
            raise PreconditionError("rows must be n packed n-bit vectors")

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, tuple(1 << i for i in range(n)))

    def dumps(self) -> str:
        return "".join(
            "".join("1" if (r >> c) & 1 else "0" for c in range(self.n)) + "\n"
            for r in self.rows)

    @classmethod
    def loads(cls, text: str) -> "BitMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        return cls(len(lines), tuple(
            sum(1 << c for c, ch in enumerate(ln) if ch == "1") for ln in lines))

    def column(self, c: int) -> int:
        return sum(((r >> c) & 1) << k for k, r in enumerate(self.rows))


def rank(A: BitMatrix) -> int:
    rows = list(A.rows)
    r = 0
    for col in range(A.n):
        bit = 1 << col
        pivot = next((k for k in range(r, len(rows)) if rows[k] & bit), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for k in range(len(rows)):
            if k != r and rows[k] & bit:
                rows[k] ^= rows[r]
        r += 1
    return r


def matrix_step(A: BitMatrix, pair: OrderedPair) -> BitMatrix:
    check_pair(pair, A.n)
    i, j = pair
    rows = list(A.rows)
    rows[j] ^= rows[i]
    return BitMatrix(A.n, tuple(rows))


def replay_matrix(log: MoveLog) -> BitMatrix:
    rows = [1 << i for i in range(log.n)]
    for i, j in log.moves:
        rows[j] ^= rows[i]
    return BitMatrix(log.n, tuple(rows))


@dataclass(frozen=True)
class ProverKey:
    n: int
    t: int
    log: MoveLog
    public_matrix: BitMatrix


def generate_key(n: int, t: int, rng: RngStream) -> ProverKey:
    if n < 2 or t < 0:
        raise PreconditionError(f"need n >= 2 and t >= 0, got n={n}, t={t}")
    log = MoveLog(n, tuple(sample_pair(rng, n) for _ in range(t)), seed=rng.seed)
    return ProverKey(n, t, log, replay_matrix(log))


def random_challenge(n: int, rng: RngStream) -> int:
    """Uniform nonzero ``n``-bit vector."""
    while True:
        x = 0
        for k in range(-(-n // WORD)):
            x |= rng.next_u64() << (WORD * k)
        x &= (1 << n) - 1
        if x:
            return x


def _check_vector(x: int, n: int):
    if x < 0 or x >> n:
        raise PreconditionError(f"challenge is not an {n}-bit vector")


def replay_answer(key: ProverKey, x: int, counter: OpCounter | None = None) -> int:
    """``A_t x`` by replaying the logged row additions on ``x``."""
    _check_vector(x, key.n)
    y = x
    for i, j in key.log.moves:
        y ^= ((y >> i) & 1) << j
    if counter is not None:
        counter.ops += len(key.log.moves)
    return y


def naive_multiply(A: BitMatrix, x: int, counter: OpCounter | None = None) -> int:
    _check_vector(x, A.n)
    y = 0
    for k, row in enumerate(A.rows):
        y |= ((row & x).bit_count() & 1) << k
    if counter is not None:
        counter.ops += naive_cost(A.n)
    return y


def naive_cost(n: int, word: int = WORD) -> int:
    return n * -(-n // word)


def verify(public_matrix: BitMatrix, x: int, y: int, elapsed_ops: int, budget: int) -> bool:
    """Accept iff ``y`` is the right product and arrived within budget."""
    try:
        correct = naive_multiply(public_matrix, x) == y
    except PreconditionError:
        return False
    return correct and elapsed_ops <= budget


def column_projection(A: BitMatrix, c: int) -> CubeState:
    if not 0 <= c < A.n:
        raise PreconditionError(f"column {c} out of range")
    return CubeState(A.n, A.column(c))


def write_matrix(A: BitMatrix, path) -> None:
    Path(path).write_text(A.dumps(), newline="\n")
