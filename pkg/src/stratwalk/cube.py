"""Hypercube states and the single-step move of the stratified walk.

A state is an ``n``-bit vector with at least one set bit. Coordinates are
0-based; bit ``i`` of the packed integer is coordinate ``i``, and the
textual form writes coordinate 0 leftmost.

A move picks an ordered pair ``(i, j)`` of distinct coordinates uniformly
and XORs bit ``i`` into bit ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .errors import PreconditionError
from .rng import RngStream, StreamBatch


@dataclass(frozen=True)
class CubeState:
    n: int
    bits: int

    def __post_init__(self):
        if self.n < 2:
            raise PreconditionError(f"dimension must be >= 2, got {self.n}")
        if self.bits <= 0 or self.bits >> self.n:
            raise PreconditionError(
                f"bits {self.bits:#x} not a nonzero {self.n}-bit vector")

    @classmethod
    def from_string(cls, s: str) -> "CubeState":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise PreconditionError(f"not a bit string: {s!r}")
        return cls(len(s), sum(1 << i for i, c in enumerate(s) if c == "1"))

    @classmethod
    def from_ones(cls, n: int, ones: Iterable[int]) -> "CubeState":
        bits = 0
        for i in ones:
            bits |= 1 << i
        return cls(n, bits)

    def bit(self, i: int) -> int:
        return (self.bits >> i) & 1

    def __str__(self) -> str:
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.n))


class OrderedPair(NamedTuple):
    i: int
    j: int


def check_pair(pair: OrderedPair, n: int) -> None:
    i, j = pair
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise PreconditionError(f"invalid pair {tuple(pair)} for n={n}")


@dataclass(frozen=True)
class MoveLog:
    """Replayable record of a trajectory's moves."""

    n: int
    moves: tuple[OrderedPair, ...] = ()
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        for p in self.moves:
            check_pair(p, self.n)

    def __len__(self) -> int:
        return len(self.moves)

    def dumps(self) -> str:
        lines = [f"n={self.n}"] + [f"{i} {j}" for i, j in self.moves]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "MoveLog":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("n="):
            raise PreconditionError("move log must start with 'n=<n>'")
        n = int(lines[0][2:])
        moves = []
        for line in lines[1:]:
            if line.strip():
                i, j = line.split()
                moves.append(OrderedPair(int(i), int(j)))
        return cls(n, tuple(moves))

    def write(self, path) -> None:
        Path(path).write_text(self.dumps(), newline="\n")

    @classmethod
    def read(cls, path) -> "MoveLog":
        return cls.loads(Path(path).read_text())


def step(state: CubeState, pair: OrderedPair) -> CubeState:
    """Replace bit ``j`` by ``bit j XOR bit i``."""
    check_pair(pair, state.n)
    i, j = pair
    return CubeState(state.n, state.bits ^ (((state.bits >> i) & 1) << j))


def sample_pair(rng: RngStream, n: int) -> OrderedPair:
    # skip construction: j drawn from n-1 slots, shifted past i
    if n < 2:
        raise PreconditionError(f"need n >= 2, got {n}")
    i = rng.below(n)
    j = rng.below(n - 1)
    return OrderedPair(i, j + (j >= i))


def simulate(start: CubeState, t: int, rng: RngStream) -> tuple[CubeState, MoveLog]:
    if t < 0:
        raise PreconditionError(f"t must be >= 0, got {t}")
    n = start.n
    bits = start.bits
    moves = []
    for _ in range(t):
        i, j = sample_pair(rng, n)
        bits ^= ((bits >> i) & 1) << j
        moves.append(OrderedPair(i, j))
    return CubeState(n, bits), MoveLog(n, tuple(moves), seed=rng.seed)


def replay(start: CubeState, log: MoveLog) -> CubeState:
    if log.n != start.n:
        raise PreconditionError("log dimension does not match state")
    bits = start.bits
    for i, j in log.moves:
        bits ^= ((bits >> i) & 1) << j
    return CubeState(start.n, bits)


def hamming(state: CubeState) -> int:
    return state.bits.bit_count()


def block_counts(state: CubeState, m: int) -> tuple[int, int]:
    """Ones among coordinates ``[0, m)`` and among ``[m, n)``."""
    if not 1 <= m <= state.n - 1:
        raise PreconditionError(f"split point {m} out of range for n={state.n}")
    top = (state.bits & ((1 << m) - 1)).bit_count()
    return top, (state.bits >> m).bit_count()


def simulate_batch(start: CubeState, t: int, batch: StreamBatch) -> np.ndarray:
    """Run one trajectory per stream of ``batch`` for ``t`` steps.

    Returns the final packed states as ``uint64``. Row ``r`` is identical to
    ``simulate(start, t, RngStream(batch.seed, batch.stream_ids[r]))``.
    Limited to ``n <= 64``.
    """
    n = start.n
    if n > 64:
        raise PreconditionError("batched simulation supports n <= 64")
    bits = np.full(len(batch), start.bits, dtype=np.uint64)
    one = np.uint64(1)
    for _ in range(t):
        i = batch.below(n).astype(np.uint64)
        j = batch.below(n - 1).astype(np.uint64)
        j += (j >= i).astype(np.uint64)
        bits ^= ((bits >> i) & one) << j
    return bits


def popcount(bits: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(bits, dtype=np.uint64)).astype(np.int64)
