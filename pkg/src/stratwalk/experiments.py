"""Experiment drivers shared by the CLI and the scripts."""
from __future__ import annotations

import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import PreconditionError
from .lumped import exact_tv_curve, tmix

CURVE_HEADER = ("n", "m", "start_a", "start_b", "t", "tv")
PROFILE_HEADER = ("n", "alpha", "t", "tv")
TMIX_HEADER = ("n", "eps", "tmix", "tmix_over_nlogn")
COUPLING_HEADER = ("n", "m", "run", "tau", "capped")
TRACE_HEADER = ("run", "t", "h", "gap", "mart")
HITTING_HEADER = ("n", "target", "start", "mean", "variance")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row {row!r} does not match header {header}")
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    lines = text.rstrip("\n").split("\n")
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def cutoff_time(n: int, alpha: float) -> int:
    """``round(1.5 n ln n + alpha n)``, clipped at zero."""
    return max(0, round(1.5 * n * math.log(n) + alpha * n))


def alpha_grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0 or hi < lo:
        raise PreconditionError("alpha grid needs step > 0 and max >= min")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(k + 1)]


@dataclass
class CutoffProfile:
    profile: list = field(default_factory=list)  # (n, alpha, t, tv)
    tmix: list = field(default_factory=list)  # (n, eps, tmix, ratio)


def cutoff_profile(n_list: Sequence[int], alphas: Sequence[float],
                   eps_list: Sequence[float]) -> CutoffProfile:
    """Distance around ``1.5 n ln n`` from a weight-one start, per ``n``."""
    out = CutoffProfile()
    for n in sorted(n_list):
        if n < 8:
            raise PreconditionError(f"cutoff profile needs n >= 8, got {n}")
        times = [cutoff_time(n, a) for a in alphas]
        curve = exact_tv_curve(n, max(times), chain="w", start=(1, 0), m=1)
        out.profile.extend((n, a, t, curve[t]) for a, t in zip(alphas, times))
        for eps in eps_list:
            t = tmix(n, eps, chain="w", start=(1, 0), m=1)
            out.tmix.append((n, eps, t, t / (n * math.log(n))))
    return out
