"""Command-line entry point: ``stratwalk <subcommand> [flags]``.

All coordinates are 0-based. The default seed comes from ``STRATWALK_SEED``
(falling back to 0).
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path


from . import couplings, lumped
from .cube import CubeState, block_counts, hamming, simulate
from .errors import PreconditionError
from .experiments import (COUPLING_HEADER, CURVE_HEADER, HITTING_HEADER,
                          PROFILE_HEADER, TMIX_HEADER, TRACE_HEADER, alpha_grid,
                          csv_text, cutoff_profile, write_atomic)
from .matrix_walk import (OpCounter, generate_key, naive_cost, naive_multiply,
                          random_challenge, replay_answer, verify)
from .oracle import FullChainOracle
from .rng import RngStream

SEED_ENV = "STRATWALK_SEED"


@dataclass
class ExperimentConfig:
    subcommand: str
    n: int | None = None
    n_list: list[int] = field(default_factory=list)
    m: int | None = None
    start: str | None = None
    start_weight: int | None = None
    target: int | None = None
    t: int | None = None
    t_max: int | None = None
    eps: list[float] = field(default_factory=list)
    trials: int = 1
    seed: int = 0
    out: str | None = None
    trace: str | None = None
    chain: str = "h"
    alpha_min: float = -10.0
    alpha_max: float = 10.0
    alpha_step: float = 1.0
    budget: int | None = None

    def __post_init__(self):
        for name in ("n", "m", "target", "start_weight"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise PreconditionError(f"--{name.replace('_', '-')} must be positive")
        for name in ("t", "t_max", "budget"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise PreconditionError(f"--{name.replace('_', '-')} must be >= 0")
        if self.trials < 1:
            raise PreconditionError("--trials must be positive")
        if any(not 0 < e < 1 for e in self.eps):
            raise PreconditionError("--eps values must lie in (0, 1)")
        if self.n_list != sorted(self.n_list):
            raise PreconditionError("--n-list must be sorted ascending")
        if self.n is not None and self.n < 2:
            raise PreconditionError("--n must be at least 2")

    def need(self, *names):
        for name in names:
            if getattr(self, name) in (None, []):
                raise PreconditionError(f"{self.subcommand} requires --{name.replace('_', '-')}")


def _int_list(s):
    return [int(x) for x in s.split(",") if x]


def _float_list(s):
    return [float(x) for x in s.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stratwalk", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    default_seed = int(os.environ.get(SEED_ENV, "0"))

    def add(name, help, *flags):
        p = sub.add_parser(name, help=help)
        p.add_argument("--seed", type=int, default=default_seed)
        p.add_argument("--out")
        for flag in flags:
            flag(p)
        return p

    n = lambda p: p.add_argument("--n", type=int)
    chain = lambda p: p.add_argument("--chain", choices=["h", "w"], default="h")
    m = lambda p: p.add_argument("--m", type=int)
    start = lambda p: p.add_argument("--start")
    sw = lambda p: p.add_argument("--start-weight", type=int)
    t = lambda p: p.add_argument("--t", type=int)
    tmax = lambda p: p.add_argument("--t-max", type=int)
    trials = lambda p: p.add_argument("--trials", type=int, default=1)

    add("simulate", "simulate trajectories of the walk", n, start, sw, t, trials)
    add("exact-tv", "exact distance curve via a lumped chain", n, chain, m, start, tmax)
    add("oracle-tv", "exact distance curve by full enumeration (n <= 12)", n, start, sw, tmax)
    p = add("tmix", "mixing time of a lumped chain", n, chain, m, start)
    p.add_argument("--eps", type=_float_list, default=[0.25])
    p = add("hitting", "hitting-time moments of the weight chain", n)
    p.add_argument("--target", type=int)
    p = add("couple", "sample coupling times", n, chain, m, sw, t, trials)
    p.add_argument("--trace", help="also write per-step gap traces to this CSV")
    p = add("cutoff-profile", "distance profile around the cutoff")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--eps", type=_float_list, default=[0.9, 0.75, 0.5, 0.25, 0.1])
    p.add_argument("--alpha-min", type=float, default=-10.0)
    p.add_argument("--alpha-max", type=float, default=10.0)
    p.add_argument("--alpha-step", type=float, default=1.0)
    p = add("auth-demo", "row-addition authentication demo", n, t)
    p.add_argument("--budget", type=int)
    return parser


def _emit(cfg: ExperimentConfig, text: str, out=None) -> None:
    target = out or cfg.out
    if target:
        write_atomic(target, text)
    else:
        sys.stdout.write(text)


def _start_state(cfg: ExperimentConfig) -> CubeState:
    if cfg.start is not None:
        s = CubeState.from_string(cfg.start)
        if s.n != cfg.n:
            raise PreconditionError("--start length differs from --n")
        return s
    w = cfg.start_weight or 1
    if w > cfg.n:
        raise PreconditionError("--start-weight exceeds --n")
    return CubeState(cfg.n, (1 << w) - 1)


def _lumped_start(cfg: ExperimentConfig):
    if cfg.chain == "h":
        k = int(cfg.start) if cfg.start else 1
        return k, cfg.n, (k, 0)
    cfg.need("m")
    if cfg.start:
        a, b = (int(v) for v in cfg.start.split(","))
    else:
        a, b = cfg.m, 0
    return (a, b), cfg.m, (a, b)


def _curve_rows(n, m, ab, curve):
    return [(n, m, ab[0], ab[1], t, d) for t, d in enumerate(curve)]


def cmd_simulate(cfg):
    cfg.need("n", "t")
    start = _start_state(cfg)
    if cfg.trials == 1:
        final, log = simulate(start, cfg.t, RngStream(cfg.seed))
        print(final)
        if cfg.out:
            write_atomic(cfg.out, log.dumps())
        return
    rows = []
    for run in range(cfg.trials):
        final, _ = simulate(start, cfg.t, RngStream(cfg.seed, run))
        rows.append((run, str(final), hamming(final)))
    _emit(cfg, csv_text(("run", "final", "weight"), rows))


def cmd_exact_tv(cfg):
    cfg.need("n")
    start, m, ab = _lumped_start(cfg)
    t_max = cfg.t_max if cfg.t_max is not None else math.ceil(3 * cfg.n * math.log(cfg.n))
    curve = lumped.exact_tv_curve(cfg.n, t_max, chain=cfg.chain, start=start, m=cfg.m)
    _emit(cfg, csv_text(CURVE_HEADER, _curve_rows(cfg.n, m, ab, curve)))


def cmd_oracle_tv(cfg):
    cfg.need("n")
    start = _start_state(cfg)
    w = hamming(start)
    ab = block_counts(start, w) if w < cfg.n else (w, 0)
    t_max = cfg.t_max if cfg.t_max is not None else math.ceil(3 * cfg.n * math.log(cfg.n))
    curve = FullChainOracle(cfg.n).tv_curve(start, t_max)
    _emit(cfg, csv_text(CURVE_HEADER, _curve_rows(cfg.n, w, ab, curve)))


def cmd_tmix(cfg):
    cfg.need("n")
    start, _, _ = _lumped_start(cfg)
    for eps in cfg.eps:
        print(lumped.tmix(cfg.n, eps, chain=cfg.chain, start=start, m=cfg.m))


def cmd_hitting(cfg):
    cfg.need("n")
    target = cfg.target or max(2, cfg.n // 3)
    hm = lumped.hitting_moments(lumped.h_kernel(cfg.n), target)
    rows = [(cfg.n, target, j + 1, hm.mean[j], hm.variance[j]) for j in range(cfg.n)]
    _emit(cfg, csv_text(HITTING_HEADER, rows))


def cmd_couple(cfg):
    cfg.need("n")
    n = cfg.n
    if cfg.chain == "h":
        h0 = cfg.start_weight or 1
        tau, capped = couplings.h_coupling_times(n, h0, cfg.seed, cfg.trials, cfg.t)
        rows = [(n, h0, r, tau[r], capped[r]) for r in range(cfg.trials)]
        _emit(cfg, csv_text(COUPLING_HEADER, rows))
        return
    xbar = cfg.m or cfg.start_weight or n // 2
    if not 1 <= xbar <= n - 1:
        raise PreconditionError("split point must lie in 1..n-1")
    a, b = couplings.worst_partner(n, xbar)
    res = couplings.coupling_times_w(n, xbar, (xbar, 0, a, b), cfg.seed, cfg.trials,
                                     cfg.t, trace=bool(cfg.trace))
    rows = [(n, xbar, r, res.tau[r], res.capped[r]) for r in range(cfg.trials)]
    _emit(cfg, csv_text(COUPLING_HEADER, rows))
    if cfg.trace:
        trows = []
        for r in range(cfg.trials):
            end = res.tau[r] if not res.capped[r] else len(res.traces) - 1
            for t in range(end + 1):
                h, gap, mart = res.traces[t]
                trows.append((r, t, h[r], gap[r], mart[r]))
        write_atomic(cfg.trace, csv_text(TRACE_HEADER, trows))


def cmd_cutoff_profile(cfg):
    alphas = alpha_grid(cfg.alpha_min, cfg.alpha_max, cfg.alpha_step)
    res = cutoff_profile(cfg.n_list, alphas, cfg.eps)
    outdir = Path(cfg.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    write_atomic(outdir / "profile.csv", csv_text(PROFILE_HEADER, res.profile))
    write_atomic(outdir / "tmix.csv", csv_text(TMIX_HEADER, res.tmix))


def cmd_auth_demo(cfg):
    cfg.need("n", "t")
    n, t = cfg.n, cfg.t
    rng = RngStream(cfg.seed)
    key = generate_key(n, t, rng)
    # arbitrary demo choices: uniform nonzero challenge, budget of 2t units
    x = random_challenge(n, rng)
    budget = cfg.budget if cfg.budget is not None else 2 * t
    honest, dishonest = OpCounter(), OpCounter()
    y = replay_answer(key, x, honest)
    y_naive = naive_multiply(key.public_matrix, x, dishonest)
    ok = verify(key.public_matrix, x, y, honest.ops, budget)
    ok_naive = verify(key.public_matrix, x, y_naive, dishonest.ops, budget)
    lines = [
        f"n={n} t={t} budget={budget}",
        f"replay_ops={honest.ops} verdict={'accept' if ok else 'reject'}",
        f"naive_ops={dishonest.ops} verdict={'accept' if ok_naive else 'reject'}",
        f"naive_cost_word_ops={naive_cost(n)}",
    ]
    _emit(cfg, "\n".join(lines) + "\n")


COMMANDS = {
    "simulate": cmd_simulate,
    "exact-tv": cmd_exact_tv,
    "oracle-tv": cmd_oracle_tv,
    "tmix": cmd_tmix,
    "hitting": cmd_hitting,
    "couple": cmd_couple,
    "cutoff-profile": cmd_cutoff_profile,
    "auth-demo": cmd_auth_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if v is not None}
    try:
        cfg = ExperimentConfig(**fields)
        COMMANDS[cfg.subcommand](cfg)
    except PreconditionError as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"stratwalk: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
