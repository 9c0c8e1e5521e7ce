"""Monte Carlo coupling times for both couplings, with tail summaries.

    python scripts/coupling_times.py --n 128 --runs 10000 --out results/coupling
"""
import argparse
import math
from pathlib import Path

import numpy as np

from stratwalk.couplings import coupling_times_w, h_coupling_times, worst_partner
from stratwalk.experiments import COUPLING_HEADER, csv_text, write_atomic


def summarize(label, tau, n):
    scale = n * math.log(n)
    q = np.quantile(tau, [0.5, 0.9, 0.99])
    print(f"{label}: mean {tau.mean():.1f} ({tau.mean() / scale:.3f} n ln n), "
          f"quantiles 50/90/99% {q[0]:.0f}/{q[1]:.0f}/{q[2]:.0f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/coupling")
    args = ap.parse_args()
    n, runs = args.n, args.runs
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    tau, capped = h_coupling_times(n, 1, args.seed, runs)
    write_atomic(out / "hamming.csv", csv_text(COUPLING_HEADER, [(n, 1, r, tau[r], capped[r]) for r in range(runs)]))
    summarize("weight chain from 1", tau[~capped], n)
    base = 0.5 * n * math.log(n)
    for alpha in (1, 2, 4, 8):
        print(f"  P(tau > 0.5 n ln n + {alpha} n) = {np.mean(tau > base + alpha * n):.4f}")

    xbar = n // 2
    t_mid = round(n * math.log(n))
    res = coupling_times_w(n, xbar, (xbar, 0, *worst_partner(n, xbar)), args.seed + 1, runs,
                           record_at=[t_mid])
    write_atomic(out / "pairing.csv",
                 csv_text(COUPLING_HEADER, [(n, xbar, r, res.tau[r], res.capped[r]) for r in range(runs)]))
    summarize(f"pairing coupling, split {xbar}", res.tau[~res.capped], n)
    print(f"  mean M at t={t_mid}: {res.mart_at[t_mid].mean():.3f} (n = {n})")
    if res.capped.any():
        print(f"  {res.capped.sum()} runs hit the step cap")


if __name__ == "__main__":
    main()
