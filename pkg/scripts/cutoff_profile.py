"""Exact distance profile around 1.5 n ln n and the mixing-time trend.

    python scripts/cutoff_profile.py --n-list 64,128,256,512 --out results/cutoff
"""
import argparse
import math
from pathlib import Path

from stratwalk.experiments import (PROFILE_HEADER, TMIX_HEADER, alpha_grid, csv_text,
                                   cutoff_profile, write_atomic)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n-list", default="64,128,256,512")
    ap.add_argument("--alpha-min", type=float, default=-3.0)
    ap.add_argument("--alpha-max", type=float, default=3.0)
    ap.add_argument("--alpha-step", type=float, default=0.25)
    ap.add_argument("--out", default="results/cutoff")
    args = ap.parse_args()

    n_list = [int(v) for v in args.n_list.split(",")]
    res = cutoff_profile(n_list, alpha_grid(args.alpha_min, args.alpha_max, args.alpha_step),
                         [0.9, 0.75, 0.5, 0.25, 0.1])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_atomic(out / "profile.csv", csv_text(PROFILE_HEADER, res.profile))
    write_atomic(out / "tmix.csv", csv_text(TMIX_HEADER, res.tmix))

    tm = {(n, eps): t for n, eps, t, _ in res.tmix}
    print(f"{'n':>6} {'tmix(1/4)':>10} {'/ n ln n':>9} {'window':>7} {'/ n':>6}")
    for n in n_list:
        window = tm[n, 0.1] - tm[n, 0.9]
        print(f"{n:>6} {tm[n, 0.25]:>10} {tm[n, 0.25] / (n * math.log(n)):>9.4f} "
              f"{window:>7} {window / n:>6.3f}")


if __name__ == "__main__":
    main()
