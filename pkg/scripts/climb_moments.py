"""Exact first and second moments of the time for the weight to climb from 1 to n/3.

    python scripts/climb_moments.py --n-list 60,120,240,480,960
"""
import argparse
import math

from stratwalk.lumped import h_kernel, hitting_moments


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n-list", default="60,120,240,480,960")
    args = ap.parse_args()
    prev = None
    print(f"{'n':>6} {'(E - n ln n)/n':>15} {'diff':>9} {'Var/n^2':>9}")
    for n in (int(v) for v in args.n_list.split(",")):
        hm = hitting_moments(h_kernel(n), n // 3)
        c = (hm.mean[0] - n * math.log(n)) / n
        diff = "" if prev is None else f"{c - prev:9.4f}"
        print(f"{n:>6} {c:>15.4f} {diff:>9} {hm.variance[0] / n**2:>9.4f}")
        prev = c


if __name__ == "__main__":
    main()
