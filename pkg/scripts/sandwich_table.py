"""Cylinder bounds around the ball mass at 3 eps, with a Monte Carlo ball estimate.

    python scripts/sandwich_table.py --eps 0.5 --depths 1 2 4 8
"""
import argparse

from ordlab.paths import GridPath
from ordlab.smallball import ball_log_measure_mc, ball_sandwich

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--depths", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--samples", type=int, default=10 ** 6)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    print("n,lower_log,lower_log_series,ball_mc,stderr,upper_log")
    for n in a.depths:
        c = GridPath.zero(n)
        s = ball_sandwich(c, a.eps, n)
        mc = ball_log_measure_mc(c, 3 * a.eps, a.samples, grid_refine=max(1, 256 // n), seed=a.seed)
        print(f"{n},{s.lower_log!r},{s.lower_log_series!r},{mc.log_p!r},{mc.stderr_log!r},{s.upper_log!r}")
