"""log N(eps) of the quantized Hölder ball and the log-log slope against 1/alpha.

    python scripts/covering_entropy.py --alpha 0.5 0.75 1.0 --kmax 6
"""
import argparse

from ordlab.spectrum import covering_slope, holder_ball_log_covering

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.5, 1.0])
    ap.add_argument("--kmin", type=int, default=3)
    ap.add_argument("--kmax", type=int, default=6)
    a = ap.parse_args()
    print("alpha,eps,log_N")
    for alpha in a.alpha:
        for k in range(1, a.kmax + 1):
            print(f"{alpha},{2.0 ** -k!r},{holder_ball_log_covering(alpha, 2.0 ** -k)!r}")
    for alpha in a.alpha:
        s = covering_slope(alpha, range(a.kmin, a.kmax + 1))
        print(f"# alpha={alpha}: slope {s:.4f}, 1/alpha = {1 / alpha:.4f}")
