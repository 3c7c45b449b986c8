"""Run the fBm local-order harness from a config file.

    python scripts/run_spectrum.py configs/fbm_local_order.toml --out results/spec
"""
import argparse
import sys

from ordlab import cli

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--out", default=None)
    ap.add_argument("--threads", type=int, default=None)
    a = ap.parse_args()
    argv = ["spectrum", "--config", a.config]
    argv += ["--out", a.out] if a.out else []
    argv += ["--threads", str(a.threads)] if a.threads else []
    sys.exit(cli.main(argv))
