"""Command line entry point: ``ordlab <subcommand> [flags]``.

Exit codes: 0 success, 1 domain or precondition error (including bad
flags), 2 I/O error, 3 numerical-resolution failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import chord_deviation, holder_seminorm, orey_table, write_orey_csv
from .cylinder import (DEFAULT_NODES, CylinderSpec, cylinder_log_measure_exact,
                       cylinder_log_measure_mc)
from .errors import OrdlabError, PreconditionError, ResolutionError
from .frostman import frostman_verify, load_instance, max_frostman_mass, min_cover_weight
from .paths import FbmSpec, GridPath, simulate_fbm
from .scaling import tail_window
from .serialize import csv_text, dumps, write_csv, write_json, write_manifest

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_RESOLUTION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("ORDLAB_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise PreconditionError(f"ORDLAB_SEED must be an integer, got {env!r}") from None


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def _manifest(args, config: dict, out_dir) -> None:
    if out_dir is not None:
        write_manifest(out_dir, {"command": args.command, **config}, args.seed, args.argv)


def _center(path: str | None, n: int) -> GridPath:
    return GridPath.zero(n) if path is None else GridPath.load(path)


LOGP_HEADER = ["n", "epsilon", "method", "log_p", "stderr_log", "nodes", "samples", "hits",
               "converged"]


def _logp_row(n, eps, lp) -> list:
    return [n, eps, lp.method, lp.log_p, lp.stderr_log, lp.nodes, lp.samples, lp.hits,
            int(lp.converged)]


# -- subcommands --------------------------------------------------------------

def cmd_simulate(args, stdout) -> int:
    path = simulate_fbm(FbmSpec(args.hurst, args.n, args.seed, args.method, args.stream))
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        path.to_csv(out)
    else:
        path.to_binary(out)
    _manifest(args, {"hurst": args.hurst, "n": args.n, "method": args.method,
                     "stream": args.stream}, out.parent)
    return EXIT_OK


def cmd_analyze(args, stdout) -> int:
    path = GridPath.load(args.path)
    rows = orey_table(path, args.m_list)
    t = tail_window(len(rows), args.tail)
    window = [r for _, _, r in rows[-t:]]
    result = {"n": path.n, "q_minus": min(window), "q_plus": max(window), "window": t,
              "ratios": [[m, r] for m, _, r in rows]}
    if args.beta is not None:
        result["holder_seminorm"] = holder_seminorm(path, args.beta, args.holder_mode)
    if args.chord is not None:
        result["chord_deviation"] = chord_deviation(path, args.chord).value
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_orey_csv(rows, out / "orey.csv")
        write_json(out / "analysis.json", result)
        _manifest(args, {"path": args.path, "m_list": args.m_list, "tail": args.tail,
                         "beta": args.beta, "chord": args.chord}, out)
    else:
        stdout.write(dumps(result))
    return EXIT_OK


def cmd_cylinder(args, stdout) -> int:
    spec = CylinderSpec.from_path(_center(args.center, args.n), args.n, args.eps)
    if args.method == "exact":
        lp = cylinder_log_measure_exact(spec, args.nodes, not args.fixed_nodes)
        if not lp.converged:
            raise ResolutionError("; ".join(lp.warnings))
    else:
        lp = cylinder_log_measure_mc(spec, args.samples, args.seed, threads=args.threads)
    for w in lp.warnings:
        print(f"warning: {w}", file=sys.stderr)
    text = csv_text(LOGP_HEADER, [_logp_row(args.n, args.eps, lp)], ["log_p"])
    _emit(text, args.out, stdout)
    if args.out:
        _manifest(args, {"n": args.n, "eps": args.eps, "center": args.center,
                         "method": args.method, "nodes": args.nodes, "samples": args.samples,
                         "fixed_nodes": args.fixed_nodes}, Path(args.out).parent)
    return EXIT_OK


def cmd_smallball(args, stdout) -> int:
    from .smallball import (ball_log_measure_mc, ball_sandwich, bridge_sup_tail,
                            bridge_sup_tail_mc, local_order_cylinder_table)

    if args.mode == "ball":
        center = _center(args.center, args.n or 1)
        lp = ball_log_measure_mc(center, args.eps, args.samples, args.refine, args.seed,
                                 threads=args.threads)
        text = csv_text(LOGP_HEADER, [_logp_row(center.n, args.eps, lp)], ["log_p"])
    elif args.mode == "sandwich":
        if args.n is None:
            raise PreconditionError("--n is required for the sandwich")
        center = _center(args.center, args.n)
        text = dumps(ball_sandwich(center, args.eps, args.n, args.nodes))
    elif args.mode == "order":
        if args.beta is None or not args.n_list:
            raise PreconditionError("--beta and --n-list are required for local-order ratios")
        center = _center(args.center, max(args.n_list))
        rows = local_order_cylinder_table(center, args.beta, args.n_list, args.nodes)
        text = csv_text(["n", "ratio", "epsilon", "log_cyl"], [list(r) for r in rows],
                        ["log_cyl"])
    else:
        s = bridge_sup_tail(args.eps, args.h)
        res = {"epsilon": args.eps, "h": args.h, "series": s.value, "series_error": s.error_bound}
        if args.samples:
            mean, se = bridge_sup_tail_mc(args.eps, args.h, args.samples, args.seed,
                                          threads=args.threads)
            res.update(mc=mean, mc_stderr=se)
        text = dumps(res)
    _emit(text, args.out, stdout)
    if args.out:
        _manifest(args, {k: getattr(args, k) for k in
                         ("mode", "center", "eps", "n", "beta", "n_list", "samples", "refine",
                          "nodes", "h")}, Path(args.out).parent)
    return EXIT_OK


def cmd_frostman(args, stdout) -> int:
    tree, gauge = load_instance(args.instance)
    sol = max_frostman_mass(tree, gauge)
    report = frostman_verify(sol, tree, gauge)
    cover = min_cover_weight(tree, gauge)
    res = sol.to_dict() | {"cover_weight": cover.weight,
                           "cover": [tree.node_label(c) for c in cover.antichain],
                           "verified": report.passed, "messages": report.messages}
    _emit(dumps(res), args.out, stdout)
    if args.out:
        _manifest(args, {"instance": args.instance}, Path(args.out).parent)
    if not report.passed:
        raise ResolutionError("; ".join(report.messages) or "verification failed")
    return EXIT_OK


def cmd_spectrum(args, stdout) -> int:
    from .spectrum import ExperimentConfig, fbm_local_order_experiment, write_experiment

    cfg = ExperimentConfig.from_file(args.config)
    out = Path(args.out or cfg.output_dir)
    results = fbm_local_order_experiment(cfg, args.threads)
    summary = write_experiment(results, cfg, out)
    _manifest(args, cfg.outputs_only(), out)
    stdout.write(dumps(summary))
    return EXIT_OK


def cmd_selftest(args, stdout) -> int:
    from .selftest import HEADER, rows, run_selftest, summary

    checks = run_selftest(args.seed, args.threads, args.samples)
    for c in checks:
        stdout.write(f"{'PASS' if c.passed else 'FAIL'} {c.name}\n")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "selftest.csv", HEADER, rows(checks))
        write_json(out / "selftest.json", summary(checks))
        _manifest(args, {"samples": args.samples}, out)
    if not all(c.passed for c in checks):
        raise ResolutionError("self-test failed: " + ", ".join(c.name for c in checks if not c.passed))
    return EXIT_OK


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="base seed (default: $ORDLAB_SEED, else 0)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker cap; results do not depend on it")

    p = _Parser(prog="ordlab", description="Order-scale experiments on the Wiener measure.")
    p.add_argument("--version", action="version", version=f"ordlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", parents=[common], help="simulate an fBm path")
    s.add_argument("--hurst", type=float, default=0.5)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--method", default="auto", choices=["auto", "cholesky", "circulant"])
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--out", required=True, help="output .csv or binary file")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("analyze", parents=[common], help="Orey exponents and grid statistics")
    s.add_argument("--path", required=True)
    s.add_argument("--m-list", type=_int_list, default=None)
    s.add_argument("--tail", type=int, default=None)
    s.add_argument("--beta", type=float, default=None, help="also report the beta-Hölder seminorm")
    s.add_argument("--holder-mode", default="bound", choices=["exact", "bound"])
    s.add_argument("--chord", type=int, default=None, help="also report Delta_m for this m")
    s.add_argument("--out", default=None, help="output directory")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("cylinder", parents=[common], help="cylinder measure")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--center", default=None, help="path file (default: zero path)")
    s.add_argument("--method", default="exact", choices=["exact", "mc"])
    s.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    s.add_argument("--fixed-nodes", action="store_true", help="disable node doubling")
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--out", default=None, help="output CSV file")
    s.set_defaults(func=cmd_cylinder)

    s = sub.add_parser("smallball", parents=[common], help="ball masses and local-order ratios")
    s.add_argument("--mode", default="ball", choices=["ball", "sandwich", "order", "bridge"])
    s.add_argument("--center", default=None)
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--n-list", type=_int_list, default=None)
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--refine", type=int, default=8)
    s.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    s.add_argument("--h", type=float, default=1.0, help="bridge length")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_smallball)

    s = sub.add_parser("frostman", parents=[common], help="solve and verify a tree instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_frostman)

    s = sub.add_parser("spectrum", parents=[common], help="run the experiment harness")
    s.add_argument("--config", required=True, help="TOML or JSON experiment config")
    s.add_argument("--out", default=None, help="output directory")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("selftest", parents=[common], help="run the invariant battery")
    s.add_argument("--samples", type=int, default=40_000)
    s.add_argument("--out", default=None, help="output directory")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = ["ordlab", *argv]
    try:
        args.seed = resolve_seed(args.seed)
        return args.func(args, stdout)
    except OrdlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        if type(exc).__name__ == "TOMLDecodeError":
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        if isinstance(exc, ValueError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DOMAIN
        raise


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
