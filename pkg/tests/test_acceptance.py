"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

The lines are printed as they are produced and collected again in the
terminal summary.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
from scipy.special import erf

from ordlab.analysis import orey_exponents, quadratic_variation
from ordlab.cylinder import (CylinderSpec, cylinder_log_measure_exact, cylinder_log_measure_mc,
                             quad_lower_bound_neglog, univ_upper_bound)
from ordlab.frostman import (brute_force_cover_weight, max_frostman_mass, min_cover_weight,
                             random_tree)
from ordlab.paths import FbmSpec, GridPath, make_rng, simulate_brownian, simulate_fbm
from ordlab.scaling import GaugeSpec
from ordlab.smallball import (ball_log_measure_mc, ball_sandwich, bridge_sup_tail,
                              bridge_sup_tail_mc)
from ordlab.spectrum import (ExperimentConfig, covering_slope, fbm_local_order_experiment,
                             holder_ball_log_covering, spectrum_table, summarize)

REPORT = {}


def report(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT[k] = line
    print(line)
    assert ok, line


def centers(n):
    return [GridPath.zero(n)] + [simulate_brownian(n, s, stream=77) for s in range(3)]


def test_criterion_01_cylinder_exactness():
    t0 = time.perf_counter()
    worst, cdf_err = 0.0, 0.0
    for n in (1, 2, 4, 8):
        for ci, c in enumerate(centers(n)):
            for eps in (0.2, 0.5, 1.0):
                spec = CylinderSpec(c, eps)
                ex = cylinder_log_measure_exact(spec).log_p
                mc = cylinder_log_measure_mc(spec, 10 ** 6, seed=100 * n + ci)
                worst = max(worst, abs(ex - mc.log_p) / mc.stderr_log)
                if n == 1:
                    x = c.values[1]
                    ref = 0.5 * (erf((x + eps) / math.sqrt(2)) - erf((x - eps) / math.sqrt(2)))
                    cdf_err = max(cdf_err, abs(ex - math.log(ref)))
    dt = time.perf_counter() - t0
    report(1, worst <= 3 and cdf_err <= 1e-6 and dt < 120,
           f"max |exact-mc|/stderr = {worst:.2f} (<= 3), n=1 CDF error {cdf_err:.1e}, {dt:.0f}s")


def test_criterion_02_node_doubling():
    worst = 0.0
    for n in (1, 2, 4, 8, 16, 32, 64):
        for c in centers(n)[:3]:
            for eps in (0.05, 0.1, 0.2, 0.5, 1.0):
                spec = CylinderSpec(c, eps)
                a = cylinder_log_measure_exact(spec, 256, adaptive=False).log_p
                b = cylinder_log_measure_exact(spec, 512, adaptive=False).log_p
                worst = max(worst, abs(b - a) / abs(b))
    report(2, worst < 1e-6, f"max relative change 256->512 nodes = {worst:.1e} (< 1e-6)")


def _bound_grid():
    for n in range(2, 65, 2):
        for s in range(10):
            yield n, CylinderSpec(simulate_brownian(n, s, stream=300), n ** -0.5)


def test_criterion_03_univ_bound():
    viol, margin = 0, -math.inf
    for n, spec in _bound_grid():
        gap = cylinder_log_measure_exact(spec).log_p - univ_upper_bound(n)
        margin = max(margin, gap)
        viol += gap > 0
    report(3, viol == 0, f"{viol} violations over 320 instances, worst margin {margin:.3f}")


def test_criterion_04_quad_bound():
    viol, checked = 0, 0
    for n, spec in _bound_grid():
        if quadratic_variation(spec.center, n) > 0:
            checked += 1
            viol += -cylinder_log_measure_exact(spec).log_p < quad_lower_bound_neglog(spec)
    report(4, viol == 0 and checked > 0, f"{viol} violations over {checked} instances")


def test_criterion_05_sandwich():
    ok, parts = True, []
    for n in (2, 4):
        s = ball_sandwich(GridPath.zero(n), 0.5, n)
        mc = ball_log_measure_mc(GridPath.zero(n), 1.5, 10 ** 6, grid_refine=256 // n, seed=n)
        band = 3 * mc.stderr_log
        ok &= s.valid and s.lower_log - band <= mc.log_p <= s.upper_log + band
        parts.append(f"n={n}: {s.lower_log:.3f} <= {mc.log_p:.3f} <= {s.upper_log:.3f}")
    report(5, ok, "; ".join(parts))


def test_criterion_06_bridge_tail():
    s = bridge_sup_tail(0.5, 1.0).value
    arith = 2 * sum((-1) ** (k - 1) * math.exp(-2 * k * k * 0.25) for k in range(1, 51))
    mean, se = bridge_sup_tail_mc(0.5, 1.0, 10 ** 6, seed=6)
    ok = abs(s - 0.963947) <= 1e-5 and abs(s - arith) <= 1e-12 and abs(mean - s) <= 3 * se
    report(6, ok, f"series {s:.7f}, MC {mean:.6f} +- {se:.6f}")


def test_criterion_07_orey_fbm():
    ok, parts = True, []
    for H in (0.3, 0.5, 0.7):
        meds = [orey_exponents(simulate_fbm(FbmSpec(H, 2 ** 16, s))).tail_median for s in range(20)]
        m = float(np.median(meds))
        ok &= abs(m - H) <= 0.05
        parts.append(f"H={H}: {m:.4f}")
    report(7, ok, "median tail Orey ratio " + ", ".join(parts))


def test_criterion_08_local_order_fbm():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(hurst_grid=[0.4, 0.5], n_max=2048, seeds=list(range(20)))
    summary = summarize(fbm_local_order_experiment(cfg), cfg)
    dt = time.perf_counter() - t0
    ok = dt < 600 and all(v["relative_error"] <= 0.25 and v["excluded"] == 0
                          for v in summary.values())
    parts = [f"H={h}: {v['median_tail_ratio']:.3f} vs {v['theory']:.1f}" for h, v in summary.items()]
    report(8, ok, ", ".join(parts) + f" (within 25%), {dt:.0f}s")


def test_criterion_09_frostman_duality():
    rng = make_rng(9, 0)
    gap, brute_gap, small = 0.0, 0.0, 0
    for i in range(100):
        depth = int(rng.integers(1, 13))
        tree = random_tree(depth, float(rng.uniform(0.05, 0.6)), rng)
        g = GaugeSpec.dim((0.5, 1.0, 1.5)[i % 3])
        flow = max_frostman_mass(tree, g).total_mass
        cover = min_cover_weight(tree, g).weight
        gap = max(gap, abs(flow - cover))
        if depth <= 4:
            small += 1
            brute = brute_force_cover_weight(tree, g)
            brute_gap = max(brute_gap, abs(brute - cover), abs(brute - flow))
    report(9, gap <= 1e-12 and brute_gap <= 1e-12 and small > 0,
           f"max |flow - cover| = {gap:.1e}, {small} trees vs enumeration gap {brute_gap:.1e}")


def test_criterion_10_holder_entropy():
    slopes = {a: covering_slope(a) for a in (0.5, 1.0)}
    exact = [math.exp(holder_ball_log_covering(1.0, e)) for e in (0.5, 0.25)]
    ok = all(abs(s - 1 / a) <= 0.15 for a, s in slopes.items())
    ok &= round(exact[0]) == 9 and round(exact[1]) == 81 and abs(exact[0] - 9) < 1e-9
    report(10, ok, f"slopes {slopes[0.5]:.4f} (target 2), {slopes[1.0]:.4f} (target 1); N = 9, 81")


def test_criterion_11_spectrum_identity():
    pts = {p.xi: p.f_theory for p in spectrum_table([2, 4, 6, 10, 0.5, 1, 1.9])}
    ok = all(pts[x] == 1 + x / 2 for x in (2, 4, 6, 10))
    ok &= all(pts[x] == -math.inf for x in (0.5, 1, 1.9))
    report(11, ok, "f = 1 + xi/2 on {2,4,6,10}, -inf sentinel on {0.5,1,1.9}")


def test_criterion_12_determinism(tmp_path):
    outs = []
    for threads in (1, 8):
        for rep in range(2):
            d = tmp_path / f"t{threads}_{rep}"
            subprocess.run([sys.executable, "-m", "ordlab.cli", "selftest", "--seed", "5",
                            "--threads", str(threads), "--out", str(d)], check=True,
                           capture_output=True)
            outs.append(d)
    same = all((o / f).read_bytes() == (outs[0] / f).read_bytes()
               for o in outs for f in ("selftest.csv", "selftest.json"))
    man = [json.loads((o / "manifest.json").read_text()) for o in outs]
    same &= len({(m["config_hash"], m["seed"], m["tool_version"]) for m in man}) == 1
    report(12, same, "selftest outputs byte-identical across 2 runs x thread caps {1, 8}")
