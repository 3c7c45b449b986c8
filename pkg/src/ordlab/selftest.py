"""A small deterministic battery of invariant checks.

Every check is seeded and its Monte Carlo parts use a fixed shard count, so
the report depends on the seed only and never on the thread cap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtr

from .analysis import orey_exponents, quadratic_variation
from .cylinder import (CylinderSpec, cylinder_log_measure_exact, cylinder_log_measure_mc,
                       quad_lower_bound_neglog, univ_upper_bound)
from .frostman import (frostman_verify, max_frostman_mass, min_cover_weight, random_tree)
from .paths import FbmSpec, GridPath, make_rng, simulate_brownian, simulate_fbm
from .scaling import GaugeSpec
from .smallball import bridge_sup_tail, bridge_sup_tail_mc, brownian_sup_prob
from .spectrum import holder_ball_log_covering, spectrum_table


@dataclass
class Check:
    name: str
    value: float
    reference: float
    tolerance: float
    passed: bool


def _close(name, value, reference, tol) -> Check:
    return Check(name, float(value), float(reference), float(tol),
                 bool(abs(value - reference) <= tol))


def run_selftest(seed: int = 0, threads: int | None = None, mc_samples: int = 40_000) -> list:
    out = []

    for eps in (0.2, 0.5, 1.0):
        lp = cylinder_log_measure_exact(CylinderSpec(GridPath.zero(1), eps)).log_p
        out.append(_close(f"cylinder_n1_eps{eps}", lp, math.log(2 * ndtr(eps) - 1), 1e-6))

    for n in (2, 4):
        spec = CylinderSpec(simulate_brownian(n, seed, stream=n), 0.5)
        ex = cylinder_log_measure_exact(spec).log_p
        mc = cylinder_log_measure_mc(spec, mc_samples, seed, threads=threads)
        out.append(_close(f"cylinder_mc_n{n}", mc.log_p, ex, 4 * mc.stderr_log))

    worst_univ, worst_quad = -math.inf, -math.inf
    for k in range(4):
        for n in (2, 4, 8, 16):
            spec = CylinderSpec(simulate_brownian(n, seed, stream=100 + k), n ** -0.5)
            lp = cylinder_log_measure_exact(spec).log_p
            worst_univ = max(worst_univ, lp - univ_upper_bound(n))
            if quadratic_variation(spec.center, n) > 0:
                worst_quad = max(worst_quad, quad_lower_bound_neglog(spec) + lp)
    out.append(Check("univ_bound_margin", worst_univ, 0.0, 0.0, worst_univ <= 0))
    out.append(Check("quad_bound_margin", worst_quad, 0.0, 0.0, worst_quad <= 0))

    series = bridge_sup_tail(0.5, 1.0).value
    mean, se = bridge_sup_tail_mc(0.5, 1.0, mc_samples, seed, threads=threads)
    out.append(_close("bridge_series", series, 0.963947, 1e-5))
    out.append(_close("bridge_mc", mean, series, 4 * se))
    out.append(_close("sup_prob_two_series", brownian_sup_prob(0.7),
                      brownian_sup_prob(0.7, method="eigen"), 1e-10))

    rng = make_rng(seed, 7)
    gap = 0.0
    ok = True
    for i in range(10):
        tree = random_tree(int(rng.integers(2, 9)), 0.3, rng)
        g = GaugeSpec.dim([0.5, 1.0, 1.5][i % 3])
        sol = max_frostman_mass(tree, g)
        gap = max(gap, abs(sol.total_mass - min_cover_weight(tree, g).weight))
        ok &= frostman_verify(sol, tree, g).passed
    out.append(Check("frostman_duality_gap", gap, 0.0, 1e-12, ok and gap <= 1e-12))

    out.append(_close("covering_alpha1_half", math.exp(holder_ball_log_covering(1.0, 0.5)), 9, 1e-9))
    out.append(_close("covering_alpha1_quarter", math.exp(holder_ball_log_covering(1.0, 0.25)), 81, 1e-8))

    pts = spectrum_table([1.0, 2.0, 6.0])
    ok = pts[0].f_theory == -math.inf and pts[1].f_theory == 2.0 and pts[2].f_theory == 4.0
    out.append(Check("spectrum_identity", 0.0, 0.0, 0.0, ok))

    est = orey_exponents(simulate_fbm(FbmSpec(0.5, 4096, seed)))
    out.append(_close("orey_H0.5", est.tail_median, 0.5, 0.08))
    return out


HEADER = ["check", "value", "reference", "tolerance", "passed"]


def rows(checks) -> list:
    return [[c.name, c.value, c.reference, c.tolerance, int(c.passed)] for c in checks]


def summary(checks) -> dict:
    return {"passed": all(c.passed for c in checks),
            "failed": [c.name for c in checks if not c.passed],
            "checks": {c.name: c for c in checks}}


if __name__ == "__main__":  # pragma: no cover
    for c in run_selftest():
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.value!r}")
