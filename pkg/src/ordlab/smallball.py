"""Sup-norm small balls of the Wiener measure.

Ball masses are compared with cylinder masses from both sides: a ball is
inside the cylinder of the same radius, and a cylinder of radius eps carries
a ball of radius 3 eps up to the factor exp(-2 n^2 eps^2) once the center
stays within eps of its chords.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp, ndtr

from .analysis import chord_deviation
from .cylinder import (DEFAULT_NODES, MC_CHUNK, MC_SHARDS, CylinderSpec, LogProb,
                       cylinder_log_measure_exact, log_fraction, run_shards)
from .errors import DomainError, PreconditionError
from .paths import GridPath, brownian_batch


class SeriesValue(NamedTuple):
    value: float
    error_bound: float


def bridge_sup_tail(epsilon: float, h: float = 1.0, terms: int = 50) -> SeriesValue:
    """P(sup_{[0,h]} |X| >= eps) for a Brownian bridge X pinned at 0 and h.

    Partial sum of 2 sum_k (-1)^{k-1} exp(-2 k^2 eps^2 / h), clamped to
    [0, 1]; the error bound is the first omitted term.
    """
    if epsilon < 0 or not h > 0 or terms < 1:
        raise DomainError("need epsilon >= 0, h > 0, terms >= 1")
    if epsilon == 0:
        return SeriesValue(1.0, 0.0)
    x = 2.0 * epsilon * epsilon / h
    k = np.arange(1, terms + 1, dtype=float)
    s = 2.0 * float(np.sum((-1.0) ** (k - 1) * np.exp(-k * k * x)))
    return SeriesValue(min(max(s, 0.0), 1.0), 2.0 * math.exp(-(terms + 1) ** 2 * x))


def bridge_sup_log_stay(epsilon: float, h: float = 1.0, terms: int = 50) -> float:
    """log P(sup_{[0,h]} |X| < eps) for the same bridge, accurate at any eps.

    Uses 1 - tail when 2 eps^2 / h >= 1 and otherwise the dual series
    (sqrt(2 pi) / a) sum_k exp(-(2k-1)^2 pi^2 / (8 a^2)), a = eps / sqrt(h),
    whose terms decay fast exactly where the tail series is slow.
    """
    if not epsilon > 0 or not h > 0:
        raise DomainError("need epsilon > 0 and h > 0")
    a = epsilon / math.sqrt(h)
    if 2 * a * a >= 1:
        return math.log1p(-bridge_sup_tail(epsilon, h, terms).value)
    m = 2 * np.arange(1, terms + 1, dtype=float) - 1
    logs = -(m * m) * math.pi ** 2 / (8 * a * a)
    return float(0.5 * math.log(2 * math.pi) - math.log(a) + logsumexp(logs))


def bridge_sup_tail_mc(epsilon: float, h: float, samples: int, seed: int, steps: int = 128,
                       shards: int = MC_SHARDS, threads: int | None = None):
    """Monte Carlo P(sup |bridge| >= eps) with exact per-step crossing weights.

    Each sampled bridge is kept on ``steps`` grid points; between them the
    conditional probability of leaving (-eps, eps) is the one-barrier
    reflection formula for each side, so the estimator carries no grid bias
    beyond the (doubly exponentially small) chance of touching both barriers
    within one step. Returns (estimate, stderr).
    """
    dt = h / steps
    t = np.arange(1, steps + 1) / steps

    def chunk_sums(rng, size):
        tot = tot2 = 0.0
        while size > 0:
            b = min(size, MC_CHUNK // 2)
            w = np.cumsum(rng.standard_normal((b, steps)) * math.sqrt(dt), axis=1)
            x = np.concatenate([np.zeros((b, 1)), w - t * w[:, -1:]], axis=1)
            a, c = x[:, :-1], x[:, 1:]
            inside = np.all(np.abs(x) < epsilon, axis=1)
            with np.errstate(over="ignore"):
                up = np.exp(-2 * (epsilon - a) * (epsilon - c) / dt)
                dn = np.exp(-2 * (epsilon + a) * (epsilon + c) / dt)
            stay = np.prod(np.clip(1 - up - dn, 0, 1), axis=1) * inside
            exit_ = 1 - stay
            tot += float(exit_.sum())
            tot2 += float((exit_ * exit_).sum())
            size -= b
        return tot, tot2

    parts = run_shards(chunk_sums, samples, seed, shards, threads)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / samples)


def brownian_sup_prob(epsilon: float, t: float = 1.0, terms: int = 60,
                      method: str = "reflection") -> float:
    """P(sup_{[0,t]} |B| < eps) for standard Brownian motion.

    ``reflection``: sum over k of (-1)^k [Phi((2k+1) a) - Phi((2k-1) a)],
    a = eps / sqrt(t). ``eigen``: (4/pi) sum (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 t / (8 eps^2)).
    """
    if not epsilon > 0:
        return 0.0
    if method == "reflection":
        a = epsilon / math.sqrt(t)
        k = np.arange(-terms, terms + 1, dtype=float)
        return float(np.sum((-1.0) ** np.abs(k) * (ndtr((2 * k + 1) * a) - ndtr((2 * k - 1) * a))))
    if method == "eigen":
        k = np.arange(terms, dtype=float)
        m = 2 * k + 1
        return float(4 / math.pi * np.sum((-1.0) ** k / m * np.exp(-m * m * math.pi ** 2 * t / (8 * epsilon ** 2))))
    raise DomainError(f"unknown method {method!r}")


def ball_log_measure_mc(center: GridPath, epsilon: float, samples: int, grid_refine: int = 8,
                        seed: int = 0, shards: int = MC_SHARDS,
                        threads: int | None = None) -> LogProb:
    """Monte Carlo log W(B(center, eps)) with the sup taken on the refined grid.

    The center is interpolated linearly between its grid values. Checking
    the sup only at grid points over-estimates the ball mass.
    """
    if samples < 1000:
        raise PreconditionError("need at least 1000 samples")
    if grid_refine < 1:
        raise PreconditionError("grid_refine must be >= 1")
    N = center.n * grid_refine
    target = np.interp(np.arange(1, N + 1) / N, center.t, center.values)

    def count(rng, size):
        hits = 0
        while size > 0:
            b = min(size, max(1, MC_CHUNK * 8 // N))
            x = brownian_batch(N, b, rng)
            hits += int(np.count_nonzero(np.all(np.abs(x - target) < epsilon, axis=1)))
            size -= b
        return hits

    hits = sum(run_shards(count, samples, seed, shards, threads))
    return log_fraction(hits, samples, f"ball-mc/refine={grid_refine}")


@dataclass
class SandwichResult:
    """Bounds on log W(B(center, 3 eps)) from depth-n cylinders.

    ``lower_log`` is -2 n^2 eps^2 + log W(C_n(eps)); ``lower_log_series``
    replaces the exponential factor by the n-th power of the bridge
    probability and holds without the large-n proviso.
    """

    lower_log: float | None
    upper_log: float | None
    n: int
    epsilon: float
    delta_n: float
    valid: bool
    lower_log_series: float | None = None


def ball_sandwich(center: GridPath, epsilon: float, n: int, nodes: int = DEFAULT_NODES,
                  adaptive: bool = True) -> SandwichResult:
    delta = chord_deviation(center, n).value
    if not delta < epsilon:
        return SandwichResult(None, None, n, epsilon, delta, False)
    coarse = center.subsample(n)
    low = cylinder_log_measure_exact(CylinderSpec(coarse, epsilon), nodes, adaptive).log_p
    up = cylinder_log_measure_exact(CylinderSpec(coarse, 3 * epsilon), nodes, adaptive).log_p
    series = n * bridge_sup_log_stay(epsilon, 1.0 / n) + low
    return SandwichResult(-2.0 * n * n * epsilon * epsilon + low, up, n, epsilon, delta, True,
                          series)


class OrderRow(NamedTuple):
    n: int
    ratio: float
    epsilon: float
    log_cyl: float


def local_order_cylinder_table(center: GridPath, beta: float, n_list: Sequence[int],
                               nodes: int = DEFAULT_NODES, adaptive: bool = False) -> list:
    """Rows (n, ratio, eps_n, log W(C_n(center, eps_n))) with eps_n = n^-beta.

    ratio = log(-log W(C_n)) / (beta log n). By the ball-in-cylinder
    inclusion its liminf bounds the lower local order from below.
    """
    if not 0 < beta < 1:
        raise DomainError(f"beta must lie in (0,1), got {beta}")
    rows = []
    for n in n_list:
        if n < 2:
            raise PreconditionError("depths must be >= 2")
        eps = float(n) ** -beta
        lp = cylinder_log_measure_exact(CylinderSpec.from_path(center, n, eps), nodes,
                                        adaptive).log_p
        ratio = math.log(-lp) / (beta * math.log(n)) if lp < 0 else math.nan
        rows.append(OrderRow(n, ratio, eps, lp))
    return rows


def local_order_cylinder_estimate(center: GridPath, beta: float, n_list: Sequence[int],
                                  nodes: int = DEFAULT_NODES, adaptive: bool = False) -> list:
    """[(n, ratio)] as in :func:`local_order_cylinder_table`."""
    return [(r.n, r.ratio) for r in local_order_cylinder_table(center, beta, n_list, nodes, adaptive)]
