"""Wiener measure of grid cylinders C_n(center, eps).

The exact route integrates the n-fold Gaussian box integral as a chain of
one-dimensional transfer steps on Gauss-Legendre nodes, entirely in
log-domain. The Monte Carlo route counts Brownian grid paths inside the
cylinder. Both return a :class:`LogProb`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .analysis import quadratic_variation
from .errors import DomainError, PreconditionError
from .paths import GridPath, brownian_batch, make_rng

DEFAULT_NODES = 256
MAX_NODES = 4096
NODE_RTOL = 1e-6
NODE_ATOL = 1e-12
# window clipping at CLIP_SIGMAS unconditional standard deviations drops at most
# n * exp(-CLIP_SIGMAS**2 / 2) of mass; kept only if the result clears CLIP_FLOOR
CLIP_SIGMAS = 38.0
CLIP_FLOOR = -680.0
RESOLUTION_RATIO = 0.5
MC_SHARDS = 16
MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class CylinderSpec:
    """Paths within ``epsilon`` of ``center`` at every grid time j/n, j >= 1."""

    center: GridPath
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError(f"cylinder radius must be positive, got {self.epsilon}")

    @property
    def n(self) -> int:
        return self.center.n

    @classmethod
    def from_path(cls, path: GridPath, n: int, epsilon: float) -> "CylinderSpec":
        return cls(path.subsample(n), epsilon)


@dataclass
class LogProb:
    """A probability carried as its natural log; ``-inf`` marks an empty estimate."""

    log_p: float
    stderr_log: float | None = None
    method: str = "exact"
    nodes: int | None = None
    samples: int | None = None
    hits: int | None = None
    converged: bool = True
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.log_p > 0:
            raise DomainError(f"log probability must be <= 0, got {self.log_p}")

    @property
    def zero_hits(self) -> bool:
        return self.log_p == -math.inf

    @property
    def p(self) -> float:
        return math.exp(self.log_p)


# -- exact quadrature --------------------------------------------------------

def _intervals(offsets: np.ndarray, eps: float, clip: bool):
    n = offsets.size
    lo = np.full(n, -eps)
    hi = np.full(n, eps)
    if clip:
        r = CLIP_SIGMAS * np.sqrt(np.arange(1, n + 1) / n)
        lo = np.maximum(lo, -r - offsets)
        hi = np.minimum(hi, r - offsets)
        if np.any(hi <= lo):
            return None
    return lo, hi


def _chain(incr: np.ndarray, lo: np.ndarray, hi: np.ndarray, nodes: int) -> float:
    """log of (n/2pi)^{n/2} * integral over the boxes of exp(-n/2 sum (ds_i + d_i)^2)."""
    n = incr.size
    x, w = np.polynomial.legendre.leggauss(nodes)
    lognorm = 0.5 * math.log(n / (2 * math.pi))
    half = 0.5 * n
    same = bool(np.all(lo == lo[0]) and np.all(hi == hi[0]))

    def grid(i):
        c, h = 0.5 * (hi[i] + lo[i]), 0.5 * (hi[i] - lo[i])
        return c + h * x, np.log(h * w)

    s, logw = grid(0)
    lf = lognorm - half * (s + incr[0]) ** 2
    if same:
        base = s[None, :] - s[:, None]  # rows: previous node, columns: next node
    work = np.empty((nodes, nodes))
    for i in range(1, n):
        if same:
            s_new, logw_new = s, logw
            np.add(base, incr[i], out=work)
        else:
            s_new, logw_new = grid(i)
            np.subtract(s_new[None, :], s[:, None], out=work)
            work += incr[i]
        np.square(work, out=work)
        work *= -half
        work += (lf + logw)[:, None]
        lf = logsumexp(work, axis=0) + lognorm
        s, logw = s_new, logw_new
    return float(logsumexp(lf + logw))


def _exact_once(spec: CylinderSpec, nodes: int):
    incr = np.diff(spec.center.values)
    offsets = spec.center.values[1:]
    clipped = _intervals(offsets, spec.epsilon, clip=True)
    full = _intervals(offsets, spec.epsilon, clip=False)
    if clipped is not None and not (np.array_equal(clipped[0], full[0])
                                    and np.array_equal(clipped[1], full[1])):
        lp = _chain(incr, *clipped, nodes)
        if lp > CLIP_FLOOR:
            return lp, clipped
    return _chain(incr, *full, nodes), full


def cylinder_log_measure_exact(spec: CylinderSpec, nodes: int = DEFAULT_NODES,
                               adaptive: bool = True, max_nodes: int = MAX_NODES,
                               rtol: float = NODE_RTOL) -> LogProb:
    """log W(C_n(center, eps)) by sequential Gauss-Legendre integration.

    With ``adaptive`` the node count is doubled from ``nodes`` until two
    successive values agree to ``rtol`` (relative) or ``max_nodes`` is reached;
    ``converged`` is False in the latter case.
    """
    if nodes < 8:
        raise PreconditionError("need at least 8 quadrature nodes")
    lp, (lo, hi) = _exact_once(spec, nodes)
    used, converged = nodes, True
    if adaptive:
        converged = False
        while 2 * used <= max_nodes:
            nxt, (lo, hi) = _exact_once(spec, 2 * used)
            used *= 2
            delta = abs(nxt - lp)
            lp = nxt
            if delta <= rtol * abs(lp) + NODE_ATOL:
                converged = True
                break
    warnings = []
    ratio = float(np.max(hi - lo)) * math.sqrt(spec.n) / used
    if ratio > RESOLUTION_RATIO:
        warnings.append(f"resolution: interval spans {ratio * used:.3g} kernel widths "
                        f"for {used} nodes")
    if adaptive and not converged:
        warnings.append(f"not converged to rtol={rtol} at {used} nodes")
    return LogProb(min(lp, 0.0), None, "exact", nodes=used, converged=converged,
                   warnings=warnings)


# -- Monte Carlo -------------------------------------------------------------

def shard_sizes(total: int, shards: int) -> list:
    base, extra = divmod(total, shards)
    return [base + (k < extra) for k in range(shards)]


def run_shards(fn, total: int, seed: int, shards: int = MC_SHARDS, threads: int | None = None):
    """Apply ``fn(rng, count)`` on each shard and return the list of results.

    Shard k draws from stream k of ``seed``; the result depends on
    ``(seed, shards)`` only, never on ``threads``.
    """
    sizes = shard_sizes(total, shards)
    jobs = [(make_rng(seed, k), sz) for k, sz in enumerate(sizes)]
    if threads is None or threads <= 1:
        return [fn(r, sz) for r, sz in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def log_fraction(hits: int, samples: int, method: str) -> LogProb:
    if hits == 0:
        return LogProb(-math.inf, None, method, samples=samples, hits=0,
                       warnings=["zero hits"])
    p = hits / samples
    return LogProb(math.log(p), math.sqrt((1 - p) / (samples * p)), method,
                   samples=samples, hits=hits)


def cylinder_log_measure_mc(spec: CylinderSpec, samples: int, seed: int,
                            shards: int = MC_SHARDS, threads: int | None = None) -> LogProb:
    """Hit-fraction estimate of W(C_n) with delta-method stderr of the log."""
    if samples < 1000:
        raise PreconditionError("need at least 1000 samples")
    n, eps = spec.n, spec.epsilon
    target = spec.center.values[1:]

    def count(rng, size):
        hits = 0
        while size > 0:
            b = min(size, MC_CHUNK)
            x = brownian_batch(n, b, rng)
            hits += int(np.count_nonzero(np.all(np.abs(x - target) <= eps, axis=1)))
            size -= b
        return hits

    hits = sum(run_shards(count, samples, seed, shards, threads))
    return log_fraction(hits, samples, "mc")


# -- closed-form bounds --------------------------------------------------------

def univ_upper_bound(n: int) -> float:
    """log (2/pi)^{n/2}: cylinder mass bound at eps = n^{-1/2}, any center."""
    if n < 1:
        raise DomainError("n must be positive")
    return 0.5 * n * math.log(2 / math.pi)


def quad_lower_bound_neglog(spec: CylinderSpec, Q: float | None = None) -> float:
    """Lower bound on -log W(C_n) from the quadratic variation Q = Q_n(center).

    n^2 Q^2 (1/2 - 2 eps/Q) - (n/2) log(2 n eps^2 / pi); negative values are
    vacuous and returned unchanged.
    """
    if Q is None:
        Q = quadratic_variation(spec.center, spec.n)
    if not Q > 0:
        raise DomainError("quadratic variation must be positive")
    n, eps = spec.n, spec.epsilon
    return n * n * Q * Q * (0.5 - 2 * eps / Q) - 0.5 * n * math.log(2 * n * eps * eps / math.pi)
