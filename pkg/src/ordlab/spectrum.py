"""End-to-end experiments: local order of W at fBm centers, Hölder-ball
entropy, and the order spectrum f(xi) = 1 + xi/2 on xi >= 2."""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .analysis import dyadic_divisors, orey_exponents
from .errors import CapacityError, DegeneratePathError, DomainError, PreconditionError
from .paths import FbmSpec, simulate_fbm
from .scaling import tail_window
from .serialize import write_csv, write_json
from .smallball import local_order_cylinder_table

NEG_INF = -math.inf
MAX_COVER_STEPS = 10 ** 7


def holder_ball_log_covering(alpha: float, epsilon: float) -> float:
    """log of the size of the discrete eps-net of the alpha-Hölder unit ball.

    Counts walks on the time grid of step eps^{1/alpha} that start at 0, move
    by -eps, 0 or +eps per step and stay in eps*Z within [-1, 1].
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0,1], got {alpha}")
    if not 0 < epsilon <= 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    delta = epsilon ** (1.0 / alpha)
    inv = 1.0 / delta
    if not math.isfinite(inv) or inv > MAX_COVER_STEPS:
        raise CapacityError(f"time step {delta:.3g} too fine")
    steps = int(round(inv)) if abs(inv - round(inv)) < 1e-9 * inv else math.ceil(inv)
    half = int(math.floor(1.0 / epsilon + 1e-9))
    lc = np.full(2 * half + 1, -np.inf)
    lc[half] = 0.0
    pad = np.full(2 * half + 3, -np.inf)
    for _ in range(steps):
        pad[1:-1] = lc
        lc = logsumexp(np.stack([pad[:-2], pad[1:-1], pad[2:]]), axis=0)
    return float(logsumexp(lc))


def covering_slope(alpha: float, exponents=range(3, 7)) -> float:
    """Least-squares slope of log log N(eps) against log(1/eps), eps = 2^-k."""
    x = np.array([k * math.log(2) for k in exponents])
    y = np.array([math.log(holder_ball_log_covering(alpha, 2.0 ** -k)) for k in exponents])
    return float(np.polyfit(x, y, 1)[0])


# -- experiment configuration -------------------------------------------------

@dataclass
class ExperimentConfig:
    hurst_grid: list = field(default_factory=lambda: [0.4, 0.5])
    n_max: int = 2048
    n_min: int = 16
    seeds: list = field(default_factory=lambda: list(range(10)))
    beta_offsets: list = field(default_factory=lambda: [0.02])
    nodes: int = 128
    adaptive: bool = False
    tail: int | None = None
    method: str = "auto"
    output_dir: str = "results"
    table_name: str = "local_order.csv"
    summary_name: str = "summary.json"
    xi_grid: list = field(default_factory=lambda: [0.5, 1.0, 1.9, 2.0, 3.0, 4.0, 6.0, 10.0])

    def __post_init__(self):
        if not self.hurst_grid or any(not 0 < h < 1 for h in self.hurst_grid):
            raise DomainError("every Hurst value must lie in (0,1)")
        if self.n_max < 2 or self.n_max & (self.n_max - 1):
            raise DomainError("n_max must be a power of two")
        if self.n_min < 2 or self.n_min > self.n_max or self.n_min & (self.n_min - 1):
            raise DomainError("n_min must be a power of two in [2, n_max]")
        if not self.seeds:
            raise PreconditionError("need at least one seed")

    @property
    def n_list(self) -> list:
        return [m for m in dyadic_divisors(self.n_max) if m >= self.n_min]

    def outputs_only(self) -> dict:
        d = asdict(self)
        for k in ("output_dir", "table_name", "summary_name"):
            d.pop(k)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise PreconditionError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if p.suffix.lower() == ".toml":
            import tomli

            with open(p, "rb") as fh:
                return cls.from_dict(tomli.load(fh))
        with open(p) as fh:
            return cls.from_dict(json.load(fh))


def loc_order_theory(H: float) -> float:
    """max(2, 2(1/H - 1))."""
    return max(2.0, 2.0 * (1.0 / H - 1.0))


@dataclass
class CellResult:
    hurst: float
    seed: int
    offset: float
    q_minus: float | None
    q_plus: float | None
    beta: float | None
    rows: list = field(default_factory=list)
    tail_ratio: float | None = None
    excluded: str | None = None


def _run_cell(H, seed, offset, cfg: ExperimentConfig) -> CellResult:
    path = simulate_fbm(FbmSpec(H, cfg.n_max, seed, cfg.method))
    try:
        orey = orey_exponents(path, tail=cfg.tail)
    except DegeneratePathError as exc:
        return CellResult(H, seed, offset, None, None, None, excluded=str(exc))
    beta = max(orey.q_minus - offset, 0.05)
    beta = min(beta, 0.99)
    rows = local_order_cylinder_table(path, beta, cfg.n_list, cfg.nodes, cfg.adaptive)
    t = tail_window(len(rows), cfg.tail)
    tail = float(np.median([r.ratio for r in rows[-t:]]))
    return CellResult(H, seed, offset, orey.q_minus, orey.q_plus, beta, rows, tail)


def fbm_local_order_experiment(cfg: ExperimentConfig, threads: int | None = None) -> list:
    """Run every (H, offset, seed) cell; results come back in grid order."""
    cells = [(H, s, off) for H in cfg.hurst_grid for off in cfg.beta_offsets for s in cfg.seeds]
    if threads is None or threads <= 1:
        return [_run_cell(H, s, off, cfg) for H, s, off in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: _run_cell(*c, cfg), cells))


def summarize(results: list, cfg: ExperimentConfig) -> dict:
    """Per-H medians across seeds, for the first beta offset."""
    out = {}
    primary = cfg.beta_offsets[0]
    for H in cfg.hurst_grid:
        cells = [c for c in results if c.hurst == H and c.offset == primary]
        good = sorted((c for c in cells if c.excluded is None), key=lambda c: c.seed)
        theory = loc_order_theory(H)
        entry = {"theory": theory, "seeds": len(good), "excluded": len(cells) - len(good)}
        if good:
            med = float(np.median(sorted(c.tail_ratio for c in good)))
            entry.update(
                median_tail_ratio=med,
                relative_error=abs(med - theory) / theory,
                median_q_minus=float(np.median(sorted(c.q_minus for c in good))),
                median_q_plus=float(np.median(sorted(c.q_plus for c in good))),
                median_beta=float(np.median(sorted(c.beta for c in good))),
            )
        out[repr(float(H))] = entry
    return out


def result_rows(results: list) -> list:
    rows = []
    for c in results:
        for r in c.rows:
            rows.append([c.hurst, c.seed, c.offset, r.n, c.beta, r.epsilon, r.log_cyl, r.ratio,
                         c.q_minus, c.q_plus])
    return rows


TABLE_HEADER = ["hurst", "seed", "beta_offset", "n", "beta", "epsilon", "log_cyl", "ratio",
                "q_minus", "q_plus"]


# -- spectrum --------------------------------------------------------------------

@dataclass
class SpectrumPoint:
    xi: float
    f_theory: float  # NEG_INF below xi = 2
    f_estimate: float | None = None
    components: dict = field(default_factory=dict)


def spectrum_theory(xi: float) -> float:
    if not xi > 0:
        raise DomainError(f"xi must be positive, got {xi}")
    return 1.0 + xi / 2.0 if xi >= 2 else NEG_INF


def hurst_for_xi(xi: float) -> float:
    """The Orey exponent alpha with 2(1/alpha - 1) = xi."""
    return 2.0 / (xi + 2.0)


def spectrum_table(xi_grid, summary: dict | None = None) -> list:
    """f(xi) per the order spectrum, with estimates attached from ``summary``.

    A point gets an estimate when the summary holds a run at H = 2/(xi + 2):
    ``f_estimate`` is 1/median(q-) of the centers and the measured local order
    is recorded under ``components``.
    """
    pts = []
    for xi in xi_grid:
        p = SpectrumPoint(float(xi), spectrum_theory(xi))
        if summary and xi >= 2:
            H = hurst_for_xi(xi)
            for key, entry in summary.items():
                if abs(float(key) - H) < 1e-9 and "median_q_minus" in entry:
                    p.f_estimate = 1.0 / entry["median_q_minus"]
                    p.components = {"hurst": float(key), "xi_estimate": entry["median_tail_ratio"],
                                    "source": "orey exponent and cylinder local-order ratios"}
        pts.append(p)
    return pts


def write_experiment(results: list, cfg: ExperimentConfig, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / cfg.table_name, TABLE_HEADER, result_rows(results))
    summary = summarize(results, cfg)
    spectrum = spectrum_table(cfg.xi_grid, summary)
    write_json(out / cfg.summary_name, {"by_hurst": summary, "spectrum": spectrum,
                                        "excluded_cells": [asdict(c) | {"rows": []} for c in results
                                                           if c.excluded]})
    return summary
