"""Grid statistics of a single path: quadratic variation, Orey exponents,
Hölder seminorms and the deviation of a path from its chords."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .errors import DegeneratePathError, GridError, PreconditionError
from .paths import GridPath
from .scaling import tail_window


def _stride(path: GridPath, m: int) -> int:
    if m < 1 or path.n % m:
        raise GridError(f"m={m} does not divide n={path.n}")
    return path.n // m


def quadratic_variation(path: GridPath, m: int) -> float:
    """Q_m = sqrt(mean of squared increments on the grid {i/m})."""
    d = np.diff(path.values[:: _stride(path, m)])
    return float(np.sqrt(np.mean(d * d)))


def dyadic_divisors(n: int, m_min: int = 2) -> list:
    out, m = [], 1
    while m <= n:
        if m >= m_min and n % m == 0:
            out.append(m)
        m *= 2
    return out


@dataclass
class OreyEstimate:
    q_minus: float
    q_plus: float
    ratios: list = field(default_factory=list)  # (m, ratio)
    window: int = 0

    @property
    def tail_ratios(self) -> list:
        return [r for _, r in self.ratios[-self.window:]]

    @property
    def tail_median(self) -> float:
        return float(np.median(self.tail_ratios))


def orey_table(path: GridPath, m_list: Sequence[int] | None = None) -> list:
    """Rows (m, Q_m, -log Q_m / log m)."""
    ms = list(m_list) if m_list is not None else dyadic_divisors(path.n)
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise PreconditionError("m_list must be strictly increasing")
    if not ms or ms[0] < 2:
        raise PreconditionError("m_list entries must be >= 2")
    rows = []
    for m in ms:
        Q = quadratic_variation(path, m)
        if Q == 0:
            raise DegeneratePathError(m)
        rows.append((m, Q, -math.log(Q) / math.log(m)))
    return rows


def orey_exponents(path: GridPath, m_list: Sequence[int] | None = None,
                   tail: int | None = None) -> OreyEstimate:
    """Bracket [q-, q+] from the tail window of the Orey ratios.

    Default ``m_list`` is every power of two >= 2 dividing ``path.n``; the
    default window is the last half of the list.
    """
    rows = orey_table(path, m_list)
    t = tail_window(len(rows), tail)
    window = [r for _, _, r in rows[-t:]]
    return OreyEstimate(min(window), max(window), [(m, r) for m, _, r in rows], t)


def write_orey_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "Q_m", "ratio"])
        for m, Q, r in rows:
            w.writerow([m, f"{Q:.17g}", f"{r:.17g}"])


def holder_seminorm(path: GridPath, beta: float, mode: str = "exact") -> float:
    """max_{j != k} |w_j - w_k| / |t_j - t_k|^beta over the grid.

    ``mode="exact"`` scans every lag (O(n^2)). ``mode="bound"`` returns an
    upper bound from window oscillations at dyadic lags (O(n log n)): a lag in
    (2^{k-1}, 2^k] is charged the largest range over 2^k + 1 consecutive points.
    """
    if not 0 < beta <= 1:
        raise PreconditionError(f"beta must lie in (0,1], got {beta}")
    v, n = path.values, path.n
    if mode == "exact":
        best = 0.0
        for lag in range(1, n + 1):
            d = np.abs(v[lag:] - v[:-lag]).max()
            best = max(best, d / (lag / n) ** beta)
        return float(best)
    if mode == "bound":
        best, k = 0.0, 0
        while True:
            w = min(2 ** k, n)
            size = w + 1
            osc = (maximum_filter1d(v, size, mode="nearest")
                   - minimum_filter1d(v, size, mode="nearest")).max()
            min_lag = 1 if k == 0 else 2 ** (k - 1) + 1
            best = max(best, osc / (min_lag / n) ** beta)
            if w >= n:
                break
            k += 1
        return float(best)
    raise PreconditionError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class ChordDeviation:
    value: float
    no_interior: bool = False  # m == n: every grid point is a chord endpoint

    def __float__(self):
        return self.value


def chord_deviation(path: GridPath, m: int) -> ChordDeviation:
    """Delta_m on the grid: max distance between the path and its chords on {i/m}."""
    b = _stride(path, m)
    if b == 1:
        return ChordDeviation(0.0, True)
    v = path.values
    blocks = v[: m * b].reshape(m, b)  # block j holds points j*b .. j*b+b-1
    left, right = blocks[:, :1], v[b::b][:, None]
    frac = np.arange(b)[None, :] / b
    dev = np.abs(blocks - (left + (right - left) * frac))
    return ChordDeviation(float(dev.max()))
