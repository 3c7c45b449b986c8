"""Gauge functions, the scl^{p,q} scaling families and local-scale estimation.

Every gauge value is handled as its natural logarithm: for the order scaling
exp(-eps^-alpha) the raw value underflows long before the radii of interest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, PreconditionError, RangeError


@dataclass(frozen=True)
class GaugeSpec:
    """A Hausdorff function, parametric ``scl^{p,q}_alpha`` or tabulated.

    Use :meth:`parametric`, :meth:`dim`, :meth:`ord` or :meth:`tabulated`
    rather than the raw constructor.
    """

    kind: str
    p: int = 1
    q: int = 1
    alpha: float = 1.0
    radii: tuple = ()
    log_values: tuple = ()
    scale: float = 1.0  # multiplicative constant, applied as log(scale)

    def __post_init__(self):
        if self.kind == "parametric":
            if int(self.p) != self.p or int(self.q) != self.q or self.p < 1 or self.q < 1:
                raise DomainError(f"p and q must be positive integers, got p={self.p}, q={self.q}")
            if not self.alpha > 0:
                raise DomainError(f"alpha must be positive, got {self.alpha}")
        elif self.kind == "tabulated":
            r = np.asarray(self.radii, dtype=float)
            v = np.asarray(self.log_values, dtype=float)
            if r.ndim != 1 or r.size < 2 or r.size != v.size:
                raise DomainError("tabulated gauge needs at least two (radius, log_value) points")
            if np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise DomainError("tabulated radii must be positive and strictly increasing")
            if np.any(np.diff(v) < 0):
                raise DomainError("tabulated gauge must be non-decreasing in the radius")
        else:
            raise DomainError(f"unknown gauge kind {self.kind!r}")
        if not self.scale > 0:
            raise DomainError("gauge scale must be positive")

    @classmethod
    def parametric(cls, p: int, q: int, alpha: float) -> "GaugeSpec":
        return cls("parametric", p=int(p), q=int(q), alpha=float(alpha))

    @classmethod
    def dim(cls, alpha: float) -> "GaugeSpec":
        """eps -> eps**alpha."""
        return cls.parametric(1, 1, alpha)

    @classmethod
    def ord(cls, alpha: float) -> "GaugeSpec":
        """eps -> exp(-eps**-alpha)."""
        return cls.parametric(2, 1, alpha)

    @classmethod
    def tabulated(cls, points: Iterable[tuple[float, float]]) -> "GaugeSpec":
        pts = list(points)
        return cls("tabulated", radii=tuple(float(r) for r, _ in pts),
                   log_values=tuple(float(v) for _, v in pts))

    def scaled(self, c: float) -> "GaugeSpec":
        """The gauge multiplied by the constant ``c > 0``."""
        return GaugeSpec(self.kind, self.p, self.q, self.alpha, self.radii,
                         self.log_values, self.scale * c)

    def to_dict(self) -> dict:
        if self.kind == "parametric":
            d = {"kind": "parametric", "p": self.p, "q": self.q, "alpha": self.alpha}
        else:
            d = {"kind": "tabulated", "points": [list(t) for t in zip(self.radii, self.log_values)]}
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GaugeSpec":
        kind = d.get("kind", "parametric")
        if kind == "parametric":
            g = cls.parametric(d.get("p", 1), d.get("q", 1), d["alpha"])
        elif kind == "tabulated":
            g = cls.tabulated(d["points"])
        else:
            raise DomainError(f"unknown gauge kind {kind!r}")
        return g.scaled(d["scale"]) if "scale" in d else g

    def __call__(self, epsilon):
        return gauge_log_eval(self, epsilon)


def log_plus(x):
    """1_{(1, inf)} * log, elementwise."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 1.0, np.log(np.where(x > 1.0, x, 1.0)), 0.0)


def _iterated_log_plus_inv(epsilon, q):
    # log_+^{oq}(1/eps); the first step uses -log(eps) so 1/eps never overflows
    y = np.maximum(-np.log(epsilon), 0.0)
    for _ in range(q - 1):
        y = log_plus(y)
    return y


def gauge_log_eval(g: GaugeSpec, epsilon):
    """Natural log of the gauge ``g`` at radius ``epsilon`` (scalar or array).

    For the parametric kind this is ``-exp^{o(p-1)}(alpha * log_+^{oq}(1/eps))``;
    ``exp^{op}`` itself is never formed. Overflow of the inner exponentials
    yields ``-inf``.
    """
    eps = np.asarray(epsilon, dtype=float)
    if np.any(~(eps > 0)):
        raise DomainError(f"gauge radius must be positive, got {epsilon}")
    if g.kind == "parametric":
        z = g.alpha * _iterated_log_plus_inv(eps, g.q)
        with np.errstate(over="ignore"):
            for _ in range(g.p - 1):
                z = np.exp(z)
        out = -z
    else:
        r = np.asarray(g.radii)
        if np.any(eps < r[0]) or np.any(eps > r[-1]):
            raise RangeError(f"radius {epsilon} outside tabulated range [{r[0]}, {r[-1]}]")
        out = np.interp(np.log(eps), np.log(r), np.asarray(g.log_values))
    out = out + math.log(g.scale)
    return float(out) if out.ndim == 0 else out


# -- local scales ---------------------------------------------------------

@dataclass(frozen=True)
class LocalScaleSample:
    epsilon: float
    log_measure: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise DomainError(f"sample radius must lie in (0,1), got {self.epsilon}")
        if not self.log_measure <= 0:
            raise DomainError(f"log measure must be <= 0, got {self.log_measure}")


@dataclass
class LocalScaleEstimate:
    lower: float
    upper: float
    per_sample_ratios: list
    skipped: int = 0
    window: int = 0


def _iterated_log(x: float, k: int) -> float | None:
    for _ in range(k):
        if not x > 0:
            return None
        x = math.log(x)
    return x


def tail_window(count: int, tail: int | None) -> int:
    """Length of the trailing window used in place of liminf/limsup."""
    if tail is None:
        return max(1, count // 2)
    if tail < 1:
        raise PreconditionError("tail window must hold at least one value")
    return min(int(tail), count)


def local_scale_ratios(samples: Sequence, p: int, q: int):
    """Per-sample ratios log^{op}(1/mu) / log^{oq}(1/eps), plus skip count.

    Samples are ordered by decreasing radius first.
    """
    items = [s if isinstance(s, LocalScaleSample) else LocalScaleSample(*s) for s in samples]
    items.sort(key=lambda s: -s.epsilon)
    eps = [s.epsilon for s in items]
    if len(set(eps)) != len(eps):
        raise PreconditionError("sample radii must be distinct")
    ratios, skipped = [], 0
    for s in items:
        num = _iterated_log(-s.log_measure, p - 1)
        den = _iterated_log(-math.log(s.epsilon), q - 1)
        if num is None or den is None or not den > 0:
            skipped += 1
            continue
        ratios.append(num / den)
    return ratios, skipped


def local_scale_estimate(samples: Sequence, p: int = 2, q: int = 1,
                         tail: int | None = None) -> LocalScaleEstimate:
    """Lower/upper local scale from (radius, log-measure) samples.

    liminf/limsup as eps -> 0 are replaced by min/max over the last ``tail``
    ratios (default: last half). Samples of full mass, or whose iterated
    logarithm leaves the domain, are skipped and counted.
    """
    if len(samples) < 4:
        raise PreconditionError("need at least 4 samples")
    ratios, skipped = local_scale_ratios(samples, p, q)
    if not ratios:
        raise PreconditionError("no sample yields a defined ratio")
    t = tail_window(len(ratios), tail)
    window = ratios[-t:]
    return LocalScaleEstimate(min(window), max(window), ratios, skipped, t)


# -- scaling axiom check ----------------------------------------------------

@dataclass
class ScalingReport:
    passed: bool
    conditions: dict = field(default_factory=dict)  # name -> bool
    log_ratios: dict = field(default_factory=dict)  # name -> list of floats


def dyadic_grid(k_min: int = 1, k_max: int = 40) -> list:
    return [2.0 ** -k for k in range(k_min, k_max + 1)]


def scaling_condition_check(p: int, q: int, alpha: float, beta: float, lam: float,
                            eps_grid: Sequence[float] | None = None,
                            tail: int | None = None) -> ScalingReport:
    """Numerically check both decay conditions of a scaling on a radius grid.

    The conditions are ``scl_alpha(eps) / scl_beta(eps**lam) -> 0`` and
    ``scl_alpha(eps) / scl_beta(eps)**lam -> 0``. Each passes when its
    log-ratio is strictly decreasing over the tail of the grid (radii
    decreasing).
    """
    if not alpha > beta > 0:
        raise PreconditionError(f"need alpha > beta > 0, got alpha={alpha}, beta={beta}")
    if not lam > 1:
        raise PreconditionError(f"need lambda > 1, got {lam}")
    eps = np.sort(np.asarray(eps_grid if eps_grid is not None else dyadic_grid(), float))[::-1]
    ga, gb = GaugeSpec.parametric(p, q, alpha), GaugeSpec.parametric(p, q, beta)
    la = gauge_log_eval(ga, eps)
    with np.errstate(invalid="ignore"):
        r1 = la - gauge_log_eval(gb, eps ** lam)
        r2 = la - lam * gauge_log_eval(gb, eps)
    t = tail_window(eps.size, tail)
    report = ScalingReport(passed=True)
    for name, r in (("power_radius", r1), ("power_value", r2)):
        seg = r[-t:]
        ok = bool(np.all(np.isfinite(seg)) and np.all(np.diff(seg) < 0))
        report.conditions[name] = ok
        report.log_ratios[name] = [float(x) for x in r]
        report.passed &= ok
    return report
