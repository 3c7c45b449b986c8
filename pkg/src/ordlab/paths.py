"""Brownian and fractional Brownian paths on the uniform grid {j/n}.

Two exact generators are provided: a Cholesky factorisation of the
increment covariance (n <= 4096, kept as the reference) and the circulant
embedding of fractional Gaussian noise (Davies-Harte). Gaussian variates come
from numpy's ziggurat sampler driven by a Philox counter-based bit generator,
so ``(seed, stream)`` alone fixes every draw.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import CapacityError, DomainError, GridError, MethodError

CHOLESKY_MAX_N = 4096
EMBEDDING_TOL = 1e-8


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class GridPath:
    """Values of a path at j/n, j = 0..n, with values[0] = 0."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if self.n < 1 or v.shape != (self.n + 1,):
            raise DomainError(f"expected {self.n + 1} values for n={self.n}, got shape {v.shape}")
        if v[0] != 0.0:
            raise DomainError("paths must start at 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, f, n: int) -> "GridPath":
        t = np.arange(n + 1) / n
        v = np.asarray(f(t), dtype=float) * np.ones(n + 1)
        return cls(n, v - v[0])

    @classmethod
    def zero(cls, n: int) -> "GridPath":
        return cls(n, np.zeros(n + 1))

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def subsample(self, m: int) -> "GridPath":
        """The path restricted to the coarser grid {i/m}; m must divide n."""
        if m < 1 or self.n % m:
            raise GridError(f"m={m} does not divide n={self.n}")
        return GridPath(m, self.values[:: self.n // m])

    def __mul__(self, c: float) -> "GridPath":
        return GridPath(self.n, c * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "GridPath":
        return GridPath(self.n, -self.values)

    def __add__(self, other: "GridPath") -> "GridPath":
        if other.n != self.n:
            raise GridError("paths live on different grids")
        return GridPath(self.n, self.values + other.values)

    def __eq__(self, other):
        return isinstance(other, GridPath) and self.n == other.n and np.array_equal(
            self.values, other.values)

    __hash__ = None

    # -- serialisation ------------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "value"])
            for t, v in zip(self.t, self.values):
                w.writerow([f"{t:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "GridPath":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise DomainError(f"{path}: no rows")
        t = np.array([float(r["t"]) for r in rows])
        v = np.array([float(r["value"]) for r in rows])
        n = len(rows) - 1
        if n < 1 or not np.allclose(t, np.arange(n + 1) / n, rtol=0, atol=1e-12):
            raise GridError(f"{path}: times are not the uniform grid j/{n}")
        return cls(n, v)

    def to_bytes(self) -> bytes:
        return struct.pack("<q", self.n) + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridPath":
        (n,) = struct.unpack_from("<q", data, 0)
        if len(data) != 8 + 8 * (n + 1):
            raise DomainError("binary path length does not match its header")
        return cls(n, np.frombuffer(data, dtype="<f8", offset=8).astype(float))

    def to_binary(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_binary(cls, path) -> "GridPath":
        return cls.from_bytes(Path(path).read_bytes())

    @classmethod
    def load(cls, path) -> "GridPath":
        p = Path(path)
        return cls.from_csv(p) if p.suffix.lower() == ".csv" else cls.from_binary(p)


@dataclass(frozen=True)
class FbmSpec:
    hurst: float
    n: int
    seed: int = 0
    method: str = "auto"  # "cholesky", "circulant" or "auto"
    stream: int = 0

    def __post_init__(self):
        _check_hurst(self.hurst)
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.method not in ("auto", "cholesky", "circulant"):
            raise DomainError(f"unknown method {self.method!r}")


def _check_hurst(H):
    if not 0 < H < 1:
        raise DomainError(f"Hurst parameter must lie in (0,1), got {H}")


def fbm_covariance(H: float, s, t):
    """E[B^H_s B^H_t] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2."""
    _check_hurst(H)
    s, t = np.asarray(s, float), np.asarray(t, float)
    if np.any((s < 0) | (s > 1) | (t < 0) | (t > 1)):
        raise DomainError("times must lie in [0,1]")
    out = 0.5 * (t ** (2 * H) + s ** (2 * H) - np.abs(t - s) ** (2 * H))
    return float(out) if out.ndim == 0 else out


def fgn_covariance(H: float, k):
    """Autocovariance rho_H(k) of unit-spaced fractional Gaussian noise."""
    _check_hurst(H)
    k = np.abs(np.asarray(k, float))
    out = 0.5 * ((k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=4)
def _cholesky_factor(H: float, n: int) -> np.ndarray:
    from scipy.linalg import toeplitz

    L = np.linalg.cholesky(toeplitz(fgn_covariance(H, np.arange(n))))
    L.setflags(write=False)
    return L


@lru_cache(maxsize=16)
def circulant_eigenvalues(H: float, n: int) -> np.ndarray:
    """Eigenvalues of the 2n circulant embedding of the fGn covariance.

    Raises :class:`MethodError` if the embedding is not nonnegative definite
    up to ``-1e-8 * max``; tiny negative values are clipped to zero.
    """
    r = fgn_covariance(H, np.arange(n + 1))
    c = np.concatenate([r, r[-2:0:-1]])
    lam = np.fft.fft(c).real
    if lam.min() < -EMBEDDING_TOL * lam.max():
        raise MethodError(f"circulant embedding not nonnegative definite (H={H}, n={n})")
    lam = np.clip(lam, 0.0, None)
    lam.setflags(write=False)
    return lam


def _circulant_transform(lam: np.ndarray, x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    # real part of the transform of (x + iy); exact covariance rho when x, y ~ N(0, I)
    m = lam.size
    z = np.sqrt(lam / m) * (x + 1j * y)
    return np.fft.fft(z, axis=-1).real[..., :n]


def fgn_sample(H: float, n: int, rng: np.random.Generator, method: str = "auto",
               size: int | None = None) -> np.ndarray:
    """Unit-spaced fGn of length n (a leading batch axis when ``size`` is set)."""
    _check_hurst(H)
    if method == "auto":
        method = "cholesky" if n <= CHOLESKY_MAX_N else "circulant"
    shape = (n,) if size is None else (size, n)
    if method == "cholesky":
        if n > CHOLESKY_MAX_N:
            raise CapacityError(f"cholesky generator supports n <= {CHOLESKY_MAX_N}, got {n}")
        z = rng.standard_normal(shape)
        return z @ _cholesky_factor(float(H), n).T
    if method == "circulant":
        lam = circulant_eigenvalues(float(H), n)
        cshape = shape[:-1] + (lam.size,)
        x = rng.standard_normal(cshape)
        y = rng.standard_normal(cshape)
        return _circulant_transform(lam, x, y, n)
    raise DomainError(f"unknown method {method!r}")


def simulate_fbm(spec: FbmSpec) -> GridPath:
    """One fBm path on {j/n}: cumulative sum of n^{-H}-scaled fGn."""
    rng = make_rng(spec.seed, spec.stream)
    incr = fgn_sample(spec.hurst, spec.n, rng, spec.method) * float(spec.n) ** (-spec.hurst)
    return GridPath(spec.n, np.concatenate([[0.0], np.cumsum(incr)]))


def simulate_brownian(n: int, seed: int, method: str = "auto", stream: int = 0) -> GridPath:
    return simulate_fbm(FbmSpec(0.5, n, seed, method, stream))


def brownian_batch(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """(size, n) array of Brownian values at j/n, j = 1..n."""
    return np.cumsum(rng.standard_normal((size, n)) / np.sqrt(n), axis=1)
