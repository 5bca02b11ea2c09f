"""Seeded sampling from known product-form test densities, and their exact PDFs.

Axis distributions (truncated Gaussian, uniform, truncated Laplace) compose
into a product-form joint. Sampling applies each axis' inverse CDF to a
deterministic uniform stream from a counter-based Philox generator keyed
directly by a 64-bit seed, so identical (seed, m, spec) calls are
bit-identical across platforms and, for the same seed, an m1-sample set is
always a prefix of any larger m2-sample set. Normalization constants are
computed from the truncation bounds, never hardcoded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import EmptySampleSetError

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class TruncatedGaussian:
    """Gaussian(mean, sd) restricted to [lo, hi] and renormalized."""

    mean: float
    sd: float
    lo: float
    hi: float

    def __post_init__(self):
        if not self.sd > 0:
            raise ValueError(f"sd must be > 0, got {self.sd}")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def mass(self) -> float:
        """Probability the untruncated Gaussian assigns to [lo, hi].

        Equals ``(erf((hi - mean) / (sd * sqrt(2))) - erf((lo - mean) /
        (sd * sqrt(2)))) / 2``.
        """
        return float(
            ndtr((self.hi - self.mean) / self.sd) - ndtr((self.lo - self.mean) / self.sd)
        )

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        z = (x - self.mean) / self.sd
        out = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * self.sd * self.mass)
        return np.where((x >= self.lo) & (x <= self.hi), out, 0.0)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        lo_cdf = ndtr((self.lo - self.mean) / self.sd)
        out = (ndtr((x - self.mean) / self.sd) - lo_cdf) / self.mass
        return np.clip(out, 0.0, 1.0)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        lo_cdf = ndtr((self.lo - self.mean) / self.sd)
        x = self.mean + self.sd * ndtri(lo_cdf + u * self.mass)
        # clip absorbs inverse-CDF roundoff at the truncation bounds
        return np.clip(x, self.lo, self.hi)


@dataclass(frozen=True)
class Uniform:
    """Constant density 1 / (hi - lo) on [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return self.lo + np.asarray(u, dtype=np.float64) * (self.hi - self.lo)


@dataclass(frozen=True)
class TruncatedLaplace:
    """Laplace(location, scale) restricted to [lo, hi] and renormalized.

    For the centered symmetric case on [-T, T] the normalizing mass reduces
    to ``1 - exp(-T / scale)``.
    """

    location: float
    scale: float
    lo: float
    hi: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be > 0, got {self.scale}")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    def _std_cdf(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        return np.where(z < 0, 0.5 * np.exp(z), 1.0 - 0.5 * np.exp(-z))

    @property
    def mass(self) -> float:
        zlo = (self.lo - self.location) / self.scale
        zhi = (self.hi - self.location) / self.scale
        return float(self._std_cdf(zhi) - self._std_cdf(zlo))

    def pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.exp(-np.abs(x - self.location) / self.scale) / (2.0 * self.scale * self.mass)
        return np.where((x >= self.lo) & (x <= self.hi), out, 0.0)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        zlo = self._std_cdf((self.lo - self.location) / self.scale)
        out = (self._std_cdf((x - self.location) / self.scale) - zlo) / self.mass
        return np.clip(out, 0.0, 1.0)

    def ppf(self, u: np.ndarray) -> np.ndarray:
        zlo = self._std_cdf((self.lo - self.location) / self.scale)
        p = zlo + np.asarray(u, dtype=np.float64) * self.mass
        z = np.where(p < 0.5, np.log(2.0 * p), -np.log(2.0 * (1.0 - p)))
        return np.clip(self.location + self.scale * z, self.lo, self.hi)


AxisDistribution = TruncatedGaussian | Uniform | TruncatedLaplace


@dataclass(frozen=True)
class DistributionSpec:
    """Product-form joint distribution: one independent marginal per axis."""

    axes: tuple[AxisDistribution, ...]

    def __post_init__(self):
        axes = tuple(self.axes) if not isinstance(self.axes, tuple) else self.axes
        if len(axes) == 0:
            raise ValueError("spec needs at least one axis")
        object.__setattr__(self, "axes", axes)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def support(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(lower, upper) corners of the joint support box."""
        return tuple(a.lo for a in self.axes), tuple(a.hi for a in self.axes)

    def pdf(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        squeeze = pts.ndim == 1
        if squeeze:
            pts = pts.reshape(-1, self.dim) if self.dim > 1 else pts.reshape(-1, 1)
        out = np.ones(pts.shape[0])
        for n, axis in enumerate(self.axes):
            out *= axis.pdf(pts[:, n])
        return out


def sample(spec: DistributionSpec, m: int, seed: int) -> np.ndarray:
    """Draw ``m`` i.i.d. samples, shape (m, dim), deterministically from ``seed``.

    For a fixed seed the first ``m1`` rows of a larger draw equal the
    ``m1``-row draw exactly, so growing sample sets are nested.
    """
    m = int(m)
    if m < 1:
        raise EmptySampleSetError(f"sample count must be >= 1, got {m}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((m, spec.dim))
    cols = [axis.ppf(u[:, n]) for n, axis in enumerate(spec.axes)]
    return np.column_stack(cols)


def exact_pdf(spec: DistributionSpec, point) -> float:
    """Joint density at one point; zero outside the support box."""
    p = np.asarray(point, dtype=np.float64).reshape(-1)
    if p.shape[0] != spec.dim:
        raise ValueError(f"expected a point of dimension {spec.dim}")
    return float(spec.pdf(p.reshape(1, -1))[0])


# -- sample CSV I/O ------------------------------------------------------------


def write_samples_csv(path, samples: np.ndarray, *, seed: int | None = None) -> None:
    """One row per sample, 17-significant-digit decimals, '#' metadata header."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples.reshape(-1, 1)
    header = f"dim={samples.shape[1]} rows={samples.shape[0]}"
    if seed is not None:
        header += f" seed={seed}"
    np.savetxt(Path(path), samples, fmt=_FLOAT_FMT, delimiter=",", header=header)


def read_samples_csv(path) -> np.ndarray:
    """Read a sample CSV back into an (m, dim) array."""
    data = np.loadtxt(Path(path), delimiter=",", comments="#", ndmin=2)
    return data
