"""Reference estimators: the bin-count histogram and a naive sample-centered KDE.

The histogram is piecewise constant on the grid's bins and shares the grid's
point-location tie rule, so histogram and piecewise-linear estimator can only
disagree by approximation order, never by binning convention. The KDE places
a product kernel at every sample and therefore costs O(M) per evaluation;
it is kept deliberately naive (no boundary correction, user-supplied
bandwidth) as a comparison baseline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptySampleSetError, NonpositiveBandwidthError
from .grid import TensorGrid, as_point, as_points

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True, eq=False)
class Histogram:
    """Piecewise-constant density: one value per bin, unit integral."""

    grid: TensorGrid
    values: np.ndarray
    sample_count: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.shape[0] != self.grid.n_bins:
            raise ValueError(f"need {self.grid.n_bins} values, got {values.shape[0]}")
        object.__setattr__(self, "values", values)

    @property
    def bin_volume(self) -> float:
        return float(np.prod(self.grid.deltas))

    def evaluate(self, point) -> float:
        p = as_point(point, self.grid.dim).reshape(1, -1)
        self.grid.check_in_domain(p)
        idx, _ = self.grid._locate_with_frac(p)
        return float(self.values[np.ravel_multi_index(tuple(idx[0]), self.grid.bin_shape)])

    def evaluate_batch(self, points) -> np.ndarray:
        pts = as_points(points, self.grid.dim)
        if pts.shape[0] == 0:
            return np.empty(0)
        self.grid.check_in_domain(pts)
        idx, _ = self.grid._locate_with_frac(pts)
        flat = np.ravel_multi_index(tuple(idx.T), self.grid.bin_shape)
        return self.values[flat]

    def integral(self) -> float:
        return float(self.values.sum() * self.bin_volume)


def fit_histogram(grid: TensorGrid, samples) -> Histogram:
    """Bin counts scaled by ``1 / (M * bin_volume)`` so the integral is one."""
    pts = as_points(samples, grid.dim)
    m = pts.shape[0]
    if m == 0:
        raise EmptySampleSetError("cannot fit a histogram to zero samples")
    grid.check_in_domain(pts, as_samples=True)
    idx, _ = grid._locate_with_frac(pts)
    flat = np.ravel_multi_index(tuple(idx.T), grid.bin_shape)
    counts = np.bincount(flat, minlength=grid.n_bins)
    values = counts / (m * float(np.prod(grid.deltas)))
    return Histogram(grid, values, m)


def eval_histogram(histogram: Histogram, point) -> float:
    return histogram.evaluate(point)


# -- naive KDE ----------------------------------------------------------------

KERNELS = ("triangular", "gaussian")


@dataclass(frozen=True, eq=False)
class KdeSpec:
    """A sample-centered product-kernel density with a single bandwidth."""

    kernel: str
    bandwidth: float
    samples: np.ndarray

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; expected one of {KERNELS}")
        if not self.bandwidth > 0:
            raise NonpositiveBandwidthError(f"bandwidth must be > 0, got {self.bandwidth}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples.reshape(-1, 1)
        if samples.ndim != 2:
            raise ValueError(f"samples must be an (m, dim) array, got shape {samples.shape}")
        if samples.shape[0] == 0:
            raise EmptySampleSetError("KDE needs at least one sample")
        object.__setattr__(self, "samples", samples)

    @property
    def dim(self) -> int:
        return int(self.samples.shape[1])


def _kernel_values(kernel: str, u: np.ndarray) -> np.ndarray:
    if kernel == "triangular":
        return np.maximum(0.0, 1.0 - np.abs(u))
    return np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def eval_kde(spec: KdeSpec, point) -> float:
    """``(1 / (b**dim * M)) * sum_m prod_n K((y_n - Y_mn) / b)``.

    Each call visits every sample, the O(M) cost that motivates grid-based
    estimators in the first place.
    """
    p = as_point(point, spec.dim)
    u = (p - spec.samples) / spec.bandwidth
    contrib = np.prod(_kernel_values(spec.kernel, u), axis=1)
    return float(contrib.sum() / (spec.bandwidth**spec.dim * spec.samples.shape[0]))


def eval_kde_batch(spec: KdeSpec, points) -> np.ndarray:
    pts = as_points(points, spec.dim)
    scale = spec.bandwidth**spec.dim * spec.samples.shape[0]
    out = np.empty(pts.shape[0])
    for i in range(pts.shape[0]):
        u = (pts[i] - spec.samples) / spec.bandwidth
        out[i] = np.prod(_kernel_values(spec.kernel, u), axis=1).sum() / scale
    return out


# -- serialization (mirrors the estimator CSV layout) -------------------------


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json") if path.suffix else path.with_name(path.name + ".json")


def save_histogram(histogram: Histogram, path) -> Path:
    """Write ``<path>`` (flat bin index, bin lower corner, value) plus sidecar."""
    path = Path(path)
    grid = histogram.grid
    header = "bin_index," + ",".join(f"corner{n}" for n in range(grid.dim)) + ",value"
    table = np.column_stack(
        [np.arange(grid.n_bins), grid.bin_lower_corners(), histogram.values]
    )
    fmt = ["%d"] + [_FLOAT_FMT] * (grid.dim + 1)
    np.savetxt(path, table, fmt=fmt, delimiter=",", header=header, comments="")
    sidecar = _sidecar_path(path)
    meta = {
        "lower": list(grid.lower),
        "upper": list(grid.upper),
        "n_delta": list(grid.n_delta),
        "sample_count": histogram.sample_count,
    }
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return sidecar


def load_histogram(path) -> Histogram:
    path = Path(path)
    meta = json.loads(_sidecar_path(path).read_text())
    grid = TensorGrid(tuple(meta["lower"]), tuple(meta["upper"]), tuple(meta["n_delta"]))
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(table[:, 0].astype(np.int64))
    return Histogram(grid, table[order, -1], int(meta["sample_count"]))
