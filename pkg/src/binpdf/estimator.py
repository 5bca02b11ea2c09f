"""Piecewise multilinear density estimator fitted by linear binning.

Each sample deposits unit mass onto the 2**dim corner nodes of its containing
bin, weighted by the multilinear hat values at the sample. The coefficient at
node ``j`` is the accumulated weight divided by ``M * C_j``, where ``C_j`` is
the exact integral of the node's hat function. The resulting density is
non-negative, integrates to one, and is continuous across bin faces; fitting
is a single O(M * 2**dim) pass with an O(n_nodes) finalization.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptySampleSetError
from .grid import TensorGrid, as_point, as_points

# Fixed accumulation chunk, independent of thread count, so that results are
# bit-identical for any level of parallelism (chunk partials merge in order).
_CHUNK = 1 << 18

_FLOAT_FMT = "%.17g"


def _corner_weights(frac: np.ndarray, offsets: tuple[int, ...]) -> np.ndarray:
    w = np.ones(frac.shape[0])
    for n, o in enumerate(offsets):
        w *= frac[:, n] if o else 1.0 - frac[:, n]
    return w


def _accumulate(grid: TensorGrid, pts: np.ndarray) -> np.ndarray:
    """Per-node hat-weight sums for one chunk of in-domain samples."""
    idx, frac = grid._locate_with_frac(pts)
    shape = grid.node_shape
    sums = np.zeros(grid.n_nodes)
    for offsets in itertools.product((0, 1), repeat=grid.dim):
        flat = np.zeros(pts.shape[0], dtype=np.int64)
        for n, o in enumerate(offsets):
            flat = flat * shape[n] + (idx[:, n] + o)
        sums += np.bincount(
            flat, weights=_corner_weights(frac, offsets), minlength=grid.n_nodes
        )
    return sums


def _eval_points(grid: TensorGrid, coefficients: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_j F_j * hat_j`` at in-domain points (m, dim)."""
    idx, frac = grid._locate_with_frac(pts)
    shape = grid.node_shape
    values = np.zeros(pts.shape[0])
    for offsets in itertools.product((0, 1), repeat=grid.dim):
        flat = np.zeros(pts.shape[0], dtype=np.int64)
        for n, o in enumerate(offsets):
            flat = flat * shape[n] + (idx[:, n] + o)
        values += coefficients[flat] * _corner_weights(frac, offsets)
    return values


@dataclass(frozen=True, eq=False)
class PiecewiseLinearPdf:
    """A fitted piecewise multilinear density: grid plus one coefficient per node.

    Immutable after fit; evaluation is pure and thread-safe.
    """

    grid: TensorGrid
    coefficients: np.ndarray
    sample_count: int

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64).ravel()
        if coeffs.shape[0] != self.grid.n_nodes:
            raise ValueError(
                f"need {self.grid.n_nodes} coefficients, got {coeffs.shape[0]}"
            )
        object.__setattr__(self, "coefficients", coeffs)

    def evaluate(self, point) -> float:
        """Density value at a single point (exactly F_j at node j)."""
        p = as_point(point, self.grid.dim).reshape(1, -1)
        self.grid.check_in_domain(p)
        return float(_eval_points(self.grid, self.coefficients, p)[0])

    def evaluate_batch(self, points) -> np.ndarray:
        """Elementwise :meth:`evaluate`, order preserving."""
        pts = as_points(points, self.grid.dim)
        if pts.shape[0] == 0:
            return np.empty(0)
        self.grid.check_in_domain(pts)
        return _eval_points(self.grid, self.coefficients, pts)

    def integral(self) -> float:
        """Integral over the domain: sum of F_j * C_j."""
        return float(self.coefficients @ self.grid.basis_integrals())


def fit(
    grid: TensorGrid, samples, *, threads: int = 1, compensated: bool = False
) -> PiecewiseLinearPdf:
    """Fit the estimator to samples lying in the grid domain.

    Samples outside the domain are an error, not silently dropped (dropping
    would break the unit integral); re-grid explicitly if the support was
    misjudged. ``threads`` partitions the samples into fixed-size chunks with
    private accumulators merged in submission order, so the coefficients do
    not depend on the thread count. ``compensated`` switches the merge of
    chunk partials to Kahan summation, which matters only for extreme sample
    counts (hundreds of millions and up).

    Raises
    ------
    EmptySampleSetError
        If no samples are given.
    SampleOutOfDomainError
        Identifying the first offending sample.
    """
    pts = as_points(samples, grid.dim)
    m = pts.shape[0]
    if m == 0:
        raise EmptySampleSetError("cannot fit a density to zero samples")
    grid.check_in_domain(pts, as_samples=True)

    spans = [(start, min(start + _CHUNK, m)) for start in range(0, m, _CHUNK)]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: _accumulate(grid, pts[s[0] : s[1]]), spans))
    else:
        parts = [_accumulate(grid, pts[start:stop]) for start, stop in spans]
    sums = parts[0]
    if compensated:
        carry = np.zeros_like(sums)
        for part in parts[1:]:
            adjusted = part - carry
            merged = sums + adjusted
            carry = (merged - sums) - adjusted
            sums = merged
    else:
        for part in parts[1:]:
            sums += part

    coefficients = sums / (m * grid.basis_integrals())
    return PiecewiseLinearPdf(grid, coefficients, m)


def evaluate(pdf: PiecewiseLinearPdf, point) -> float:
    return pdf.evaluate(point)


def evaluate_batch(pdf: PiecewiseLinearPdf, points) -> np.ndarray:
    return pdf.evaluate_batch(points)


def integral(pdf: PiecewiseLinearPdf) -> float:
    return pdf.integral()


# -- serialization -----------------------------------------------------------
#
# CSV with a header row and one row per node (flat index, node coordinates,
# coefficient) plus a JSON sidecar holding the grid metadata. Coordinates and
# coefficients are written with 17 significant digits, which round-trips
# float64 exactly.


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json") if path.suffix else path.with_name(path.name + ".json")


def save_pdf(pdf: PiecewiseLinearPdf, path) -> Path:
    """Write ``<path>`` (CSV) and a ``.json`` sidecar; returns the sidecar path."""
    path = Path(path)
    grid = pdf.grid
    header = "node_index," + ",".join(f"coord{n}" for n in range(grid.dim)) + ",coefficient"
    table = np.column_stack(
        [np.arange(grid.n_nodes), grid.node_coords_array(), pdf.coefficients]
    )
    fmt = ["%d"] + [_FLOAT_FMT] * (grid.dim + 1)
    np.savetxt(path, table, fmt=fmt, delimiter=",", header=header, comments="")
    sidecar = _sidecar_path(path)
    meta = {
        "lower": list(grid.lower),
        "upper": list(grid.upper),
        "n_delta": list(grid.n_delta),
        "sample_count": pdf.sample_count,
    }
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return sidecar


def load_pdf(path) -> PiecewiseLinearPdf:
    """Read a fitted density written by :func:`save_pdf`."""
    path = Path(path)
    meta = json.loads(_sidecar_path(path).read_text())
    grid = TensorGrid(tuple(meta["lower"]), tuple(meta["upper"]), tuple(meta["n_delta"]))
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(table[:, 0].astype(np.int64))
    coefficients = table[order, -1]
    return PiecewiseLinearPdf(grid, coefficients, int(meta["sample_count"]))
