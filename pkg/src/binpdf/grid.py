"""Uniform tensor-product bin grids and their multilinear hat-function basis.

A :class:`TensorGrid` subdivides an axis-aligned box into congruent
hyper-rectangular bins. Nodes are the bin vertices; each node carries a
continuous, piecewise multilinear hat function that is 1 at its node, 0 at
every other node, and supported on the bins touching the node. The module
provides point location, node coordinates, hat evaluation, and the exact
(closed-form) integral of each hat over the box.

Point location uses direct index arithmetic, ``i = floor((y - a) / delta)``,
followed by a one-step correction against the bin edge values so that the
returned bin agrees exactly with edge comparisons even for points within one
ulp of a face. Points on interior faces belong to the higher-index bin; the
exact upper domain boundary is clamped into the last bin.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import IndexOutOfRangeError, OutOfDomainError, SampleOutOfDomainError

MultiIndex = tuple[int, ...]


def as_points(points, dim: int) -> np.ndarray:
    """Coerce input to a float64 array of shape (m, dim)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        if dim == 1:
            pts = pts.reshape(-1, 1)
        elif pts.shape[0] == dim:
            pts = pts.reshape(1, dim)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {pts.shape}")
    return pts


def as_point(point, dim: int) -> np.ndarray:
    """Coerce input to a single float64 point of shape (dim,)."""
    p = np.asarray(point, dtype=np.float64)
    if p.ndim == 0 and dim == 1:
        p = p.reshape(1)
    if p.shape != (dim,):
        raise ValueError(f"expected a point of dimension {dim}, got shape {p.shape}")
    return p


@dataclass(frozen=True)
class TensorGrid:
    """Axis-aligned box domain subdivided into congruent rectangular bins.

    Parameters
    ----------
    lower, upper : per-axis domain bounds, lower[n] < upper[n].
    n_delta : per-axis subdivision counts (>= 1). Bin widths are
        ``(upper - lower) / n_delta``.

    The grid is immutable after construction; all methods are pure and safe
    to share across threads.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    n_delta: tuple[int, ...]

    def __post_init__(self):
        lower = tuple(float(a) for a in np.atleast_1d(self.lower))
        upper = tuple(float(b) for b in np.atleast_1d(self.upper))
        n_delta = tuple(int(n) for n in np.atleast_1d(self.n_delta))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "n_delta", n_delta)
        if not (len(lower) == len(upper) == len(n_delta)):
            raise ValueError("lower, upper and n_delta must have equal length")
        if len(lower) == 0:
            raise ValueError("grid dimension must be at least 1")
        for n, (a, b, nd) in enumerate(zip(lower, upper, n_delta)):
            if not np.isfinite(a) or not np.isfinite(b) or not a < b:
                raise ValueError(f"axis {n}: need lower < upper, got [{a}, {b}]")
            if nd < 1:
                raise ValueError(f"axis {n}: subdivision count must be >= 1, got {nd}")

    # -- derived shape data ------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.lower)

    @cached_property
    def deltas(self) -> tuple[float, ...]:
        """Per-axis bin widths."""
        return tuple(
            (b - a) / n for a, b, n in zip(self.lower, self.upper, self.n_delta)
        )

    @cached_property
    def node_shape(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.n_delta)

    @property
    def bin_shape(self) -> tuple[int, ...]:
        return self.n_delta

    @cached_property
    def n_bins(self) -> int:
        return int(np.prod(self.n_delta))

    @cached_property
    def n_nodes(self) -> int:
        return int(np.prod(self.node_shape))

    @cached_property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    @cached_property
    def _lower(self) -> np.ndarray:
        return np.array(self.lower, dtype=np.float64)

    @cached_property
    def _upper(self) -> np.ndarray:
        return np.array(self.upper, dtype=np.float64)

    @cached_property
    def _delta(self) -> np.ndarray:
        return np.array(self.deltas, dtype=np.float64)

    @cached_property
    def _n_delta(self) -> np.ndarray:
        return np.array(self.n_delta, dtype=np.int64)

    # -- index plumbing ------------------------------------------------------

    def _check_multi(self, index, shape: tuple[int, ...], what: str) -> tuple[int, ...]:
        idx = tuple(int(i) for i in np.atleast_1d(index))
        if len(idx) != self.dim:
            raise IndexOutOfRangeError(
                f"{what} index {idx} has wrong length for dimension {self.dim}"
            )
        for n, (i, s) in enumerate(zip(idx, shape)):
            if not 0 <= i < s:
                raise IndexOutOfRangeError(
                    f"{what} index {idx} is out of range on axis {n} (size {s})"
                )
        return idx

    def node_flat_index(self, node) -> int:
        """Row-major flat index of a node multi-index."""
        idx = self._check_multi(node, self.node_shape, "node")
        return int(np.ravel_multi_index(idx, self.node_shape))

    def node_multi_index(self, flat: int) -> MultiIndex:
        if not 0 <= flat < self.n_nodes:
            raise IndexOutOfRangeError(f"flat node index {flat} out of range")
        return tuple(int(i) for i in np.unravel_index(flat, self.node_shape))

    def bin_flat_index(self, bin_index) -> int:
        idx = self._check_multi(bin_index, self.bin_shape, "bin")
        return int(np.ravel_multi_index(idx, self.bin_shape))

    def bin_multi_index(self, flat: int) -> MultiIndex:
        if not 0 <= flat < self.n_bins:
            raise IndexOutOfRangeError(f"flat bin index {flat} out of range")
        return tuple(int(i) for i in np.unravel_index(flat, self.bin_shape))

    # -- domain checks -------------------------------------------------------

    def check_in_domain(self, pts: np.ndarray, *, as_samples: bool = False) -> None:
        """Raise on the first point outside the closed box domain.

        Raises :class:`SampleOutOfDomainError` when ``as_samples`` is set
        (fit input), :class:`OutOfDomainError` otherwise.
        """
        bad = (pts < self._lower) | (pts > self._upper)
        if bad.any():
            index, axis = np.argwhere(bad)[0]
            value = float(pts[index, axis])
            if as_samples:
                raise SampleOutOfDomainError(int(index), int(axis), value)
            raise OutOfDomainError(int(axis), value, index=int(index))

    # -- point location ------------------------------------------------------

    def _locate_with_frac(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bin indices and within-bin fractional offsets for in-domain points.

        Returns ``(idx, frac)`` with shapes (m, dim); ``frac`` is clipped to
        [0, 1] and forced to exactly 1 on the upper domain boundary so that
        node coordinates reproduce node values exactly.
        """
        idx = np.floor((pts - self._lower) / self._delta).astype(np.int64)
        # one-step fixup: make the index decision agree with edge comparisons
        idx -= pts < self._lower + idx * self._delta
        idx += pts >= self._lower + (idx + 1) * self._delta
        np.clip(idx, 0, self._n_delta - 1, out=idx)
        frac = (pts - (self._lower + idx * self._delta)) / self._delta
        np.clip(frac, 0.0, 1.0, out=frac)
        frac[pts == self._upper] = 1.0
        return idx, frac

    def locate_bin(self, point) -> MultiIndex:
        """Bin containing ``point``; interior faces go to the higher-index bin.

        The exact upper boundary is clamped into the last bin. Raises
        :class:`OutOfDomainError` for points outside the closed box.
        """
        p = as_point(point, self.dim).reshape(1, -1)
        self.check_in_domain(p)
        idx, _ = self._locate_with_frac(p)
        return tuple(int(i) for i in idx[0])

    def locate_bins(self, points) -> np.ndarray:
        """Vectorized :meth:`locate_bin`; returns an (m, dim) int array."""
        pts = as_points(points, self.dim)
        self.check_in_domain(pts)
        idx, _ = self._locate_with_frac(pts)
        return idx

    # -- nodes and basis -----------------------------------------------------

    def node_coords(self, node) -> np.ndarray:
        """Coordinates of a node: ``lower + index * delta`` per axis."""
        idx = self._check_multi(node, self.node_shape, "node")
        return self._lower + np.array(idx, dtype=np.float64) * self._delta

    def node_coords_array(self) -> np.ndarray:
        """Coordinates of all nodes, shape (n_nodes, dim), row-major order."""
        axes = [
            self._lower[n] + np.arange(self.node_shape[n]) * self._delta[n]
            for n in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def bin_lower_corners(self) -> np.ndarray:
        """Lower corner of every bin, shape (n_bins, dim), row-major order."""
        axes = [
            self._lower[n] + np.arange(self.n_delta[n]) * self._delta[n]
            for n in range(self.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def basis_eval(self, node, point) -> float:
        """Hat function of ``node`` at ``point``.

        Product over axes of ``max(0, 1 - |y_n - node_n| / delta_n)``,
        computed from the located bin's fractional offsets so that the value
        is exactly 1 at the node itself and exactly 0 at every other node.
        """
        idx = self._check_multi(node, self.node_shape, "node")
        p = as_point(point, self.dim).reshape(1, -1)
        self.check_in_domain(p)
        bin_idx, frac = self._locate_with_frac(p)
        out = 1.0
        for n, i in enumerate(idx):
            b = int(bin_idx[0, n])
            if i == b:
                out *= 1.0 - float(frac[0, n])
            elif i == b + 1:
                out *= float(frac[0, n])
            else:
                return 0.0
        return out

    def basis_integral(self, node) -> float:
        """Exact integral of the node's hat function over the domain.

        Per axis the 1D hat integrates to ``delta`` at interior coordinates
        and ``delta / 2`` at boundary coordinates; the tensor product gives
        the closed form.
        """
        idx = self._check_multi(node, self.node_shape, "node")
        out = 1.0
        for i, nd, d in zip(idx, self.n_delta, self.deltas):
            out *= d / 2.0 if i == 0 or i == nd else d
        return out

    def basis_integrals(self) -> np.ndarray:
        """Integrals of all hat functions, shape (n_nodes,), row-major order."""
        factors = []
        for n in range(self.dim):
            c = np.full(self.node_shape[n], self.deltas[n])
            c[0] *= 0.5
            c[-1] *= 0.5
            factors.append(c)
        out = factors[0]
        for c in factors[1:]:
            out = np.multiply.outer(out, c)
        return out.ravel()

    def bin_vertices(self, bin_index) -> list[MultiIndex]:
        """The 2**dim corner nodes of a bin, in lexicographic offset order."""
        idx = self._check_multi(bin_index, self.bin_shape, "bin")
        return [
            tuple(i + o for i, o in zip(idx, offsets))
            for offsets in itertools.product((0, 1), repeat=self.dim)
        ]
