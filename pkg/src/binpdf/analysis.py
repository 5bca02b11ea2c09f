"""Error metrics, bin/sample coupling, support estimation, and study harness.

The accuracy of a fitted density depends on both the bin width and the sample
count, so convergence is studied three ways: shrinking the bin width at a
fixed large sample count, growing the sample count at a fixed small bin
width, and coupling the two through ``M = N_delta**(2 r)`` so discretization
and sampling errors shrink together. Each study level draws nested samples
(same seed, growing prefix), fits the estimator, measures the RMSE of the
density values at the sample points against the exact density, and records
the fit wall time; rates are least-squares slopes in log-log space.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import estimator
from .baselines import Histogram
from .errors import (
    DegenerateSupportError,
    EmptySampleSetError,
    NonpositiveValueError,
    TooFewPointsError,
    UnsupportedOrderError,
)
from .grid import TensorGrid, as_points
from .sampling import DistributionSpec, sample

# XOR mask applied to the base seed when drawing an independent held-out
# evaluation set, keeping it disjoint from the fitting stream.
_HOLDOUT_SEED_XOR = 0x9E3779B97F4A7C15


# -- error metrics -------------------------------------------------------------


def rmse_vs_exact(approx_eval, exact: DistributionSpec, samples) -> float:
    """Root mean square difference of densities at the sample points.

    ``approx_eval`` maps an (m, dim) array of points to m density values
    (e.g. ``pdf.evaluate_batch``).
    """
    pts = as_points(samples, exact.dim)
    if pts.shape[0] == 0:
        raise EmptySampleSetError("error metric needs at least one sample point")
    diff = exact.pdf(pts) - np.asarray(approx_eval(pts), dtype=np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


def rmse_vs_histogram(approx_eval, reference: Histogram, samples) -> float:
    """Same metric with a fine histogram standing in for the exact density.

    The reference should be built from far more samples (and far smaller
    bins) than the approximation; only the sample-count side is visible here,
    so a too-small reference triggers a warning rather than an error.
    """
    pts = as_points(samples, reference.grid.dim)
    if pts.shape[0] == 0:
        raise EmptySampleSetError("error metric needs at least one sample point")
    if reference.sample_count <= pts.shape[0]:
        warnings.warn(
            "reference histogram was built from no more samples than the "
            "approximation is being checked on; the surrogate error is unreliable",
            stacklevel=2,
        )
    diff = reference.evaluate_batch(pts) - np.asarray(approx_eval(pts), dtype=np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


# -- bin-size / sample-size coupling -------------------------------------------


@dataclass(frozen=True)
class CouplingRule:
    """Refinement schedule tying the sample count to the bin count.

    For expected bin-size order ``r`` and level ``k``, the bin count is
    ``N_delta = 2**((3 - r) * k)`` and the sample count ``M = N_delta**(2 r)``,
    which balances an O(delta**r) discretization error against the
    O(M**-1/2) sampling error. ``m_multiplier`` optionally scales M for
    high-variance densities (default 1).
    """

    r: int
    k: int
    a: float
    b: float
    m_multiplier: float = 1.0

    def __post_init__(self):
        if self.r not in (1, 2):
            raise UnsupportedOrderError(
                f"coupling order r={self.r} is not supported: the exponent "
                "3 - r must stay positive"
            )
        if self.k < 1:
            raise ValueError(f"level k must be >= 1, got {self.k}")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")
        if not self.m_multiplier > 0:
            raise ValueError("m_multiplier must be > 0")


def coupling(rule: CouplingRule) -> tuple[int, float, int]:
    """(n_delta, delta, m) for one refinement level of the coupling rule."""
    n_delta = 2 ** ((3 - rule.r) * rule.k)
    delta = (rule.b - rule.a) / n_delta
    m = int(round(rule.m_multiplier * n_delta ** (2 * rule.r)))
    return n_delta, delta, m


# -- support estimation ---------------------------------------------------------


def estimate_support(samples) -> list[tuple[float, float]]:
    """Componentwise sample extremes, one (min, max) pair per axis.

    The samples necessarily lie inside the true support, so the extremes
    provide a conservative, consistent estimate of it; build the grid on
    this box when the support is unknown.
    """
    pts = np.asarray(samples, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[0] == 0:
        raise EmptySampleSetError("support estimation needs samples")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    for axis in range(pts.shape[1]):
        if lo[axis] == hi[axis]:
            raise DegenerateSupportError(axis)
    return [(float(a), float(b)) for a, b in zip(lo, hi)]


# -- log-log rate fitting --------------------------------------------------------


def fit_rate(points) -> float:
    """Least-squares slope of log(error) against log(x) for (x, error) pairs."""
    pts = [(float(x), float(e)) for x, e in points]
    if len(pts) < 2:
        raise TooFewPointsError(f"rate fit needs >= 2 points, got {len(pts)}")
    for x, e in pts:
        if x <= 0 or e <= 0:
            raise NonpositiveValueError(f"rate fit needs positive values, got ({x}, {e})")
    logx = np.log([x for x, _ in pts])
    loge = np.log([e for _, e in pts])
    return float(np.polyfit(logx, loge, 1)[0])


def _slope_or_nan(x: np.ndarray, err: np.ndarray) -> float:
    if np.ptp(x) == 0.0:
        return float("nan")
    return fit_rate(list(zip(x, err)))


# -- convergence studies -----------------------------------------------------------


@dataclass(frozen=True)
class FixedM:
    """Fixed sample count; level k halves the bin width: n_delta = 2**k."""

    m: int


@dataclass(frozen=True)
class FixedDelta:
    """Fixed bin count; level k sets the sample count to 10**k."""

    n_delta: int


@dataclass(frozen=True)
class Coupled:
    """Bin and sample counts tied through the coupling rule of order r."""

    r: int
    m_multiplier: float = 1.0


StudyMode = FixedM | FixedDelta | Coupled


@dataclass(frozen=True)
class StudyLevel:
    k: int
    n_delta: int
    delta: float
    m: int
    error: float
    seconds: float


@dataclass(frozen=True)
class StudyResult:
    """Per-level study rows (sorted by decreasing delta) plus fitted rates."""

    rows: tuple[StudyLevel, ...]
    fitted_rate_delta: float
    fitted_rate_m: float

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda r: -r.delta))
        object.__setattr__(self, "rows", rows)


def _level_params(mode: StudyMode, k: int) -> tuple[int, int]:
    """(n_delta, m) for one level; neither depends on the domain bounds."""
    if isinstance(mode, FixedM):
        return 2**k, int(mode.m)
    if isinstance(mode, FixedDelta):
        return int(mode.n_delta), 10**k
    rule = CouplingRule(mode.r, k, 0.0, 1.0, m_multiplier=mode.m_multiplier)
    n_delta, _, m = coupling(rule)
    return n_delta, m


def _resolve_domain(spec: DistributionSpec, grid_domain) -> list[tuple[float, float]] | str:
    if grid_domain is None:
        lo, hi = spec.support
        return list(zip(lo, hi))
    if isinstance(grid_domain, str):
        if grid_domain != "auto":
            raise ValueError(f"unknown grid domain {grid_domain!r}")
        return "auto"
    bounds = list(grid_domain)
    if len(bounds) == 2 and np.isscalar(bounds[0]):
        bounds = [tuple(bounds)] * spec.dim
    if len(bounds) != spec.dim:
        raise ValueError(f"need one (lo, hi) pair per axis, got {len(bounds)}")
    return [(float(a), float(b)) for a, b in bounds]


def convergence_study(
    spec: DistributionSpec,
    mode: StudyMode,
    levels,
    seed: int,
    *,
    grid_domain=None,
    holdout: bool = False,
    threads: int = 1,
) -> StudyResult:
    """Run one study: per level, derive (delta, m), sample, fit, measure.

    Samples are nested across levels (same seed, growing prefixes). The grid
    is built on the distribution's support box by default, on explicit
    per-axis bounds if ``grid_domain`` is given, or on the per-level sample
    extremes with ``grid_domain='auto'``. Errors are measured at the fitting
    samples; with ``holdout=True`` an independently seeded set of equal size
    is used instead. ``seconds`` is the fit wall time alone.
    """
    levels = [int(k) for k in levels]
    if not levels:
        raise ValueError("levels must be nonempty")
    if levels != sorted(levels):
        raise ValueError("levels must be ascending")
    domain = _resolve_domain(spec, grid_domain)

    rows = []
    for k in levels:
        n_delta, m = _level_params(mode, k)
        samples = sample(spec, m, seed)
        bounds = estimate_support(samples) if domain == "auto" else domain
        grid = TensorGrid(
            tuple(b[0] for b in bounds),
            tuple(b[1] for b in bounds),
            (n_delta,) * spec.dim,
        )
        t0 = time.perf_counter()
        pdf = estimator.fit(grid, samples, threads=threads)
        seconds = time.perf_counter() - t0
        eval_points = (
            sample(spec, m, seed ^ _HOLDOUT_SEED_XOR) if holdout else samples
        )
        error = rmse_vs_exact(pdf.evaluate_batch, spec, eval_points)
        rows.append(StudyLevel(k, n_delta, float(grid.deltas[0]), m, error, seconds))

    deltas = np.array([r.delta for r in rows])
    ms = np.array([r.m for r in rows], dtype=np.float64)
    errors = np.array([r.error for r in rows])
    return StudyResult(
        tuple(rows),
        fitted_rate_delta=_slope_or_nan(deltas, errors),
        fitted_rate_m=_slope_or_nan(ms, errors),
    )


def averaged_study(
    spec: DistributionSpec,
    mode: StudyMode,
    levels,
    seeds,
    *,
    grid_domain=None,
    holdout: bool = False,
    threads: int = 1,
) -> StudyResult:
    """Average per-level errors over several seeds before fitting rates.

    Damps Monte Carlo noise that would otherwise dominate desk-scale rate
    estimates.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    results = [
        convergence_study(
            spec, mode, levels, s, grid_domain=grid_domain, holdout=holdout, threads=threads
        )
        for s in seeds
    ]
    base = results[0].rows
    for res in results[1:]:
        for row, ref in zip(res.rows, base):
            if (row.k, row.n_delta, row.m) != (ref.k, ref.n_delta, ref.m):
                raise ValueError("study levels disagree across seeds")
    rows = []
    for i, ref in enumerate(base):
        error = float(np.mean([res.rows[i].error for res in results]))
        seconds = float(np.mean([res.rows[i].seconds for res in results]))
        delta = float(np.mean([res.rows[i].delta for res in results]))
        rows.append(StudyLevel(ref.k, ref.n_delta, delta, ref.m, error, seconds))
    deltas = np.array([r.delta for r in rows])
    ms = np.array([r.m for r in rows], dtype=np.float64)
    errors = np.array([r.error for r in rows])
    return StudyResult(
        tuple(rows),
        fitted_rate_delta=_slope_or_nan(deltas, errors),
        fitted_rate_m=_slope_or_nan(ms, errors),
    )


# -- study serialization ------------------------------------------------------------


def write_study_csv(result: StudyResult, path) -> None:
    """Columns k, n_delta, delta, m, error, seconds.

    Errors are rounded to 12 significant digits so files are reproducible
    across thread counts; the seconds column is wall-clock and is the only
    non-reproducible field.
    """
    lines = ["k,n_delta,delta,m,error,seconds"]
    for r in result.rows:
        lines.append(
            f"{r.k},{r.n_delta},{r.delta:.17g},{r.m},{r.error:.12g},{r.seconds:.6g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_plot_script(csv_path, script_path, *, title: str = "convergence study") -> None:
    """Emit a gnuplot script drawing log-log error vs delta and error vs m."""
    csv_name = Path(csv_path).name
    stem = Path(csv_path).stem
    text = f"""\
set datafile separator ','
set key autotitle columnhead
set logscale xy
set terminal pngcairo size 1100,480
set output '{stem}.png'
set multiplot layout 1,2 title '{title}'
set xlabel 'bin width'
set ylabel 'rmse'
plot '{csv_name}' using 3:5 with linespoints pt 7 title 'error vs bin width'
set xlabel 'sample count'
plot '{csv_name}' using 4:5 with linespoints pt 5 title 'error vs sample count'
unset multiplot
"""
    Path(script_path).write_text(text)
