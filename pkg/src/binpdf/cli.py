"""Command-line front end: sample, fit, study, and compare.

Every command is deterministic given identical flags (seeds included) and
writes output files atomically (temp file + rename). Exit codes: 0 success,
2 usage error, 1 runtime or data error; failures print a line starting with
``error:`` on standard error.

Distributions are written in a small axis-spec language, one spec per axis
joined by ';':

    tgauss:MEAN,SD,LO,HI      truncated Gaussian
    uniform:LO,HI             uniform
    laplace:LOC,SCALE,LO,HI   truncated Laplace

plus shorthand presets: ``tgauss1d``/``tgauss2d``/``tgauss3d`` (iid standard
truncated Gaussians on [-5.5, 5.5]), ``laplace1d`` (location 0, scale 1.5 on
[-5.5, 5.5]), ``uniform1d`` (on [-1, 1]), and ``mixed2d`` (truncated
Gaussians with sd 2 and 1 on [-5.5, 5.5]^2).
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, baselines, estimator, sampling
from .errors import BinPdfError, SampleOutOfDomainError
from .grid import TensorGrid

_PRESETS = {
    "tgauss1d": "tgauss:0,1,-5.5,5.5",
    "tgauss2d": "tgauss:0,1,-5.5,5.5;tgauss:0,1,-5.5,5.5",
    "tgauss3d": ";".join(["tgauss:0,1,-5.5,5.5"] * 3),
    "laplace1d": "laplace:0,1.5,-5.5,5.5",
    "uniform1d": "uniform:-1,1",
    "mixed2d": "tgauss:0,2,-5.5,5.5;tgauss:0,1,-5.5,5.5",
}


class UsageError(Exception):
    """Bad flag values detected after parsing; exits with code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(2)


# -- flag value parsing --------------------------------------------------------


def _parse_count(text: str, what: str) -> int:
    try:
        value = int(float(text))
    except ValueError as err:
        raise UsageError(f"{what} must be a number, got {text!r}") from err
    if value < 1:
        raise UsageError(f"{what} must be >= 1, got {text}")
    return value


def _parse_axis(text: str) -> sampling.AxisDistribution:
    kind, _, rest = text.partition(":")
    try:
        params = [float(p) for p in rest.split(",")] if rest else []
    except ValueError as err:
        raise UsageError(f"bad distribution parameters in {text!r}") from err
    try:
        if kind == "tgauss" and len(params) == 4:
            return sampling.TruncatedGaussian(*params)
        if kind == "uniform" and len(params) == 2:
            return sampling.Uniform(*params)
        if kind == "laplace" and len(params) == 4:
            return sampling.TruncatedLaplace(*params)
    except ValueError as err:
        raise UsageError(f"invalid distribution {text!r}: {err}") from err
    raise UsageError(f"unknown axis distribution {text!r}")


def _parse_dist(text: str) -> sampling.DistributionSpec:
    text = _PRESETS.get(text, text)
    return sampling.DistributionSpec(tuple(_parse_axis(p) for p in text.split(";")))


def _parse_levels(text: str) -> list[int]:
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            levels = list(range(int(lo), int(hi) + 1))
        except ValueError as err:
            raise UsageError(f"bad level range {text!r}") from err
    else:
        try:
            levels = [int(p) for p in text.split(",")]
        except ValueError as err:
            raise UsageError(f"bad level list {text!r}") from err
    if not levels or levels != sorted(levels):
        raise UsageError(f"levels must be a nonempty ascending range, got {text!r}")
    return levels


def _parse_domain(text: str, dim: int) -> list[tuple[float, float]]:
    pairs = []
    for part in text.split(";"):
        try:
            lo, hi = (float(p) for p in part.split(","))
        except ValueError as err:
            raise UsageError(f"bad domain {text!r}; expected lo,hi[;lo,hi...]") from err
        pairs.append((lo, hi))
    if len(pairs) == 1:
        pairs = pairs * dim
    if len(pairs) != dim:
        raise UsageError(f"domain has {len(pairs)} axes, distribution has {dim}")
    return pairs


def _parse_mode(text: str) -> analysis.StudyMode | str:
    if text == "fixed_m":
        return "fixed_m"
    if text == "fixed_delta":
        return "fixed_delta"
    if text.startswith("coupled:"):
        try:
            r = int(text.split(":", 1)[1])
        except ValueError as err:
            raise UsageError(f"bad mode {text!r}") from err
        if r not in (1, 2):
            raise UsageError(f"coupling order {r} is not supported (use 1 or 2)")
        return analysis.Coupled(r)
    raise UsageError(f"unknown mode {text!r} (fixed_m | fixed_delta | coupled:R)")


def _parse_vector(text: str, dim: int, what: str) -> tuple[float, ...]:
    try:
        values = tuple(float(p) for p in text.split(","))
    except ValueError as err:
        raise UsageError(f"bad {what} {text!r}") from err
    if len(values) == 1:
        values = values * dim
    if len(values) != dim:
        raise UsageError(f"{what} has {len(values)} entries, expected {dim}")
    return values


def _parse_n_delta(text: str, dim: int) -> tuple[int, ...]:
    try:
        values = tuple(int(p) for p in text.split(","))
    except ValueError as err:
        raise UsageError(f"bad bin counts {text!r}") from err
    if len(values) == 1:
        values = values * dim
    if len(values) != dim or any(v < 1 for v in values):
        raise UsageError(f"bin counts {text!r} invalid for dimension {dim}")
    return values


# -- atomic output -------------------------------------------------------------


@contextlib.contextmanager
def _atomic_path(path: Path):
    """Yield a temp path in the same directory; rename over ``path`` on success."""
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _publish_with_sidecar(write, out: Path) -> None:
    """Write a CSV+JSON pair under temp names, then rename both."""
    tmp_csv = out.with_name(f".{out.name}.tmp.csv")
    tmp_sidecar = tmp_csv.with_suffix(".json")
    try:
        write(tmp_csv)
        os.replace(tmp_csv, out)
        os.replace(tmp_sidecar, estimator._sidecar_path(out))
    finally:
        for tmp in (tmp_csv, tmp_sidecar):
            if tmp.exists():
                tmp.unlink()


# -- commands ------------------------------------------------------------------


def cmd_sample(args) -> int:
    spec = _parse_dist(args.dist)
    m = _parse_count(args.m, "--m")
    points = sampling.sample(spec, m, args.seed)
    out = Path(args.out)
    with _atomic_path(out) as tmp:
        sampling.write_samples_csv(tmp, points, seed=args.seed)
    print(f"rows: {m}")
    return 0


def _load_samples(path: str) -> np.ndarray:
    try:
        return sampling.read_samples_csv(path)
    except ValueError as err:
        raise BinPdfError(f"could not parse sample file {path}: {err}") from err


def cmd_fit(args) -> int:
    samples = _load_samples(args.samples)
    dim = samples.shape[1]
    if args.support == "auto":
        if args.lower is not None or args.upper is not None:
            raise UsageError("--support auto conflicts with --lower/--upper")
        bounds = analysis.estimate_support(samples)
        lower = tuple(b[0] for b in bounds)
        upper = tuple(b[1] for b in bounds)
    else:
        if args.lower is None or args.upper is None:
            raise UsageError("either --support auto or both --lower and --upper")
        lower = _parse_vector(args.lower, dim, "--lower")
        upper = _parse_vector(args.upper, dim, "--upper")
    n_delta = _parse_n_delta(args.n_delta, dim)
    try:
        grid = TensorGrid(lower, upper, n_delta)
    except ValueError as err:
        raise UsageError(str(err)) from err

    t0 = time.perf_counter()
    try:
        pdf = estimator.fit(grid, samples, threads=args.threads)
    except SampleOutOfDomainError as err:
        raise BinPdfError(
            f"sample row {err.index}: coordinate {err.value!r} on axis "
            f"{err.axis} is outside the grid domain"
        ) from err
    seconds = time.perf_counter() - t0

    out = Path(args.out)
    _publish_with_sidecar(lambda tmp: estimator.save_pdf(pdf, tmp), out)
    print(f"samples: {pdf.sample_count}")
    print(f"bins: {grid.n_bins}")
    print(f"integral: {pdf.integral():.12g}")
    print(f"fit-seconds: {seconds:.6g}")
    return 0


def cmd_study(args) -> int:
    spec = _parse_dist(args.dist)
    mode = _parse_mode(args.mode)
    if mode == "fixed_m":
        if args.m is None:
            raise UsageError("--mode fixed_m requires --m")
        mode = analysis.FixedM(_parse_count(args.m, "--m"))
    elif mode == "fixed_delta":
        if args.n_delta is None:
            raise UsageError("--mode fixed_delta requires --n-delta")
        mode = analysis.FixedDelta(_parse_count(args.n_delta, "--n-delta"))
    levels = _parse_levels(args.k)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed]

    if args.support == "auto":
        if args.domain is not None:
            raise UsageError("--support auto conflicts with --domain")
        grid_domain = "auto"
    elif args.domain is not None:
        grid_domain = _parse_domain(args.domain, spec.dim)
    else:
        grid_domain = None

    result = analysis.averaged_study(
        spec, mode, levels, seeds,
        grid_domain=grid_domain, holdout=args.holdout, threads=args.threads,
    )
    out = Path(args.out)
    with _atomic_path(out) as tmp:
        analysis.write_study_csv(result, tmp)
    script = out.with_suffix(".gp")
    with _atomic_path(script) as tmp:
        analysis.write_plot_script(out, tmp, title=f"{args.dist} {args.mode}")
    print(f"delta-rate: {result.fitted_rate_delta:.12g}")
    print(f"m-rate: {result.fitted_rate_m:.12g}")
    return 0


def _parse_estimators(text: str) -> list[tuple[str, dict]]:
    wanted = []
    for part in text.split(","):
        if part == "fe":
            wanted.append(("fe", {}))
        elif part == "histogram":
            wanted.append(("histogram", {}))
        elif part.startswith("kde:"):
            pieces = part.split(":")
            kernel = "triangular"
            if len(pieces) == 3:
                kernel = pieces[1]
                if kernel not in baselines.KERNELS:
                    raise UsageError(f"unknown kde kernel {kernel!r}")
            try:
                bandwidth = float(pieces[-1])
            except ValueError as err:
                raise UsageError(f"bad kde bandwidth in {part!r}") from err
            if bandwidth <= 0:
                raise UsageError(f"kde bandwidth must be > 0, got {bandwidth}")
            wanted.append(("kde", {"kernel": kernel, "bandwidth": bandwidth}))
        else:
            raise UsageError(f"unknown estimator {part!r} (fe | histogram | kde:B)")
    return wanted


def cmd_compare(args) -> int:
    samples = _load_samples(args.samples)
    ref_samples = _load_samples(args.ref_samples) if args.ref_samples else samples
    dim = samples.shape[1]
    ref_m = _parse_count(args.ref_m, "--ref-m") if args.ref_m else ref_samples.shape[0]
    fit_m = _parse_count(args.m, "--m") if args.m else samples.shape[0]
    if ref_m > ref_samples.shape[0] or fit_m > samples.shape[0]:
        raise UsageError("requested more samples than the file provides")
    ref_n = _parse_count(args.ref_n_delta, "--ref-n-delta")
    coarse_n = _parse_count(args.n_delta, "--n-delta")
    wanted = _parse_estimators(args.estimators)

    if args.domain is None:
        bounds = analysis.estimate_support(ref_samples)
    else:
        bounds = _parse_domain(args.domain, dim)
    lower = tuple(b[0] for b in bounds)
    upper = tuple(b[1] for b in bounds)

    reference = baselines.fit_histogram(
        TensorGrid(lower, upper, (ref_n,) * dim), ref_samples[:ref_m]
    )
    coarse = samples[:fit_m]
    coarse_grid = TensorGrid(lower, upper, (coarse_n,) * dim)

    rows = []
    for name, params in wanted:
        if name == "fe":
            pdf = estimator.fit(coarse_grid, coarse, threads=args.threads)
            evaluator = pdf.evaluate_batch
            label = "fe"
        elif name == "histogram":
            hist = baselines.fit_histogram(coarse_grid, coarse)
            evaluator = hist.evaluate_batch
            label = "histogram"
        else:
            kde = baselines.KdeSpec(params["kernel"], params["bandwidth"], coarse)
            evaluator = lambda pts, k=kde: baselines.eval_kde_batch(k, pts)
            label = f"kde:{params['kernel']}:{params['bandwidth']:g}"
        rmse = analysis.rmse_vs_histogram(evaluator, reference, coarse)
        rows.append((label, rmse))
        print(f"{label}: {rmse:.12g}")

    out = Path(args.out)
    with _atomic_path(out) as tmp:
        lines = ["estimator,n_delta,m,ref_n_delta,ref_m,rmse"]
        for label, rmse in rows:
            lines.append(f"{label},{coarse_n},{fit_m},{ref_n},{ref_m},{rmse:.12g}")
        tmp.write_text("\n".join(lines) + "\n")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="binpdf", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw seeded samples to a CSV file")
    p.add_argument("--dist", required=True, help="distribution spec or preset")
    p.add_argument("--m", required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="fit the piecewise-linear estimator to a sample CSV")
    p.add_argument("--samples", required=True)
    p.add_argument("--lower", help="comma-separated per-axis lower bounds")
    p.add_argument("--upper", help="comma-separated per-axis upper bounds")
    p.add_argument("--n-delta", required=True, help="per-axis bin counts")
    p.add_argument("--support", choices=["auto"], help="grid on the sample extremes")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("study", help="run a convergence study, write CSV + plot script")
    p.add_argument("--dist", required=True)
    p.add_argument("--mode", required=True, help="fixed_m | fixed_delta | coupled:R")
    p.add_argument("--k", required=True, help="levels, e.g. 2..5 or 2,3,4")
    p.add_argument("--m", help="sample count for fixed_m")
    p.add_argument("--n-delta", help="bin count for fixed_delta")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", help="comma-separated seeds to average over")
    p.add_argument("--domain", help="grid domain lo,hi[;lo,hi...] (default: support)")
    p.add_argument("--support", choices=["auto"], help="grid on per-level sample extremes")
    p.add_argument("--holdout", action="store_true",
                   help="measure errors on an independent sample set")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("compare", help="RMSE of estimators against a fine histogram")
    p.add_argument("--samples", required=True)
    p.add_argument("--ref-samples", help="separate reference sample CSV")
    p.add_argument("--ref-m", help="reference sample count (default: whole file)")
    p.add_argument("--ref-n-delta", required=True, help="reference histogram bin count")
    p.add_argument("--m", help="coarse fit sample count (default: whole file)")
    p.add_argument("--n-delta", required=True, help="coarse bin count")
    p.add_argument("--estimators", default="fe", help="fe,histogram,kde:B")
    p.add_argument("--domain", help="grid domain (default: reference sample extremes)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except BinPdfError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
