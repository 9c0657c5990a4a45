"""Async wrapper around the controller to expose a simple CLI.

Exit codes: 0 success, 2 usage or schema problems, 3 pole hit, 4 fit failure.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import load_defaults
from .controller import (
    CurveRequest,
    CurveResult,
    EvalRequest,
    EvalResult,
    FitOutcome,
    FitRequest,
    PredictOutcome,
    PredictRequest,
    ReplayRequest,
    ZerosRequest,
    ZerosResult,
    fulfill_request,
)
from .errors import (
    BracketError,
    ConvergenceError,
    FitError,
    PoleError,
    SchemaError,
    VersionMismatchError,
)
from .halo import format_two_j
from .reports import format_float
from .systems import system_summary

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_POLE = 3
EXIT_FIT = 4

GEOMETRIES = ("s2", "ho", "torus")


def _add_geometry_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--band", "-L", type=int, default=0, help="Rotational band L on the sphere.")
    parser.add_argument(
        "--geometry",
        choices=GEOMETRIES,
        default="s2",
        help="Sphere (s2), two-dimensional oscillator (ho) or torus.",
    )
    parser.add_argument(
        "--cutoff",
        type=float,
        default=200.0,
        help="Angular cutoff lambda for --method sum, lattice cutoff for the torus.",
    )
    parser.add_argument(
        "--no-extrapolate",
        dest="extrapolate",
        action="store_false",
        help="Report the raw torus sum at --cutoff instead of its limit.",
    )
    parser.add_argument(
        "--x-cm",
        type=float,
        default=0.0,
        help="Centre-of-mass shift applied to oscillator and torus curves.",
    )


def _add_system_options(parser: argparse.ArgumentParser, data_dir: Path) -> None:
    parser.add_argument("--system", required=True, help="System key in the data file (he6, li11, li6).")
    parser.add_argument("--data-file", type=Path, default=None, help="Alternative halo data file.")
    parser.add_argument("--data-dir", type=Path, default=data_dir, help="Directory of halo_systems.json.")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    defaults = load_defaults()
    parser = argparse.ArgumentParser(
        description="Spectra of two contact-interacting particles on a sphere"
    )
    parser.add_argument(
        "--log-level",
        default=defaults.log_level,
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        type=str.upper,
        help="Logging verbosity.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    evaluate = commands.add_parser("eval", help="Evaluate a quantization condition at one x.")
    evaluate.add_argument("--x", type=float, required=True, help="Dimensionless energy x.")
    _add_geometry_options(evaluate)
    evaluate.add_argument(
        "--method",
        choices=("auto", "closed", "general", "sum"),
        default="auto",
        help="Closed form, extrapolated sum, or the sum truncated at --cutoff.",
    )
    evaluate.add_argument("--manifest", type=Path, default=None, help="Write a run manifest here.")

    curve = commands.add_parser("curve", help="Sample a condition into a CSV file.")
    _add_geometry_options(curve)
    curve.add_argument("--x-min", type=float, default=-9.0)
    curve.add_argument("--x-max", type=float, default=40.0)
    curve.add_argument("--points", type=int, default=2000)
    curve.add_argument("--out", type=Path, default=defaults.output_dir / "curve.csv")

    zeros = commands.add_parser("zeros", help="List the zeros of a condition.")
    _add_geometry_options(zeros)
    zeros.add_argument("--count", type=int, default=4)
    zeros.add_argument("--manifest", type=Path, default=None, help="Write a run manifest here.")

    fit = commands.add_parser("fit", help="Fit a halo system with Monte-Carlo errors.")
    _add_system_options(fit, defaults.data_dir)
    fit.add_argument("--samples", type=int, default=defaults.samples)
    fit.add_argument("--seed", type=int, default=defaults.seed)
    fit.add_argument("--workers", type=int, default=defaults.workers)
    fit.add_argument("--out", type=Path, default=None, help="Fit report (JSON).")

    predict = commands.add_parser("predict", help="Predict a halo spectrum from a fit report.")
    _add_system_options(predict, defaults.data_dir)
    predict.add_argument("--fit", type=Path, required=True, help="Fit report written by 'fit'.")
    predict.add_argument("--L-max", dest="L_max", type=int, default=2)
    predict.add_argument("--levels", type=int, default=4, help="Branches per band.")
    predict.add_argument("--workers", type=int, default=defaults.workers)
    predict.add_argument("--out", type=Path, default=None, help="Level table (JSON).")

    replay = commands.add_parser("replay", help="Re-run the request recorded in a manifest.")
    replay.add_argument("manifest", type=Path)

    args = parser.parse_args(argv)
    if args.command in ("fit", "predict") and args.out is None:
        args.out = defaults.output_dir / f"{args.system}-{args.command}.json"
    return args


def build_request(args: argparse.Namespace):
    if args.command == "eval":
        return EvalRequest(
            x=args.x,
            band=args.band,
            geometry=args.geometry,
            method=args.method,
            cutoff=args.cutoff,
            extrapolate=args.extrapolate,
            x_cm=args.x_cm,
            manifest=args.manifest,
        )
    if args.command == "curve":
        return CurveRequest(
            output=args.out,
            band=args.band,
            geometry=args.geometry,
            x_min=args.x_min,
            x_max=args.x_max,
            points=args.points,
            cutoff=args.cutoff,
            extrapolate=args.extrapolate,
            x_cm=args.x_cm,
        )
    if args.command == "zeros":
        return ZerosRequest(
            band=args.band,
            geometry=args.geometry,
            count=args.count,
            cutoff=args.cutoff,
            manifest=args.manifest,
        )
    if args.command == "fit":
        return FitRequest(
            system=args.system,
            output=args.out,
            samples=args.samples,
            seed=args.seed,
            workers=args.workers,
            data_file=args.data_file,
            data_dir=args.data_dir,
        )
    if args.command == "predict":
        return PredictRequest(
            system=args.system,
            fit_report=args.fit,
            output=args.out,
            L_max=args.L_max,
            levels_per_band=args.levels,
            workers=args.workers,
            data_file=args.data_file,
            data_dir=args.data_dir,
        )
    return ReplayRequest(manifest=args.manifest)


def _print_eval_result(result: EvalResult) -> None:
    print(format_float(result.value))


def _print_curve_result(result: CurveResult) -> None:
    print(f"Wrote {result.rows} points in {result.segments} segments to {result.path}")
    if result.poles:
        print("Poles: " + ", ".join(format_float(p) for p in result.poles))


def _print_zeros_result(result: ZerosResult) -> None:
    for index, zero in enumerate(result.zeros):
        print(f"{index}\t{format_float(zero)}")


def _print_fit_result(result: FitOutcome) -> None:
    print(f"{result.system.name} (data {result.system.version}):")
    for line in system_summary(result.system):
        print(f"  measured {line}")
    for key, fit in result.fits.items():
        print(
            f"  {key}: atilde = {fit.atilde:.4f} +- {fit.atilde_sigma:.4f}, "
            f"R = {fit.radius:.4f} +- {fit.radius_sigma:.4f} fm, "
            f"a = {fit.a:.4f} +- {fit.a_sigma:.4f} fm "
            f"({fit.failures}/{fit.samples} samples dropped)"
        )
    print(f"Report: {result.path}")


def _print_predict_result(result: PredictOutcome) -> None:
    print(f"{result.system.name} predicted levels:")
    for level in result.prediction.levels:
        two_j = "/".join(format_two_j(value) for value in level.two_j_values)
        print(
            f"  {level.energy:+9.4f} +- {level.sigma:.4f} MeV  {level.channel} L={level.L} "
            f"n={level.branch}  J = {two_j}  [{level.label}]"
        )
    for failure in result.prediction.failures:
        print(f"  no level for {failure.channel} L={failure.L} n={failure.branch}: {failure.message}")
    print(f"Report: {result.path}")


def _print_result(result) -> None:
    if isinstance(result, EvalResult):
        _print_eval_result(result)
    elif isinstance(result, CurveResult):
        _print_curve_result(result)
    elif isinstance(result, ZerosResult):
        _print_zeros_result(result)
    elif isinstance(result, FitOutcome):
        _print_fit_result(result)
    elif isinstance(result, PredictOutcome):
        _print_predict_result(result)


def exit_code_for(exc: BaseException) -> int:
    """Stable exit code of a failed run."""

    if isinstance(exc, PoleError):
        return EXIT_POLE
    if isinstance(exc, (FitError, BracketError, ConvergenceError)):
        return EXIT_FIT
    if isinstance(exc, (SchemaError, VersionMismatchError, ValueError, OSError)):
        return EXIT_USAGE
    raise exc


async def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        request = build_request(args)
        result = await asyncio.to_thread(fulfill_request, request)
    except Exception as exc:
        code = exit_code_for(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code

    _print_result(result)
    return EXIT_OK


def cli_main() -> None:
    sys.exit(asyncio.run(main()))


__all__ = ["main", "cli_main", "parse_args", "build_request", "exit_code_for"]
