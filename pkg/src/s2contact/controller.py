"""Orchestrates user requests by combining the numerical modules with file output."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Type, Union

import numpy as np

from .analogs import TorusSumSpec, cm_shift_curve, ho_condition, ho_poles, ho_zeros, torus_poles, torus_s2, torus_zeros
from .errors import ConvergenceError, PoleError, SchemaError, VersionMismatchError
from .halo import (
    FitResult,
    HaloSystem,
    SpectrumPrediction,
    fit_result_from_dict,
    fit_result_to_dict,
    fit_system,
    predict_spectrum,
)
from .quantization import (
    CLOSED_FORM_BANDS,
    BandFunction,
    band_function,
    band_zeros,
    poles,
    z_closed,
    z_closed_array,
    z_general,
    z_sum,
)
from .reports import (
    RunManifest,
    artifact_version,
    canonical_json,
    format_float,
    manifest_path,
    read_json,
    read_manifest,
    write_manifest,
    write_text_atomic,
)
from .systems import load_halo_system

logger = logging.getLogger(__name__)

Geometry = Literal["s2", "ho", "torus"]
Method = Literal["auto", "closed", "general", "sum"]


@dataclass(frozen=True)
class EvalRequest:
    """Evaluate one quantization condition at one x."""

    x: float
    band: int = 0
    geometry: Geometry = "s2"
    method: Method = "auto"
    cutoff: float = 200.0
    extrapolate: bool = True
    x_cm: float = 0.0
    manifest: Optional[Path] = None


@dataclass(frozen=True)
class CurveRequest:
    """Sample a condition on a uniform x grid into a CSV file."""

    output: Path
    band: int = 0
    geometry: Geometry = "s2"
    x_min: float = -9.0
    x_max: float = 40.0
    points: int = 2000
    cutoff: float = 200.0
    extrapolate: bool = True
    x_cm: float = 0.0


@dataclass(frozen=True)
class ZerosRequest:
    band: int = 0
    geometry: Geometry = "s2"
    count: int = 4
    cutoff: float = 200.0
    manifest: Optional[Path] = None


@dataclass(frozen=True)
class FitRequest:
    """Fit every channel of a halo system with Monte-Carlo error propagation."""

    system: str
    output: Path
    samples: int = 10000
    seed: int = 1
    workers: int = 1
    data_file: Optional[Path] = None
    data_dir: Optional[Path] = None


@dataclass(frozen=True)
class PredictRequest:
    """Predict a halo spectrum from a fit report of the same system and data version."""

    system: str
    fit_report: Path
    output: Path
    L_max: int = 2
    levels_per_band: int = 4
    workers: int = 1
    data_file: Optional[Path] = None
    data_dir: Optional[Path] = None


@dataclass(frozen=True)
class ReplayRequest:
    manifest: Path


@dataclass(frozen=True)
class EvalResult:
    value: float
    manifest_file: Optional[Path] = None


@dataclass(frozen=True)
class CurveResult:
    path: Path
    manifest_file: Path
    rows: int
    segments: int
    poles: Tuple[float, ...]


@dataclass(frozen=True)
class ZerosResult:
    zeros: Tuple[float, ...]
    poles: Tuple[float, ...]
    manifest_file: Optional[Path] = None


@dataclass(frozen=True)
class FitOutcome:
    path: Path
    manifest_file: Path
    system: HaloSystem
    fits: Dict[str, FitResult]


@dataclass(frozen=True)
class PredictOutcome:
    path: Path
    manifest_file: Path
    system: HaloSystem
    prediction: SpectrumPrediction


Request = Union[EvalRequest, CurveRequest, ZerosRequest, FitRequest, PredictRequest, ReplayRequest]
Result = Union[EvalResult, CurveResult, ZerosResult, FitOutcome, PredictOutcome]

_COMMANDS: Dict[str, Type[Any]] = {
    "eval": EvalRequest,
    "curve": CurveRequest,
    "zeros": ZerosRequest,
    "fit": FitRequest,
    "predict": PredictRequest,
}
_PATH_FIELDS = {"output", "fit_report", "data_file", "data_dir"}
_RECORD_TOLERANCE = 1e-9


def _command_name(request: Any) -> str:
    for name, kind in _COMMANDS.items():
        if isinstance(request, kind):
            return name
    raise TypeError(f"unsupported request {type(request).__name__}")


def request_inputs(request: Any) -> Dict[str, Any]:
    """Canonical parameter map of a request (its manifest destination excluded)."""

    inputs: Dict[str, Any] = {}
    for item in fields(request):
        if item.name == "manifest":
            continue
        value = getattr(request, item.name)
        inputs[item.name] = str(value) if isinstance(value, Path) else value
    return inputs


def request_from_manifest(manifest: RunManifest) -> Any:
    kind = _COMMANDS.get(manifest.command)
    if kind is None:
        raise SchemaError(f"unknown command {manifest.command!r} in manifest")
    known = {item.name for item in fields(kind)}
    unknown = set(manifest.inputs) - known
    if unknown:
        raise SchemaError(f"manifest inputs not understood by {manifest.command}: {sorted(unknown)}")
    values = {
        name: Path(value) if name in _PATH_FIELDS and value is not None else value
        for name, value in manifest.inputs.items()
    }
    try:
        return kind(**values)
    except TypeError as exc:
        raise SchemaError(f"manifest inputs do not form a {manifest.command} request: {exc}") from exc


def _manifest(
    request: Any,
    outputs: List[Path],
    seed: Optional[int] = None,
    data_version: Optional[str] = None,
) -> RunManifest:
    versions: Dict[str, Optional[str]] = {"s2contact": artifact_version()}
    if data_version is not None:
        versions["data"] = data_version
    return RunManifest(
        command=_command_name(request),
        inputs=request_inputs(request),
        seed=seed,
        versions=versions,
        outputs=[str(path) for path in outputs],
    )


def _check_shift(geometry: Geometry, x_cm: float) -> None:
    if geometry == "s2" and x_cm != 0:
        raise ValueError("centre-of-mass shifts apply to the oscillator and torus conditions only")


def condition_for(
    geometry: Geometry,
    band: int = 0,
    method: Method = "auto",
    cutoff: float = 200.0,
    extrapolate: bool = True,
    x_cm: float = 0.0,
) -> BandFunction:
    """The scalar condition selected by the command-line options."""

    _check_shift(geometry, x_cm)
    if geometry == "ho":
        return cm_shift_curve(ho_condition, x_cm)
    if geometry == "torus":
        spec = TorusSumSpec(cutoff=cutoff, extrapolate=extrapolate)
        return cm_shift_curve(lambda x: torus_s2(x, spec), x_cm)
    if geometry != "s2":
        raise ValueError(f"unknown geometry {geometry!r}")
    if method == "closed":
        return lambda x: z_closed(band, x)
    if method == "general":
        return lambda x: z_general(band, x)
    if method == "sum":
        return lambda x: z_sum(band, x, int(cutoff))
    return band_function(band)


def _pole_sequence(geometry: Geometry, band: int, count: int) -> Tuple[float, ...]:
    if geometry == "ho":
        return ho_poles(count)
    if geometry == "torus":
        return torus_poles(count)
    return poles(band, count)


def poles_through(geometry: Geometry, band: int, x_max: float, x_cm: float = 0.0) -> Tuple[float, ...]:
    """Poles (shifted by ``x_cm``) up to and including ``x_max``."""

    count = 8
    while True:
        shifted = [p + x_cm for p in _pole_sequence(geometry, band, count)]
        if shifted[-1] > x_max:
            return tuple(p for p in shifted if p <= x_max)
        count *= 2


def _curve_values(request: CurveRequest, xs: np.ndarray) -> np.ndarray:
    if request.geometry == "s2" and request.band in CLOSED_FORM_BANDS:
        return z_closed_array(request.band, xs)
    condition = condition_for(
        request.geometry, request.band, "auto", request.cutoff, request.extrapolate, request.x_cm
    )
    values = np.empty(xs.shape)
    for i, x in enumerate(xs):
        try:
            values[i] = condition(float(x))
        except (PoleError, ConvergenceError):
            values[i] = np.nan
    return values


def _run_eval(request: EvalRequest) -> EvalResult:
    condition = condition_for(
        request.geometry,
        request.band,
        request.method,
        request.cutoff,
        request.extrapolate,
        request.x_cm,
    )
    value = float(condition(request.x))
    manifest_file = None
    if request.manifest is not None:
        manifest_file = write_manifest(_manifest(request, []), request.manifest)
    return EvalResult(value=value, manifest_file=manifest_file)


def _run_curve(request: CurveRequest) -> CurveResult:
    if request.points < 2 or not request.x_max > request.x_min:
        raise ValueError("a curve needs at least two points on a nonempty range")
    xs = np.linspace(request.x_min, request.x_max, request.points)
    pole_values = tuple(
        p
        for p in poles_through(request.geometry, request.band, request.x_max, request.x_cm)
        if p > request.x_min
    )
    segments = np.searchsorted(np.asarray(pole_values), xs, side="right")
    with np.errstate(all="ignore"):
        values = _curve_values(request, xs)
    lines = [
        f"# s2contact {artifact_version()} curve geometry={request.geometry} "
        f"band={request.band} x_cm={format_float(request.x_cm)}",
        "x,value,segment",
    ]
    for x, value, segment in zip(xs, values, segments):
        shown = format_float(float(value)) if math.isfinite(value) else ""
        lines.append(f"{format_float(float(x))},{shown},{int(segment)}")
    path = write_text_atomic(request.output, "\n".join(lines) + "\n")
    manifest_file = manifest_path(path)
    write_manifest(_manifest(request, [path, manifest_file]), manifest_file)
    logger.info("wrote %d curve points in %d segments to %s", len(xs), len(pole_values) + 1, path)
    return CurveResult(
        path=path,
        manifest_file=manifest_file,
        rows=len(xs),
        segments=len(set(segments.tolist())),
        poles=pole_values,
    )


def _run_zeros(request: ZerosRequest) -> ZerosResult:
    if request.geometry == "ho":
        zeros = ho_zeros(request.count)
    elif request.geometry == "torus":
        zeros = torus_zeros(request.count, TorusSumSpec(cutoff=request.cutoff))
    else:
        zeros = band_zeros(request.band, request.count)
    manifest_file = None
    if request.manifest is not None:
        manifest_file = write_manifest(_manifest(request, []), request.manifest)
    return ZerosResult(
        zeros=zeros,
        poles=_pole_sequence(request.geometry, request.band, request.count),
        manifest_file=manifest_file,
    )


def _load_system(request: Union[FitRequest, PredictRequest]) -> HaloSystem:
    return load_halo_system(request.system, path=request.data_file, data_dir=request.data_dir)


def fit_payload(request: FitRequest, system: HaloSystem, fits: Mapping[str, FitResult]) -> Dict[str, Any]:
    return {
        "command": "fit",
        "system": request.system,
        "name": system.name,
        "data_version": system.version,
        "fits": {key: fit_result_to_dict(result) for key, result in fits.items()},
    }


def _run_fit(request: FitRequest) -> FitOutcome:
    system = _load_system(request)
    fits = fit_system(system, request.samples, request.seed, request.workers)
    output = Path(request.output)
    manifest_file = manifest_path(output)
    manifest = _manifest(request, [output, manifest_file], request.seed, system.version)
    payload = fit_payload(request, system, fits)
    payload["manifest"] = manifest.to_dict()
    path = write_text_atomic(output, canonical_json(payload))
    write_manifest(manifest, manifest_file)
    return FitOutcome(path=path, manifest_file=manifest_file, system=system, fits=fits)


def _recorded_fits(report: Mapping[str, Any], request: PredictRequest, system: HaloSystem) -> Dict[str, FitResult]:
    if report.get("command") != "fit" or "fits" not in report:
        raise SchemaError(f"{request.fit_report} is not a fit report")
    if report.get("system") != request.system:
        raise VersionMismatchError(
            f"fit report is for {report.get('system')!r}, not {request.system!r}"
        )
    if report.get("data_version") != system.version:
        raise VersionMismatchError(
            f"fit report used data version {report.get('data_version')!r}, "
            f"the data file is at {system.version!r}"
        )
    recorded = {key: fit_result_from_dict(value) for key, value in report["fits"].items()}
    missing = {channel.key for channel in system.channels} - set(recorded)
    if missing:
        raise SchemaError(f"fit report lacks channels {sorted(missing)}")
    return recorded


def _matches(recorded: FitResult, rerun: FitResult) -> bool:
    return all(
        math.isclose(getattr(recorded, name), getattr(rerun, name), rel_tol=_RECORD_TOLERANCE)
        for name in ("a", "radius", "atilde")
    )


def level_payload(prediction: SpectrumPrediction) -> Dict[str, Any]:
    return {
        "levels": [
            {
                "channel": level.channel,
                "L": level.L,
                "branch": level.branch,
                "x": level.x,
                "energy": level.energy,
                "energy_mean": level.energy_mean,
                "sigma": level.sigma,
                "parity": "+" if level.parity > 0 else "-",
                "two_J": list(level.two_j_values),
                "J": level.label,
            }
            for level in prediction.levels
        ],
        "failures": [
            {"channel": f.channel, "L": f.L, "branch": f.branch, "message": f.message}
            for f in prediction.failures
        ],
    }


def _run_predict(request: PredictRequest) -> PredictOutcome:
    system = _load_system(request)
    recorded = _recorded_fits(read_json(request.fit_report), request, system)
    first = next(iter(recorded.values()))
    # Draws are not stored; the recorded seed regenerates them exactly.
    fits = fit_system(system, first.samples, first.seed, request.workers)
    for key, result in fits.items():
        if not _matches(recorded[key], result):
            raise SchemaError(f"fit report channel {key} does not match a rerun of its seed")
    prediction = predict_spectrum(system, fits, request.L_max, request.levels_per_band)
    for failure in prediction.failures:
        logger.warning(
            "no level for %s L=%d branch %d: %s", failure.channel, failure.L, failure.branch, failure.message
        )
    output = Path(request.output)
    manifest_file = manifest_path(output)
    manifest = _manifest(request, [output, manifest_file], first.seed, system.version)
    payload: Dict[str, Any] = {
        "command": "predict",
        "system": request.system,
        "name": system.name,
        "data_version": system.version,
        **level_payload(prediction),
        "manifest": manifest.to_dict(),
    }
    path = write_text_atomic(output, canonical_json(payload))
    write_manifest(manifest, manifest_file)
    return PredictOutcome(path=path, manifest_file=manifest_file, system=system, prediction=prediction)


def fulfill_request(request: Request) -> Result:
    """Execute the given request and return its result record."""

    if isinstance(request, ReplayRequest):
        manifest = read_manifest(request.manifest)
        logger.info("replaying %s from %s", manifest.command, request.manifest)
        replayed = request_from_manifest(manifest)
        if isinstance(replayed, (EvalRequest, ZerosRequest)):
            replayed = type(replayed)(**{**request_inputs(replayed), "manifest": request.manifest})
        return fulfill_request(replayed)
    if isinstance(request, EvalRequest):
        return _run_eval(request)
    if isinstance(request, CurveRequest):
        return _run_curve(request)
    if isinstance(request, ZerosRequest):
        return _run_zeros(request)
    if isinstance(request, FitRequest):
        return _run_fit(request)
    if isinstance(request, PredictRequest):
        return _run_predict(request)
    raise TypeError(f"unsupported request {type(request).__name__}")


__all__ = [
    "EvalRequest",
    "CurveRequest",
    "ZerosRequest",
    "FitRequest",
    "PredictRequest",
    "ReplayRequest",
    "EvalResult",
    "CurveResult",
    "ZerosResult",
    "FitOutcome",
    "PredictOutcome",
    "condition_for",
    "poles_through",
    "request_inputs",
    "request_from_manifest",
    "fit_payload",
    "level_payload",
    "fulfill_request",
]
