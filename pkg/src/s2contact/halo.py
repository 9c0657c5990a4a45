"""Two-nucleon halo nuclei modelled as contact-interacting nucleons on a sphere.

The core is inert; the halo nucleons move on a sphere of radius R around it.
Each spin/isospin channel has one reduced scattering length.  Measured levels
fix (a, R) per channel, Gaussian input uncertainties are propagated by
Monte-Carlo resampling, and the fitted parameters predict the rest of the
spectrum.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize

from .errors import (
    BracketError,
    ConvergenceError,
    FitError,
    NoBracketError,
    PoleCollisionError,
    PoleError,
    SchemaError,
    SelectionRuleError,
    TooManyFailuresError,
)
from .quantization import (
    CLOSED_FORM_BANDS,
    HBAR_C,
    RootRequest,
    atilde_to_log_a_over_R,
    band_function,
    log_a_over_R_to_atilde,
    poles,
    solve_band,
    solve_band_many,
    z_closed_array,
)

logger = logging.getLogger(__name__)

RADIUS_RANGE = (0.5, 50.0)  # fm
RADIUS_POINTS = 200
MAX_FAILURE_FRACTION = 0.01

EnergyBand = Tuple[float, int]


@dataclass(frozen=True)
class Channel:
    """Spin/isospin channel; ``atilde`` is None when the channel is fitted."""

    spin: int
    isospin: int
    atilde: Optional[float] = None
    atilde_sigma: float = 0.0

    @property
    def key(self) -> str:
        return f"S{self.spin}T{self.isospin}"

    @property
    def fitted(self) -> bool:
        return self.atilde is None


@dataclass(frozen=True)
class MeasuredLevel:
    energy: float
    sigma: float
    channel: str
    L: int
    label: str = ""


@dataclass(frozen=True)
class HaloSystem:
    """Core quantum numbers, nucleon mass, channels and measured levels."""

    name: str
    core_two_J: int
    core_parity: int
    constituent_mass: float
    channels: Tuple[Channel, ...]
    measured_levels: Tuple[MeasuredLevel, ...] = ()
    version: str = ""
    citations: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.core_two_J < 0:
            raise ValueError("core_two_J must be nonnegative")
        if self.core_parity not in (1, -1):
            raise ValueError("core_parity must be +1 or -1")
        if self.constituent_mass <= 0:
            raise ValueError("constituent_mass must be positive")
        for channel in self.channels:
            check_selection_rule(channel)
        keys = [c.key for c in self.channels]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate channels in {self.name}")
        for level in self.measured_levels:
            if level.sigma < 0:
                raise ValueError(f"negative sigma on level {level.label or level.energy}")
            if level.channel not in keys:
                raise ValueError(f"level refers to unknown channel {level.channel!r}")

    def channel(self, key: str) -> Channel:
        for candidate in self.channels:
            if candidate.key == key:
                return candidate
        raise KeyError(key)

    def levels_for(self, key: str) -> Tuple[MeasuredLevel, ...]:
        return tuple(level for level in self.measured_levels if level.channel == key)


@dataclass(frozen=True)
class BandQuantumNumbers:
    """Quantum numbers of one rotational band after core coupling."""

    L: int
    parity: int
    j_nn: Tuple[int, ...]
    two_j_values: Tuple[int, ...]


@dataclass(frozen=True)
class FitPoint:
    a: float
    radius: float
    atilde: float

    @property
    def log_a_over_R(self) -> float:
        return math.log(self.a / self.radius)


@dataclass(frozen=True)
class FitTask:
    """Inputs of one channel fit: two levels, or one level with a fixed atilde."""

    mass: float
    levels: Tuple[MeasuredLevel, ...]
    atilde: Optional[float] = None
    atilde_sigma: float = 0.0
    stream: int = 0

    def __post_init__(self) -> None:
        if self.atilde is None and len(self.levels) != 2:
            raise ValueError("a fitted channel needs exactly two measured levels")
        if self.atilde is not None and not self.levels:
            raise ValueError("a fixed-atilde fit needs at least one measured level")
        if self.atilde_sigma < 0 or any(level.sigma < 0 for level in self.levels):
            raise ValueError("input sigmas must be nonnegative")


@dataclass(frozen=True)
class FitDraws:
    """Per-sample radius and log(a/R); NaN marks a failed sample."""

    radius: np.ndarray
    log_a_over_R: np.ndarray


@dataclass(frozen=True)
class FitResult:
    """Central fit plus Monte-Carlo means and standard deviations."""

    a: float
    radius: float
    atilde: float
    a_sigma: float = 0.0
    radius_sigma: float = 0.0
    atilde_sigma: float = 0.0
    a_mean: float = math.nan
    radius_mean: float = math.nan
    atilde_mean: float = math.nan
    samples: int = 0
    seed: int = 0
    failures: int = 0
    draws: Optional[FitDraws] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.radius > 0):
            raise ValueError("a and R must be positive")

    @property
    def log_a_over_R(self) -> float:
        return math.log(self.a / self.radius)

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.samples if self.samples else 0.0


@dataclass(frozen=True)
class EnergyLevel:
    channel: str
    L: int
    branch: int
    x: float
    energy: float
    sigma: float
    parity: int
    two_j_values: Tuple[int, ...]
    label: str
    energy_mean: float = math.nan


@dataclass(frozen=True)
class LevelFailure:
    channel: str
    L: int
    branch: int
    message: str


@dataclass(frozen=True)
class SpectrumPrediction:
    levels: Tuple[EnergyLevel, ...]
    failures: Tuple[LevelFailure, ...] = ()


def x_from_energy(energy: ArrayLike, mass: float, radius: ArrayLike) -> Any:
    """x = 2 m E R^2 / (hbar c)^2."""

    if mass <= 0 or np.any(np.asarray(radius) <= 0):
        raise ValueError("mass and radius must be positive")
    return 2.0 * mass * energy * radius**2 / HBAR_C**2


def energy_from_x(x: ArrayLike, mass: float, radius: ArrayLike) -> Any:
    if mass <= 0 or np.any(np.asarray(radius) <= 0):
        raise ValueError("mass and radius must be positive")
    return x * HBAR_C**2 / (2.0 * mass * radius**2)


def check_selection_rule(channel: Channel) -> None:
    # l1 + l2 + L is even for every contact-coupled pair, so antisymmetry leaves S + T odd
    if (channel.spin + channel.isospin) % 2 == 0:
        raise SelectionRuleError(
            f"channel {channel.key} has S+T even and does not feel the contact interaction"
        )


def format_two_j(two_j: int) -> str:
    return str(two_j // 2) if two_j % 2 == 0 else f"{two_j}/2"


def multiplet_label(
    two_j_values: Sequence[int], parity: int, isospin: Optional[int] = None
) -> str:
    """Comma-separated J^pi labels such as ``1/2-, 3/2-`` or ``1+(0)``."""

    sign = "+" if parity > 0 else "-"
    suffix = f"({isospin})" if isospin is not None else ""
    return ", ".join(f"{format_two_j(two_j)}{sign}{suffix}" for two_j in two_j_values)


def allowed_bands(system: HaloSystem, channel: Channel, L_max: int) -> List[BandQuantumNumbers]:
    """Bands L <= L_max of ``channel`` with parity, J_NN values and core-coupled 2J."""

    check_selection_rule(channel)
    if channel not in system.channels:
        raise ValueError(f"channel {channel.key} does not belong to {system.name}")
    bands: List[BandQuantumNumbers] = []
    for L in range(L_max + 1):
        j_nn = tuple(range(abs(L - channel.spin), L + channel.spin + 1))
        two_j = sorted(
            {
                value
                for j in j_nn
                for value in range(abs(2 * j - system.core_two_J), 2 * j + system.core_two_J + 1, 2)
            }
        )
        bands.append(
            BandQuantumNumbers(
                L=L,
                parity=(-1) ** L * system.core_parity,
                j_nn=j_nn,
                two_j_values=tuple(two_j),
            )
        )
    return bands


def _band_values(L: int, xs: np.ndarray) -> np.ndarray:
    if L in CLOSED_FORM_BANDS:
        return z_closed_array(L, xs)
    function = band_function(L)
    values = np.empty(xs.shape)
    for i, x in enumerate(xs):
        try:
            values[i] = function(float(x))
        except (PoleError, ConvergenceError):
            values[i] = np.nan
    return values


def _branch_zero_limit(mass: float, energy: float, L: int) -> float:
    """Largest radius keeping x(E, R) below the first pole of band L."""

    first_pole = poles(L, 1)[0]
    scale = x_from_energy(energy, mass, 1.0)
    if scale < 0 or (scale == 0 and first_pole > 0):
        return math.inf
    if scale == 0 or first_pole <= 0:
        return 0.0
    return math.sqrt(first_pole / scale)


def fit_two_levels(
    mass: float,
    level1: EnergyBand,
    level2: EnergyBand,
    radius_range: Tuple[float, float] = RADIUS_RANGE,
    points: int = RADIUS_POINTS,
) -> FitPoint:
    """(a, R, atilde) placing both levels on branch 0 of their bands."""

    (e1, l1), (e2, l2) = level1, level2
    if l1 == l2 and e1 == e2:
        raise ValueError("two identical levels do not fix a radius")
    low, high = radius_range
    limit = min(_branch_zero_limit(mass, e1, l1), _branch_zero_limit(mass, e2, l2))
    if limit <= low:
        raise PoleCollisionError(
            f"a level leaves branch 0 below the smallest scanned radius {low} fm", radius=low
        )
    radii = np.geomspace(low, high, points)
    if limit < high:
        radii = np.append(radii[radii < limit * (1.0 - 1e-6)], limit * (1.0 - 1e-9))
    if radii.size < 2:
        raise PoleCollisionError("the pole-free radius window is empty", radius=float(limit))

    def mismatch(radius: float) -> float:
        return band_function(l1)(x_from_energy(e1, mass, radius)) - band_function(l2)(
            x_from_energy(e2, mass, radius)
        )

    with np.errstate(all="ignore"):
        scan = _band_values(l1, x_from_energy(e1, mass, radii)) - _band_values(
            l2, x_from_energy(e2, mass, radii)
        )
    finite = np.isfinite(scan)
    crossings = [
        i
        for i in range(radii.size - 1)
        if finite[i] and finite[i + 1] and scan[i] * scan[i + 1] <= 0
    ]
    if not crossings:
        raise NoBracketError(
            f"no radius in [{low}, {min(high, limit)}] fm reproduces levels {level1} and {level2}"
        )
    if len(crossings) > 1:
        logger.warning(
            "%d radius solutions for levels %s and %s; keeping the smallest",
            len(crossings),
            level1,
            level2,
        )
    i = crossings[0]
    if scan[i] == 0:
        radius = float(radii[i])
    else:
        radius = float(
            optimize.brentq(
                mismatch, radii[i], radii[i + 1], xtol=1e-14, rtol=4.0 * np.finfo(float).eps
            )
        )
    log_value = band_function(l1)(x_from_energy(e1, mass, radius))
    return FitPoint(
        a=radius * math.exp(log_value), radius=radius, atilde=log_a_over_R_to_atilde(log_value)
    )


def fit_one_level(mass: float, level: EnergyBand, atilde: float) -> FitPoint:
    """(a, R) for a known reduced scattering length and one branch-0 level."""

    energy, L = level
    log_value = atilde_to_log_a_over_R(atilde)
    try:
        x = solve_band(RootRequest(L, log_value, 0))
    except BracketError as exc:
        raise NoBracketError(f"no branch-0 root of band {L} at atilde={atilde!r}") from exc
    scale = x_from_energy(energy, mass, 1.0)
    if scale == 0 or x / scale <= 0:
        raise NoBracketError(
            f"the branch-0 root x={x!r} has the wrong sign for E={energy!r} MeV"
        )
    radius = math.sqrt(x / scale)
    return FitPoint(a=radius * math.exp(log_value), radius=radius, atilde=atilde)


def sample_generator(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent generator for one Monte-Carlo sample of one channel."""

    return np.random.default_rng(np.random.SeedSequence([seed, stream, index]))


def _draw_inputs(task: FitTask, seed: int, index: int) -> Tuple[List[float], Optional[float]]:
    rng = sample_generator(seed, task.stream, index)
    energies = [float(rng.normal(level.energy, level.sigma)) for level in task.levels]
    atilde = None
    if task.atilde is not None:
        atilde = float(rng.normal(task.atilde, task.atilde_sigma))
    return energies, atilde


def _fit_central(task: FitTask) -> FitPoint:
    if task.atilde is None:
        first, second = task.levels
        return fit_two_levels(task.mass, (first.energy, first.L), (second.energy, second.L))
    level = task.levels[0]
    return fit_one_level(task.mass, (level.energy, level.L), task.atilde)


def _two_level_chunk(task: FitTask, seed: int, indices: range) -> Tuple[np.ndarray, np.ndarray]:
    radius = np.full(len(indices), np.nan)
    log_value = np.full(len(indices), np.nan)
    first, second = task.levels
    for slot, index in enumerate(indices):
        energies, _ = _draw_inputs(task, seed, index)
        try:
            point = fit_two_levels(
                task.mass, (energies[0], first.L), (energies[1], second.L)
            )
        except (FitError, PoleError, ValueError) as exc:
            logger.debug("sample %d failed: %s", index, exc)
            continue
        radius[slot] = point.radius
        log_value[slot] = point.log_a_over_R
    return radius, log_value


def _one_level_draws(task: FitTask, samples: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    level = task.levels[0]
    energies = np.empty(samples)
    logs = np.full(samples, np.nan)
    for index in range(samples):
        drawn, atilde = _draw_inputs(task, seed, index)
        energies[index] = drawn[0]
        if atilde:
            logs[index] = atilde_to_log_a_over_R(atilde)
    roots = np.full(samples, np.nan)
    usable = np.isfinite(logs)
    roots[usable] = solve_band_many(level.L, logs[usable], 0)
    with np.errstate(all="ignore"):
        squared = roots / x_from_energy(energies, task.mass, 1.0)
    radius = np.where(squared > 0, np.sqrt(np.where(squared > 0, squared, 1.0)), np.nan)
    return radius, np.where(np.isfinite(radius), logs, np.nan)


def _tally(values: np.ndarray) -> Tuple[float, float]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return math.nan, math.nan
    if finite.size == 1:
        return float(finite[0]), 0.0
    return float(np.mean(finite)), float(np.std(finite, ddof=1))


def _summarize(
    central: FitPoint, radius: np.ndarray, log_value: np.ndarray, samples: int, seed: int
) -> FitResult:
    failed = ~(np.isfinite(radius) & np.isfinite(log_value) & (log_value != 0))
    failures = int(np.count_nonzero(failed))
    if failures > MAX_FAILURE_FRACTION * samples:
        raise TooManyFailuresError(
            f"{failures} of {samples} Monte-Carlo samples failed", failures=failures, samples=samples
        )
    if failures:
        logger.warning("dropped %d of %d Monte-Carlo samples", failures, samples)
    radius = np.where(failed, np.nan, radius)
    log_value = np.where(failed, np.nan, log_value)
    with np.errstate(all="ignore"):
        a_values = radius * np.exp(log_value)
        atilde_values = -np.pi / (2.0 * log_value)
    a_mean, a_sigma = _tally(a_values)
    radius_mean, radius_sigma = _tally(radius)
    atilde_mean, atilde_sigma = _tally(atilde_values)
    draws = FitDraws(radius=radius, log_a_over_R=log_value)
    return FitResult(
        a=central.a,
        radius=central.radius,
        atilde=central.atilde,
        a_sigma=a_sigma,
        radius_sigma=radius_sigma,
        atilde_sigma=atilde_sigma,
        a_mean=a_mean,
        radius_mean=radius_mean,
        atilde_mean=atilde_mean,
        samples=samples,
        seed=seed,
        failures=failures,
        draws=draws,
    )


def _chunks(samples: int, workers: int) -> List[range]:
    size = math.ceil(samples / workers)
    return [range(start, min(start + size, samples)) for start in range(0, samples, size)]


def mc_propagate(task: FitTask, samples: int, seed: int, workers: int = 1) -> FitResult:
    """Refit every Gaussian draw of the inputs and tally the fitted parameters."""

    if samples < 2:
        raise ValueError("at least two Monte-Carlo samples are required")
    central = _fit_central(task)
    if task.atilde is not None:
        radius, log_value = _one_level_draws(task, samples, seed)
    else:
        chunks = _chunks(samples, max(1, workers))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda chunk: _two_level_chunk(task, seed, chunk), chunks))
        else:
            parts = [_two_level_chunk(task, seed, chunk) for chunk in chunks]
        radius = np.concatenate([part[0] for part in parts])
        log_value = np.concatenate([part[1] for part in parts])
    logger.debug("Monte-Carlo fit stream=%d samples=%d seed=%d done", task.stream, samples, seed)
    return _summarize(central, radius, log_value, samples, seed)


def _borrow_radius(
    channel: Channel, stream: int, reference: FitResult, samples: int, seed: int
) -> FitResult:
    """Fit for a level-less channel: radius from ``reference``, atilde sampled on its own."""

    assert channel.atilde is not None
    log_central = atilde_to_log_a_over_R(channel.atilde)
    central = FitPoint(
        a=reference.radius * math.exp(log_central), radius=reference.radius, atilde=channel.atilde
    )
    logs = np.full(samples, np.nan)
    for index in range(samples):
        atilde = float(sample_generator(seed, stream, index).normal(channel.atilde, channel.atilde_sigma))
        if atilde:
            logs[index] = atilde_to_log_a_over_R(atilde)
    radius = reference.draws.radius if reference.draws is not None else np.full(samples, reference.radius)
    return _summarize(central, np.array(radius, dtype=float), logs, samples, seed)


def fit_system(
    system: HaloSystem, samples: int, seed: int, workers: int = 1
) -> Dict[str, FitResult]:
    """Fit every channel of ``system``; level-less channels borrow the fitted radius."""

    results: Dict[str, FitResult] = {}
    pending: List[Tuple[int, Channel]] = []
    for stream, channel in enumerate(system.channels):
        levels = tuple(sorted(system.levels_for(channel.key), key=lambda level: level.energy))
        if not levels:
            if channel.fitted:
                raise FitError(f"channel {channel.key} has neither levels nor a fixed atilde")
            pending.append((stream, channel))
            continue
        if channel.fitted and len(levels) != 2:
            raise FitError(f"channel {channel.key} needs exactly two levels, found {len(levels)}")
        task = FitTask(
            mass=system.constituent_mass,
            levels=levels if channel.fitted else levels[:1],
            atilde=channel.atilde,
            atilde_sigma=channel.atilde_sigma,
            stream=stream,
        )
        logger.info("fitting %s channel %s", system.name, channel.key)
        results[channel.key] = mc_propagate(task, samples, seed, workers)

    if pending:
        if not results:
            raise FitError(f"{system.name} has no channel that fixes the radius")
        reference = next(iter(results.values()))
        for stream, channel in pending:
            results[channel.key] = _borrow_radius(channel, stream, reference, samples, seed)
    return {channel.key: results[channel.key] for channel in system.channels}


def predict_spectrum(
    system: HaloSystem,
    fits: Mapping[str, FitResult],
    L_max: int,
    levels_per_band: int,
) -> SpectrumPrediction:
    """All branch roots up to ``L_max`` in MeV, sorted by energy."""

    levels: List[EnergyLevel] = []
    failures: List[LevelFailure] = []
    tag_isospin = len(system.channels) > 1
    for channel in system.channels:
        if channel.key not in fits:
            raise ValueError(f"channel {channel.key} has no fit")
        fit = fits[channel.key]
        for band in allowed_bands(system, channel, L_max):
            label = multiplet_label(
                band.two_j_values, band.parity, channel.isospin if tag_isospin else None
            )
            for branch in range(levels_per_band):
                try:
                    x = solve_band(RootRequest(band.L, fit.log_a_over_R, branch))
                except (BracketError, PoleError, ConvergenceError) as exc:
                    failures.append(LevelFailure(channel.key, band.L, branch, str(exc)))
                    continue
                energy = float(energy_from_x(x, system.constituent_mass, fit.radius))
                energy_mean, sigma = energy, 0.0
                if fit.draws is not None:
                    usable = np.isfinite(fit.draws.log_a_over_R)
                    roots = np.full(fit.draws.radius.shape, np.nan)
                    roots[usable] = solve_band_many(band.L, fit.draws.log_a_over_R[usable], branch)
                    with np.errstate(all="ignore"):
                        energies = roots * HBAR_C**2 / (
                            2.0 * system.constituent_mass * fit.draws.radius**2
                        )
                    energy_mean, sigma = _tally(energies)
                levels.append(
                    EnergyLevel(
                        channel=channel.key,
                        L=band.L,
                        branch=branch,
                        x=x,
                        energy=energy,
                        sigma=sigma,
                        parity=band.parity,
                        two_j_values=band.two_j_values,
                        label=label,
                        energy_mean=energy_mean,
                    )
                )
    levels.sort(key=lambda level: (level.energy, level.channel, level.L))
    return SpectrumPrediction(levels=tuple(levels), failures=tuple(failures))


_FIT_FIELDS = (
    "a",
    "radius",
    "atilde",
    "a_sigma",
    "radius_sigma",
    "atilde_sigma",
    "a_mean",
    "radius_mean",
    "atilde_mean",
)


def fit_result_to_dict(result: FitResult) -> Dict[str, Any]:
    payload: Dict[str, Any] = {name: getattr(result, name) for name in _FIT_FIELDS}
    payload.update(
        samples=result.samples,
        seed=result.seed,
        failures=result.failures,
        failure_fraction=result.failure_fraction,
    )
    return payload


def fit_result_from_dict(data: Mapping[str, Any]) -> FitResult:
    try:
        values = {name: float(data[name]) for name in _FIT_FIELDS}
        return FitResult(
            **values,
            samples=int(data["samples"]),
            seed=int(data["seed"]),
            failures=int(data["failures"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed fit result: {exc}") from exc


__all__ = [
    "RADIUS_RANGE",
    "RADIUS_POINTS",
    "MAX_FAILURE_FRACTION",
    "Channel",
    "MeasuredLevel",
    "HaloSystem",
    "BandQuantumNumbers",
    "FitPoint",
    "FitTask",
    "FitDraws",
    "FitResult",
    "EnergyLevel",
    "LevelFailure",
    "SpectrumPrediction",
    "x_from_energy",
    "energy_from_x",
    "check_selection_rule",
    "format_two_j",
    "multiplet_label",
    "allowed_bands",
    "fit_two_levels",
    "fit_one_level",
    "sample_generator",
    "mc_propagate",
    "fit_system",
    "predict_spectrum",
    "fit_result_to_dict",
    "fit_result_from_dict",
]
