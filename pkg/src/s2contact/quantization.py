"""Quantization conditions for two contact-interacting particles on a sphere.

Energies are measured by the dimensionless ``x = 2 m E R**2 / (hbar c)**2``.  A
root of ``Z_L(x) = log(a/R)`` is an allowed energy in the rotational band L.
Closed forms exist for L = 0, 1, 2; every band can be evaluated from the
cutoff-truncated sum extrapolated to infinite cutoff.  Between two consecutive
non-interacting energies (the poles) each band function increases strictly
from -inf to +inf, so every branch holds exactly one root.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize, special

from .angular import FOUR_PI, build_me_table, threej_zero_m_squared
from .errors import BracketError, ConvergenceError, DomainError, PoleError
from .specfun import digamma_pair_sum, pole_mask, trigamma_pair_difference

logger = logging.getLogger(__name__)

HBAR_C = 197.3269804  # MeV fm
CLOSED_FORM_BANDS = (0, 1, 2)
DEFAULT_LADDER: Tuple[int, ...] = (256, 512, 1024, 2048, 4096)
DEFAULT_ORACLE_LADDER: Tuple[int, ...] = (40, 80, 160)
DEFAULT_TOLERANCE = 1e-9

# Half-width of the window around x = 3/2 where Z_2 is interpolated.
_Z2_REMOVABLE_HALF_WIDTH = 2e-5
_POLE_OFFSET = 1e-9
_MAX_BRACKET_EXPANSIONS = 200
_MAX_BISECTIONS = 200

BandFunction = Callable[[float], float]


@dataclass(frozen=True)
class Extrapolation:
    """Limit estimate of a Richardson table together with its last correction."""

    value: float
    error: float
    estimates: Tuple[float, ...]


@dataclass(frozen=True)
class RootRequest:
    """One root of Z_L(x) = log(a/R); branch 0 lies below the first pole."""

    L: int
    log_a_over_R: float
    branch: int = 0
    tolerance: float = 1e-12

    def __post_init__(self) -> None:
        if self.L < 0:
            raise ValueError("L must be nonnegative")
        if self.branch < 0:
            raise ValueError("branch must be nonnegative")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not math.isfinite(self.log_a_over_R):
            raise ValueError("log(a/R) must be finite")


@dataclass(frozen=True)
class BandCurve:
    """Pole and zero structure of one rotational band."""

    L: int
    poles: Tuple[float, ...]
    zeros: Tuple[float, ...]

    def __call__(self, x: float) -> float:
        return band_function(self.L)(x)

    def branch_interval(self, branch: int) -> Tuple[float, float]:
        """Open x interval holding the branch (``-inf`` below the first pole)."""

        if branch == 0:
            return (-math.inf, self.poles[0])
        return (self.poles[branch - 1], self.poles[branch])


@dataclass(frozen=True)
class OracleSpectrum:
    """Eigenvalues (x units) of the truncated Hamiltonian at one cutoff."""

    lambda_max: int
    eigenvalues: np.ndarray = field(compare=False)


def epsilon_l(l: int, mass: float, radius: float) -> float:
    """Kinetic energy l(l+1) (hbar c)^2 / (2 m R^2) of one particle, in MeV."""

    if mass <= 0 or radius <= 0:
        raise ValueError("mass and radius must be positive")
    return l * (l + 1) * HBAR_C**2 / (2.0 * mass * radius**2)


def c0_coefficient(a: float, cutoff: float, mass: float) -> float:
    """Running contact coupling -2 pi (hbar c)^2 / (m log(a Lambda)) in MeV fm^2."""

    product = a * cutoff
    if not product > 0:
        raise DomainError(f"a*Lambda must be positive, got {product!r}")
    log_value = math.log(product)
    if abs(log_value) <= 1e-12:
        raise PoleError("C0 diverges at a*Lambda = 1", argument=product)
    return -2.0 * math.pi * HBAR_C**2 / (mass * log_value)


def atilde_to_log_a_over_R(atilde: float) -> float:
    if atilde == 0:
        raise DomainError("the reduced scattering length must be nonzero")
    return -math.pi / (2.0 * atilde)


def atilde_to_a_over_R(atilde: float) -> float:
    return math.exp(atilde_to_log_a_over_R(atilde))


def log_a_over_R_to_atilde(log_value: float) -> float:
    if log_value == 0:
        raise DomainError("a = R corresponds to an infinite reduced scattering length")
    return -math.pi / (2.0 * log_value)


def a_over_R_to_atilde(ratio: float) -> float:
    if not ratio > 0:
        raise DomainError(f"a/R must be positive, got {ratio!r}")
    if ratio == 1:
        raise DomainError("a = R corresponds to an infinite reduced scattering length")
    return log_a_over_R_to_atilde(math.log(ratio))


def _check_closed_band(L: int) -> None:
    if L not in CLOSED_FORM_BANDS:
        raise ValueError(f"closed forms exist for L in {CLOSED_FORM_BANDS}, not L={L}")


def _x_psi_s(x: np.ndarray) -> np.ndarray:
    """x [psi((1-s)/2) + psi((1+s)/2)] with s = sqrt(1+2x), finite at x = 0."""

    q = 1.0 + 2.0 * x
    real = q >= 0.0
    s = np.sqrt(np.where(real, q, 0.0))
    lower = 0.5 * (3.0 - s)
    with np.errstate(all="ignore"):
        # psi((1-s)/2) = psi((3-s)/2) - 2/(1-s) and -2x/(1-s) = 1+s
        shifted = x * (special.psi(lower) + special.psi(0.5 * (1.0 + s))) + 1.0 + s
        paired = x * digamma_pair_sum(0.5, np.where(real, -1.0, q))
    result = np.where(real, shifted, paired)
    return np.where(real & pole_mask(lower), np.nan, result)


def _z2_raw(x: np.ndarray) -> np.ndarray:
    psi_r = digamma_pair_sum(1.5, 2.0 * x - 3.0)
    with np.errstate(all="ignore"):
        return (3.0 * (x - 2.0) * psi_r + _x_psi_s(x)) / (12.0 - 8.0 * x)


def _z2_array(x: np.ndarray) -> np.ndarray:
    values = _z2_raw(x)
    near = np.abs(x - 1.5) < _Z2_REMOVABLE_HALF_WIDTH
    if np.any(near):
        h = _Z2_REMOVABLE_HALF_WIDTH
        left, right = _z2_raw(np.array([1.5 - h, 1.5 + h]))
        values = np.where(near, left + (right - left) * (x - (1.5 - h)) / (2.0 * h), values)
    return values


def z_closed_array(L: int, xs: ArrayLike) -> np.ndarray:
    """Vectorized closed-form Z_L; NaN marks poles."""

    _check_closed_band(L)
    x = np.atleast_1d(np.asarray(xs, dtype=float))
    if L == 0:
        values = -0.5 * digamma_pair_sum(0.5, 2.0 * x + 1.0)
    elif L == 1:
        values = -0.5 * digamma_pair_sum(1.0, 2.0 * x)
    else:
        values = _z2_array(x)
    return np.asarray(values, dtype=float).reshape(np.shape(xs))


def z_closed(L: int, x: float) -> float:
    """Closed-form quantization function Z_L(x) for L in 0, 1, 2."""

    value = float(z_closed_array(L, np.array([float(x)]))[0])
    if not math.isfinite(value):
        raise PoleError(f"Z_{L} has a pole at x={x!r}", argument=float(x))
    return value


@lru_cache(maxsize=64)
def _band_terms(L: int, lambda_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """Non-interacting x and weights (2l1+1)(2l2+1)(3j)^2 of all pairs with l_i <= lambda_max."""

    l1 = np.arange(lambda_max + 1, dtype=np.int64)
    energies: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    for offset in range(-L, L + 1, 2):
        l2 = l1 + offset
        keep = (l2 >= 0) & (l2 <= lambda_max) & (l1 + l2 >= L)
        a, b = l1[keep], l2[keep]
        energies.append((a * (a + 1) + b * (b + 1)).astype(float))
        weights.append((2 * a + 1) * (2 * b + 1) * threej_zero_m_squared(a, b, L))
    energy = np.concatenate(energies)
    weight = np.concatenate(weights)
    energy.setflags(write=False)
    weight.setflags(write=False)
    return energy, weight


def z_sum(L: int, x: float, lambda_max: int) -> float:
    """Cutoff-truncated quantization sum with the log(Lambda R) subtraction."""

    if lambda_max < L + 1:
        raise ValueError(f"lambda_max must be at least L+1 = {L + 1}")
    energies, weights = _band_terms(L, int(lambda_max))
    gaps = energies - float(x)
    if np.any(np.abs(gaps) <= 1e-12 * max(1.0, abs(x))):
        raise PoleError(f"Z_{L} has a pole at x={x!r}", argument=float(x))
    return float(np.sum(weights / gaps) - 0.5 * math.log(lambda_max * (lambda_max + 1.0)))


def richardson_extrapolate(steps: Sequence[float], values: Sequence[float]) -> Extrapolation:
    """Neville extrapolation of ``values`` sampled at ``steps`` to step zero."""

    if len(steps) != len(values) or len(values) < 2:
        raise ValueError("need at least two matching steps and values")
    h = np.asarray(steps, dtype=float)
    table = np.asarray(values, dtype=float).copy()
    estimates = [float(table[0])]
    count = len(table)
    for k in range(1, count):
        for i in range(count - k):
            table[i] = (h[i + k] * table[i] - h[i] * table[i + 1]) / (h[i + k] - h[i])
        estimates.append(float(table[0]))
    return Extrapolation(
        value=estimates[-1],
        error=abs(estimates[-1] - estimates[-2]),
        estimates=tuple(estimates),
    )


def z_general(
    L: int,
    x: float,
    ladder: Sequence[int] = DEFAULT_LADDER,
    tolerance: float = DEFAULT_TOLERANCE,
) -> float:
    """Infinite-cutoff Z_L(x) from a Richardson table of truncated sums in 1/lambda.

    The last table correction must stay within ``10 * tolerance``, relative once
    |Z| exceeds 1 (next to a pole).
    """

    values = [z_sum(L, x, lam) for lam in ladder]
    result = richardson_extrapolate([1.0 / lam for lam in ladder], values)
    logger.debug("z_general L=%d x=%r ladder=%s error=%.3e", L, x, tuple(ladder), result.error)
    if result.error > 10.0 * tolerance * max(1.0, abs(result.value)):
        raise ConvergenceError(
            f"extrapolated Z_{L}({x!r}) unstable: last correction {result.error:.3e}"
        )
    return result.value


def band_function(L: int) -> BandFunction:
    """Closed form for L <= 2, extrapolated sum otherwise."""

    if L < 0:
        raise ValueError("L must be nonnegative")
    if L in CLOSED_FORM_BANDS:
        return partial(z_closed, L)
    return partial(z_general, L)


@lru_cache(maxsize=256)
def _poles(L: int, count: int) -> Tuple[float, ...]:
    bound = max(L, 2)
    while True:
        found = set()
        for l1 in range(bound + 1):
            for offset in range(-L, L + 1, 2):
                l2 = l1 + offset
                if 0 <= l2 <= bound and l1 + l2 >= L:
                    found.add(l1 * (l1 + 1) + l2 * (l2 + 1))
        # pairs with a member above ``bound`` start at (bound+1)(bound+2)
        complete = sorted(v for v in found if v < (bound + 1) * (bound + 2))
        if len(complete) >= count:
            return tuple(float(v) for v in complete[:count])
        bound *= 2


def poles(L: int, count: int) -> Tuple[float, ...]:
    """First ``count`` distinct non-interacting energies of band L."""

    if L < 0:
        raise ValueError("L must be nonnegative")
    if count < 1:
        raise ValueError("count must be at least 1")
    return _poles(L, count)


def _dimer_start(log_value: float) -> float:
    return -2.0 * math.exp(min(-2.0 * log_value, 700.0))


def bracket_branch(
    function: BandFunction,
    pole_values: Sequence[float],
    branch: int,
    target: float = 0.0,
    start: Optional[float] = None,
    diagnostics: Optional[Mapping[str, Any]] = None,
) -> Tuple[float, float]:
    """Interval on ``branch`` where an increasing-between-poles ``function`` crosses ``target``.

    Branch 0 is open to the left: its lower end starts at ``start`` (or ten below the first
    pole) and doubles its distance from the pole until the function drops below the target.
    """

    if len(pole_values) < branch + 2:
        raise ValueError("need the poles on both sides of the branch and one beyond")
    state: Dict[str, Any] = {**(diagnostics or {}), "branch": branch, "target": target}
    upper_pole = pole_values[branch]
    if branch == 0:
        gap = pole_values[1] - pole_values[0]
        hi = upper_pole - _POLE_OFFSET * gap
        lo = upper_pole - 10.0 if start is None else min(start, upper_pole - 10.0)
        expansions = 0
        while True:
            if not math.isfinite(2.0 * lo):
                raise BracketError(
                    "branch-0 bracket ran past the floating-point range",
                    {**state, "lower": lo, "expansions": expansions},
                )
            if function(lo) - target <= 0:
                break
            expansions += 1
            if expansions > _MAX_BRACKET_EXPANSIONS:
                raise BracketError(
                    "no sign change below the first pole", {**state, "lower": lo, "expansions": expansions}
                )
            lo = upper_pole - 2.0 * (upper_pole - lo)
        if expansions:
            logger.debug("branch-0 bracket expanded %d times to %r", expansions, lo)
    else:
        lower_pole = pole_values[branch - 1]
        gap = upper_pole - lower_pole
        lo = lower_pole + _POLE_OFFSET * gap
        hi = upper_pole - _POLE_OFFSET * gap
        if function(lo) - target > 0:
            raise BracketError(f"branch {branch} stays above {target!r}", {**state, "lower": lo})
    if function(hi) - target < 0:
        raise BracketError(f"branch {branch} stays below {target!r}", {**state, "upper": hi})
    return lo, hi


def _branch_bracket(
    L: int, branch: int, log_value: float, function: BandFunction
) -> Tuple[float, float]:
    return bracket_branch(
        function,
        poles(L, branch + 2),
        branch,
        target=log_value,
        start=1.5 * _dimer_start(log_value),
        diagnostics={"L": L, "log_a_over_R": log_value},
    )


def solve_band(request: RootRequest) -> float:
    """The x on the requested branch where Z_L(x) equals log(a/R)."""

    function = band_function(request.L)
    log_value = request.log_a_over_R
    lo, hi = _branch_bracket(request.L, request.branch, log_value, function)
    root = optimize.brentq(
        lambda x: function(x) - log_value,
        lo,
        hi,
        xtol=request.tolerance,
        rtol=4.0 * np.finfo(float).eps,
        maxiter=500,
    )
    return float(root)


def solve_band_many(
    L: int, log_values: ArrayLike, branch: int = 0, tolerance: float = 1e-12
) -> np.ndarray:
    """Roots on one branch for many log(a/R) values; NaN where no root is bracketed."""

    logs = np.atleast_1d(np.asarray(log_values, dtype=float))
    if L not in CLOSED_FORM_BANDS:
        roots = np.full(logs.shape, np.nan)
        for i, value in enumerate(logs):
            try:
                roots[i] = solve_band(RootRequest(L, float(value), branch, tolerance))
            except (BracketError, ValueError):
                continue
        return roots

    edges = poles(L, branch + 2)
    upper_pole = edges[branch]
    if branch == 0:
        gap = edges[1] - edges[0]
        start = -2.0 * np.exp(np.minimum(-2.0 * logs, 700.0))
        lo = np.minimum(1.5 * start, upper_pole - 10.0)
        for _ in range(_MAX_BRACKET_EXPANSIONS):
            with np.errstate(all="ignore"):
                pending = (z_closed_array(L, lo) - logs > 0) & np.isfinite(2.0 * lo)
            if not np.any(pending):
                break
            lo = np.where(pending, upper_pole - 2.0 * (upper_pole - lo), lo)
    else:
        gap = upper_pole - edges[branch - 1]
        lo = np.full(logs.shape, edges[branch - 1] + _POLE_OFFSET * gap)
    hi = np.full(logs.shape, upper_pole - _POLE_OFFSET * gap)

    with np.errstate(all="ignore"):
        valid = (z_closed_array(L, lo) - logs <= 0) & (z_closed_array(L, hi) - logs >= 0)
        valid &= np.isfinite(lo)
        for _ in range(_MAX_BISECTIONS):
            mid = 0.5 * (lo + hi)
            above = z_closed_array(L, mid) - logs > 0
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
            if np.all(hi - lo <= tolerance * np.maximum(1.0, np.abs(mid))):
                break
    return np.where(valid, 0.5 * (lo + hi), np.nan)


def band_zeros(L: int, count: int) -> Tuple[float, ...]:
    """Zeros of Z_L, one per branch starting below the first pole."""

    if count < 1:
        raise ValueError("count must be at least 1")
    return tuple(solve_band(RootRequest(L, 0.0, n, 1e-14)) for n in range(count))


def band_curve(L: int, count: int) -> BandCurve:
    return BandCurve(L=L, poles=poles(L, count), zeros=band_zeros(L, count))


def asymptote_noninteracting(L: int, n: int, log_a_over_R: float) -> float:
    """First-order root near the n-th non-interacting energy for |log(a/R)| large."""

    if log_a_over_R == 0:
        raise DomainError("the non-interacting expansion needs log(a/R) != 0")
    if L == 0:
        return 2.0 * n * (n + 1) - (2 * n + 1) / log_a_over_R
    if L == 1:
        return 2.0 * (n + 1) ** 2 - 2.0 * (n + 1) / log_a_over_R
    raise ValueError(f"the non-interacting expansion is available for L in (0, 1), not L={L}")


def dimer_x(a: float, radius: float) -> float:
    """Deep-dimer root -2 R^2 / a^2."""

    if a <= 0 or radius <= 0:
        raise ValueError("a and R must be positive")
    return -2.0 * radius**2 / a**2


def expansion_near_zero(L: int, x0: float, log_a_over_R: float) -> float:
    """Root linearized around the zero ``x0`` of band L."""

    if L == 0:
        slope = trigamma_pair_difference(0.5, 2.0 * x0 + 1.0)
    elif L == 1:
        slope = trigamma_pair_difference(1.0, 2.0 * x0)
    else:
        raise ValueError(f"the near-zero expansion is available for L in (0, 1), not L={L}")
    # dZ_L/dx equals slope / 4
    return x0 + 4.0 * log_a_over_R / slope


def oracle_coupling(a_over_R: float, lambda_max: int) -> float:
    """Contact coupling in x units at angular cutoff ``lambda_max``; 0 for a/R in {0, inf}."""

    if a_over_R == 0 or math.isinf(a_over_R):
        return 0.0
    if a_over_R < 0:
        raise DomainError(f"a/R must be positive, got {a_over_R!r}")
    denominator = math.log(a_over_R) + 0.5 * math.log(lambda_max * (lambda_max + 1.0))
    if denominator == 0:
        raise DomainError("the coupling diverges where a * Lambda = 1")
    return -FOUR_PI / denominator


def diagonalize_oracle(
    L: int, a_over_R: float, lambda_ladder: Sequence[int] = DEFAULT_ORACLE_LADDER
) -> List[OracleSpectrum]:
    """Spectra of the truncated Hamiltonian, one per cutoff in ``lambda_ladder``."""

    spectra: List[OracleSpectrum] = []
    for lam in lambda_ladder:
        if lam < L + 1:
            raise ValueError(f"cutoff {lam} is below L+1 = {L + 1}")
        table = build_me_table(L, math.sqrt(lam * (lam + 1.0)))
        hamiltonian = np.diag(table.unperturbed) + oracle_coupling(a_over_R, lam) * table.values
        try:
            eigenvalues = np.linalg.eigvalsh(hamiltonian)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"eigensolver failed for L={L} at cutoff {lam}") from exc
        logger.debug("oracle L=%d lambda=%d size=%d lowest=%r", L, lam, table.size, eigenvalues[0])
        spectra.append(OracleSpectrum(lambda_max=int(lam), eigenvalues=eigenvalues))
    return spectra


def oracle_extrapolate(
    L: int,
    a_over_R: float,
    lambda_ladder: Sequence[int] = DEFAULT_ORACLE_LADDER,
    level: int = 0,
) -> Extrapolation:
    """Infinite-cutoff limit of one oracle eigenvalue, extrapolated in 1/lambda."""

    spectra = diagonalize_oracle(L, a_over_R, lambda_ladder)
    return richardson_extrapolate(
        [1.0 / s.lambda_max for s in spectra], [float(s.eigenvalues[level]) for s in spectra]
    )


__all__ = [
    "HBAR_C",
    "CLOSED_FORM_BANDS",
    "DEFAULT_LADDER",
    "DEFAULT_ORACLE_LADDER",
    "BandCurve",
    "Extrapolation",
    "OracleSpectrum",
    "RootRequest",
    "epsilon_l",
    "c0_coefficient",
    "atilde_to_a_over_R",
    "atilde_to_log_a_over_R",
    "a_over_R_to_atilde",
    "log_a_over_R_to_atilde",
    "z_closed",
    "z_closed_array",
    "z_sum",
    "z_general",
    "richardson_extrapolate",
    "band_function",
    "poles",
    "band_zeros",
    "band_curve",
    "bracket_branch",
    "solve_band",
    "solve_band_many",
    "asymptote_noninteracting",
    "dimer_x",
    "expansion_near_zero",
    "oracle_coupling",
    "diagonalize_oracle",
    "oracle_extrapolate",
]
