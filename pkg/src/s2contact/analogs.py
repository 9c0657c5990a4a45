"""Comparison geometries: the two-dimensional harmonic oscillator and the torus.

Both conditions move rigidly with the centre-of-mass energy, which is what the
sphere's bands do not do.  ``shift_mismatch`` turns that contrast into a number.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from .errors import PoleError
from .quantization import BandFunction, bracket_branch, richardson_extrapolate
from .specfun import digamma

logger = logging.getLogger(__name__)

# Lattice sum of 1/|n|^2 over 0 < |n| <= Lambda minus 2 pi log(Lambda), at infinite Lambda.
SIERPINSKI_K = math.pi * (
    2.0 * np.euler_gamma + 2.0 * math.log(2.0) + 3.0 * math.log(math.pi)
    - 4.0 * math.log(special.gamma(0.25))
)


@dataclass(frozen=True)
class TorusSumSpec:
    """Circular lattice cutoff; with ``extrapolate`` the ladder is cutoff x (1, 2, 4)."""

    cutoff: float = 200.0
    extrapolate: bool = True

    def __post_init__(self) -> None:
        if not self.cutoff >= 1:
            raise ValueError("torus cutoff must be at least 1")

    @property
    def ladder(self) -> Tuple[float, ...]:
        return (self.cutoff, 2.0 * self.cutoff, 4.0 * self.cutoff)


def ho_condition(x: float) -> float:
    """-psi(1/2 - x/2) / 2 with x = E / omega."""

    try:
        return -0.5 * digamma(0.5 - 0.5 * x)
    except PoleError as exc:
        raise PoleError(f"the oscillator condition has a pole at x={x!r}", argument=x) from exc


def ho_poles(count: int) -> Tuple[float, ...]:
    return tuple(float(2 * k + 1) for k in range(count))


@lru_cache(maxsize=16)
def _octant_shells(cutoff: float) -> Tuple[np.ndarray, np.ndarray]:
    """|n|^2 and symmetry multiplicities of the lattice octant 0 <= n2 <= n1, ascending."""

    bound = int(math.floor(cutoff))
    n1, n2 = np.meshgrid(np.arange(bound + 1), np.arange(bound + 1), indexing="ij")
    keep = (n2 <= n1) & (n1 * n1 + n2 * n2 <= cutoff * cutoff)
    a, b = n1[keep], n2[keep]
    multiplicity = np.full(a.shape, 8.0)
    multiplicity[(b == 0) | (a == b)] = 4.0
    multiplicity[(a == 0) & (b == 0)] = 1.0
    norms = (a * a + b * b).astype(float)
    order = np.argsort(norms, kind="stable")
    norms, multiplicity = norms[order], multiplicity[order]
    norms.setflags(write=False)
    multiplicity.setflags(write=False)
    return norms, multiplicity


def _check_lattice_pole(norms: np.ndarray, x: float) -> None:
    if np.any(np.abs(norms - x) <= 1e-12 * max(1.0, abs(x))):
        raise PoleError(f"the torus condition has a pole at x={x!r}", argument=x)


def torus_lattice_sum(x: float, cutoff: float) -> float:
    """Sum of 1/(|n|^2 - x) over n in Z^2 with |n| <= cutoff, one octant at a time."""

    norms, multiplicity = _octant_shells(float(cutoff))
    _check_lattice_pole(norms, x)
    return float(np.sum(multiplicity / (norms - x)))


def _convergent_remainder(x: float, cutoff: float) -> float:
    norms, multiplicity = _octant_shells(float(cutoff))
    _check_lattice_pole(norms, x)
    nonzero = norms > 0
    return float(np.sum(multiplicity[nonzero] * x / (norms[nonzero] * (norms[nonzero] - x))))


def torus_s2(x: float, spec: TorusSumSpec = TorusSumSpec()) -> float:
    """(1/pi^2) S_2(x): the regulated lattice sum of the torus condition."""

    if not spec.extrapolate:
        return torus_lattice_sum(x, spec.cutoff) / math.pi**2 - 2.0 / math.pi * math.log(spec.cutoff)
    if abs(x) <= 1e-12:
        raise PoleError("the torus condition has a pole at x=0", argument=x)
    ladder = spec.ladder
    result = richardson_extrapolate(
        [1.0 / c**2 for c in ladder], [_convergent_remainder(x, c) for c in ladder]
    )
    logger.debug("torus remainder x=%r ladder=%s error=%.3e", x, ladder, result.error)
    return (-1.0 / x + SIERPINSKI_K + result.value) / math.pi**2


def torus_s2_naive(x: float, cutoff: float) -> float:
    """Full-lattice evaluation of the unextrapolated torus sum."""

    bound = int(math.floor(cutoff))
    axis = np.arange(-bound, bound + 1)
    n1, n2 = np.meshgrid(axis, axis, indexing="ij")
    norms = (n1 * n1 + n2 * n2).astype(float)
    norms = norms[norms <= cutoff * cutoff]
    _check_lattice_pole(norms, x)
    return float(np.sum(1.0 / (norms - x))) / math.pi**2 - 2.0 / math.pi * math.log(cutoff)


def torus_poles(count: int) -> Tuple[float, ...]:
    """Smallest ``count`` sums of two squares."""

    bound = 1
    while True:
        values = sorted({a * a + b * b for a in range(bound + 1) for b in range(a + 1)})
        complete = [v for v in values if v <= bound * bound]
        if len(complete) >= count:
            return tuple(float(v) for v in complete[:count])
        bound *= 2


def cm_shift_curve(condition: BandFunction, x_cm: float) -> BandFunction:
    """``condition`` moved right by ``x_cm``."""

    def shifted(x: float) -> float:
        return condition(x - x_cm)

    return shifted


def shift_mismatch(
    curve: BandFunction,
    reference: BandFunction,
    grid: Iterable[float],
    shifts: Iterable[float],
) -> float:
    """Smallest, over ``shifts``, of the largest grid distance between curve and shifted reference."""

    points = list(grid)
    best = math.inf
    for shift in shifts:
        worst = 0.0
        for x in points:
            try:
                distance = abs(curve(x) - reference(x - shift))
            except PoleError:
                continue
            if math.isfinite(distance):
                worst = max(worst, distance)
        best = min(best, worst)
    return best


def intercepts(function: BandFunction, pole_values: Sequence[float], count: int) -> Tuple[float, ...]:
    """Zeros of an increasing-between-poles condition, one per branch."""

    if count < 1:
        raise ValueError("count must be at least 1")
    if len(pole_values) < count + 1:
        raise ValueError("need one more pole than requested zeros")
    zeros = []
    for branch in range(count):
        lo, hi = bracket_branch(function, pole_values, branch)
        zeros.append(float(optimize.brentq(function, lo, hi, xtol=1e-13, maxiter=500)))
    return tuple(zeros)


def ho_zeros(count: int) -> Tuple[float, ...]:
    return intercepts(ho_condition, ho_poles(count + 1), count)


def torus_zeros(count: int, spec: TorusSumSpec = TorusSumSpec()) -> Tuple[float, ...]:
    condition: Callable[[float], float] = lambda x: torus_s2(x, spec)
    return intercepts(condition, torus_poles(count + 1), count)


__all__ = [
    "SIERPINSKI_K",
    "TorusSumSpec",
    "ho_condition",
    "ho_poles",
    "ho_zeros",
    "torus_s2",
    "torus_s2_naive",
    "torus_lattice_sum",
    "torus_poles",
    "torus_zeros",
    "cm_shift_curve",
    "shift_mismatch",
    "intercepts",
]
