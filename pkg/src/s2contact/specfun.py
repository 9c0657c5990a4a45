"""Digamma and trigamma functions on the real axis and in the complex plane.

The quantization conditions on the sphere are sums of digamma functions whose
arguments turn into complex-conjugate pairs below the branch points of the
square roots they contain.  The helpers here keep those sums real and turn
poles into explicit :class:`~s2contact.errors.PoleError` exceptions instead of
large finite numbers.
"""

from __future__ import annotations

import cmath
import logging
import math
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from .errors import PoleError

logger = logging.getLogger(__name__)

POLE_TOLERANCE = 1e-14

# Recurrence target and number of Bernoulli terms for the complex trigamma series.
_SHIFT_TARGET = 10.0
_ASYMPTOTIC_TERMS = 8
_BERNOULLI = special.bernoulli(2 * _ASYMPTOTIC_TERMS)

FloatOrArray = Union[float, np.ndarray]


def is_pole(z: float) -> bool:
    """True when ``z`` sits within :data:`POLE_TOLERANCE` of a nonpositive integer."""

    return z <= POLE_TOLERANCE and abs(z - round(z)) <= POLE_TOLERANCE


def pole_mask(values: np.ndarray) -> np.ndarray:
    """Elementwise :func:`is_pole`."""

    return (values <= POLE_TOLERANCE) & (np.abs(values - np.round(values)) <= POLE_TOLERANCE)


def _check_real(z: float, name: str) -> float:
    value = float(z)
    if is_pole(value):
        raise PoleError(f"{name} has a pole at {value!r}", argument=value)
    return value


def digamma(z: float) -> float:
    """psi(z) for real ``z``; raises :class:`PoleError` at nonpositive integers."""

    value = _check_real(z, "digamma")
    return float(special.psi(value))


def digamma_complex(z: complex) -> complex:
    """psi(z) for complex ``z``; conj(psi(z)) == psi(conj(z))."""

    value = complex(z)
    if abs(value.imag) <= POLE_TOLERANCE and is_pole(value.real):
        raise PoleError(f"digamma has a pole at {value!r}", argument=value.real)
    if value.imag == 0.0:
        return complex(float(special.psi(value.real)), 0.0)
    if value.imag < 0.0:
        # Mirror the upper half plane so conjugate pairs agree bitwise.
        return complex(special.psi(value.conjugate())).conjugate()
    return complex(special.psi(value))


def digamma_conjugate_sum(a: float, b: float) -> float:
    """psi(a + ib) + psi(a - ib), computed as 2 Re psi(a + ib)."""

    return 2.0 * digamma_complex(complex(a, abs(b))).real


def trigamma(z: float) -> float:
    """psi'(z) for real ``z``, using reflection for negative arguments."""

    value = _check_real(z, "trigamma")
    if value < 0.0:
        return math.pi**2 / math.sin(math.pi * value) ** 2 - float(
            special.polygamma(1, 1.0 - value)
        )
    return float(special.polygamma(1, value))


def trigamma_complex(z: complex) -> complex:
    """psi'(z) for complex ``z`` by recurrence shift and the Bernoulli asymptotic series."""

    value = complex(z)
    if abs(value.imag) <= POLE_TOLERANCE and is_pole(value.real):
        raise PoleError(f"trigamma has a pole at {value!r}", argument=value.real)
    if value.real < 0.5:
        return (math.pi / cmath.sin(math.pi * value)) ** 2 - trigamma_complex(1.0 - value)

    shifted = 0j
    while value.real < _SHIFT_TARGET:
        shifted += 1.0 / (value * value)
        value += 1.0

    inverse = 1.0 / value
    inverse_sq = inverse * inverse
    series = inverse + 0.5 * inverse_sq
    power = inverse * inverse_sq
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        series += _BERNOULLI[2 * k] * power
        power *= inverse_sq
    return series + shifted


def digamma_pair_sum(center: ArrayLike, radicand: ArrayLike) -> FloatOrArray:
    """psi(c - sqrt(q)/2) + psi(c + sqrt(q)/2), real for every real ``q``.

    Negative radicands use the conjugate-pair form 2 Re psi(c + i sqrt(-q)/2).
    Scalars in give a float out and raise :class:`PoleError` on poles; arrays in
    give an array out with NaN at the poles.
    """

    scalar = np.ndim(center) == 0 and np.ndim(radicand) == 0
    c, q = np.broadcast_arrays(
        np.asarray(center, dtype=float), np.asarray(radicand, dtype=float)
    )
    half_root = np.sqrt(np.abs(q)) / 2.0
    real_branch = q >= 0.0
    lower = np.where(real_branch, c - half_root, c)
    upper = np.where(real_branch, c + half_root, c)
    poles = real_branch & (pole_mask(lower) | pole_mask(upper))

    with np.errstate(all="ignore"):
        real_sum = special.psi(lower) + special.psi(upper)
        pair_sum = 2.0 * special.psi(c + 1j * half_root).real
    result = np.where(real_branch, real_sum, pair_sum)
    result = np.where(poles, np.nan, result)

    if scalar:
        if bool(poles):
            raise PoleError(
                f"digamma pair sum has a pole at center={float(c)!r}, radicand={float(q)!r}",
                argument=float(q),
            )
        return float(result)
    return result


def trigamma_pair_difference(center: float, radicand: float) -> float:
    """[psi'(c - s/2) - psi'(c + s/2)] / s with s = sqrt(q), real for every real ``q``."""

    c = float(center)
    q = float(radicand)
    if q == 0.0:
        return -float(special.polygamma(2, c))
    if q > 0.0:
        root = math.sqrt(q)
        return (trigamma(c - root / 2.0) - trigamma(c + root / 2.0)) / root
    root = math.sqrt(-q)
    return -2.0 * trigamma_complex(complex(c, root / 2.0)).imag / root


__all__ = [
    "POLE_TOLERANCE",
    "is_pole",
    "pole_mask",
    "digamma",
    "digamma_complex",
    "digamma_conjugate_sum",
    "trigamma",
    "trigamma_complex",
    "digamma_pair_sum",
    "trigamma_pair_difference",
]
