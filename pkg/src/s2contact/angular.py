"""Angular-momentum algebra for two particles on a sphere.

Wigner 3j symbols, Clebsch-Gordan coefficients, the integral of four spherical
harmonics and the matrix element of a contact interaction in the coupled
basis |(l1 l2) L M>.  A Gauss-Legendre x trapezoid quadrature over the sphere
checks the closed forms independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from .errors import AngularMomentumOverflowError, EmptyBasisError, InsufficientOrderError

MAX_ANGULAR_MOMENTUM = 500
_LOG_FACTORIAL = special.gammaln(np.arange(3 * MAX_ANGULAR_MOMENTUM + 2) + 1.0)
_LOG_FACTORIAL.setflags(write=False)

FOUR_PI = 4.0 * math.pi

Y4Integral = Callable[[int, int, int, int, int, int, int, int], float]


@dataclass(frozen=True)
class CoupledIndex:
    """Basis label |(l1 l2) L M> of the coupled two-particle basis."""

    l1: int
    l2: int
    L: int
    M: int = 0

    def __post_init__(self) -> None:
        if min(self.l1, self.l2, self.L) < 0:
            raise ValueError(f"angular momenta must be nonnegative: {self}")
        if not triangle(self.l1, self.l2, self.L):
            raise ValueError(f"triangle rule violated by {self}")
        if abs(self.M) > self.L:
            raise ValueError(f"|M| must not exceed L in {self}")


@dataclass(frozen=True)
class MatrixElementTable:
    """Contact matrix elements over the coupled basis admitted by a cutoff.

    ``values`` is in units of the 1/(4 pi) sphere normalisation; callers apply
    the coupling prefactor.
    """

    L: int
    cutoff: float
    indices: Tuple[Tuple[int, int], ...]
    values: np.ndarray = field(compare=False, repr=False)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def unperturbed(self) -> np.ndarray:
        """Non-interacting x = l1(l1+1) + l2(l2+1) of every basis state."""

        return np.array([l1 * (l1 + 1) + l2 * (l2 + 1) for l1, l2 in self.indices], dtype=float)


def triangle(l1: int, l2: int, l3: int) -> bool:
    return abs(l1 - l2) <= l3 <= l1 + l2


def _check_bound(*values: int) -> None:
    largest = max(abs(v) for v in values)
    if largest > MAX_ANGULAR_MOMENTUM:
        raise AngularMomentumOverflowError(
            f"angular momentum {largest} exceeds the factorial table bound {MAX_ANGULAR_MOMENTUM}"
        )


@lru_cache(maxsize=65536)
def threej_zero_m(l1: int, l2: int, l3: int) -> float:
    """(l1 l2 l3; 0 0 0); zero for odd l1+l2+l3 or a broken triangle."""

    _check_bound(l1, l2, l3)
    if min(l1, l2, l3) < 0 or not triangle(l1, l2, l3):
        return 0.0
    total = l1 + l2 + l3
    if total % 2:
        return 0.0
    half = total // 2
    lf = _LOG_FACTORIAL
    log_value = 0.5 * (
        lf[total - 2 * l1] + lf[total - 2 * l2] + lf[total - 2 * l3] - lf[total + 1]
    ) + (lf[half] - lf[half - l1] - lf[half - l2] - lf[half - l3])
    sign = -1.0 if half % 2 else 1.0
    return sign * math.exp(log_value)


@lru_cache(maxsize=262144)
def threej(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """General Wigner 3j symbol for integer arguments (Racah formula)."""

    _check_bound(j1, j2, j3)
    if m1 + m2 + m3 != 0 or min(j1, j2, j3) < 0 or not triangle(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if m1 == m2 == m3 == 0:
        return threej_zero_m(j1, j2, j3)

    lf = _LOG_FACTORIAL
    log_delta = 0.5 * (
        lf[j1 + j2 - j3] + lf[j1 - j2 + j3] + lf[-j1 + j2 + j3] - lf[j1 + j2 + j3 + 1]
    )
    log_prefactor = 0.5 * (
        lf[j1 + m1] + lf[j1 - m1] + lf[j2 + m2] + lf[j2 - m2] + lf[j3 + m3] + lf[j3 - m3]
    )
    k_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = 0.0
    for k in range(k_min, k_max + 1):
        log_term = log_delta + log_prefactor - (
            lf[k]
            + lf[j1 + j2 - j3 - k]
            + lf[j1 - m1 - k]
            + lf[j2 + m2 - k]
            + lf[j3 - j2 + m1 + k]
            + lf[j3 - j1 - m2 + k]
        )
        total += (-1.0) ** k * math.exp(log_term)
    return (-1.0) ** (j1 - j2 - m3) * total


def clebsch_gordan(l1: int, m1: int, l2: int, m2: int, L: int, M: int) -> float:
    """<l1 m1; l2 m2 | L M> in the Condon-Shortley convention."""

    if m1 + m2 != M:
        return 0.0
    return (-1.0) ** (l1 - l2 + M) * math.sqrt(2 * L + 1) * threej(l1, l2, L, m1, m2, -M)


def threej_zero_m_squared(l1: ArrayLike, l2: ArrayLike, L: int) -> np.ndarray:
    """Vectorized (l1 l2 L; 0 0 0)**2 for arrays of l1, l2 at fixed L.

    Written with Pochhammer ratios of length O(L), so it stays accurate for l
    far above the factorial-table bound.
    """

    a = np.asarray(l1, dtype=np.int64)
    b = np.asarray(l2, dtype=np.int64)
    low = np.minimum(a, b)
    gap = np.abs(a - b)
    valid = (gap <= L) & (L <= a + b) & ((a + b + L) % 2 == 0) & (low >= 0)

    gap = np.where(valid, gap, L)
    low = np.where(valid, low, L)
    upper_half = (gap + L) // 2
    lower_half = (L - gap) // 2
    half = low + upper_half

    small = special.factorial(gap + L) * special.factorial(L - gap) / (
        special.factorial(upper_half) * special.factorial(lower_half)
    ) ** 2
    rising = special.poch(half - L + 1.0, L)
    ratio = special.poch(2 * low + gap - L + 1.0, 2 * L + 1)
    return np.where(valid, small * rising**2 / ratio, 0.0)


def y4_analytic(
    l1: int, m1: int, l2: int, m2: int, lam1: int, mu1: int, lam2: int, mu2: int
) -> float:
    """Integral of conj(Y_l1m1) conj(Y_l2m2) Y_lam1mu1 Y_lam2mu2 over the unit sphere."""

    if m1 + m2 != mu1 + mu2:
        return 0.0
    if abs(m1) > l1 or abs(m2) > l2 or abs(mu1) > lam1 or abs(mu2) > lam2:
        return 0.0
    M = m1 + m2
    prefactor = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * lam1 + 1) * (2 * lam2 + 1)) / FOUR_PI
    total = 0.0
    for L in range(max(abs(l1 - l2), abs(lam1 - lam2), abs(M)), min(l1 + l2, lam1 + lam2) + 1):
        total += (
            (2 * L + 1)
            * threej_zero_m(l1, l2, L)
            * threej_zero_m(lam1, lam2, L)
            * threej(l1, l2, L, m1, m2, -M)
            * threej(lam1, lam2, L, mu1, mu2, -M)
        )
    return prefactor * total


def sphere_grid(order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Polar angles, azimuths and product weights of an ``order`` x ``order`` rule."""

    nodes, weights = np.polynomial.legendre.leggauss(order)
    theta = np.arccos(nodes)
    phi = 2.0 * math.pi * np.arange(order) / order
    grid_weights = weights[:, None] * np.full(order, 2.0 * math.pi / order)[None, :]
    return theta, phi, grid_weights


def y4_quadrature_complex(
    l1: int, m1: int, l2: int, m2: int, lam1: int, mu1: int, lam2: int, mu2: int, order: int
) -> complex:
    needed = 2 * (l1 + l2 + lam1 + lam2) + 2
    if order < needed:
        raise InsufficientOrderError(f"quadrature order {order} is below the required {needed}")
    theta, phi, weights = sphere_grid(order)
    polar = theta[:, None]
    azimuth = phi[None, :]
    integrand = (
        np.conj(special.sph_harm_y(l1, m1, polar, azimuth))
        * np.conj(special.sph_harm_y(l2, m2, polar, azimuth))
        * special.sph_harm_y(lam1, mu1, polar, azimuth)
        * special.sph_harm_y(lam2, mu2, polar, azimuth)
    )
    return complex(np.sum(weights * integrand))


def y4_quadrature(
    l1: int, m1: int, l2: int, m2: int, lam1: int, mu1: int, lam2: int, mu2: int, order: int
) -> float:
    """Numerical counterpart of :func:`y4_analytic` on a product quadrature grid."""

    return y4_quadrature_complex(l1, m1, l2, m2, lam1, mu1, lam2, mu2, order).real


@dataclass(frozen=True)
class Y4Table:
    """Every four-harmonic integral for l <= l_max, indexed by flattened (l, m)."""

    l_max: int
    labels: Tuple[Tuple[int, int], ...]
    values: np.ndarray = field(compare=False, repr=False)

    def position(self, l: int, m: int) -> int:
        return l * l + l + m


def y4_quadrature_table(l_max: int, order: int) -> Y4Table:
    needed = 8 * l_max + 2
    if order < needed:
        raise InsufficientOrderError(f"quadrature order {order} is below the required {needed}")
    labels = tuple((l, m) for l in range(l_max + 1) for m in range(-l, l + 1))
    theta, phi, weights = sphere_grid(order)
    harmonics = np.stack(
        [special.sph_harm_y(l, m, theta[:, None], phi[None, :]).ravel() for l, m in labels]
    )
    flat_weights = weights.ravel()
    count = len(labels)
    bra = (np.conj(harmonics)[:, None, :] * np.conj(harmonics)[None, :, :]).reshape(count * count, -1)
    ket = (harmonics[:, None, :] * harmonics[None, :, :]).reshape(count * count, -1)
    values = (bra * flat_weights) @ ket.T
    return Y4Table(l_max=l_max, labels=labels, values=values.reshape(count, count, count, count))


def contact_me(l1: int, l2: int, l1p: int, l2p: int, L: int) -> float:
    """<(l1 l2) L M | delta | (l1p l2p) L M>; independent of M and separable."""

    return (
        math.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l1p + 1) * (2 * l2p + 1))
        * threej_zero_m(l1, l2, L)
        * threej_zero_m(l1p, l2p, L)
        / FOUR_PI
    )


def contact_me_assembled(
    l1: int,
    l2: int,
    l1p: int,
    l2p: int,
    L: int,
    M: int = 0,
    integral: Y4Integral = y4_analytic,
) -> float:
    """Contact matrix element rebuilt from Clebsch-Gordan sums over ``integral``."""

    total = 0.0
    for m1 in range(-l1, l1 + 1):
        m2 = M - m1
        if abs(m2) > l2:
            continue
        left = clebsch_gordan(l1, m1, l2, m2, L, M)
        if left == 0.0:
            continue
        for m1p in range(-l1p, l1p + 1):
            m2p = M - m1p
            if abs(m2p) > l2p:
                continue
            right = clebsch_gordan(l1p, m1p, l2p, m2p, L, M)
            if right == 0.0:
                continue
            total += left * right * integral(l1, m1, l2, m2, l1p, m1p, l2p, m2p)
    return total


def max_l_for_cutoff(cutoff: float) -> int:
    """Largest l with l(l+1) <= cutoff**2 (with a relative rounding guard)."""

    bound = cutoff * cutoff * (1.0 + 1e-12)
    l = int(math.floor(math.sqrt(bound + 0.25) - 0.5)) + 1
    while l >= 0 and l * (l + 1) > bound:
        l -= 1
    return l


def coupled_basis(L: int, cutoff: float) -> List[CoupledIndex]:
    """Triangle- and parity-allowed |(l1 l2) L 0> with l_i(l_i+1) <= cutoff**2."""

    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    l_max = max_l_for_cutoff(cutoff)
    basis: List[CoupledIndex] = []
    for l1 in range(l_max + 1):
        for l2 in range(abs(l1 - L), min(l1 + L, l_max) + 1):
            if (l1 + l2 + L) % 2 == 0:
                basis.append(CoupledIndex(l1, l2, L))
    return basis


def build_me_table(L: int, cutoff: float) -> MatrixElementTable:
    basis = coupled_basis(L, cutoff)
    if not basis:
        raise EmptyBasisError(f"no (l1, l2) pair couples to L={L} under cutoff {cutoff}")
    vector = np.array(
        [math.sqrt((2 * b.l1 + 1) * (2 * b.l2 + 1)) * threej_zero_m(b.l1, b.l2, L) for b in basis]
    )
    values = np.outer(vector, vector) / FOUR_PI
    values.setflags(write=False)
    return MatrixElementTable(
        L=L,
        cutoff=float(cutoff),
        indices=tuple((b.l1, b.l2) for b in basis),
        values=values,
    )


__all__ = [
    "MAX_ANGULAR_MOMENTUM",
    "CoupledIndex",
    "MatrixElementTable",
    "Y4Table",
    "triangle",
    "threej_zero_m",
    "threej",
    "threej_zero_m_squared",
    "clebsch_gordan",
    "y4_analytic",
    "y4_quadrature",
    "y4_quadrature_complex",
    "y4_quadrature_table",
    "sphere_grid",
    "contact_me",
    "contact_me_assembled",
    "max_l_for_cutoff",
    "coupled_basis",
    "build_me_table",
]
