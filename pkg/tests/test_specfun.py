import math

import mpmath
import numpy as np
import pytest

from s2contact.errors import PoleError
from s2contact.specfun import (
    digamma,
    digamma_complex,
    digamma_conjugate_sum,
    digamma_pair_sum,
    is_pole,
    pole_mask,
    trigamma,
    trigamma_complex,
    trigamma_pair_difference,
)


@pytest.mark.parametrize("z", [0.5, 1.0, 1.8, 7.25, -0.5, -3.7, 120.0])
def test_digamma_matches_mpmath(z: float) -> None:
    assert digamma(z) == pytest.approx(float(mpmath.digamma(z)), rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("z", [0.3, 2.0, -1.5, -4.25, 40.0])
def test_trigamma_matches_mpmath(z: float) -> None:
    assert trigamma(z) == pytest.approx(float(mpmath.psi(1, z)), rel=1e-12)


@pytest.mark.parametrize(
    "z", [complex(0.5, 3.0), complex(-2.3, 0.7), complex(12.0, -4.0), complex(0.1, 30.0)]
)
def test_complex_functions_match_mpmath(z: complex) -> None:
    assert digamma_complex(z) == pytest.approx(complex(mpmath.digamma(z)), rel=1e-12)
    assert trigamma_complex(z) == pytest.approx(complex(mpmath.psi(1, z)), rel=1e-12)


def test_digamma_recurrence_and_reflection() -> None:
    for z in (0.25, 1.7, 5.5):
        assert digamma(z + 1.0) - digamma(z) == pytest.approx(1.0 / z, rel=1e-13)
    z = 0.3
    reflected = digamma(1.0 - z) - digamma(z)
    assert reflected == pytest.approx(math.pi / math.tan(math.pi * z), rel=1e-13)


def test_digamma_asymptotics() -> None:
    z = 1.0e6
    assert digamma(z) == pytest.approx(math.log(z) - 0.5 / z, rel=1e-14)


def test_conjugate_symmetry_is_exact() -> None:
    z = complex(0.5, 2.75)
    assert digamma_complex(z.conjugate()) == digamma_complex(z).conjugate()
    assert digamma_conjugate_sum(0.5, 2.75) == digamma_conjugate_sum(0.5, -2.75)
    assert digamma_conjugate_sum(0.5, 2.75) == pytest.approx(
        float(mpmath.re(2 * mpmath.digamma(mpmath.mpc(0.5, 2.75)))), rel=1e-13
    )


@pytest.mark.parametrize("z", [0.0, -1.0, -7.0])
def test_poles_raise(z: float) -> None:
    assert is_pole(z)
    with pytest.raises(PoleError) as caught:
        digamma(z)
    assert caught.value.argument == z
    with pytest.raises(PoleError):
        trigamma(z)
    with pytest.raises(PoleError):
        digamma_complex(complex(z, 0.0))


def test_positive_integers_are_not_poles() -> None:
    assert not is_pole(1.0)
    assert not is_pole(-0.5)
    mask = pole_mask(np.array([-2.0, -1.5, 0.0, 3.0]))
    assert mask.tolist() == [True, False, True, False]


def test_pair_sum_real_and_complex_branches() -> None:
    expected = float(mpmath.digamma(0.25) + mpmath.digamma(1.75))
    assert digamma_pair_sum(1.0, 2.25) == pytest.approx(expected, rel=1e-13)
    complex_expected = float(2 * mpmath.re(mpmath.digamma(mpmath.mpc(1.0, 1.5))))
    assert digamma_pair_sum(1.0, -9.0) == pytest.approx(complex_expected, rel=1e-13)


def test_pair_sum_is_continuous_through_zero_radicand() -> None:
    at_zero = digamma_pair_sum(0.75, 0.0)
    assert at_zero == pytest.approx(2.0 * digamma(0.75), rel=1e-14)
    assert digamma_pair_sum(0.75, 1e-10) == pytest.approx(at_zero, rel=1e-8)
    assert digamma_pair_sum(0.75, -1e-10) == pytest.approx(at_zero, rel=1e-8)


def test_pair_sum_vectorized_marks_poles_with_nan() -> None:
    values = digamma_pair_sum(0.5, np.array([9.0, 2.25, -4.0]))
    assert np.isnan(values[0])
    assert np.isfinite(values[1:]).all()
    with pytest.raises(PoleError):
        digamma_pair_sum(0.5, 9.0)


def test_trigamma_pair_difference_limits() -> None:
    c = 1.25
    assert trigamma_pair_difference(c, 0.0) == pytest.approx(-float(mpmath.psi(2, c)), rel=1e-12)
    assert trigamma_pair_difference(c, 1e-8) == pytest.approx(
        trigamma_pair_difference(c, 0.0), rel=1e-5
    )
    assert trigamma_pair_difference(c, -1e-8) == pytest.approx(
        trigamma_pair_difference(c, 0.0), rel=1e-5
    )
    root = 3.0
    expected = float((mpmath.psi(1, c - root / 2) - mpmath.psi(1, c + root / 2)) / root)
    assert trigamma_pair_difference(c, root**2) == pytest.approx(expected, rel=1e-12)
