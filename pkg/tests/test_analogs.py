import math

import numpy as np
import pytest
from scipy import optimize

from s2contact.analogs import (
    SIERPINSKI_K,
    TorusSumSpec,
    cm_shift_curve,
    ho_condition,
    ho_poles,
    ho_zeros,
    intercepts,
    shift_mismatch,
    torus_lattice_sum,
    torus_poles,
    torus_s2,
    torus_s2_naive,
    torus_zeros,
)
from s2contact.errors import BracketError, PoleError
from s2contact.quantization import bracket_branch, z_closed


def test_ho_condition_at_zero() -> None:
    expected = (np.euler_gamma + 2.0 * math.log(2.0)) / 2.0
    assert ho_condition(0.0) == pytest.approx(expected, abs=1e-12)
    assert ho_condition(0.0) == pytest.approx(0.9817558, abs=1e-7)


def test_ho_poles_and_zero() -> None:
    assert ho_poles(3) == (1.0, 3.0, 5.0)
    for pole in ho_poles(3):
        with pytest.raises(PoleError):
            ho_condition(pole)
    zeros = ho_zeros(2)
    assert zeros[0] == pytest.approx(-1.92326, abs=1e-5)
    assert 1.0 < zeros[1] < 3.0


def test_sierpinski_constant() -> None:
    assert SIERPINSKI_K == pytest.approx(2.584981759579253, abs=1e-12)


def test_torus_poles_are_sums_of_two_squares() -> None:
    assert torus_poles(5) == (0.0, 1.0, 2.0, 4.0, 5.0)
    assert torus_poles(8) == (0.0, 1.0, 2.0, 4.0, 5.0, 8.0, 9.0, 10.0)
    for pole in (0.0, 1.0, 2.0, 4.0, 5.0):
        with pytest.raises(PoleError):
            torus_s2(pole, TorusSumSpec(cutoff=20.0, extrapolate=False))
    with pytest.raises(PoleError):
        torus_s2(0.0)


def test_octant_sum_matches_full_lattice() -> None:
    for x in (-1.3, 0.5, 3.7):
        raw = torus_s2(x, TorusSumSpec(cutoff=50.0, extrapolate=False))
        assert raw == pytest.approx(torus_s2_naive(x, 50.0), abs=1e-13)


def test_lattice_sum_includes_the_origin() -> None:
    assert torus_lattice_sum(-1.0, 1.0) == pytest.approx(1.0 + 4.0 / 2.0)
    assert torus_lattice_sum(-1.0, math.sqrt(2.0)) == pytest.approx(1.0 + 4.0 / 2.0 + 4.0 / 3.0)


def test_extrapolated_torus_sum_is_stable_across_ladders() -> None:
    value = torus_s2(-1.0, TorusSumSpec(cutoff=200.0))
    assert value == pytest.approx(torus_s2(-1.0, TorusSumSpec(cutoff=300.0)), abs=1e-8)
    raw = torus_s2(-1.0, TorusSumSpec(cutoff=800.0, extrapolate=False))
    assert raw == pytest.approx(value, abs=1e-4)


def test_torus_spec_validation() -> None:
    assert TorusSumSpec(cutoff=100.0).ladder == (100.0, 200.0, 400.0)
    with pytest.raises(ValueError):
        TorusSumSpec(cutoff=0.5)


def test_both_analogs_have_a_negative_lowest_intercept() -> None:
    assert ho_zeros(1)[0] < 0
    zero = torus_zeros(1)[0]
    assert zero < 0
    assert torus_s2(zero) == pytest.approx(0.0, abs=1e-9)


def test_shift_by_zero_is_the_identity() -> None:
    grid = np.linspace(-4.5, 6.5, 50)
    shifted = cm_shift_curve(ho_condition, 0.0)
    assert [shifted(x) for x in grid] == [ho_condition(x) for x in grid]


def test_oscillator_shift_moves_the_poles() -> None:
    shifted = cm_shift_curve(ho_condition, 2.0)
    for pole in (3.0, 5.0, 7.0):
        with pytest.raises(PoleError):
            shifted(pole)
    assert math.isfinite(shifted(1.0))


def test_torus_shift_translates_the_zero() -> None:
    spec = TorusSumSpec(cutoff=200.0)
    zero = torus_zeros(1, spec)[0]
    shifted = cm_shift_curve(lambda x: torus_s2(x, spec), 1.0)
    moved = optimize.brentq(shifted, zero + 0.5, 1.0 - 1e-9, xtol=1e-13)
    assert moved == pytest.approx(zero + 1.0, abs=1e-10)


def test_sphere_bands_are_not_rigid_shifts_of_each_other() -> None:
    grid = np.linspace(-9.0, 30.0, 157)
    shifts = np.linspace(-6.0, 6.0, 121)
    mismatch = shift_mismatch(
        lambda x: z_closed(1, x), lambda x: z_closed(0, x), grid, shifts
    )
    assert mismatch > 0.1

    rigid = shift_mismatch(cm_shift_curve(ho_condition, 2.0), ho_condition, grid, [0.0, 2.0])
    assert rigid == 0.0


def test_intercepts_validation() -> None:
    with pytest.raises(ValueError):
        intercepts(ho_condition, ho_poles(2), 2)
    with pytest.raises(ValueError):
        intercepts(ho_condition, ho_poles(3), 0)
    with pytest.raises(BracketError):
        intercepts(lambda x: 1.0, (0.0, 1.0), 1)


def test_shared_branch_bracket() -> None:
    lo, hi = bracket_branch(lambda x: x + 3.0, (0.0, 1.0), 0)
    assert lo == -10.0
    assert hi == pytest.approx(-1e-9)
    assert bracket_branch(lambda x: x - 0.5, (0.0, 1.0, 2.0), 1) == pytest.approx((1e-9, 1.0 - 1e-9))

    with pytest.raises(BracketError) as caught:
        bracket_branch(lambda x: 1.0, (0.0, 1.0), 0, start=-1e308)
    assert caught.value.diagnostics["expansions"] == 0
    with pytest.raises(ValueError):
        bracket_branch(lambda x: x, (0.0,), 0)
