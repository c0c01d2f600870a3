import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spiderweb.entire_product import explicit, log_f_arrays, preset
from spiderweb.modulus import (AtZero, GrowthProfile, RangeTooSmall, convexity_defects, estimate_order,
                               find_min_condition_rho, growth_profile, hadamard_check, iterate_log_M,
                               iterate_log_mu, log_max_modulus, log_min_modulus, log_min_modulus_array)

COSH = preset("cosh_sqrt")
CUBE = preset("power", q=3)


def test_cosh_max_and_min_at_four():
    assert log_max_modulus(COSH, math.log(4.0)) == pytest.approx(math.log(math.cosh(2.0)), abs=1e-10)
    assert log_min_modulus(COSH, math.log(4.0)) == pytest.approx(math.log(abs(math.cos(2.0))), abs=1e-10)
    assert log_min_modulus(COSH, math.log(4.0)) == pytest.approx(-0.8767171, abs=1e-7)


def test_cube_max_against_angular_scan():
    # brute-force max over 10^4 angles (theta = 0 included)
    lr = math.log(8.0)
    th = np.linspace(-math.pi, math.pi, 10 ** 4, endpoint=False)
    re, _ = log_f_arrays(CUBE, np.full(th.size, lr), th, strict=False)
    assert log_max_modulus(CUBE, lr) == pytest.approx(float(np.max(re)), abs=1e-9)
    # r = 8 = 2^3 is a zero, so the minimum over the circle is -inf
    assert np.min(re) == -math.inf


def test_at_zero():
    with pytest.raises(AtZero):
        log_min_modulus(COSH, math.log((math.pi / 2) ** 2))
    assert log_min_modulus_array(CUBE, np.array([math.log(8.0)]))[0] == -math.inf


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 9), st.lists(st.floats(0, math.pi), min_size=2, max_size=10, unique=True))
def test_modulus_decreases_in_angle(lr, ths):
    th = np.sort(np.array(ths))
    for f in (COSH, CUBE, explicit([(0.5, 1), (7.0, 2)])):
        re, _ = log_f_arrays(f, np.full(th.size, lr), th, strict=False)
        assert np.all(np.diff(re) <= 1e-12 * np.maximum(1, np.abs(re[1:])))


def test_order_estimates():
    assert estimate_order(COSH, (20, 60)) == pytest.approx(0.5, abs=0.02)
    assert estimate_order(preset("power", q=2), (20, 60)) == pytest.approx(0.5, abs=0.03)
    assert estimate_order(CUBE, (30, 90)) == pytest.approx(1 / 3, abs=0.03)
    with pytest.raises(RangeTooSmall):
        estimate_order(COSH, (5, 5))


@pytest.mark.parametrize("f", [COSH, CUBE, preset("sinh_sqrt_over_sqrt")])
def test_hadamard(f):
    for lr in np.linspace(math.log(10), 12, 12):
        for c in (1.1, 2.0, 3.0):
            assert hadamard_check(f, lr, c)
    assert np.all(convexity_defects(f, np.linspace(math.log(10), math.log(1e6), 200)) >= -1e-9)


def test_hadamard_needs_c_above_one():
    with pytest.raises(ValueError):
        hadamard_check(COSH, 2.0, 1.0)


def test_min_condition():
    # cosh: m(r) = |cos sqrt r| <= 1 < M(r), so no radius works
    assert find_min_condition_rho(COSH, 4.0, 2.0) is None
    rho = find_min_condition_rho(CUBE, 5.0, 2.0)
    assert rho is not None and 5.0 < rho < 10.0
    assert log_min_modulus(CUBE, rho) >= log_max_modulus(CUBE, 5.0)


def test_iterates_cosh_closed_form():
    lam = iterate_log_M(COSH, math.log(100.0), 2)
    with mpmath.workdps(30):
        want1 = mpmath.log(mpmath.cosh(10))
        want2 = mpmath.log(mpmath.cosh(mpmath.sqrt(mpmath.exp(want1))))
    assert lam[1] == pytest.approx(float(want1), rel=1e-12)
    assert lam[2] == pytest.approx(float(want2), rel=1e-10)
    mu = iterate_log_mu(COSH, math.log(100.0), 0.5, 1)
    assert mu[1] == pytest.approx(0.5 * lam[1])
    with pytest.raises(ValueError):
        iterate_log_mu(COSH, 1.0, 0.0, 1)


def test_growth_profile_csv(tmp_path):
    prof = growth_profile(COSH, 1.0, 5.0, 9)
    prof.to_csv(tmp_path / "g.csv")
    back = GrowthProfile.from_csv(tmp_path / "g.csv")
    np.testing.assert_array_equal(np.array(back.samples), np.array(prof.samples, dtype=float))
    assert prof.hadamard_ok
    with pytest.raises(RangeTooSmall):
        growth_profile(COSH, 5.0, 1.0, 3)
