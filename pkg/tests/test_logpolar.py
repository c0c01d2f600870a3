import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from spiderweb.logpolar import (ONE, ZERO, LogComplex, ZeroFactor, conj, div, from_cartesian, log1p_polar,
                                mul, one_plus, pow_int, reduce_arg)

log_mods = st.floats(-80, 80, allow_nan=False)
angles = st.floats(-math.pi, math.pi, allow_nan=False)


def mp_log1p(lm, th):
    with mpmath.workdps(40):
        w = mpmath.exp(mpmath.mpf(lm)) * mpmath.expj(mpmath.mpf(th))
        v = mpmath.log(1 + w)
        return float(v.real), float(v.imag)


@settings(max_examples=300, deadline=None)
@given(log_mods, angles)
def test_one_plus_matches_mpmath(lm, th):
    with mpmath.workdps(40):
        gap = abs(1 + mpmath.exp(mpmath.mpf(lm)) * mpmath.expj(mpmath.mpf(th)))
    assume(gap > 1e-3)
    re, im = mp_log1p(lm, th)
    w = one_plus(LogComplex(lm, th))
    assert abs(w.log_mod - re) <= 1e-13 * max(1.0, abs(re)) + 1e-300
    # compare modulo 2 pi: both sides of the cut are pi apart from -pi
    assert abs(reduce_arg(w.arg - im)) <= 1e-13 * max(1.0, abs(im)) + 1e-300


def test_one_plus_tiny_w_keeps_relative_accuracy():
    # |w| = e^-60: log(1+w) ~ w, far below double epsilon relative to 1
    w = one_plus(LogComplex(-60.0, 1.0))
    re, im = mp_log1p(-60.0, 1.0)
    assert w.log_mod == pytest.approx(re, rel=1e-14)
    assert w.arg == pytest.approx(im, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(log_mods, angles), min_size=1, max_size=20))
def test_vectorised_matches_scalar(pts):
    lm = np.array([p[0] for p in pts])
    th = np.array([p[1] for p in pts])
    re, im = log1p_polar(lm, th)
    for k, (a, b) in enumerate(pts):
        try:
            w = one_plus(LogComplex(a, b))
        except ZeroFactor:
            assert re[k] == -math.inf
            continue
        assert re[k] == pytest.approx(w.log_mod, rel=1e-12, abs=1e-300)
        assert abs(reduce_arg(im[k] - w.arg)) <= 1e-12 * max(1.0, abs(w.arg)) + 1e-300


def test_exact_zero_raises():
    with pytest.raises(ZeroFactor):
        one_plus(LogComplex(0.0, math.pi))
    re, _ = log1p_polar(np.array([0.0]), np.array([math.pi]))
    assert re[0] == -math.inf


def test_cut_sides():
    # 1 + w = -3 on both sides of the negative axis
    re, im = log1p_polar(np.array([math.log(4.0)] * 2), np.array([math.pi, -math.pi]))
    np.testing.assert_allclose(re, math.log(3.0), rtol=1e-15)
    assert im[0] == math.pi and im[1] == -math.pi


def test_reduce_arg_range():
    assert reduce_arg(math.pi) == math.pi
    assert reduce_arg(-math.pi) == math.pi
    assert reduce_arg(3 * math.pi) == pytest.approx(math.pi)
    assert reduce_arg(1e6) == pytest.approx(math.remainder(1e6, 2 * math.pi))


@given(log_mods, st.floats(-1e3, 1e3), log_mods, st.floats(-1e3, 1e3))
def test_mul_div_roundtrip(a, b, c, d):
    u, v = LogComplex(a, b), LogComplex(c, d)
    w = div(mul(u, v), v)
    assert w.log_mod == pytest.approx(a, abs=1e-12)
    assert w.arg == pytest.approx(b, abs=1e-9)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_cartesian_roundtrip(x, y):
    assume(abs(x) + abs(y) > 1e-6)
    z = from_cartesian(x, y).to_complex()
    assert z.real == pytest.approx(x, rel=1e-12, abs=1e-12 * (abs(x) + abs(y)))
    assert z.imag == pytest.approx(y, rel=1e-12, abs=1e-12 * (abs(x) + abs(y)))


def test_pow_conj_and_zero():
    u = LogComplex(0.5, 0.3)
    assert pow_int(u, 3) == LogComplex(1.5, 0.3 * 3)
    assert pow_int(u, 0) == ONE
    assert conj(u).arg == -0.3
    assert mul(ZERO, u).is_zero
    assert from_cartesian(0.0, 0.0).is_zero
    with pytest.raises(ZeroDivisionError):
        div(u, ZERO)
    with pytest.raises(ValueError):
        LogComplex(math.nan, 0.0)


def test_huge_modulus_survives():
    # |w| = e^(10^6) would overflow any float complex
    w = one_plus(LogComplex(1e6, 0.25))
    assert w.log_mod == pytest.approx(1e6, rel=1e-15)
    assert w.arg == pytest.approx(0.25, rel=1e-15)
