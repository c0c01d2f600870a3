"""Log-polar complex numbers.

A nonzero complex number is stored as ``(log|z|, arg z)``.  The argument is
*not* reduced modulo 2*pi, so a value produced by continuation keeps its
winding history.  Zero is a distinguished encoding (``log_mod == -inf``).

Besides the scalar operations there is a vectorised kernel,
:func:`log1p_polar`, used by the product evaluator on numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEG_INFINITY = -math.inf
TWO_PI = 2.0 * math.pi

# |w| <= e^-40: log(1+w) = w - w^2/2 with a neglected cubic term below 1e-52.
SMALL_LOG = -40.0
LARGE_LOG = 40.0


class ZeroFactor(ArithmeticError):
    """Raised when a factor ``1 + w`` vanishes, i.e. a curve hit a zero of f."""


@dataclass(frozen=True)
class LogComplex:
    log_mod: float
    arg: float = 0.0

    @property
    def is_zero(self) -> bool:
        return self.log_mod == NEG_INFINITY

    def __post_init__(self):
        if self.log_mod != self.log_mod or self.log_mod == math.inf:
            raise ValueError(f"log_mod must be finite or -inf, got {self.log_mod!r}")

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return mul(self, other)

    def conjugate(self) -> "LogComplex":
        return conj(self)

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        r = math.exp(self.log_mod)
        return complex(r * math.cos(self.arg), r * math.sin(self.arg))

    def __repr__(self):
        if self.is_zero:
            return "LogComplex(zero)"
        return f"LogComplex(log_mod={self.log_mod!r}, arg={self.arg!r})"


ZERO = LogComplex(NEG_INFINITY, 0.0)
ONE = LogComplex(0.0, 0.0)


def reduce_arg(theta: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    t = math.remainder(theta, TWO_PI)
    if t <= -math.pi:
        t += TWO_PI
    return t


def from_cartesian(x: float, y: float) -> LogComplex:
    if x == 0.0 and y == 0.0:
        return ZERO
    return LogComplex(math.log(math.hypot(x, y)), reduce_arg(math.atan2(y, x)))


def from_complex(z: complex) -> LogComplex:
    return from_cartesian(z.real, z.imag)


def from_polar(log_mod: float, arg: float) -> LogComplex:
    return LogComplex(log_mod, arg)


def mul(u: LogComplex, v: LogComplex) -> LogComplex:
    if u.is_zero or v.is_zero:
        return ZERO
    return LogComplex(u.log_mod + v.log_mod, u.arg + v.arg)


def div(u: LogComplex, v: LogComplex) -> LogComplex:
    if v.is_zero:
        raise ZeroDivisionError("division by the zero LogComplex")
    if u.is_zero:
        return ZERO
    return LogComplex(u.log_mod - v.log_mod, u.arg - v.arg)


def inv(u: LogComplex) -> LogComplex:
    return div(ONE, u)


def conj(u: LogComplex) -> LogComplex:
    if u.is_zero:
        return ZERO
    return LogComplex(u.log_mod, -u.arg)


def pow_int(u: LogComplex, k: int) -> LogComplex:
    if k < 0:
        raise ValueError("pow_int takes a nonnegative exponent")
    if k == 0:
        return ONE
    if u.is_zero:
        return ZERO
    return LogComplex(k * u.log_mod, k * u.arg)


def _log1p_small(x: float, y: float) -> tuple[float, float]:
    # log(1+w) = w - w^2/2 + O(|w|^3)
    return x - 0.5 * (x * x - y * y), y - x * y


def one_plus(w: LogComplex) -> LogComplex:
    """Return ``1 + w`` with full relative accuracy in every magnitude regime.

    The result's argument lies in (-pi, pi].  Raises :class:`ZeroFactor` when
    ``1 + w`` is exactly zero in floating point.
    """
    if w.is_zero:
        return ONE
    lm = w.log_mod
    if lm <= SMALL_LOG:
        r = math.exp(lm)
        re, im = _log1p_small(r * math.cos(w.arg), r * math.sin(w.arg))
        return LogComplex(re, reduce_arg(im))
    if lm >= LARGE_LOG:
        # 1 + w = w * (1 + 1/w), with 1/w in the small regime
        r = math.exp(-lm)
        t = reduce_arg(w.arg)
        re, im = _log1p_small(r * math.cos(-t), r * math.sin(-t))
        return LogComplex(lm + re, reduce_arg(t + im))
    r = math.exp(lm)
    t = reduce_arg(w.arg)
    x = r * math.cos(t)
    y = 0.0 if t == math.pi else r * math.sin(t)
    u = 1.0 + x
    if u == 0.0 and y == 0.0:
        raise ZeroFactor("1 + w vanishes")
    s = u * u + y * y
    if 0.5 < s < 2.0:
        log_mod = 0.5 * math.log1p(2.0 * x + x * x + y * y)
    else:
        log_mod = 0.5 * math.log(s) if s > 0.0 else math.log(math.hypot(u, y))
    return LogComplex(log_mod, reduce_arg(math.atan2(y, u)))


def log1p_polar(log_w: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``Log(1 + w)`` for ``w = exp(log_w + i*theta)``.

    Returns ``(log|1+w|, Arg(1+w))`` with the same three regimes as
    :func:`one_plus`.  ``theta`` is expected in [-pi, pi]; for ``w < -1`` on
    the cut ``theta == pi`` gives ``Arg = pi`` and ``theta == -pi`` gives ``-pi``.
    Exact zeros of ``1 + w`` give ``-inf`` in the modulus.
    """
    log_w = np.asarray(log_w, dtype=float)
    theta = np.asarray(theta, dtype=float)
    log_w, theta = np.broadcast_arrays(log_w, theta)
    re = np.empty(log_w.shape)
    im = np.empty(log_w.shape)

    small = log_w <= SMALL_LOG
    large = log_w >= LARGE_LOG
    mid = ~(small | large)

    if small.any():
        r = np.exp(log_w[small])
        x = r * np.cos(theta[small])
        y = r * np.sin(theta[small])
        re[small] = x - 0.5 * (x * x - y * y)
        im[small] = y - x * y
    if large.any():
        r = np.exp(-log_w[large])
        t = theta[large]
        x = r * np.cos(t)
        y = -r * np.sin(t)
        re[large] = log_w[large] + x - 0.5 * (x * x - y * y)
        im[large] = t + (y - x * y)
    if mid.any():
        r = np.exp(log_w[mid])
        t = theta[mid]
        x = r * np.cos(t)
        y = r * np.sin(t)
        # sin(pi) is not exactly zero; put points of the cut exactly on it
        y = np.where(t == math.pi, 0.0, np.where(t == -math.pi, -0.0, y))
        u = 1.0 + x
        s = u * u + y * y
        near_one = (s > 0.5) & (s < 2.0)
        with np.errstate(divide="ignore"):
            lm = np.where(near_one, 0.5 * np.log1p(np.where(near_one, 2.0 * x + x * x + y * y, 0.0)),
                          0.5 * np.log(s))
        re[mid] = lm
        im[mid] = np.arctan2(y, u)
    return re, im
