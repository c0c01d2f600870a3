"""Zero families: generators for (a_n, p_n), exact tail moments and closed forms.

Tail moments ``S_k(N) = sum_{n>N} p_n a_n^{-k}`` are Hurwitz zeta values for
the power-law family and both presets:

* power law ``a_n = alpha n^q``:        ``S_k = p alpha^{-k} zeta(qk, N+1)``
* ``cosh_sqrt``, ``a_n = ((2n-1)pi/2)^2``: ``S_k = pi^{-2k} zeta(2k, N+1/2)``
* ``sinh_sqrt_over_sqrt``, ``a_n = (n pi)^2``: ``S_k = pi^{-2k} zeta(2k, N+1)``

Closed forms (used for evaluation beyond a truncation radius, and never as
the oracle for the truncated product in tests):

* ``cosh_sqrt``:  ``log cosh(sqrt z)``
* ``sinh_sqrt_over_sqrt``: ``log(sinh(sqrt z)/sqrt z)``
* power law with integer ``q >= 2``: ``prod_n (1 + x^q/n^q) = prod_j 1/Gamma(1 - x e^{i pi (2j+1)/q})``
  with ``x = (z/alpha)^{1/q}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import loggamma

KINDS = ("explicit", "power", "cosh_sqrt", "sinh_sqrt_over_sqrt")

# closed forms in double precision are used while log|x| stays below this
DOUBLE_LOG_LIMIT = 650.0
# largest log|x| handed to mpmath.exp in the extended regime
EXTENDED_MAG_LIMIT = 2 ** 17
# beyond this |x| the phase of sin(pi x) in double precision is unreliable
PHASE_LIMIT = 2.0 ** 40


class TailNotSummable(ValueError):
    pass


class OutOfValidity(ValueError):
    """An evaluation was requested outside every available evaluator's range."""


@dataclass(frozen=True)
class ZeroFamily:
    kind: str
    alpha: float = 1.0
    q: float = 2.0
    p: int = 1
    zeros: tuple = field(default_factory=tuple)  # explicit: ((a, p), ...)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "power":
            if self.alpha <= 0 or self.q <= 0:
                raise ValueError("power-law family needs alpha > 0 and q > 0")
            if self.p < 1:
                raise ValueError("multiplicity must be >= 1")

    @property
    def is_finite(self) -> bool:
        return self.kind == "explicit"

    @property
    def integer_q(self) -> bool:
        return self.kind == "power" and float(self.q).is_integer() and self.q >= 2

    @property
    def has_closed_form(self) -> bool:
        return self.kind in ("cosh_sqrt", "sinh_sqrt_over_sqrt") or self.integer_q

    def order(self) -> float:
        if self.kind == "power":
            return 1.0 / self.q
        if self.kind == "explicit":
            return 0.0
        return 0.5

    # ---- zeros -------------------------------------------------------
    def zero(self, n: int) -> float:
        """The n-th zero modulus a_n (1-based)."""
        if self.kind == "power":
            return self.alpha * n ** self.q
        if self.kind == "cosh_sqrt":
            return ((2 * n - 1) * math.pi / 2) ** 2
        if self.kind == "sinh_sqrt_over_sqrt":
            return (n * math.pi) ** 2
        return float(self.zeros[n - 1][0])

    def first_n(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "explicit":
            count = min(count, len(self.zeros))
            a = np.array([z[0] for z in self.zeros[:count]], dtype=float)
            p = np.array([z[1] for z in self.zeros[:count]], dtype=float)
            return a, p
        n = np.arange(1, count + 1, dtype=float)
        if self.kind == "power":
            a = self.alpha * n ** self.q
            p = np.full(count, float(self.p))
        elif self.kind == "cosh_sqrt":
            a = ((2 * n - 1) * math.pi / 2) ** 2
            p = np.ones(count)
        else:
            a = (n * math.pi) ** 2
            p = np.ones(count)
        return a, p

    def count_below(self, x: float) -> int:
        """Number of zeros with a_n < x."""
        if x <= 0:
            return 0
        if self.kind == "explicit":
            return sum(1 for a, _ in self.zeros if a < x)
        if self.kind == "power":
            n = int(math.floor((x / self.alpha) ** (1.0 / self.q))) + 2
        elif self.kind == "cosh_sqrt":
            n = int(math.floor(math.sqrt(x) / math.pi + 0.5)) + 2
        else:
            n = int(math.floor(math.sqrt(x) / math.pi)) + 2
        while n > 0 and self.zero(n) >= x:
            n -= 1
        return n

    def multiplicity_below(self, x: float) -> int:
        """Sum of p_n over zeros with a_n < x."""
        if self.kind == "explicit":
            return sum(int(p) for a, p in self.zeros if a < x)
        return self.count_below(x) * (self.p if self.kind == "power" else 1)

    # ---- tails -------------------------------------------------------
    def tail_moment(self, k: int, n_kept: int) -> mpmath.mpf:
        """Exact ``S_k = sum_{n > n_kept} p_n a_n^{-k}``."""
        # mpmath's Hurwitz zeta loses up to 8 digits at 15-digit working
        # precision for moderate s and large shifts; 50 digits is reliable.
        with mpmath.workdps(50):
            if self.kind == "explicit":
                v = mpmath.fsum(mpmath.mpf(p) * mpmath.mpf(a) ** (-k) for a, p in self.zeros[n_kept:])
            elif self.kind == "power":
                s = mpmath.mpf(self.q) * k
                if s <= 1:
                    raise TailNotSummable(f"sum of a_n^-{k} diverges for q = {self.q}")
                v = self.p * mpmath.mpf(self.alpha) ** (-k) * mpmath.zeta(s, n_kept + 1)
            else:
                shift = mpmath.mpf(0.5) if self.kind == "cosh_sqrt" else mpmath.mpf(1)
                v = mpmath.pi ** (-2 * k) * mpmath.zeta(2 * k, n_kept + shift)
        return +v

    # ---- closed forms ------------------------------------------------
    def closed_form_log(self, log_r: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``Log f(z)`` of the normalised product (c = 1, p0 = 0) in double precision.

        ``theta`` must lie in [0, pi]; ``theta == pi`` returns the upper-side limit.
        """
        log_r = np.asarray(log_r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        log_r, theta = np.broadcast_arrays(log_r, theta)
        if self.kind in ("cosh_sqrt", "sinh_sqrt_over_sqrt"):
            return _sqrt_closed_form(self.kind, log_r, theta)
        if not self.integer_q:
            raise OutOfValidity("no closed form for this family")
        q = int(self.q)
        lx = (log_r - math.log(self.alpha)) / q
        rx = np.exp(lx)
        total = np.zeros(log_r.shape, dtype=complex)
        pole = np.zeros(log_r.shape, dtype=bool)
        for j in range(q):
            if j == q - 1:
                phi = (theta - math.pi) / q
            else:
                phi = (theta + (2 * j + 1) * math.pi) / q
            y = rx * np.cos(phi) + 1j * (rx * np.sin(phi))
            u = (1.0 - y.real) + 1j * (-y.imag + 0.0)
            pole |= (u.imag == 0) & (u.real <= 0) & (u.real == np.round(u.real))
            total -= loggamma(np.where(pole, 0.5, u))
        total *= self.p
        re = np.where(pole, -np.inf, total.real)
        # conjugate pairs cancel exactly on the positive axis; rounding does not
        im = np.where(theta == 0.0, 0.0, total.imag)
        # near the cut the zeros are closer than the spacing of doubles
        lost = (rx > PHASE_LIMIT) & (2 * math.pi * rx * np.sin((math.pi - theta) / q) < 60.0)
        return np.where(lost, np.nan, re), np.where(lost, np.nan, im)

    def closed_form_limit(self) -> float:
        """Largest log-radius handled by :meth:`closed_form_log`."""
        if self.kind in ("cosh_sqrt", "sinh_sqrt_over_sqrt"):
            return 2.0 * DOUBLE_LOG_LIMIT
        if self.integer_q:
            return self.q * DOUBLE_LOG_LIMIT + math.log(self.alpha)
        return -math.inf

    def asymptotic_log(self, log_r, theta: float, margin: float = 60.0):
        """Leading asymptotics of ``Log f`` in extended precision.

        Valid when the neglected exponentially small terms are below
        ``exp(-margin)``; raises :class:`OutOfValidity` otherwise.  Returns a
        pair of mpmath numbers (real part, imaginary part).
        """
        theta = float(theta)
        log_r = mpmath.mpf(log_r)
        if self.kind in ("cosh_sqrt", "sinh_sqrt_over_sqrt"):
            lx = log_r / 2
            phi = theta / 2
            recess = 2 * math.cos(phi)
            const = -mpmath.log(2)
            weight = mpmath.mpf(1)
        elif self.integer_q:
            q = int(self.q)
            lx = (log_r - mpmath.log(self.alpha)) / q
            phi = theta / q
            recess = 2 * math.pi * math.sin((math.pi - theta) / q)
            const = -mpmath.mpf(q) / 2 * mpmath.log(2 * mpmath.pi)
            weight = mpmath.pi / mpmath.sin(mpmath.pi / q)
        else:
            raise OutOfValidity("no asymptotic form for this family")
        if mpmath.mag(lx) > EXTENDED_MAG_LIMIT:
            raise OutOfValidity("log-radius beyond extended range")
        x = mpmath.exp(lx)
        if recess <= 0 or x * recess < margin:
            raise OutOfValidity("too close to the negative axis for the asymptotic form")
        re = weight * x * math.cos(phi) + const
        im = weight * x * math.sin(phi)
        if self.kind == "sinh_sqrt_over_sqrt":
            re -= lx
            im -= phi
        elif self.kind == "power":
            log_w = log_r - mpmath.log(self.alpha)
            re -= log_w / 2
            im -= theta / 2
            re *= self.p
            im *= self.p
        return re, im

    # ---- serialisation -----------------------------------------------
    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "power":
            d.update(alpha=self.alpha, q=self.q)
            if self.p != 1:
                d["p"] = self.p
        elif self.kind == "explicit":
            d["zeros"] = [{"a": a, "p": p} for a, p in self.zeros]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ZeroFamily":
        kind = d["kind"]
        if kind == "explicit":
            zeros = []
            for z in d.get("zeros", []):
                p = int(z.get("p", 1))
                if p == 0:
                    continue
                zeros.append((float(z["a"]), p))
            return cls(kind, zeros=tuple(zeros))
        if kind == "power":
            return cls(kind, alpha=float(d.get("alpha", 1.0)), q=float(d["q"]), p=int(d.get("p", 1)))
        return cls(kind)


def _sqrt_closed_form(kind, log_r, theta):
    re, im = _sqrt_closed_form_raw(kind, log_r, theta)
    rs = np.exp(log_r / 2)
    lost = (rs > PHASE_LIMIT) & (2 * rs * np.cos(theta / 2) < 60.0)
    return np.where(lost, np.nan, re), np.where(lost, np.nan, im)


def _sqrt_closed_form_raw(kind, log_r, theta):
    s = np.exp(log_r / 2) * (np.cos(theta / 2) + 1j * np.sin(theta / 2))
    small = np.abs(s) < 1.0
    out = np.empty(s.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind == "cosh_sqrt":
            out[small] = np.log(np.cosh(s[small]))
            sl = s[~small]
            out[~small] = sl - math.log(2.0) + np.log(1.0 + np.exp(-2.0 * sl))
        else:
            ss = s[small]
            val = np.where(ss == 0, 1.0 + 0j, np.sinh(ss) / np.where(ss == 0, 1.0, ss))
            out[small] = np.log(val)
            sl = s[~small]
            out[~small] = sl - math.log(2.0) + np.log(1.0 - np.exp(-2.0 * sl)) - np.log(sl)
    return out.real, out.imag
