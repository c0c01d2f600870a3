"""Circle maxima and means of ``u = log+(|f|/lambda)`` and the inequalities built on them.

``B(r) = max(0, log M(r) - log lambda)`` and
``T(r) = (1/pi) * int_0^pi max(0, log|f(re^{it})| - log lambda) dt``,
the second using the symmetry of |f| in the real axis.  The integrand has a
single kink, at the angle where the circle leaves ``{|f| > lambda}``; the
integral is taken only up to that angle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .curves import delta_arg, level_arc, level_theta
from .entire_product import EntireProductFunction, log_f_arrays
from .modulus import log_max_modulus, log_min_modulus_array

QUAD_EPSABS = 1e-10
FD_STEP = 1e-4
SLACK = 1e-8
MS_SAMPLES = 32


class HypothesisUnmet(ValueError):
    pass


def B_lambda(f: EntireProductFunction, log_r, log_lambda):
    return max(0.0, log_max_modulus(f, log_r) - log_lambda)


def _log_abs(f, log_r, theta):
    re, _ = log_f_arrays(f, np.array([log_r]), np.array([theta]), strict=False)
    return float(re[0])


def T_lambda(f: EntireProductFunction, log_r: float, log_lambda: float, epsabs: float = QUAD_EPSABS) -> float:
    lev = level_theta(f, log_r, log_lambda)
    if lev.is_empty:
        return 0.0
    upper = lev.theta
    if upper <= 0:
        return 0.0
    val, _ = quad(lambda t: _log_abs(f, log_r, t) - log_lambda, 0.0, upper,
                  epsabs=epsabs, epsrel=1e-13, limit=400)
    return max(0.0, val) / math.pi


def r_T_prime(f: EntireProductFunction, log_r: float, log_lambda: float, h: float = FD_STEP) -> float:
    """``r T'(r)`` = derivative of T in log r: central differences h and h/2, one Richardson step."""
    def d(step):
        return (T_lambda(f, log_r + step, log_lambda) - T_lambda(f, log_r - step, log_lambda)) / (2 * step)
    return (4 * d(h / 2) - d(h)) / 3


def winding_mean_identity(f: EntireProductFunction, log_r: float, log_lambda: float,
                          n_samples: int = 256) -> tuple[float, float]:
    """``(arg change of f along C_lambda(r), 2 pi r T'(r))``; the two agree."""
    arc = level_arc(f, log_r, log_lambda, n_samples)
    lhs = delta_arg(f, arc).delta_arg
    rhs = 2 * math.pi * r_T_prime(f, log_r, log_lambda)
    return lhs, rhs


def poisson_margins(f, log_r, log_r0, log_lambda) -> tuple[float, float]:
    """Margins ``B - T`` at r and ``factor*T(r0) - B(r)``; both are nonnegative."""
    if not log_r < log_r0:
        raise ValueError("need r < r0")
    b = B_lambda(f, log_r, log_lambda)
    t = T_lambda(f, log_r, log_lambda)
    q = math.exp(log_r - log_r0)
    factor = (1 + q) / (1 - q)
    return b - t, factor * T_lambda(f, log_r0, log_lambda) - b


def poisson_bound_check(f, log_r, log_r0, log_lambda) -> bool:
    m1, m2 = poisson_margins(f, log_r, log_r0, log_lambda)
    return m1 >= -SLACK and m2 >= -SLACK


def milloux_schmidt_factor(log_r, log_r0) -> float:
    return 4 / math.pi * math.atan(math.exp(0.5 * (log_r - log_r0)))


def milloux_schmidt_hypothesis(f, log_r0, log_M_level, samples: int = MS_SAMPLES) -> np.ndarray:
    """Radii ``r0*k/(samples+1)`` at which ``m(rho) > M`` (the hypothesis fails there)."""
    rho = log_r0 + np.log(np.arange(1, samples + 1) / (samples + 1))
    lm = log_min_modulus_array(f, rho)
    return rho[lm > log_M_level]


def milloux_schmidt_margin(f, log_r, log_r0, log_M_level) -> float:
    if not log_r < log_r0:
        raise ValueError("need r < r0")
    bad = milloux_schmidt_hypothesis(f, log_r0, log_M_level)
    if bad.size:
        raise HypothesisUnmet(f"min of u does not vanish on |z| = e^{float(bad[0]):.6g}")
    b = B_lambda(f, log_r, log_M_level)
    b0 = B_lambda(f, log_r0, log_M_level)
    return milloux_schmidt_factor(log_r, log_r0) * b0 - b


def milloux_schmidt_check(f, log_r, log_r0, log_M_level) -> bool:
    return milloux_schmidt_margin(f, log_r, log_r0, log_M_level) >= -SLACK


def stretched_max_bound(f, log_t, a) -> tuple:
    """``B_M(t^{1+a/2})`` and ``(4 sqrt2/pi) t^{-a/4} B_M(t^{1+a}/2)`` with ``M = M(t)``.

    The second dominates the first: it is the Milloux-Schmidt bound with
    ``arctan x <= x``.
    """
    lm_t = log_max_modulus(f, log_t)
    lhs = B_lambda(f, (1 + a / 2) * log_t, lm_t)
    b0 = B_lambda(f, (1 + a) * log_t - math.log(2), lm_t)
    rhs = 4 * math.sqrt(2) / math.pi * math.exp(-a / 4 * float(log_t)) * b0
    return lhs, rhs


def growth_lower_bound(f, log_t, a) -> tuple:
    """``B_M(t^{1+a}/2)`` and its lower bound ``pi a t^{a/4} log M(t) / (8 sqrt2)``."""
    lm_t = log_max_modulus(f, log_t)
    lhs = B_lambda(f, (1 + a) * log_t - math.log(2), lm_t)
    rhs = math.pi * a * math.exp(a / 4 * float(log_t)) * lm_t / (8 * math.sqrt(2))
    return lhs, rhs


def wind_growth_rhs(f, log_t, a):
    """Lower bound for the growth of the image winding between C(t) and C(t^{1+a}).

    ``(B_M(r2/2)/3 - 2 B_M(s) - 4 log M(t)) / (log(r2/r1)/2)`` with r1 = t,
    r2 = t^{1+a}, s = t^{1+a/2} and M = M(t).
    """
    lm_t = log_max_modulus(f, log_t)
    b_half = B_lambda(f, (1 + a) * log_t - math.log(2), lm_t)
    b_s = B_lambda(f, (1 + a / 2) * log_t, lm_t)
    return (b_half / 3 - 2 * b_s - 4 * lm_t) / (0.5 * a * log_t)


# ---------------------------------------------------------------------------

@dataclass
class MeanProfile:
    log_lambda: float
    samples: list = field(default_factory=list)   # (log_r, B, T, rTprime)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# log_lambda={self.log_lambda!r}\n")
            w = csv.writer(fh)
            w.writerow(["log_r", "B", "T", "rTprime"])
            for row in self.samples:
                w.writerow([repr(float(v)) for v in row])


def mean_profile(f, log_lambda: float, log_r_grid) -> MeanProfile:
    rows = []
    for x in map(float, log_r_grid):
        rows.append((x, B_lambda(f, x, log_lambda), T_lambda(f, x, log_lambda), r_T_prime(f, x, log_lambda)))
    return MeanProfile(log_lambda, rows)


# ---------------------------------------------------------------------------

@dataclass
class IdentityCase:
    name: str
    f: EntireProductFunction = field(repr=False)
    log_r: float
    log_lambda: float
    near_degenerate: bool = False


def standard_identity_matrix() -> list:
    """Twenty cases: five functions, each at a full circle, lambda = 1, a mid level and a tiny arc."""
    from .entire_product import explicit, preset
    from .modulus import log_min_modulus

    funcs = [("single_zero", explicit([(1.0, 1)]), math.log(2.0)),
             ("cosh_sqrt", preset("cosh_sqrt"), math.log(30.0)),
             ("sinh_sqrt", preset("sinh_sqrt_over_sqrt"), math.log(50.0)),
             ("power_q2", preset("power", q=2), math.log(40.0)),
             ("power_q3", preset("power", q=3), math.log(200.0))]
    out = []
    for name, f, lr in funcs:
        big = log_max_modulus(f, lr)
        small = log_min_modulus(f, lr)
        out.append(IdentityCase(f"{name}/full", f, lr, small + math.log(0.9)))
        if small < 0 < big:
            out.append(IdentityCase(f"{name}/unit", f, lr, 0.0))
        else:
            out.append(IdentityCase(f"{name}/quarter", f, lr, small + 0.25 * (big - small)))
        out.append(IdentityCase(f"{name}/mid", f, lr, 0.5 * (small + big)))
        out.append(IdentityCase(f"{name}/tiny_arc", f, lr, big - 0.05, near_degenerate=True))
    return out


def identity_matrix_rows(cases=None) -> list:
    """``(name, log_r, log_lambda, lhs, rhs, rel_err, tol, ok)`` for each case."""
    rows = []
    for c in cases if cases is not None else standard_identity_matrix():
        lhs, rhs = winding_mean_identity(c.f, c.log_r, c.log_lambda)
        err = abs(lhs - rhs) / max(abs(lhs), 1.0)
        tol = 0.05 if c.near_degenerate else 0.02
        rows.append((c.name, c.log_r, c.log_lambda, lhs, rhs, err, tol, err <= tol))
    return rows
