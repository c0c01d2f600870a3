"""Maximum and minimum modulus, growth order, Hadamard convexity, iterates of M.

For the functions handled here ``|f(re^{it})|`` is strictly decreasing in
``t`` on [0, pi], so ``M(r) = |f(r)|`` and ``m(r) = |f(-r)|``.  All radii are
natural logs; nothing exponentiates a log-radius unless it is needed to look
up zeros.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from .entire_product import EntireProductFunction, eval_log, log_f_arrays
from .families import OutOfValidity
from .logpolar import LogComplex, ZeroFactor


class AtZero(ValueError):
    """The circle |z| = r passes through a zero of f."""


class RangeTooSmall(ValueError):
    pass


def _extended(log_r) -> bool:
    return isinstance(log_r, mpmath.mpf)


def log_max_modulus(f: EntireProductFunction, log_r):
    """``log M(r)``.  Float in double range, mpmath number beyond it."""
    if _extended(log_r) or log_r > 700.0:
        return eval_log(f, LogComplex(log_r, 0.0)).log_mod
    re, _ = log_f_arrays(f, np.array([float(log_r)]), np.array([0.0]))
    return float(re[0])


def log_max_modulus_interval(f: EntireProductFunction, log_r) -> tuple[float, float]:
    """``(log M(r), tail bound)``: the true value lies within the bound."""
    return log_max_modulus(f, log_r), f.tail_bound(log_r)


def log_max_modulus_array(f: EntireProductFunction, log_r) -> np.ndarray:
    log_r = np.asarray(log_r, dtype=float)
    return log_f_arrays(f, log_r, np.zeros_like(log_r))[0]


def _zero_on_circle(f: EntireProductFunction, log_r: float) -> bool:
    r = math.exp(log_r)
    fam = f.family
    if fam is not None and not fam.is_finite:
        n = fam.count_below(r)
        near = [fam.zero(k) for k in (n, n + 1) if k >= 1]
    else:
        near = list(f.a)
    return any(abs(r / a - 1.0) < 4e-15 for a in near)


def log_min_modulus(f: EntireProductFunction, log_r):
    """``log m(r) = log|f(-r)|``; raises :class:`AtZero` if a zero lies on |z| = r."""
    if _extended(log_r) or log_r > 700.0:
        return eval_log(f, LogComplex(log_r, math.pi)).log_mod
    if _zero_on_circle(f, float(log_r)):
        raise AtZero(f"zero of f on |z| = e^{log_r}")
    try:
        re, _ = log_f_arrays(f, np.array([float(log_r)]), np.array([math.pi]))
    except ZeroFactor as exc:
        raise AtZero(str(exc)) from exc
    return float(re[0])


def log_min_modulus_array(f: EntireProductFunction, log_r) -> np.ndarray:
    """Vectorised ``log m``; ``-inf`` at zeros."""
    log_r = np.asarray(log_r, dtype=float)
    return log_f_arrays(f, log_r, np.full_like(log_r, math.pi), strict=False)[0]


def estimate_order(f: EntireProductFunction, log_r_range, n_samples: int = 32) -> float:
    """Least-squares slope of ``log log M`` against ``log r``."""
    lo, hi = map(float, log_r_range)
    if not hi > lo:
        raise RangeTooSmall("empty log-radius range")
    x = np.linspace(lo, hi, n_samples)
    lm = log_max_modulus_array(f, x)
    ok = lm > 0
    if ok.sum() < 8:
        raise RangeTooSmall(f"only {int(ok.sum())} usable samples (need 8)")
    slope, _ = np.polyfit(x[ok], np.log(lm[ok]), 1)
    return float(slope)


def hadamard_check(f: EntireProductFunction, log_r: float, cexp: float) -> bool:
    """``M(r^c) >= M(r)^c`` up to the truncation budget of both sides."""
    if cexp <= 1:
        raise ValueError("cexp must exceed 1")
    big = log_max_modulus(f, cexp * log_r)
    small = log_max_modulus(f, log_r)
    budget = f.tail_bound(cexp * log_r) + cexp * f.tail_bound(log_r)
    scale = 1e-12 * max(1.0, abs(float(big)))
    return bool(big >= cexp * small - budget - scale)


def convexity_defects(f: EntireProductFunction, log_r_grid) -> np.ndarray:
    """Second divided differences of ``log M`` on a grid of log-radii."""
    x = np.asarray(log_r_grid, dtype=float)
    y = log_max_modulus_array(f, x)
    d1 = np.diff(y) / np.diff(x)
    return np.diff(d1) / (0.5 * (x[2:] - x[:-2]))


def _zeros_between(f: EntireProductFunction, lo: float, hi: float, cap: int = 200_000) -> np.ndarray:
    """log a_n for zeros with ``lo < log a_n < hi``."""
    fam = f.family
    if fam is not None and not fam.is_finite:
        n0 = fam.count_below(math.exp(lo))
        n1 = fam.count_below(math.exp(hi)) if hi < 700 else n0 + cap
        n1 = min(n1, n0 + cap)
        a, _ = fam.first_n(n1)
        la = np.log(a[n0:])
    else:
        la = np.log(f.a)
    return la[(la > lo) & (la < hi)]


def _golden_max(fun, lo: float, hi: float, iters: int = 80) -> tuple[float, float]:
    g = (math.sqrt(5) - 1) / 2
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if hi - lo < 1e-13 * max(1.0, abs(hi)):
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = fun(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = fun(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def find_min_condition_rho(f: EntireProductFunction, log_r: float, m_exp: float,
                           refine: int = 8) -> Optional[float]:
    """Search for ``rho in (r, r^m)`` with ``m(rho) >= M(r)``; return ``log rho`` or None.

    Each zero-free gap of the interval is seeded at its log-midpoint (the
    geometric mean of the bracketing zeros); the best ``refine`` gaps are then
    maximised by golden-section search on ``log m``.
    """
    if m_exp <= 1:
        raise ValueError("m_exp must exceed 1")
    lo, hi = float(log_r), float(m_exp * log_r)
    target = log_max_modulus(f, lo)
    bounds = np.concatenate([[lo], _zeros_between(f, lo, hi), [hi]])
    mids = 0.5 * (bounds[:-1] + bounds[1:])
    vals = log_min_modulus_array(f, mids)
    cands = [(float(v), float(x)) for v, x in zip(vals, mids)]
    # the interval is open: probe just inside each end
    ends = np.array([lo, hi]) + np.array([1.0, -1.0]) * 1e-9 * max(1.0, abs(hi))
    end_vals = log_min_modulus_array(f, ends)
    cands += [(float(v), float(x)) for v, x in zip(end_vals, ends)]

    def logm(x):
        return float(log_min_modulus_array(f, np.array([x]))[0])

    for i in np.argsort(-vals)[:refine]:
        a, b = bounds[i], bounds[i + 1]
        if b - a <= 0:
            continue
        x, v = _golden_max(logm, a, b)
        cands.append((v, x))
    best_v, best_x = max(cands)
    if best_v >= target:
        return best_x
    return None


def iterate_log_M(f: EntireProductFunction, log_R, n: int) -> list:
    """``[log R, log M(R), log M(M(R)), ...]`` (n iterations)."""
    return iterate_log_mu(f, log_R, 1.0, n)


def iterate_log_mu(f: EntireProductFunction, log_R, eps: float, n: int) -> list:
    """``lambda_{k+1} = eps * log M(e^{lambda_k})``; raises OutOfValidity past the evaluators."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    out = [log_R]
    for _ in range(n):
        lam = out[-1]
        if float(lam) > f.validity_log_radius:
            raise OutOfValidity(f"log-radius {float(lam)} beyond truncation")
        try:
            out.append(eps * log_max_modulus(f, lam))
        except OverflowError as exc:
            raise OutOfValidity("iterate beyond extended range") from exc
    return out


# ---------------------------------------------------------------------------

@dataclass
class GrowthProfile:
    samples: list = field(default_factory=list)   # (log_r, log_M, log_m)
    order_estimate: float = math.nan
    hadamard_ok: bool = True

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["log_r", "log_M", "log_m"])
            for row in self.samples:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "GrowthProfile":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        return cls(samples=[tuple(float(v) for v in r) for r in rows[1:]])


def growth_profile(f: EntireProductFunction, log_r_lo: float, log_r_hi: float, n: int) -> GrowthProfile:
    if n < 1 or not log_r_hi >= log_r_lo:
        raise RangeTooSmall("empty range")
    x = np.linspace(log_r_lo, log_r_hi, n)
    big = log_max_modulus_array(f, x)
    small = log_min_modulus_array(f, x)
    try:
        order = estimate_order(f, (log_r_lo, log_r_hi), max(n, 8))
    except RangeTooSmall:
        order = math.nan
    ok = True
    if n >= 3:
        ok = bool(np.all(convexity_defects(f, x) >= -1e-9))
    return GrowthProfile(samples=list(zip(x, big, small)), order_estimate=order, hadamard_ok=ok)


# ---------------------------------------------------------------------------
# empirical surrogates for the existential radii

def hadamard_threshold(f: EntireProductFunction, log_r_grid, cexps=(1.25, 2.0, 4.0)) -> float:
    """Smallest grid log-radius from which every Hadamard check on the grid passes."""
    grid = list(map(float, log_r_grid))
    passed = [all(hadamard_check(f, x, c) for c in cexps) for x in grid]
    for i in range(len(grid)):
        if all(passed[i:]):
            return grid[i]
    return math.inf


def min_condition_threshold(f: EntireProductFunction, m_exp: float, log_r_grid) -> float:
    """Smallest grid log-radius from which the min-modulus condition holds on the grid."""
    grid = list(map(float, log_r_grid))
    found = [find_min_condition_rho(f, x, m_exp) is not None for x in grid]
    for i in range(len(grid)):
        if all(found[i:]):
            return grid[i]
    return math.inf
