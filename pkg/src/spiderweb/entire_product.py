"""Entire functions ``f(z) = c z^p0 prod (1 + z/a_n)^p_n`` with negative real zeros.

The branch of ``log f`` used everywhere is

    g(z) = log|c| + i*pi*[c < 0] + p0 Log z + sum_n p_n Log(1 + z/a_n)

with principal logarithms.  Every factor avoids (-inf, 0] off the negative
axis, so ``g`` is continuous on the slit plane.  On the cut itself the
upper-side limit is used for ``arg == pi`` and the lower-side limit for
``arg == -pi``.

Evaluation goes through up to three back ends, chosen by log-radius:

1. the truncated product (explicit zeros plus a tail model) for
   ``log|z| <= max_log_radius``;
2. an exact closed form in double precision (presets and integer-q power
   laws) when ``extended`` is set;
3. the leading asymptotic form in mpmath precision beyond double range.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import mpmath
import numpy as np

from .families import OutOfValidity, TailNotSummable, ZeroFamily
from .logpolar import LogComplex, ZeroFactor, log1p_polar

PLAIN_CAP = 5_000_000
_CHUNK = 2_000_000


class FunctionFileError(ValueError):
    pass


# ---------------------------------------------------------------------------
# tail models

@dataclass(frozen=True)
class SeriesTail:
    """``sum_{n>N} p_n Log(1 + z/a_n)`` as a power series in ``u = z/a_{N+1}``.

    ``sigma[k-1] = a_{N+1}^k S_k`` are scaled Hurwitz-zeta moments; they are
    nonincreasing in k, which gives the remainder bound.
    """
    a_next: float
    sigma: tuple
    sigma_next: float

    @property
    def terms(self) -> int:
        return len(self.sigma)

    def evaluate(self, log_r: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = np.exp(log_r - math.log(self.a_next)) * np.exp(1j * theta)
        acc = np.zeros(np.shape(u), dtype=complex)
        for k in range(self.terms, 0, -1):
            coef = (-1) ** (k + 1) * self.sigma[k - 1] / k
            acc = acc * u + coef
        acc = acc * u
        return acc.real, acc.imag

    def bound(self, log_r: float) -> float:
        u = math.exp(log_r - math.log(self.a_next))
        if u >= 1.0:
            return math.inf
        k = self.terms + 1
        return self.sigma_next * u ** k / (k * (1.0 - u))


@dataclass(frozen=True)
class PlainTail:
    """Neglected tail, bounded by ``|z| S_1`` via ``log(1+x) <= x``."""
    s1: float

    def evaluate(self, log_r, theta):
        z = np.zeros(np.shape(log_r))
        return z, z

    def bound(self, log_r: float) -> float:
        return math.exp(log_r) * self.s1


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntireProductFunction:
    c: float
    p0: int
    a: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)
    family: Optional[ZeroFamily] = None
    tail: Optional[object] = None
    max_log_radius: float = math.inf
    tol: float = 0.0
    extended: bool = True

    def __post_init__(self):
        if self.c == 0 or not math.isfinite(self.c):
            raise ValueError("c must be a nonzero real")
        if self.p0 < 0 or int(self.p0) != self.p0:
            raise ValueError("p0 must be a nonnegative integer")
        a = np.asarray(self.a, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if a.shape != p.shape:
            raise ValueError("zeros and multiplicities differ in length")
        if a.size and (np.any(a <= 0) or np.any(np.diff(a) <= 0)):
            raise ValueError("zeros a_n must be positive and strictly increasing")
        if p.size and (np.any(p < 1) or np.any(p != np.round(p))):
            raise ValueError("multiplicities p_n must be positive integers")
        if self.p0 == 0 and a.size == 0 and (self.family is None or self.family.is_finite):
            raise ValueError("f must have at least one zero (p0 >= 1 or nonempty zeros)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "p", p)

    @property
    def n_zeros(self) -> int:
        return int(self.a.size)

    @property
    def c_arg(self) -> float:
        return math.pi if self.c < 0 else 0.0

    @property
    def validity_log_radius(self) -> float:
        """Largest log-radius that can be evaluated at all."""
        if self.extended and self.family is not None and self.family.has_closed_form:
            return math.inf
        return self.max_log_radius

    def tail_bound(self, log_r) -> float:
        if self.tail is None or float(log_r) > self.max_log_radius:
            return 0.0
        return self.tail.bound(float(log_r))

    def zeros_inside(self, r_log: float) -> int:
        """Sum of multiplicities of zeros (including z = 0) inside |z| < e^r_log."""
        if self.family is not None and not self.family.is_finite:
            inside = self.family.multiplicity_below(math.exp(r_log))
        else:
            inside = int(self.p[self.a < math.exp(r_log)].sum())
        return self.p0 + inside

    def to_dict(self) -> dict:
        d = {"c": self.c, "p0": self.p0}
        if self.family is not None:
            d["family"] = self.family.to_dict()
        else:
            d["family"] = {"kind": "explicit", "zeros": [{"a": float(a), "p": int(p)} for a, p in zip(self.a, self.p)]}
        if math.isfinite(self.max_log_radius):
            d["truncation"] = {"max_log_radius": self.max_log_radius, "tol": self.tol}
        return d


def explicit(zeros, c: float = 1.0, p0: int = 0) -> EntireProductFunction:
    """A finite product from ``[(a, p), ...]`` (zero-multiplicity entries dropped)."""
    zeros = [(float(a), int(p)) for a, p in zeros if int(p) != 0]
    fam = ZeroFamily("explicit", zeros=tuple(zeros))
    return EntireProductFunction(c=c, p0=p0, a=[z[0] for z in zeros], p=[z[1] for z in zeros],
                                 family=fam, tail=None, max_log_radius=math.inf, tol=0.0, extended=False)


def plain_truncation_size(family: ZeroFamily, max_log_radius: float, tol: float) -> int:
    """Minimal N with ``e^max_log_radius * sum_{n>N} p_n/a_n <= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if family.is_finite:
        return len(family.zeros)
    r = mpmath.exp(max_log_radius)

    def ok(n):
        s = family.tail_moment(1, n)
        if not mpmath.isfinite(s):
            raise TailNotSummable("tail sum diverges")
        return r * s <= tol

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > 2 ** 62:
            raise TailNotSummable("no finite truncation meets the tolerance")
    lo = hi // 2
    if ok(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def truncate(family: ZeroFamily, max_log_radius: float, tol: float, c: float = 1.0, p0: int = 0,
             tail: str = "series", extended: bool = True) -> EntireProductFunction:
    """Build a certified truncation of ``family`` valid for ``|z| <= e^max_log_radius``.

    ``tail="plain"`` keeps the N zeros needed so the neglected tail is below
    ``tol`` by ``log(1+x) <= x``.  ``tail="series"`` keeps the zeros below
    ``2 e^max_log_radius`` and sums the rest as a convergent power series with
    exact moments, truncated once its remainder bound is below ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if family.is_finite:
        a = [z[0] for z in family.zeros]
        p = [z[1] for z in family.zeros]
        return EntireProductFunction(c=c, p0=p0, a=a, p=p, family=family, tail=None,
                                     max_log_radius=math.inf, tol=tol, extended=False)
    if family.kind == "power" and family.q <= 1:
        raise TailNotSummable(f"power-law tail diverges for q = {family.q}")
    if tail == "plain":
        n = plain_truncation_size(family, max_log_radius, tol)
        if n > PLAIN_CAP:
            raise ValueError(f"plain truncation needs {n} zeros (cap {PLAIN_CAP}); use tail='series'")
        a, p = family.first_n(n)
        model = PlainTail(float(family.tail_moment(1, n)))
    elif tail == "series":
        r_max = math.exp(max_log_radius)
        n = family.count_below(2.0 * r_max)
        a, p = family.first_n(n)
        a_next = family.zero(n + 1)
        sigma = []
        k = 1
        while True:
            s_k = float(family.tail_moment(k, n) * mpmath.mpf(a_next) ** k)
            sigma.append(s_k)
            s_next = float(family.tail_moment(k + 1, n) * mpmath.mpf(a_next) ** (k + 1))
            u = r_max / a_next
            if s_next * u ** (k + 1) / ((k + 1) * (1 - u)) <= tol or k >= 400:
                break
            k += 1
        model = SeriesTail(a_next=a_next, sigma=tuple(sigma), sigma_next=s_next)
    else:
        raise ValueError(f"unknown tail model {tail!r}")
    return EntireProductFunction(c=c, p0=p0, a=a, p=p, family=family, tail=model,
                                 max_log_radius=max_log_radius, tol=tol, extended=extended)


# ---------------------------------------------------------------------------
# evaluation

def _split_theta(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduce to [-pi, pi] keeping the sign of +-pi; return (|t|, sign)."""
    t = theta - 2 * math.pi * np.round(theta / (2 * math.pi))
    sign = np.where(t < 0, -1.0, 1.0)
    return np.abs(t), sign


def _product_upper(f: EntireProductFunction, log_r: np.ndarray, th: np.ndarray):
    re = np.zeros(log_r.shape)
    im = np.zeros(log_r.shape)
    if f.n_zeros:
        la = np.log(f.a)
        step = max(1, _CHUNK // max(1, log_r.size))
        for i in range(0, f.n_zeros, step):
            lw = log_r[..., None] - la[i:i + step]
            t = np.broadcast_to(th[..., None], lw.shape)
            fr, fi = log1p_polar(lw, t)
            # exact hits of a zero on the cut
            hit = (t == math.pi) & (np.abs(lw) < 4e-15)
            fr = np.where(hit, -np.inf, fr)
            re += fr @ f.p[i:i + step] if f.p[i:i + step].size else 0.0
            im += np.where(hit, 0.0, fi) @ f.p[i:i + step]
    if f.tail is not None:
        tr, ti = f.tail.evaluate(log_r, th)
        re += tr
        im += ti
    return re, im


def log_f_arrays(f: EntireProductFunction, log_r, theta, strict: bool = True):
    """Vectorised ``(log|f|, Im g)`` at ``z = exp(log_r + i theta)``.

    With ``strict`` an exact zero raises :class:`ZeroFactor` and an
    unevaluable point raises :class:`OutOfValidity`; otherwise those entries
    come back as ``-inf`` / ``nan``.
    """
    log_r = np.asarray(log_r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    log_r, theta = np.broadcast_arrays(log_r, theta)
    log_r = np.array(log_r, dtype=float)
    th, sign = _split_theta(np.array(theta, dtype=float))
    re = np.full(log_r.shape, np.nan)
    im = np.full(log_r.shape, np.nan)

    prod = log_r <= f.max_log_radius
    if prod.any():
        r, i = _product_upper(f, log_r[prod], th[prod])
        re[prod], im[prod] = r, i
    rest = ~prod
    if rest.any() and f.extended and f.family is not None and f.family.has_closed_form:
        cf = rest & (log_r <= f.family.closed_form_limit())
        if cf.any():
            r, i = f.family.closed_form_log(log_r[cf], th[cf])
            re[cf], im[cf] = r, i
    bad = np.isnan(re)
    if bad.any() and strict:
        raise OutOfValidity(f"log-radius {float(log_r[bad].flat[0])} outside every evaluator")

    with np.errstate(invalid="ignore"):
        re = re + math.log(abs(f.c))
        im = im * 1.0
        if f.p0:
            re = re + f.p0 * log_r
            im = im + f.p0 * th
        im = sign * im + f.c_arg
    zero = np.isneginf(re)
    if zero.any():
        if strict:
            raise ZeroFactor("evaluation point is a zero of f")
        im = np.where(zero, 0.0, im)
    return re, im


def _is_extended_scalar(x) -> bool:
    return isinstance(x, mpmath.mpf)


def eval_log(f: EntireProductFunction, z: LogComplex) -> LogComplex:
    """``f(z)`` as a LogComplex whose arg is ``Im g(z)`` on the fixed branch."""
    if z.is_zero:
        if f.p0 >= 1:
            raise ZeroFactor("z = 0 is a zero of f")
        return LogComplex(*_scalar(log_f_arrays_at_zero(f)))
    lm = z.log_mod
    if _is_extended_scalar(lm) or lm > _double_limit(f):
        return _eval_extended(f, lm, z.arg)
    re, im = log_f_arrays(f, np.array([float(lm)]), np.array([float(z.arg)]))
    return LogComplex(float(re[0]), float(im[0]))


def _scalar(pair):
    return float(pair[0]), float(pair[1])


def log_f_arrays_at_zero(f):
    return math.log(abs(f.c)), f.c_arg


def _double_limit(f: EntireProductFunction) -> float:
    if f.extended and f.family is not None and f.family.has_closed_form:
        return max(f.max_log_radius, f.family.closed_form_limit())
    return f.max_log_radius


def _eval_extended(f: EntireProductFunction, log_r, arg) -> LogComplex:
    if float(log_r) <= _double_limit(f):
        return eval_log(f, LogComplex(float(log_r), float(arg)))
    if not (f.extended and f.family is not None and f.family.has_closed_form):
        raise OutOfValidity(f"log-radius {mpmath.nstr(mpmath.mpf(log_r), 8)} beyond truncation")
    t = float(arg) - 2 * math.pi * round(float(arg) / (2 * math.pi))
    if abs(float(arg)) > 1e12:
        raise OutOfValidity("argument too large to reduce")
    sign = -1.0 if t < 0 else 1.0
    re, im = f.family.asymptotic_log(log_r, abs(t))
    re = re + math.log(abs(f.c)) + f.p0 * mpmath.mpf(log_r)
    im = sign * (im + f.p0 * abs(t)) + f.c_arg
    return LogComplex(re, im)


def conj_symmetry_check(f: EntireProductFunction, z: LogComplex, tol: float = 1e-10) -> bool:
    """True iff ``g(conj z) = conj(g(z))`` up to the constant pi of a negative c."""
    if z.is_zero or math.sin(z.arg) == 0:
        raise ValueError("z must lie off the real axis")
    w = eval_log(f, z)
    wb = eval_log(f, LogComplex(z.log_mod, -z.arg))
    off = f.c_arg
    return abs(w.log_mod - wb.log_mod) <= tol and abs((wb.arg - off) + (w.arg - off)) <= tol


# ---------------------------------------------------------------------------
# function-definition files

def function_from_dict(d: dict) -> EntireProductFunction:
    try:
        c = float(d.get("c", 1.0))
        p0 = int(d.get("p0", 0))
        fam = ZeroFamily.from_dict(d["family"])
        trunc = d.get("truncation", {})
        if fam.is_finite:
            return explicit(fam.zeros, c=c, p0=p0)
        return truncate(fam, float(trunc.get("max_log_radius", math.log(1e4))),
                        float(trunc.get("tol", 1e-10)), c=c, p0=p0,
                        tail=trunc.get("tail", "series"), extended=bool(trunc.get("extended", True)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FunctionFileError(str(exc)) from exc


def load_function(path) -> EntireProductFunction:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FunctionFileError(str(exc)) from exc
    if not isinstance(d, dict):
        raise FunctionFileError("function file must hold a JSON object")
    return function_from_dict(d)


def preset(kind: str, max_log_radius: float = math.log(1e4), tol: float = 1e-10, **kw) -> EntireProductFunction:
    """Shorthand: ``preset("cosh_sqrt")``, ``preset("power", q=3)``."""
    fam_kw = {k: kw.pop(k) for k in ("alpha", "q", "p") if k in kw}
    return truncate(ZeroFamily(kind, **fam_kw), max_log_radius, tol, **kw)
