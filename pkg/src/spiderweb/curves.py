"""Polyline curves in log-polar coordinates, argument continuation and level arcs.

A curve is a list of points ``(log|z|, arg z)`` joined by segments that are
straight in those coordinates (logarithmic spirals in the plane).  The
change of ``arg f`` along a segment is read off the fixed branch ``g`` of
``log f``: it is continuous on the plane slit along the negative axis, so a
segment is first cut where it crosses the slit and each piece contributes
``Im g(end) - Im g(start)``, with the endpoints on the slit evaluated from the
side the piece lies on.  Segments are then bisected until every piece moves
the image by less than pi/2 in argument and less than 1 in log-modulus; the
depth needed is reported and is also what detects a curve that grazes a zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .entire_product import EntireProductFunction, log_f_arrays
from .logpolar import LogComplex

MAX_DEPTH = 40
MAX_PIECES = 4_000_000
STEP_ARG = math.pi / 2
STEP_MOD = 1.0


class RefinementLimit(RuntimeError):
    pass


class EmptyLevelSet(ValueError):
    pass


class NotCrossing(ValueError):
    pass


@dataclass(frozen=True)
class Curve:
    log_mod: np.ndarray
    arg: np.ndarray
    closed: bool = False

    def __post_init__(self):
        lm = np.asarray(self.log_mod, dtype=float)
        ar = np.asarray(self.arg, dtype=float)
        if lm.shape != ar.shape or lm.ndim != 1 or lm.size < 2:
            raise ValueError("a curve needs at least two points")
        if not (np.all(np.isfinite(lm)) and np.all(np.isfinite(ar))):
            raise ValueError("curve points must be finite and nonzero")
        same = (np.diff(lm) == 0) & (np.diff(ar) == 0)
        if same.any():
            raise ValueError(f"consecutive points coincide at index {int(np.argmax(same))}")
        if self.closed:
            turns = (ar[-1] - ar[0]) / (2 * math.pi)
            if lm[0] != lm[-1] or abs(turns - round(turns)) > 1e-12:
                raise ValueError("closed curve must end where it starts")
        object.__setattr__(self, "log_mod", lm)
        object.__setattr__(self, "arg", ar)

    def __len__(self):
        return self.log_mod.size

    @property
    def points(self) -> list:
        return [LogComplex(float(a), float(b)) for a, b in zip(self.log_mod, self.arg)]

    def to_complex(self) -> np.ndarray:
        return np.exp(self.log_mod + 1j * self.arg)

    def reversed(self) -> "Curve":
        return Curve(self.log_mod[::-1].copy(), self.arg[::-1].copy(), self.closed)

    def reflected(self) -> "Curve":
        """Mirror image in the real axis, traversed backwards."""
        return Curve(self.log_mod[::-1].copy(), -self.arg[::-1], self.closed)

    def conjugate(self) -> "Curve":
        return Curve(self.log_mod.copy(), -self.arg, self.closed)

    def subcurve(self, i0: int, i1: int) -> "Curve":
        return Curve(self.log_mod[i0:i1 + 1].copy(), self.arg[i0:i1 + 1].copy())

    def refined(self, factor: int = 2) -> "Curve":
        """Insert ``factor - 1`` evenly spaced points into every segment."""
        t = np.arange(factor) / factor
        lm = (self.log_mod[:-1, None] + np.diff(self.log_mod)[:, None] * t).ravel()
        ar = (self.arg[:-1, None] + np.diff(self.arg)[:, None] * t).ravel()
        return Curve(np.append(lm, self.log_mod[-1]), np.append(ar, self.arg[-1]), self.closed)

    @classmethod
    def from_points(cls, points, closed: bool = False) -> "Curve":
        return cls(np.array([p.log_mod for p in points], dtype=float),
                   np.array([p.arg for p in points], dtype=float), closed)

    @classmethod
    def from_complex(cls, zs, closed: bool = False) -> "Curve":
        """From Cartesian points, choosing args continuously along the list."""
        zs = np.asarray(zs, dtype=complex)
        return cls(np.log(np.abs(zs)), np.unwrap(np.angle(zs)), closed)


def circle(log_r: float, n: int = 256, start: float = -math.pi) -> Curve:
    """Closed counter-clockwise circle of n segments starting at angle ``start``."""
    th = start + 2 * math.pi * np.arange(n + 1) / n
    th[-1] = start + 2 * math.pi
    return Curve(np.full(n + 1, float(log_r)), th, closed=True)


def radial_segment(log_r0: float, log_r1: float, theta: float = 0.0, n: int = 64) -> Curve:
    return Curve(np.linspace(log_r0, log_r1, n), np.full(n, float(theta)))


def save_curve_csv(curve: Curve, path) -> None:
    with open(path, "w", newline="") as fh:
        if curve.closed:
            fh.write("# closed\n")
        w = csv.writer(fh)
        w.writerow(["log_mod", "arg"])
        for a, b in zip(curve.log_mod, curve.arg):
            w.writerow([repr(float(a)), repr(float(b))])


def load_curve_csv(path) -> Curve:
    closed = False
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0].startswith("#"):
                closed = closed or "closed" in row[0]
                continue
            rows.append(row)
    if not rows or rows[0][:2] != ["log_mod", "arg"]:
        raise ValueError("curve CSV needs a log_mod,arg header")
    data = np.array([[float(v) for v in r[:2]] for r in rows[1:]])
    return Curve(data[:, 0], data[:, 1], closed)


# ---------------------------------------------------------------------------
# argument continuation

@dataclass(frozen=True)
class WindingResult:
    delta_arg: float
    refinement_depth: int
    max_step_arg: float
    segment_increments: np.ndarray = field(default=None, repr=False)

    def turns(self) -> float:
        return self.delta_arg / (2 * math.pi)


def _g_sided(f, lr, th, toward):
    """Branch values; on the slit pick the side the adjoining piece lies on."""
    t = th - 2 * math.pi * np.round(th / (2 * math.pi))
    on_slit = np.abs(t) == math.pi
    t = np.where(on_slit & (toward > 0), -math.pi, t)
    t = np.where(on_slit & (toward < 0), math.pi, t)
    return log_f_arrays(f, lr, t)


def _split_at_slit(lm: np.ndarray, ar: np.ndarray):
    """Cut every segment where its arg passes an odd multiple of pi.

    Returns start/end arrays of the pieces and the index of the parent segment.
    """
    s_lr, s_th, e_lr, e_th, parent = [], [], [], [], []
    a0, a1 = ar[:-1], ar[1:]
    lo = np.minimum(a0, a1)
    hi = np.maximum(a0, a1)
    k_lo = np.floor((lo - math.pi) / (2 * math.pi)) + 1   # first odd multiple > lo
    k_hi = np.ceil((hi - math.pi) / (2 * math.pi)) - 1    # last odd multiple < hi
    count = np.maximum(0, k_hi - k_lo + 1).astype(int)
    simple = count == 0
    idx = np.nonzero(simple)[0]
    s_lr.append(lm[:-1][idx]); s_th.append(a0[idx]); e_lr.append(lm[1:][idx]); e_th.append(a1[idx])
    parent.append(idx)
    for i in np.nonzero(~simple)[0]:
        ks = np.arange(k_lo[i], k_hi[i] + 1)
        cuts = math.pi + 2 * math.pi * ks
        if a1[i] < a0[i]:
            cuts = cuts[::-1]
        frac = (cuts - a0[i]) / (a1[i] - a0[i])
        th = np.concatenate([[a0[i]], cuts, [a1[i]]])
        lr = np.concatenate([[lm[i]], lm[i] + frac * (lm[i + 1] - lm[i]), [lm[i + 1]]])
        s_lr.append(lr[:-1]); s_th.append(th[:-1]); e_lr.append(lr[1:]); e_th.append(th[1:])
        parent.append(np.full(th.size - 1, i))
    order = np.argsort(np.concatenate(parent), kind="stable")
    cat = lambda xs: np.concatenate(xs)[order]
    return cat(s_lr), cat(s_th), cat(e_lr), cat(e_th), cat(parent)


def _piece_increments(f, s_lr, s_th, e_lr, e_th):
    direction = np.sign(e_th - s_th)
    gs_re, gs_im = _g_sided(f, s_lr, s_th, direction)
    ge_re, ge_im = _g_sided(f, e_lr, e_th, -direction)
    return ge_im - gs_im, ge_re - gs_re


def delta_arg(f: EntireProductFunction, curve: Curve, max_depth: int = MAX_DEPTH,
              refine: bool = True) -> WindingResult:
    """Net change of ``arg f`` along the curve.

    With ``refine`` every segment is bisected until its image pieces satisfy
    the step bounds; :class:`RefinementLimit` is raised past ``max_depth``
    levels.  Without it the exact branch increments are returned directly,
    which is what very long windings need.
    """
    s_lr, s_th, e_lr, e_th, parent = _split_at_slit(curve.log_mod, curve.arg)
    n_seg = len(curve) - 1
    totals = np.zeros(n_seg)
    depth = 0
    max_step = 0.0
    while True:
        d_arg, d_mod = _piece_increments(f, s_lr, s_th, e_lr, e_th)
        if not refine:
            np.add.at(totals, parent, d_arg)
            max_step = float(np.max(np.abs(d_arg))) if d_arg.size else 0.0
            break
        bad = (np.abs(d_arg) >= STEP_ARG) | (np.abs(d_mod) >= STEP_MOD)
        good = ~bad
        np.add.at(totals, parent[good], d_arg[good])
        if good.any():
            max_step = max(max_step, float(np.max(np.abs(d_arg[good]))))
        if not bad.any():
            break
        depth += 1
        if depth > max_depth:
            raise RefinementLimit(f"refinement deeper than {max_depth} levels; curve passes too near a zero")
        m_lr = 0.5 * (s_lr[bad] + e_lr[bad])
        m_th = 0.5 * (s_th[bad] + e_th[bad])
        if 2 * m_lr.size > MAX_PIECES:
            raise RefinementLimit(f"more than {MAX_PIECES} pieces needed; winding too large to refine")
        s_lr, s_th, e_lr, e_th, parent = (
            np.concatenate([s_lr[bad], m_lr]), np.concatenate([s_th[bad], m_th]),
            np.concatenate([m_lr, e_lr[bad]]), np.concatenate([m_th, e_th[bad]]),
            np.concatenate([parent[bad], parent[bad]]))
    total = float(np.sum(totals))
    return WindingResult(total, depth, max_step, totals)


def delta_arg_between(f: EntireProductFunction, curve: Curve, index0: int, index1: int,
                      result: WindingResult = None) -> float:
    """Continuation change of ``arg f`` from point ``index0`` to point ``index1``."""
    n = len(curve)
    if not (0 <= index0 < n and 0 <= index1 < n):
        raise IndexError("curve index out of range")
    if index0 == index1:
        return 0.0
    if result is None:
        result = delta_arg(f, curve)
    cum = np.concatenate([[0.0], np.cumsum(result.segment_increments)])
    return float(cum[index1] - cum[index0])


def image_arg_profile(f: EntireProductFunction, curve: Curve, refine: bool = True) -> np.ndarray:
    """Continuation value of ``arg f`` at every point, starting from ``Im g`` at point 0."""
    res = delta_arg(f, curve, refine=refine)
    toward = np.sign(curve.arg[1] - curve.arg[0])
    _, g0 = _g_sided(f, curve.log_mod[:1], curve.arg[:1], np.array([toward]))
    return float(g0[0]) + np.concatenate([[0.0], np.cumsum(res.segment_increments)])


# ---------------------------------------------------------------------------
# level sets of |f| on circles

@dataclass(frozen=True)
class LevelTheta:
    kind: str          # "full", "empty" or "angle"
    theta: float = math.nan

    @property
    def is_full(self):
        return self.kind == "full"

    @property
    def is_empty(self):
        return self.kind == "empty"


FULL_CIRCLE = LevelTheta("full", math.pi)
EMPTY = LevelTheta("empty", 0.0)


def _log_abs(f, log_r, theta):
    re, _ = log_f_arrays(f, np.array([float(log_r)]), np.array([float(theta)]), strict=False)
    return float(re[0])


def level_theta(f: EntireProductFunction, log_r: float, log_lambda: float, tol: float = 1e-12) -> LevelTheta:
    """Where the circle of radius r leaves ``{|f| > lambda}``."""
    top = _log_abs(f, log_r, 0.0)
    if top < log_lambda:
        return EMPTY
    if _log_abs(f, log_r, math.pi) > log_lambda:
        return FULL_CIRCLE
    lo, hi = 0.0, math.pi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _log_abs(f, log_r, mid) > log_lambda:
            lo = mid
        else:
            hi = mid
    return LevelTheta("angle", 0.5 * (lo + hi))


def level_arc(f: EntireProductFunction, log_r: float, log_lambda: float, n_samples: int = 64,
              level: LevelTheta = None) -> Curve:
    """The arc ``{r e^{it}: |t| <= theta*}`` (or the whole circle), uniformly sampled."""
    n_samples = max(64, int(n_samples))
    level = level or level_theta(f, log_r, log_lambda)
    if level.is_empty:
        raise EmptyLevelSet(f"|f| < lambda on the whole circle log r = {log_r}")
    if level.is_full:
        return circle(log_r, n_samples)
    if level.theta <= 0:
        raise EmptyLevelSet("level arc degenerates to a point")
    th = np.linspace(-level.theta, level.theta, n_samples)
    return Curve(np.full(n_samples, float(log_r)), th)


def level_curve(f: EntireProductFunction, log_r_lo: float, log_r_hi: float, log_lambda: float,
                n: int = 400) -> Curve:
    """The part of ``{|f| = lambda}`` in the upper half plane between two radii.

    Follows the level angle ``theta_lambda(r)`` on n log-equispaced radii;
    every circle in the range must cross the level set.
    """
    x = np.linspace(float(log_r_lo), float(log_r_hi), int(n))
    th = np.empty_like(x)
    for k, v in enumerate(x):
        lev = level_theta(f, v, log_lambda)
        if lev.kind != "angle":
            raise EmptyLevelSet(f"circle log r = {v} does not cross |f| = lambda ({lev.kind})")
        th[k] = lev.theta
    return Curve(x, th)


def random_upper_curve(rng: np.random.Generator, log_r_lo: float, log_r_hi: float, n: int = 64) -> Curve:
    """A random polyline in the closed upper half plane running from C(r_lo) to C(r_hi).

    log|z| increases with small random reversals; the argument is a random
    walk reflected into [0, pi].
    """
    lm = np.concatenate([[0.0], np.cumsum(rng.uniform(-0.3, 1.0, n - 1))])
    span = lm[-1] - lm[0]
    if span <= 0:
        lm, span = np.linspace(0.0, 1.0, n), 1.0
    lm = log_r_lo + (log_r_hi - log_r_lo) * (lm - lm[0]) / span
    walk = rng.uniform(0, math.pi) + np.concatenate([[0.0], np.cumsum(rng.normal(0, 0.4, n - 1))])
    ar = np.abs(np.mod(walk + math.pi, 2 * math.pi) - math.pi)
    return Curve(lm, ar)


# ---------------------------------------------------------------------------

def extract_annulus_subcurve(curve: Curve, log_r1: float, log_r2: float, return_span: bool = False):
    """A sub-arc inside the closed annulus ``[r1, r2]`` joining its two boundary circles.

    Takes the first stretch of the curve that goes from one closed side
    (``log|z| <= log r1`` or ``>= log r2``) to the other without leaving the
    annulus in between, and clips its end segments at the circles by linear
    interpolation in (log|z|, arg).  With ``return_span`` the original
    indices ``(i, j)`` of the bracketing points are returned as well.
    """
    if not log_r1 < log_r2:
        raise ValueError("need log_r1 < log_r2")
    lm, ar = curve.log_mod, curve.arg
    state = np.where(lm <= log_r1, -1, np.where(lm >= log_r2, 1, 0))
    last_i, last_s = None, 0
    span = None
    for k, s in enumerate(state):
        if s == 0:
            continue
        if last_s != 0 and s != last_s:
            span = (last_i, k)
            break
        last_i, last_s = k, s
    if span is None:
        raise NotCrossing("curve does not cross the annulus")
    i, j = span

    def cut(a, b, level):
        if lm[a] == level:
            return lm[a], ar[a]
        t = (level - lm[a]) / (lm[b] - lm[a])
        return level, ar[a] + t * (ar[b] - ar[a])

    lev_i = log_r1 if state[i] < 0 else log_r2
    lev_j = log_r2 if state[j] > 0 else log_r1
    p0 = cut(i, i + 1, lev_i) if lm[i] != lev_i else (lm[i], ar[i])
    p1 = cut(j, j - 1, lev_j) if lm[j] != lev_j else (lm[j], ar[j])
    pts_lm = [p0[0], *lm[i + 1:j], p1[0]]
    pts_ar = [p0[1], *ar[i + 1:j], p1[1]]
    keep = [0]
    for k in range(1, len(pts_lm)):
        if pts_lm[k] != pts_lm[keep[-1]] or pts_ar[k] != pts_ar[keep[-1]]:
            keep.append(k)
    sub = Curve(np.array(pts_lm)[keep], np.array(pts_ar)[keep])
    return (sub, span) if return_span else sub
