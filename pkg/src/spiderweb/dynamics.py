"""Escape classification of orbits and ring detection on rasters.

A point is FAST when ``|f^k(z)| >= M^k(R)`` for k = 1..n_max, QUITE_FAST
when ``|f^k(z)| >= mu^k(R)`` with ``mu = M^eps``, LOW as soon as the orbit
drops below the mu-threshold, and UNDECIDED when the orbit leaves the range
where f can be evaluated before reaching n_max while still above threshold.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .entire_product import EntireProductFunction, _double_limit, eval_log, log_f_arrays
from .families import OutOfValidity
from .logpolar import LogComplex, ZeroFactor
from .modulus import iterate_log_M, iterate_log_mu

LOW, UNDECIDED, QUITE_FAST, FAST = 0, 1, 2, 3
CLASS_NAMES = {LOW: "LOW", UNDECIDED: "UNDECIDED", QUITE_FAST: "QUITE_FAST", FAST: "FAST"}
ARG_LIMIT = 1e12


class WindowTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class EscapeParams:
    log_R: float
    eps: float
    n_max: int = 3
    L: float = math.nan
    thresholds_M: tuple = field(default=(), repr=False)
    thresholds_mu: tuple = field(default=(), repr=False)

    @classmethod
    def build(cls, f: EntireProductFunction, log_R: float, eps: float, n_max: int = 3, L: float = None):
        """Compute both threshold chains; rejects R where the mu-chain does not increase."""
        if not 0 < eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        mu = iterate_log_mu(f, log_R, eps, n_max)
        if any(not mu[k + 1] > mu[k] for k in range(n_max)):
            raise ValueError("iterated mu is not increasing from R; raise R")
        big = iterate_log_M(f, log_R, n_max)
        return cls(float(log_R), float(eps), int(n_max), float(1 / eps if L is None else L),
                   tuple(big[1:]), tuple(mu[1:]))


def first_escape_radius(f: EntireProductFunction, eps: float, lo: float = 0.0, hi: float = 50.0,
                        n: int = 3) -> float:
    """Smallest log R on a 1e-3 grid from which the mu-chain increases for n steps."""
    for x in np.arange(lo, hi, 1e-3):
        try:
            mu = iterate_log_mu(f, float(x), eps, n)
        except OutOfValidity:
            continue
        if all(mu[k + 1] > mu[k] for k in range(n)):
            return float(x)
    raise ValueError("no escape radius in range")


def _step_scalar(f, lm, arg):
    """One orbit step for a single point in extended precision; None past validity."""
    if abs(float(arg)) > ARG_LIMIT:
        return None
    try:
        w = eval_log(f, LogComplex(lm, float(arg)))
    except (OutOfValidity, OverflowError, ValueError):
        return None
    except ZeroFactor:
        return (-math.inf, 0.0)
    return (w.log_mod, w.arg)


def classify_arrays(f: EntireProductFunction, log_r: np.ndarray, theta: np.ndarray, params: EscapeParams):
    """Vectorised classification; returns (class codes, depth reached)."""
    log_r = np.asarray(log_r, dtype=float).ravel()
    theta = np.asarray(theta, dtype=float).ravel()
    n = log_r.size
    cls = np.full(n, -1, dtype=np.int8)
    depth = np.zeros(n, dtype=np.int16)
    fast = np.ones(n, dtype=bool)
    cur = [(float(a), float(b)) for a, b in zip(log_r, theta)]
    active = np.arange(n)
    lim = _double_limit(f)
    for k in range(params.n_max):
        t_mu, t_M = params.thresholds_mu[k], params.thresholds_M[k]
        nxt = {}
        dbl = [i for i in active if isinstance(cur[i][0], float) and cur[i][0] <= lim
               and abs(cur[i][1]) <= ARG_LIMIT]
        if dbl:
            idx = np.array(dbl)
            re, im = log_f_arrays(f, np.array([cur[i][0] for i in dbl]),
                                  np.array([cur[i][1] for i in dbl]), strict=False)
            for j, i in enumerate(idx):
                nxt[i] = None if math.isnan(re[j]) else (float(re[j]), float(im[j]))
        for i in active:
            if i not in nxt:
                nxt[i] = _step_scalar(f, *cur[i])
        still = []
        for i in active:
            v = nxt[i]
            if v is None:
                cls[i] = UNDECIDED
                depth[i] = k
                continue
            if v[0] < t_mu:
                cls[i] = LOW
                depth[i] = k + 1
                continue
            if not v[0] >= t_M:
                fast[i] = False
            cur[i] = v
            still.append(i)
        active = still
    for i in active:
        cls[i] = FAST if fast[i] else QUITE_FAST
        depth[i] = params.n_max
    return cls, depth


def classify_point(f: EntireProductFunction, z: LogComplex, params: EscapeParams) -> tuple[int, int]:
    c, d = classify_arrays(f, np.array([z.log_mod]), np.array([z.arg]), params)
    return int(c[0]), int(d[0])


@dataclass
class ClassGrid:
    window: tuple          # (x_min, x_max, y_min, y_max)
    resolution: tuple      # (w, h)
    cells: np.ndarray      # (h, w) class codes, row 0 at the top
    depth: np.ndarray
    params: EscapeParams = None

    def centers(self):
        return grid_centers(self.window, self.resolution)

    def to_pgm(self, path) -> None:
        h, w = self.cells.shape
        lines = ["P2", f"{w} {h}", "255"]
        for row in self.cells:
            lines.append(" ".join(str(int(v) * 85) for v in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_pgm(cls, path, window=(-1.0, 1.0, -1.0, 1.0)) -> "ClassGrid":
        tokens = [t for line in open(path) if not line.startswith("#") for t in line.split()]
        if tokens[0] != "P2":
            raise ValueError("not a plain PGM file")
        w, h = int(tokens[1]), int(tokens[2])
        vals = np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w) // 85
        return cls(window, (w, h), vals.astype(np.int8), np.zeros((h, w), dtype=np.int16))


def grid_centers(window, resolution):
    """Cell centres; symmetric windows give exactly mirrored rows."""
    x0, x1, y0, y1 = map(float, window)
    w, h = resolution
    cx, hx = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    cy, hy = 0.5 * (y0 + y1), 0.5 * (y1 - y0)
    xs = cx + hx * (2 * np.arange(w) + 1 - w) / w
    ys = cy + hy * (h - 2 * np.arange(h) - 1) / h
    return xs, ys


def raster(f: EntireProductFunction, window, resolution, params: EscapeParams, threads: int = 1) -> ClassGrid:
    w, h = resolution
    if w < 16 or h < 16:
        raise ValueError("resolution must be at least 16x16")
    xs, ys = grid_centers(window, resolution)
    X, Y = np.meshgrid(xs, ys)
    r = np.hypot(X, Y)
    with np.errstate(divide="ignore"):
        lr = np.log(r)
    th = np.arctan2(Y, X)
    cells = np.empty((h, w), dtype=np.int8)
    depth = np.empty((h, w), dtype=np.int16)
    def do_row(i):
        c, d = classify_arrays(f, lr[i], th[i], params)
        return i, c, d

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(do_row, range(h)))
    else:
        results = [do_row(i) for i in range(h)]
    for i, c, d in results:
        cells[i] = c
        depth[i] = d
    return ClassGrid(tuple(map(float, window)), (w, h), cells, depth, params)


# ---------------------------------------------------------------------------
# rings

@dataclass
class RingReport:
    component_id: int
    kind: str                  # "ring" (QUITE_FAST loop) or "gap" (non-QUITE_FAST component)
    log_r_min: float
    log_r_max: float
    surrounds_origin: bool
    annulus_ok: bool
    beyond_threshold: bool = False
    touches_boundary: bool = False
    n_cells: int = 0
    loop_winding: int = 0


_N8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def _origin_pixel(grid: ClassGrid):
    """Origin in continuous pixel coordinates (column, row)."""
    x0, x1, y0, y1 = grid.window
    w, h = grid.resolution
    return (-x0) / (x1 - x0) * w - 0.5, (y1) / (y1 - y0) * h - 0.5


def _crossing(p, q, o):
    """+1/-1 when the step p -> q crosses the ray from o to the right, else 0."""
    (r1, c1), (r2, c2) = p, q
    y1, y2 = o[1] - r1, o[1] - r2       # up is positive
    up1, up2 = y1 >= 0, y2 >= 0
    if up1 == up2:
        return 0
    x = c1 + (c2 - c1) * (y1 / (y1 - y2))
    if x <= o[0]:
        return 0
    return 1 if up1 else -1


def find_loop(mask: np.ndarray, origin) -> list:
    """A closed 8-connected loop of cells in ``mask`` winding around ``origin``, or []."""
    h, w = mask.shape
    label = -np.ones(mask.shape, dtype=np.int64)   # winding count along the search tree
    parent = {}
    cells = list(zip(*np.nonzero(mask)))
    seen = np.zeros(mask.shape, dtype=bool)
    for start in cells:
        if seen[start]:
            continue
        label[start] = 0
        seen[start] = True
        parent[start] = None
        queue = [start]
        head = 0
        while head < len(queue):
            c = queue[head]
            head += 1
            for dr, dc in _N8:
                n = (c[0] + dr, c[1] + dc)
                if not (0 <= n[0] < h and 0 <= n[1] < w) or not mask[n]:
                    continue
                wn = label[c] + _crossing(c, n, origin)
                if not seen[n]:
                    seen[n] = True
                    label[n] = wn
                    parent[n] = c
                    queue.append(n)
                elif label[n] != wn:
                    return _close_loop(parent, c, n)
    return []


def _close_loop(parent, c, n):
    def path(x):
        out = []
        while x is not None:
            out.append(x)
            x = parent[x]
        return out
    pc, pn = path(c), path(n)
    common = set(pc) & set(pn)
    # pc runs c .. lca, pn runs n .. just below lca; the loop is lca .. c, n .. lca
    pc = pc[:next(i for i, x in enumerate(pc) if x in common) + 1]
    pn = pn[:next(i for i, x in enumerate(pn) if x in common)]
    return list(reversed(pc)) + pn


def loop_winding(loop, origin) -> int:
    """Winding number of a closed cell loop about ``origin`` (pixel coordinates)."""
    total = 0.0
    pts = [(c - origin[0], origin[1] - r) for r, c in loop]
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        total += math.atan2(x1 * y2 - y1 * x2, x1 * x2 + y1 * y2)
    return int(round(total / (2 * math.pi)))


def detect_rings(grid: ClassGrid, L: float = None, log_R: float = None) -> list:
    """Components of non-QUITE_FAST cells and QUITE_FAST loops around the origin."""
    L = L if L is not None else (grid.params.L if grid.params is not None else math.inf)
    log_R = log_R if log_R is not None else (grid.params.log_R if grid.params is not None else 0.0)
    xs, ys = grid.centers()
    X, Y = np.meshgrid(xs, ys)
    with np.errstate(divide="ignore"):
        LR = np.log(np.hypot(X, Y))
    qf = grid.cells >= QUITE_FAST
    origin = _origin_pixel(grid)
    h, w = grid.cells.shape
    rr, cc = np.mgrid[0:h, 0:w]
    # cells whose closed square contains the origin point
    near_origin = (np.abs(rr - origin[1]) <= 0.5) & (np.abs(cc - origin[0]) <= 0.5)
    reports = []

    def extent(mask):
        vals = LR[mask]
        vals = vals[np.isfinite(vals)]
        return (float(vals.min()), float(vals.max())) if vals.size else (-math.inf, -math.inf)

    def touches(mask):
        return bool(mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any())

    gaps, n_gaps = ndimage.label(~qf, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    interior = 0
    origin_gap = False
    for k in range(1, n_gaps + 1):
        m = gaps == k
        lo, hi = extent(m)
        tb = touches(m)
        interior += not tb
        has_origin = bool(m[near_origin].any()) or bool(find_loop(m, origin))
        origin_gap |= has_origin
        reports.append(RingReport(k, "gap", lo, hi, has_origin and not tb,
                                  bool(hi <= L * lo) if lo > 0 else False,
                                  bool(lo > L * log_R), tb, int(m.sum())))
    if interior == 0 and not origin_gap:
        raise WindowTooSmall("no non-QUITE_FAST component is interior or holds the origin cell")

    rings, n_rings = ndimage.label(qf, structure=np.ones((3, 3)))
    for k in range(1, n_rings + 1):
        m = rings == k
        loop = find_loop(m, origin)
        if not loop:
            continue
        wind = loop_winding(loop, origin)
        if wind == 0:
            continue
        lo, hi = extent(m)
        reports.append(RingReport(n_gaps + k, "ring", lo, hi, True,
                                  bool(hi <= L * lo) if lo > 0 else False,
                                  bool(lo > L * log_R), touches(m), int(m.sum()), wind))
    return reports


def save_ring_reports(reports, path) -> None:
    cols = ["component_id", "kind", "log_r_min", "log_r_max", "surrounds_origin", "annulus_ok",
            "beyond_threshold", "touches_boundary", "n_cells", "loop_winding"]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(cols)
        for r in reports:
            wr.writerow([getattr(r, c) if not isinstance(getattr(r, c), float) else repr(getattr(r, c))
                         for c in cols])
