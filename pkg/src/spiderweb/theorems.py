"""Verifiers for the winding lower bound, the stretch/wind trichotomy and the cascade.

Constants of the winding bound:

* ``K_SIZE = 48 sqrt2 / pi``   (t^{a/4} must reach it)
* ``K_STRETCH = 384 sqrt2 / pi`` (a t^{a/4} must reach it)
* ``K_BOUND = pi^2 / (48 sqrt2)`` (coefficient of the lower bound)

For a curve in the closed upper half plane meeting C(t) and C(t^{1+a}) on
which ``1/M(t) < |f| < M(t)``, some sub-arc winds by at least
``K_BOUND t^{a/4} log M(t) / log t``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from .curves import Curve, RefinementLimit, delta_arg, extract_annulus_subcurve, image_arg_profile
from .entire_product import EntireProductFunction, eval_log, log_f_arrays
from .families import OutOfValidity
from .logpolar import LogComplex
from .modulus import find_min_condition_rho, log_max_modulus

K_SIZE = 48 * math.sqrt(2) / math.pi
K_STRETCH = 384 * math.sqrt(2) / math.pi
K_BOUND = math.pi ** 2 / (48 * math.sqrt(2))

CONSTANTS = {"48*sqrt(2)/pi": round(K_SIZE, 4), "384*sqrt(2)/pi": round(K_STRETCH, 3),
             "pi^2/(48*sqrt(2))": round(K_BOUND, 6)}

CASCADE_MAX_STEPS = 8
ARG_LIMIT = 1e12


class HypothesisViolated(ValueError):
    def __init__(self, msg, index=None, point=None, value=None):
        super().__init__(msg)
        self.index, self.point, self.value = index, point, value


class PreconditionFailed(ValueError):
    def __init__(self, failures):
        super().__init__("; ".join(failures))
        self.failures = list(failures)


class ValidityExceeded(RuntimeError):
    def __init__(self, step, msg=""):
        super().__init__(f"step {step}: {msg}")
        self.step = step


class ClassificationError(RuntimeError):
    """Sampled |f| fits none of the three cases (sampling too coarse or hypotheses broken)."""


def _num(x):
    """JSON-friendly number: floats stay floats, huge values become strings."""
    if isinstance(x, mpmath.mpf):
        if abs(x) < 1e300:
            return float(x)
        if mpmath.mag(x) < 10 ** 6:
            return mpmath.nstr(x, 17)
        # the decimal exponent itself is too long to print
        return "10^" + mpmath.nstr(mpmath.log10(abs(x)), 17)
    return x


# ---------------------------------------------------------------------------

def admissible_ta(log_t: float, a: float, log_R1_surrogate: float = 0.0) -> bool:
    if a <= 0 or log_t <= 0:
        return False
    return (log_t >= log_R1_surrogate
            and a / 4 * log_t >= math.log(K_SIZE)
            and math.log(a) + a / 4 * log_t >= math.log(K_STRETCH))


def winding_lower_bound(log_t, a, log_M_t):
    """``K_BOUND t^{a/4} log M(t) / log t`` evaluated in logs."""
    log_bound = math.log(K_BOUND) + a / 4 * float(log_t) + float(mpmath.log(log_M_t)) - math.log(float(log_t))
    return math.exp(log_bound)


@dataclass
class WindingCertificate:
    log_t: float
    a: float
    subcurve: Curve = field(repr=False)
    endpoint_indices: tuple
    measured_delta_arg: float
    lower_bound: float
    tail_budget: float
    admissible: bool
    log_M_t: float = math.nan
    passed: Optional[bool] = None
    method: str = "refined"

    @property
    def margin(self) -> float:
        return self.measured_delta_arg + self.tail_budget - self.lower_bound

    def to_dict(self) -> dict:
        return {
            "kind": "winding_lower_bound",
            "log_t": self.log_t, "a": self.a, "log_M_t": _num(self.log_M_t),
            "endpoint_indices": list(map(int, self.endpoint_indices)),
            "endpoints": [[float(self.subcurve.log_mod[i]), float(self.subcurve.arg[i])]
                          for i in self.endpoint_indices],
            "subcurve_points": len(self.subcurve),
            "measured_delta_arg": self.measured_delta_arg, "lower_bound": self.lower_bound,
            "tail_budget": self.tail_budget, "margin": self.margin,
            "admissible": self.admissible, "passed": self.passed, "method": self.method,
            "constants": CONSTANTS,
        }


def _check_upper(curve: Curve):
    if np.any(curve.arg < -1e-12) or np.any(curve.arg > math.pi + 1e-12):
        raise ValueError("curve must lie in the closed upper half plane (0 <= arg <= pi)")


def theorem1_verify(f: EntireProductFunction, curve: Curve, log_t: float, a: float,
                    log_R1_surrogate: float = 0.0, refine: Optional[bool] = None) -> WindingCertificate:
    """Measure the largest winding of f over a sub-arc crossing [t, t^{1+a}] and compare.

    ``refine=None`` bisects to the step bounds when the winding is small
    enough to make that affordable and otherwise sums exact branch increments.
    """
    _check_upper(curve)
    lm_t = log_max_modulus(f, log_t)
    vals, _ = log_f_arrays(f, curve.log_mod, curve.arg, strict=False)
    bad = np.nonzero(~(np.abs(vals) < lm_t))[0]
    if bad.size:
        k = int(bad[0])
        raise HypothesisViolated(f"|log|f|| = {abs(vals[k]):.6g} >= log M(t) = {lm_t:.6g} at sample {k}",
                                 k, (float(curve.log_mod[k]), float(curve.arg[k])), float(vals[k]))
    sub = extract_annulus_subcurve(curve, log_t, (1 + a) * log_t)
    rough = delta_arg(f, sub, refine=False)
    method = "branch"
    use_refine = refine if refine is not None else np.sum(np.abs(rough.segment_increments)) < 2e5
    if use_refine:
        try:
            prof = image_arg_profile(f, sub, refine=True)
            method = "refined"
        except RefinementLimit:
            if refine:
                raise
            prof = image_arg_profile(f, sub, refine=False)
    else:
        prof = image_arg_profile(f, sub, refine=False)
    k0, k1 = int(np.argmin(prof)), int(np.argmax(prof))
    measured = float(prof[k1] - prof[k0])
    bound = winding_lower_bound(log_t, a, lm_t)
    budget = 2 * max(f.tail_bound(x) for x in sub.log_mod)
    adm = admissible_ta(log_t, a, log_R1_surrogate)
    passed = bool(measured + budget >= bound) if adm else None
    return WindingCertificate(float(log_t), float(a), sub, (k0, k1), measured, bound, budget, adm,
                              float(lm_t), passed, method)


# ---------------------------------------------------------------------------

def trichotomy_preconditions(f, log_s, l, b, m_exp, log_R0=0.0, log_R1=0.0, log_M_s=None) -> list:
    """Violated conditions among those required for the trichotomy (empty when all hold)."""
    out = []
    lm_s = log_max_modulus(f, log_s) if log_M_s is None else log_M_s
    if log_s < max(0.0, log_R0, log_R1):
        out.append(f"s >= max(1, R0, R1): log s = {float(log_s):.6g} < {max(0.0, log_R0, log_R1):.6g}")
    if l < max(m_exp, 1 + b):
        out.append(f"l >= max(m, 1+b): l = {l} < {max(m_exp, 1 + b)}")
    if lm_s < 2 * log_s:
        out.append(f"M(s) >= s^2: log M(s) = {float(lm_s):.6g} < {2 * float(log_s):.6g}")
    if b / 4 * log_s < math.log(K_SIZE):
        out.append(f"s^(b/4) >= {K_SIZE:.4f}: fails")
    if l <= b or math.log(b) + b / 4 * log_s - math.log(l - b) < math.log(K_STRETCH):
        out.append(f"b s^(b/4)/(l-b) >= {K_STRETCH:.3f}: fails")
    return out


def classify_levels(vmin, vmax, log_M_s, l, b) -> int:
    """Case number from the range [vmin, vmax] of log|f| along the curve."""
    if vmin <= log_M_s and vmax >= (l - b) * log_M_s:
        return 1
    if vmin <= log_M_s / l and vmax >= log_M_s:
        return 2
    if vmin > log_M_s / l and vmax < (l - b) * log_M_s:
        return 3
    raise ClassificationError(f"log|f| range [{_num(vmin)}, {_num(vmax)}] fits no case "
                              f"(levels {_num(log_M_s / l)}, {_num(log_M_s)}, {_num((l - b) * log_M_s)})")


@dataclass
class TrichotomyResult:
    case: int
    evidence: dict
    certificate: Optional[WindingCertificate] = None

    def to_dict(self) -> dict:
        d = {"kind": "trichotomy", "case": self.case, "evidence": self.evidence, "constants": CONSTANTS}
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_dict()
        return d


def _dense_values(f, curve: Curve, step: float, levels=(-math.inf, math.inf), max_points: int = 2_000_000):
    """log|f| on the curve, bisecting segments until neighbouring values differ by <= step.

    Segments with both ends beyond the same outer level already decide the
    range test there and are left alone.
    """
    lo_level, hi_level = levels
    lm, ar = curve.log_mod, curve.arg
    for _ in range(30):
        v, _ = log_f_arrays(f, lm, ar, strict=False)
        jump = np.abs(np.diff(v))
        both = np.minimum(v[:-1], v[1:]) >= hi_level
        both |= np.maximum(v[:-1], v[1:]) <= lo_level
        bad = ~(jump <= step) & ~both
        if not bad.any() or 2 * lm.size > max_points:
            return lm, ar, v
        idx = np.nonzero(bad)[0]
        mid_lm = 0.5 * (lm[idx] + lm[idx + 1])
        mid_ar = 0.5 * (ar[idx] + ar[idx + 1])
        lm = np.insert(lm, idx + 1, mid_lm)
        ar = np.insert(ar, idx + 1, mid_ar)
    return lm, ar, v


def _circle_crossings(lm, ar, log_rho):
    """Points where the polyline crosses |z| = rho."""
    d = lm - log_rho
    idx = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)[0]
    out = []
    for i in idx:
        if d[i] == d[i + 1]:
            continue
        t = d[i] / (d[i] - d[i + 1])
        out.append((log_rho, ar[i] + t * (ar[i + 1] - ar[i])))
    return out


def theorem2_classify(f: EntireProductFunction, curve: Curve, log_s: float, l: float, b: float,
                      m_exp: float, log_R0: float = 0.0, log_R1: float = 0.0) -> TrichotomyResult:
    """Decide which of the three cases the curve realises.

    Case 1: f(curve) meets C(M(s)) and C(M(s)^{l-b}).
    Case 2: f(curve) meets C(M(s)^{1/l}) and C(M(s)).
    Case 3: M(s)^{1/l} < |f| < M(s)^{l-b} on the curve; then the winding bound
    applies with t = s^{l-b}, a = b/(l-b) and is at least 2 pi.
    """
    lm_s = log_max_modulus(f, log_s)
    fails = trichotomy_preconditions(f, log_s, l, b, m_exp, log_R0, log_R1, lm_s)
    if fails:
        raise PreconditionFailed(fails)
    _check_upper(curve)
    sub, span = extract_annulus_subcurve(curve, log_s, l * log_s, return_span=True)
    if sub.log_mod[0] > sub.log_mod[-1]:
        sub = sub.reversed()
    lm, ar, vals = _dense_values(f, sub, 0.01 * lm_s, (lm_s / l, (l - b) * lm_s))
    # every point of C(rho) has |f| >= m(rho) >= M(s) when the min-modulus condition holds
    rho = find_min_condition_rho(f, log_s, m_exp) if m_exp * log_s <= l * log_s else None
    extra = _circle_crossings(lm, ar, rho) if rho is not None else []
    if extra:
        ev, _ = log_f_arrays(f, np.array([p[0] for p in extra]), np.array([p[1] for p in extra]), strict=False)
        all_vals = np.concatenate([vals, ev])
    else:
        all_vals = vals
    vmin, vmax = float(np.min(all_vals)), float(np.max(all_vals))
    case = classify_levels(vmin, vmax, lm_s, l, b)
    evidence = {"log_s": float(log_s), "l": l, "b": b, "m_exp": m_exp, "log_M_s": float(lm_s),
                "log_R0_surrogate": log_R0, "log_R1_surrogate": log_R1,
                "levels": [float(lm_s / l), float(lm_s), float((l - b) * lm_s)],
                "log_abs_f_range": [vmin, vmax], "samples": int(vals.size),
                "min_condition_log_rho": rho}
    cert = None
    if case == 3:
        log_t = (l - b) * log_s
        a = b / (l - b)
        cert = theorem1_verify(f, Curve(lm, ar), log_t, a, log_R1)
        evidence["case3_bound_ge_2pi"] = cert.lower_bound >= 2 * math.pi
    return TrichotomyResult(case, evidence, cert)


# ---------------------------------------------------------------------------
# cascade

def L_sequence(L: float, n: int) -> list:
    """``L_0 = L - 1``, ``L_{k+1} = L_k - 1/(k+1)^2``."""
    out = [L - 1.0]
    for k in range(n - 1):
        out.append(out[-1] - 1.0 / (k + 1) ** 2)
    return out


def cascade_radius_ok(f, log_R, L) -> list:
    """Violations of the radius-size conditions at R: R^{1/4} >= 384 sqrt2 L/pi and M(R) > R^{4L^2}."""
    out = []
    if log_R / 4 < math.log(K_STRETCH * L):
        out.append(f"R^(1/4) >= {K_STRETCH * L:.4g} fails")
    if not log_max_modulus(f, log_R) > 4 * L * L * log_R:
        out.append("M(R) > R^(4L^2) fails")
    return out


def first_cascade_radius(f, L, lo=1.0, hi=1e4) -> float:
    """Smallest log R (to 1e-9) meeting both radius-size conditions, by bisection."""
    while cascade_radius_ok(f, hi, L):
        hi *= 2
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if cascade_radius_ok(f, mid, L):
            lo = mid
        else:
            hi = mid
    return hi


@dataclass
class CascadeReport:
    params: dict
    steps: list = field(default_factory=list)
    final_n: int = -1
    stop_reason: str = ""

    def outcomes(self) -> list:
        return [s["outcome"] for s in self.steps]

    def to_dict(self) -> dict:
        return {"kind": "cascade", "params": self.params, "steps": self.steps,
                "final_n": self.final_n, "stop_reason": self.stop_reason, "constants": CONSTANTS}


def _lc_eval(f, lm, arg):
    try:
        return eval_log(f, LogComplex(lm, arg))
    except OverflowError as exc:
        raise OutOfValidity("extended range exhausted") from exc


def _fold(arg) -> float:
    """Reduce to (-pi, pi] and reflect into the closed upper half plane."""
    a = float(arg)
    if abs(a) > ARG_LIMIT:
        raise OutOfValidity("image argument too large to reduce reliably")
    t = math.remainder(a, 2 * math.pi)
    return abs(t)


def _image(f, lms, args, window, max_points=20000, max_depth=40):
    """Image of a folded polyline as sample triples (log r, arg, f value).

    Pieces whose image log-modulus range meets ``window`` are bisected until
    the image moves by at most pi/2 in argument and 2% in log-modulus; the
    rest only matter through their endpoint values and are left alone.
    """
    lo, hi = window
    pts = [(lm, ar, _lc_eval(f, lm, ar)) for lm, ar in zip(lms, args)]
    out = [pts[0]]
    stack = [(pts[i], pts[i + 1], 0) for i in range(len(pts) - 2, -1, -1)]
    while stack:
        p, q, depth = stack.pop()
        wp, wq = p[2], q[2]
        d_arg = abs(wq.arg - wp.arg)
        d_mod = abs(wq.log_mod - wp.log_mod)
        scale = max(1, 0.02 * min(abs(wp.log_mod), abs(wq.log_mod)))
        outside = min(wp.log_mod, wq.log_mod) > hi or max(wp.log_mod, wq.log_mod) < lo
        if (outside or (d_arg <= math.pi / 2 and d_mod <= scale) or depth >= max_depth
                or len(out) + len(stack) > max_points):
            out.append(q)
            continue
        mlm = (p[0] + q[0]) / 2
        mar = (p[1] + q[1]) / 2
        m = (mlm, mar, _lc_eval(f, mlm, mar))
        stack.append((m, q, depth + 1))
        stack.append((p, m, depth + 1))
    return out


def _annulus_arc(lms, args, lo, hi):
    """Generic (float or mpf) version of the annulus sub-arc extraction."""
    state = [(-1 if x <= lo else (1 if x >= hi else 0)) for x in lms]
    last_i, last_s, span = None, 0, None
    for k, s in enumerate(state):
        if s == 0:
            continue
        if last_s != 0 and s != last_s:
            span = (last_i, k)
            break
        last_i, last_s = k, s
    if span is None:
        return None
    i, j = span

    def cut(a, b_, level):
        if lms[a] == level:
            return lms[a], args[a]
        t = (level - lms[a]) / (lms[b_] - lms[a])
        return level, args[a] + t * (args[b_] - args[a])

    p0 = cut(i, i + 1, lo if state[i] < 0 else hi)
    p1 = cut(j, j - 1, hi if state[j] > 0 else lo)
    out_lm = [p0[0], *lms[i + 1:j], p1[0]]
    out_ar = [p0[1], *args[i + 1:j], p1[1]]
    if out_lm[0] > out_lm[-1]:
        out_lm.reverse()
        out_ar.reverse()
    return out_lm, out_ar


def _densify(lms, args, n):
    """Insert n-1 points in every segment (float or mpf)."""
    out_lm, out_ar = [lms[0]], [args[0]]
    for k in range(len(lms) - 1):
        for j in range(1, n + 1):
            out_lm.append(lms[k] + (lms[k + 1] - lms[k]) * j / n)
            out_ar.append(args[k] + (args[k + 1] - args[k]) * j / n)
    return out_lm, out_ar


def cascade(f: EntireProductFunction, curve0: Curve, log_r0: float, m_exp: float,
            max_steps: int = CASCADE_MAX_STEPS, strict: bool = False) -> CascadeReport:
    """Follow image curves through expanding annuli until they wind or evaluation runs out.

    Step n works on a curve folded into the upper half plane that meets
    C(r_n) and C(r_n^{L_n}).  Its image either meets C(M(r_n)) and
    C(M(r_n)^{L_{n+1}}) (case 1, r_{n+1} = M(r_n)), or C(M(r_n)^{1/L_n}) and
    C(M(r_n)) (case 2, r_{n+1} = M(r_n)^{1/L_n}); both are "stretch".  A
    winding (case 3) ends the cascade.
    """
    L = m_exp + 4.0
    eps = 1.0 / L
    report = CascadeReport(params={"L": L, "eps": eps, "m_exp": m_exp, "log_R": float(log_r0),
                                   "max_steps": max_steps})
    fails = cascade_radius_ok(f, log_r0, L)
    if fails:
        raise PreconditionFailed(fails)
    Ls = L_sequence(L, max_steps + 1)
    log_r = log_r0
    arc = _annulus_arc(list(curve0.log_mod), list(curve0.arg), log_r0, Ls[0] * log_r0)
    if arc is None:
        raise PreconditionFailed([f"curve0 does not meet C(r0) and C(r0^{Ls[0]})"])
    lms, args = _densify(arc[0], [_fold(a) for a in arc[1]], 4)
    for n in range(max_steps):
        l_n, b = Ls[n], 1.0 / (n + 1) ** 2
        try:
            lm_s = log_max_modulus(f, log_r)
            pre = trichotomy_preconditions(f, log_r, l_n, b, m_exp, log_M_s=lm_s)
            if pre:
                raise PreconditionFailed(pre)
            img = _image(f, lms, args, (lm_s / (2 * l_n), 2 * (l_n - b) * lm_s))
            vals = [w.log_mod for _, _, w in img]
            case = classify_levels(min(vals), max(vals), lm_s, l_n, b)
        except (OutOfValidity, OverflowError) as exc:
            report.stop_reason = f"ValidityExceeded at step {n}: {exc}"
            report.steps.append({"n": n, "log_r_n": _num(log_r), "L_n": l_n, "outcome": "stop"})
            if strict:
                raise ValidityExceeded(n, str(exc)) from exc
            break
        step = {"n": n, "log_r_n": _num(log_r), "L_n": l_n, "b": b, "case": case,
                "log_M_r_n": _num(lm_s), "samples": len(img),
                "growth_ok": bool(log_r >= (4 * L) ** n * log_r0 - 1e-9)}
        report.final_n = n
        if case == 3:
            step["outcome"] = "wind"
            report.steps.append(step)
            report.stop_reason = "wind"
            break
        next_log_r = lm_s if case == 1 else lm_s / l_n
        step["outcome"] = "stretch"
        step["log_r_next"] = _num(next_log_r)
        step["stretch_ok"] = bool(next_log_r >= eps * lm_s - 1e-9)
        report.steps.append(step)
        try:
            arc = _annulus_arc([w.log_mod for _, _, w in img], [w.arg for _, _, w in img],
                               next_log_r, Ls[n + 1] * next_log_r)
            if arc is None:
                report.stop_reason = f"image curve misses the annulus at step {n + 1}"
                break
            lms, args = arc[0], [_fold(a) for a in arc[1]]
            lms, args = _densify(lms, args, 4)
        except OutOfValidity as exc:
            report.stop_reason = f"ValidityExceeded at step {n + 1}: {exc}"
            if strict:
                raise ValidityExceeded(n + 1, str(exc)) from exc
            break
        log_r = next_log_r
    else:
        report.stop_reason = "step cap"
    return report


def save_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_dict() if hasattr(obj, "to_dict") else obj, fh, indent=2, default=_num)
