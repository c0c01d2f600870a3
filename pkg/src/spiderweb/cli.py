"""Command-line front end.

Exit codes: 0 success, 1 verified inequality violated, 2 bad input or
precondition failure, 3 evaluation hit a zero of f.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import curves, dynamics, modulus, subharmonic, theorems
from .entire_product import FunctionFileError, eval_log, load_function, preset
from .families import OutOfValidity
from .logpolar import LogComplex, ZeroFactor, from_cartesian

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_ZERO = 0, 1, 2, 3


class InputError(ValueError):
    pass


def parse_preset(spec: str):
    """``cosh_sqrt``, ``sinh_sqrt_over_sqrt`` or ``power:q=3,alpha=1,p=1``."""
    name, _, rest = spec.partition(":")
    kw = {}
    for item in filter(None, rest.split(",")):
        k, _, v = item.partition("=")
        kw[k.strip()] = float(v)
    return preset(name, **kw)


def get_function(args):
    if args.function:
        return load_function(args.function)
    if args.preset:
        return parse_preset(args.preset)
    raise InputError("one of --function or --preset is required")


def parse_point(text: str) -> LogComplex:
    """``x``, ``x+yj`` (Python complex syntax) or ``lp:LOGMOD,ARG``."""
    if text.startswith("lp:"):
        lm, ar = text[3:].split(",")
        return LogComplex(float(lm), float(ar))
    z = complex(text.replace(" ", ""))
    return from_cartesian(z.real, z.imag)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report(args, f, body: dict) -> dict:
    inputs = {k: v for k, v in vars(args).items() if k != "handler"}
    return {"inputs": inputs, "function": f.to_dict(), "constants": theorems.CONSTANTS, **body}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, default=theorems._num) + "\n")


# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    f = get_function(args)
    points = [parse_point(p) for p in args.points]
    values = [eval_log(f, z) for z in points]
    print("point\tlog_mod\targ")
    for text, w in zip(args.points, values):
        print(f"{text}\t{float(w.log_mod)!r}\t{float(w.arg)!r}")
    return EXIT_OK


def cmd_growth(args) -> int:
    f = get_function(args)
    prof = modulus.growth_profile(f, args.lo, args.hi, args.samples)
    lines = ["log_r,log_M,log_m"] + [",".join(repr(float(v)) for v in row) for row in prof.samples]
    lines.append(f"# order_estimate={prof.order_estimate!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        (_out_dir(args) / "growth.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_or_level_curve(args, f, lo, hi):
    if args.curve:
        return curves.load_curve_csv(args.curve)
    return curves.level_curve(f, lo, hi, args.log_lambda, args.points)


def verify_theorem1(args, f):
    if not theorems.admissible_ta(args.log_t, args.a, args.log_R1):
        raise theorems.PreconditionFailed([f"(log t, a) = ({args.log_t}, {args.a}) is not admissible"])
    curve = _load_or_level_curve(args, f, args.log_t - 0.1, (1 + args.a) * args.log_t + 0.1)
    cert = theorems.theorem1_verify(f, curve, args.log_t, args.a, args.log_R1)
    return cert.to_dict(), bool(cert.passed)


def verify_theorem2(args, f):
    if args.curve:
        curve = curves.load_curve_csv(args.curve)
    else:
        rng = np.random.default_rng(args.seed)
        curve = curves.random_upper_curve(rng, args.log_s - 0.3, args.l * args.log_s + 0.3, 64)
    res = theorems.theorem2_classify(f, curve, args.log_s, args.l, args.b, args.m_exp, args.log_R0, args.log_R1)
    ok = res.case != 3 or bool(res.certificate.passed and res.evidence["case3_bound_ge_2pi"])
    return res.to_dict(), ok


def verify_lemma34(args, f):
    rows = subharmonic.identity_matrix_rows()
    with open(_out_dir(args) / "lemma34.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case", "log_r", "log_lambda", "lhs", "rhs", "rel_err", "tol", "ok"])
        for r in rows:
            w.writerow([r[0], *(repr(float(v)) for v in r[1:7]), r[7]])
    return {"kind": "winding_mean_identity", "rows": len(rows), "all_ok": all(r[7] for r in rows)}, \
        all(r[7] for r in rows)


def verify_poisson(args, f):
    if args.log_r0 is None or not args.log_r < args.log_r0:
        raise theorems.PreconditionFailed(["need --log-r0 with r < r0"])
    m1, m2 = subharmonic.poisson_margins(f, args.log_r, args.log_r0, args.log_lambda)
    ok = m1 >= -subharmonic.SLACK and m2 >= -subharmonic.SLACK
    return {"kind": "poisson_bound", "margin_T_le_B": m1, "margin_B_le_factor_T": m2, "ok": ok}, ok


def verify_milloux(args, f):
    if args.log_r0 is None or not args.log_r < args.log_r0:
        raise theorems.PreconditionFailed(["need --log-r0 with r < r0"])
    level = modulus.log_max_modulus(f, args.log_t)
    try:
        margin = subharmonic.milloux_schmidt_margin(f, args.log_r, args.log_r0, level)
    except subharmonic.HypothesisUnmet as exc:
        raise theorems.PreconditionFailed([str(exc)]) from exc
    ok = margin >= -subharmonic.SLACK
    return {"kind": "milloux_schmidt", "log_M_level": level, "margin": margin, "ok": ok}, ok


def verify_cascade(args, f):
    L = args.m_exp + 4
    log_r0 = args.log_r0 if args.log_r0 is not None else theorems.first_cascade_radius(f, L)
    curve = (curves.load_curve_csv(args.curve) if args.curve
             else curves.radial_segment(log_r0 - 0.5, (L - 1) * log_r0 + 1, args.seed_theta, 32))
    rep = theorems.cascade(f, curve, log_r0, args.m_exp, args.max_steps)
    ok = all(s.get("stretch_ok", True) and s.get("growth_ok", True) for s in rep.steps)
    return rep.to_dict(), ok


VERIFIERS = {"theorem1": verify_theorem1, "theorem2": verify_theorem2, "lemma34": verify_lemma34,
             "poisson": verify_poisson, "milloux": verify_milloux, "cascade": verify_cascade}


def cmd_verify(args) -> int:
    f = get_function(args)
    try:
        body, ok = VERIFIERS[args.which](args, f)
    except (theorems.PreconditionFailed, theorems.HypothesisViolated, curves.NotCrossing,
            curves.EmptyLevelSet) as exc:
        _write_json(_out_dir(args) / f"{args.which}.json",
                    _report(args, f, {"error": type(exc).__name__, "message": str(exc)}))
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write_json(_out_dir(args) / f"{args.which}.json", _report(args, f, {"report": body, "ok": ok}))
    print(f"{args.which}: {'ok' if ok else 'VIOLATED'}")
    return EXIT_OK if ok else EXIT_VIOLATED


def cmd_raster(args) -> int:
    f = get_function(args)
    eps = args.eps if args.eps is not None else 1.0 / (args.m_exp + 4)
    params = dynamics.EscapeParams.build(f, args.log_R, eps, args.n_max, L=1.0 / eps)
    grid = dynamics.raster(f, tuple(args.window), tuple(args.resolution), params, threads=args.threads)
    out = _out_dir(args)
    grid.to_pgm(out / "grid.pgm")
    try:
        reports = dynamics.detect_rings(grid)
    except dynamics.WindowTooSmall as exc:
        print(f"window too small: {exc}", file=sys.stderr)
        return EXIT_INPUT
    dynamics.save_ring_reports(reports, out / "rings.csv")
    n_rings = sum(r.kind == "ring" for r in reports)
    print(f"rings: {n_rings}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--function", help="JSON function-definition file")
    common.add_argument("--preset", help="preset family, e.g. cosh_sqrt or power:q=3")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    ap = argparse.ArgumentParser(prog="spiderweb", description="Entire products with real negative zeros.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate log f at points")
    p.add_argument("points", nargs="+", help="x, x+yj or lp:LOGMOD,ARG")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("growth", parents=[common], help="log M and log m profile as CSV")
    p.add_argument("--lo", type=float, required=True, help="lowest log-radius")
    p.add_argument("--hi", type=float, required=True, help="highest log-radius")
    p.add_argument("--samples", type=int, default=32)
    p.set_defaults(handler=cmd_growth, out=None)

    p = sub.add_parser("verify", parents=[common], help="run one verifier and write a JSON report")
    p.add_argument("which", choices=sorted(VERIFIERS))
    p.add_argument("--curve", help="curve CSV (log_mod,arg); generated when omitted")
    p.add_argument("--log-t", type=float, default=math.log(1e9))
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--log-lambda", type=float, default=math.log(2.0))
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--log-s", type=float, default=5.0)
    p.add_argument("--l", type=float, default=5.0)
    p.add_argument("--b", type=float, default=4.0)
    p.add_argument("--m-exp", type=float, default=2.0)
    p.add_argument("--log-R0", type=float, default=0.0)
    p.add_argument("--log-R1", type=float, default=0.0)
    p.add_argument("--log-r", type=float, default=2.0)
    p.add_argument("--log-r0", type=float, default=None)
    p.add_argument("--seed-theta", type=float, default=0.0)
    p.add_argument("--max-steps", type=int, default=theorems.CASCADE_MAX_STEPS)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("raster", parents=[common], help="escape classification raster and ring report")
    p.add_argument("--window", type=float, nargs=4, default=[-3e4, 3e4, -3e4, 3e4],
                   metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    p.add_argument("--resolution", type=int, nargs=2, default=[256, 256], metavar=("W", "H"))
    p.add_argument("--log-R", type=float, default=10.0)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--m-exp", type=float, default=2.0)
    p.add_argument("--n-max", type=int, default=3)
    p.set_defaults(handler=cmd_raster)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except ZeroFactor as exc:
        print(f"zero of f: {exc}", file=sys.stderr)
        return EXIT_ZERO
    except (FunctionFileError, InputError, modulus.RangeTooSmall, OutOfValidity, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
