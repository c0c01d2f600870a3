"""Entire functions with real negative zeros: growth, winding and spiders' webs."""

from .curves import Curve, circle, delta_arg, level_curve, radial_segment
from .dynamics import ClassGrid, EscapeParams, classify_point, detect_rings, raster
from .entire_product import EntireProductFunction, eval_log, explicit, load_function, preset, truncate
from .families import OutOfValidity, ZeroFamily
from .logpolar import LogComplex, ZeroFactor
from .modulus import log_max_modulus, log_min_modulus
from .theorems import cascade, theorem1_verify, theorem2_classify

__all__ = [
    "Curve", "circle", "delta_arg", "level_curve", "radial_segment",
    "ClassGrid", "EscapeParams", "classify_point", "detect_rings", "raster",
    "EntireProductFunction", "eval_log", "explicit", "load_function", "preset", "truncate",
    "OutOfValidity", "ZeroFamily", "LogComplex", "ZeroFactor",
    "log_max_modulus", "log_min_modulus", "cascade", "theorem1_verify", "theorem2_classify",
]
