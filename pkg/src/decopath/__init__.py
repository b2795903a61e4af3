"""Decorated cadlag paths, Young/Marcus solvers and heavy-tailed fast-slow drivers."""

from .decorated import (Decoration, DecoratedPath, Extension, MetricEstimate, alpha_inf, alpha_pvar,
                        canonical, collapse, delta_extension, linear_lift, pvar_decorated, trivial_lift)
from .errors import (AccuracyError, ContractError, DecopathError, DivergenceError, DomainError,
                     GeometryError, ParameterError, ShapeError, StatisticsError)
from .levy import ProfileSet, StableSpec, decorate_levy, sample_stable_endpoint, sample_stable_skeleton, \
    stable_char_fn
from .paths import LINEAR, STEP, CadlagPath, TimeChange, sup_dist
from .pvar import p_variation, pvar_norm
from .skorokhod import frechet_dist, j1_dist, sigma_pvar
from .young import SolveConfig, VectorField, solve_decorated_ode, solve_marcus, solve_young_ode, \
    young_integral

__all__ = [
    "CadlagPath", "TimeChange", "STEP", "LINEAR", "sup_dist", "p_variation", "pvar_norm",
    "j1_dist", "frechet_dist", "sigma_pvar",
    "Decoration", "DecoratedPath", "Extension", "MetricEstimate", "alpha_inf", "alpha_pvar",
    "canonical", "collapse", "delta_extension", "linear_lift", "trivial_lift", "pvar_decorated",
    "VectorField", "SolveConfig", "solve_young_ode", "solve_decorated_ode", "solve_marcus", "young_integral",
    "StableSpec", "ProfileSet", "sample_stable_skeleton", "sample_stable_endpoint", "stable_char_fn",
    "decorate_levy",
    "DecopathError", "DomainError", "ShapeError", "ParameterError", "ContractError", "AccuracyError",
    "DivergenceError", "GeometryError", "StatisticsError",
]
