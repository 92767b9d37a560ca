"""Exact series checks of 4D consistency for 3D lattice maps on faces of a 4D cube."""

from .exactpoly import Inconsistent, Monomial, Polynomial, RationalMatrix, nullspace, solve_particular
from .lattice import Face, MapFamily, PointState, load_map_family, save_map_family
from .maps import DARBOUX, STAR_TRIANGLE, eval_closed_form, expand_darboux
from .consistency import numeric_residual, residual_is_zero, second_stage_residual
from .gauge import GaugeTransformation, compose_gauges, conjugate, kernel_element, normal_form
from .classify import check_branch_I, check_branch_II, quadratic_equations, solve_order

__all__ = [
    "Inconsistent", "Monomial", "Polynomial", "RationalMatrix", "nullspace", "solve_particular",
    "Face", "MapFamily", "PointState", "load_map_family", "save_map_family",
    "DARBOUX", "STAR_TRIANGLE", "eval_closed_form", "expand_darboux",
    "numeric_residual", "residual_is_zero", "second_stage_residual",
    "GaugeTransformation", "compose_gauges", "conjugate", "kernel_element", "normal_form",
    "check_branch_I", "check_branch_II", "quadratic_equations", "solve_order",
]
__version__ = "0.1.0"
