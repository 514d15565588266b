"""Depth-four reductions: general circuits, homogeneous formulas and
formulas of small product depth."""

from .engine import DEFAULT_SUMMAND_CAP, SummandCapExceeded, summand_cap
from .general import reduce_general
from .hy import HyRow, hy_rows, reduce_hom_formula, reduce_hom_formula_alt, row_violations
from .shallow import (
    SHALLOW_CONSTANT, ShallowRow, reduce_shallow, shallow_bound, shallow_row_violations,
    shallow_rows,
)

PASSES = {
    "general": reduce_general,
    "hom": reduce_hom_formula,
    "hom-alt": reduce_hom_formula_alt,
    "shallow": reduce_shallow,
}

__all__ = [
    "DEFAULT_SUMMAND_CAP", "HyRow", "PASSES", "SHALLOW_CONSTANT", "ShallowRow",
    "SummandCapExceeded", "hy_rows", "reduce_general", "reduce_hom_formula",
    "reduce_hom_formula_alt", "reduce_shallow", "row_violations", "shallow_bound",
    "shallow_row_violations", "shallow_rows", "summand_cap",
]
