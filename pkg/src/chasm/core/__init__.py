"""Field arithmetic, sparse polynomials, the circuit IR and its text formats."""

from .circuit import (
    ADD, CONST, MUL, VAR, Circuit, CircuitBuilder, CircuitError, Formula, Gate,
    NotAFormulaError, NotHomogeneousError, as_formula, binarize_left_heavy,
    check_formal_homogeneous, evaluate, evaluate_array, evaluate_many, expand_to_sparse,
    fold_constants, gate_polys,
    homogeneous_components, homogenize, is_binary_left_heavy, is_tree,
)
from .depth_four import DepthFourCircuit, Summand
from .exchange import ParseError, parse_circuit, parse_depth4, serialize_circuit, serialize_depth4
from .field import DEFAULT_PRIME, MERSENNE61, FieldElement, PrimeField, is_prime
from .partition import Partition
from .poly import (
    DEFAULT_MONOMIAL_CAP, Monomial, MonomialCapExceeded, SparsePoly, format_poly, mono_degree,
    parse_poly, poly_product, poly_sum,
)

__all__ = [
    "ADD", "CONST", "MUL", "VAR", "Circuit", "CircuitBuilder", "CircuitError", "Formula", "Gate",
    "NotAFormulaError", "NotHomogeneousError", "as_formula", "binarize_left_heavy",
    "check_formal_homogeneous", "evaluate", "evaluate_array", "evaluate_many",
    "expand_to_sparse", "fold_constants", "gate_polys",
    "homogeneous_components", "homogenize", "is_binary_left_heavy", "is_tree",
    "DepthFourCircuit", "Summand", "ParseError", "parse_circuit", "parse_depth4",
    "serialize_circuit", "serialize_depth4", "DEFAULT_PRIME", "MERSENNE61", "FieldElement",
    "PrimeField", "is_prime", "Partition", "DEFAULT_MONOMIAL_CAP", "Monomial",
    "MonomialCapExceeded", "SparsePoly", "format_poly", "mono_degree", "parse_poly",
    "poly_product", "poly_sum",
]
