import itertools
import math

import numpy as np
import pytest
from sympy import GF
from sympy.polys.matrices import DomainMatrix

from chasm.core.circuit import CircuitBuilder, expand_to_sparse
from chasm.core.depth_four import Summand
from chasm.core.partition import Partition
from chasm.core.poly import SparsePoly, parse_poly
from chasm.generators import imm, random_homogeneous, random_sml_formula
from chasm.tensor import (
    BudgetExceeded, RankDecomposition, RankOneTerm, Tensor, brute_force_rank, combine_add,
    combine_mul, format_decomposition, format_tensor, multinomial, parse_decomposition,
    parse_tensor, poly_of, prune, random_tensor, rank_certificate, shape_partition,
    sml_of_summand, sml_restriction, tensor_of, trivial_bound, trivial_decomposition,
)


def sympy_rank(arr, p):
    return DomainMatrix([[GF(p)(int(x)) for x in row] for row in arr], arr.shape, GF(p)).rank()


def sml_filter(f, part):
    """Monomials of f with exactly one degree-1 variable per block."""
    keep = {}
    for m, c in f.terms.items():
        seen = [part.block_of(v) for v, e in m for _ in range(e)]
        if sorted(seen) == list(range(part.d)):
            keep[m] = c
    return SparsePoly(keep, f.nvars, f.p)


# -- tensors and polynomials ---------------------------------------------------------

def test_tensor_of_transcription():
    part = Partition.uniform(2, 2)
    f = parse_poly("x0*x3 + 3*x1*x2", 4, 101)
    t = tensor_of(f, part)
    assert t.coeffs == {(0, 1): 1, (1, 0): 3}
    assert poly_of(t) == f


def test_zero_polynomial_tensor():
    assert tensor_of(SparsePoly.zero(4, 101), Partition.uniform(2, 2)).coeffs == {}


def test_sml_restriction_drops_repeated_blocks():
    part = Partition.uniform(2, 2)
    f = parse_poly("x0*x1 + x0*x2 + x3^2", 4, 101)
    assert sml_restriction(f, part) == parse_poly("x0*x2", 4, 101)


# -- decompositions ---------------------------------------------------------------------

def test_identity_matrix_two_terms():
    t = Tensor.from_array(np.eye(2, dtype=int), 101)
    dec = trivial_decomposition(t)
    assert dec.rank == 2 and dec.verify()


@pytest.mark.parametrize("seed", range(20))
def test_trivial_bound_2x2x2(seed):
    t = random_tensor((2, 2, 2), 101, seed)
    dec = trivial_decomposition(t)
    assert dec.rank <= 4 == trivial_bound((2, 2, 2))
    assert dec.verify()


def test_trivial_bound_3x3x3():
    dec = trivial_decomposition(random_tensor((3, 3, 3), 101, 0))
    assert dec.rank <= 9 and dec.verify()


def test_combine_add_counts():
    a = trivial_decomposition(Tensor.from_array(np.eye(2, dtype=int), 101))
    b = trivial_decomposition(Tensor.from_array(np.array([[1, 2], [3, 4], ]), 101))
    b3 = RankDecomposition(b.terms + [RankOneTerm(((0, 0), (1, 1)))], b.target)
    s = combine_add(a, b3)
    assert s.rank == 5 and s.verify()
    assert combine_add(a, b3, prune_zero=True).rank == 4


def test_combine_add_with_negation():
    a = trivial_decomposition(random_tensor((2, 3), 101, 1))
    neg = Tensor(a.partition, {i: -c for i, c in a.target.coeffs.items()}, 101)
    s = combine_add(a, trivial_decomposition(neg))
    assert s.resum().coeffs == {} and s.verify()


def test_combine_mul_counts():
    a = trivial_decomposition(random_tensor((2, 2), 101, 2))
    b_t = random_tensor((3, 3), 101, 3)
    b = trivial_decomposition(Tensor(shape_partition((3, 3), offset=4), b_t.coeffs, 101))
    prod = combine_mul(a, b)
    assert prod.rank == a.rank * b.rank == 6
    assert prod.verify()
    fa, fb = poly_of(a.target, 10), poly_of(b.target, 10)
    assert poly_of(prod.target, 10) == fa * fb


def test_combine_mul_rank_one_factor():
    a = trivial_decomposition(random_tensor((2, 3), 101, 4))
    one = trivial_decomposition(Tensor(shape_partition((2,), offset=5), {(1,): 7}, 101))
    assert combine_mul(a, one).rank == a.rank


def test_combine_mul_rejects_shared_variables():
    a = trivial_decomposition(random_tensor((2, 2), 101, 2))
    with pytest.raises(ValueError, match="share"):
        combine_mul(a, a)


@pytest.mark.parametrize("seed", range(10))
def test_prune_matches_sympy_rank(seed):
    t = random_tensor((4, 4), 5, seed)
    assert prune(trivial_decomposition(t)).rank == sympy_rank(t.to_array(), 5)


# -- exhaustive rank -----------------------------------------------------------------------

def test_brute_zero_and_rank_one():
    assert brute_force_rank(Tensor.zeros((2, 2, 2), 2)) == 0
    t = Tensor(shape_partition((2, 2, 2)), {(0, 1, 1): 1}, 2)
    assert brute_force_rank(t) == 1


def test_w_tensor_rank_three():
    w = Tensor(shape_partition((2, 2, 2)), {(0, 0, 1): 1, (0, 1, 0): 1, (1, 0, 0): 1}, 2)
    assert brute_force_rank(w) == 3


@pytest.mark.parametrize("seed", range(15))
def test_brute_matches_matrix_rank(seed):
    t = random_tensor((3, 3), 3, seed)
    assert brute_force_rank(t) == sympy_rank(t.to_array(), 3)


def test_brute_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_rank(random_tensor((4, 4), 5, 0), budget=10**5)


def test_brute_max_rank():
    w = Tensor(shape_partition((2, 2, 2)), {(0, 0, 1): 1, (0, 1, 0): 1, (1, 0, 0): 1}, 2)
    assert brute_force_rank(w, max_rank=2) is None


# -- set-multilinear projections -------------------------------------------------------

def test_sml_of_disjoint_factors_is_identity():
    part = Partition.uniform(2, 2)
    a, b = parse_poly("x0 + 2*x1", 4, 101), parse_poly("x2 + x3", 4, 101)
    split = sml_of_summand(Summand((a, b)), part)
    assert split.partitions == [((0,), (1,))]
    assert split.expand() == a * b


def test_sml_excludes_doubled_block():
    part = Partition.uniform(3, 2)
    q1 = parse_poly("x0*x1 + x0*x2", 6, 101)
    q2 = parse_poly("x4 + x5", 6, 101)
    split = sml_of_summand(Summand((q1, q2)), part)
    first = {s: q for (i, s), q in split.projections.items() if i == 0}
    assert first == {(0, 1): parse_poly("x0*x2", 6, 101)}
    assert split.expand() == sml_filter(q1 * q2, part)


@pytest.mark.parametrize("seed", range(10))
def test_sml_of_random_summand(seed):
    part = Partition.uniform(3, 2)
    gen = np.random.default_rng(seed)
    terms1 = {}
    for v in range(6):
        for w in range(v, 6):
            if gen.random() < 0.5:
                m = ((v, 2),) if v == w else ((v, 1), (w, 1))
                terms1[m] = int(gen.integers(1, 101))
    q1 = SparsePoly(terms1, 6, 101)
    q2 = SparsePoly({((v, 1),): int(gen.integers(0, 101)) for v in range(6)}, 6, 101)
    split = sml_of_summand(Summand((q1, q2), coeff=3), part)
    assert split.expand() == sml_filter(q1 * q2, part).scale(3)
    assert len(split.rows) <= split.multinomial_bound == multinomial(3, [2, 1]) == 3


# -- certificates -----------------------------------------------------------------------------

def product_of_forms(d, n=2, p=101):
    b = CircuitBuilder(n * d, p)
    forms = [b.add(b.var(n * j), b.mul(b.const(j + 2), b.var(n * j + 1))) for j in range(d)]
    return b.build(b.mul(*forms), formula=True), Partition.uniform(d, n)


def test_certificate_product_of_four():
    f, part = product_of_forms(4)
    c = math.log(f.size, 2)
    dec, rep = rank_certificate(f, part, c, t=1)
    assert rep.a_min == 4 and rep.exact
    assert dec.rank <= 2 ** 3 and dec.verify()
    dec2, rep2 = rank_certificate(f, part, c)
    assert rep2.t == 3 and rep2.t_clamped and dec2.verify()


def test_certificate_imm():
    f, part = imm(2, 4)
    dec, rep = rank_certificate(f, part, math.log(f.size, 4))
    assert rep.exact and rep.term_count <= rep.term_bound


def test_certificate_homogeneous_regrouped():
    # homogeneous, but x2^2 takes block 1 twice
    p = 101
    part = Partition.uniform(3, 2)
    b = CircuitBuilder(6, p)
    f = b.build(b.mul(b.add(b.var(0), b.var(2)), b.add(b.var(2), b.var(4)), b.var(5)),
                formula=True)
    dec, rep = rank_certificate(f, part, math.log(f.size, 2), mode="homogeneous")
    want = sml_filter(expand_to_sparse(f), part)
    assert poly_of(dec.target, 6) == want and dec.verify()
    assert rep.max_rows_per_summand <= rep.multinomial_bound


def test_certificate_sml_mode_rejects_non_sml():
    part = Partition.uniform(2, 2)
    b = CircuitBuilder(4, 101)
    f = b.build(b.mul(b.var(0), b.var(1)), formula=True)
    with pytest.raises(ValueError):
        rank_certificate(f, part, 3)


@pytest.mark.parametrize("seed", range(4))
def test_certificate_random_sml(seed):
    f, part = random_sml_formula(2, 3, 30, seed)
    dec, rep = rank_certificate(f, part, math.log(f.size, 2))
    assert rep.exact and rep.within_bound
    assert poly_of(dec.target, f.nvars) == expand_to_sparse(f)


# -- text formats ---------------------------------------------------------------------------

def test_tensor_text_round_trip():
    t = random_tensor((2, 3, 2), 101, 5)
    assert parse_tensor(format_tensor(t)) == t


def test_decomposition_text_round_trip():
    dec = trivial_decomposition(random_tensor((3, 2, 2), 101, 6))
    back = parse_decomposition(format_decomposition(dec), dec.target)
    assert back.terms == dec.terms and back.verify()
