import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chasm.core.circuit import (
    CircuitBuilder, CircuitError, NotHomogeneousError, binarize_left_heavy, evaluate,
    evaluate_many, expand_to_sparse, fold_constants, gate_polys, homogeneous_components,
    homogenize, is_binary_left_heavy, is_tree,
)
from chasm.core.exchange import (
    ParseError, parse_circuit, parse_depth4, serialize_circuit, serialize_depth4,
)
from chasm.core.field import DEFAULT_PRIME, FieldElement, PrimeField
from chasm.core.poly import SparsePoly, format_poly, parse_poly
from chasm.core import vecmod
from chasm.depth4 import reduce_general
from chasm.generators import random_homogeneous


# -- field ---------------------------------------------------------------------

def test_field_rejects_composite_modulus():
    with pytest.raises(ValueError):
        PrimeField(91)


def test_field_inverse_and_fermat():
    F = PrimeField(DEFAULT_PRIME)
    rnd = random.Random(1)
    for _ in range(1000):
        a = rnd.randrange(1, F.p)
        assert F.mul(a, F.inv(a)) == 1
        assert F.pow(a, F.p) == a


@given(st.integers(0, 100), st.integers(0, 100), st.integers(0, 100))
def test_field_element_axioms(a, b, c):
    x, y, z = FieldElement(a, 101), FieldElement(b, 101), FieldElement(c, 101)
    assert (x + y) * z == x * z + y * z
    assert x + (-x) == FieldElement(0, 101)
    if a:
        assert x * x.inverse() == FieldElement(1, 101)


# -- sparse polynomials -----------------------------------------------------------

def test_term_merge():
    f = parse_poly("x0*x1 + x0*x1", 2, 101)
    assert f.terms == {((0, 1), (1, 1)): 2}


def test_difference_of_squares_mod_101():
    n, p = 2, 101
    a = SparsePoly.linear({0: 1, 1: 1}, n, p)
    b = SparsePoly.linear({0: 1, 1: -1}, n, p)
    assert format_poly(a * b) == "x0^2 + 100*x1^2"


def test_zero_polynomial_degree_sentinel():
    assert SparsePoly.zero(3, 7).degree() == -1


@settings(max_examples=50)
@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(1, 100),
                       max_size=6))
def test_poly_format_round_trip(raw):
    terms = {}
    for (a, b), c in raw.items():
        m = tuple(sorted({(a, 1), (b, 2)} if a != b else {(a, 3)}))
        terms[m] = terms.get(m, 0) + c
    f = SparsePoly(terms, 4, 101)
    assert parse_poly(format_poly(f), 4, 101) == f


# -- circuits ---------------------------------------------------------------------

def test_evaluate_small(small_circuit):
    assert evaluate(small_circuit, [3, 4]) == 14


def test_constant_circuit():
    b = CircuitBuilder(3, 101)
    c = b.build(b.const(7))
    assert evaluate(c, [5, 6, 9]) == 7


def test_square_of_sum():
    b = CircuitBuilder(2, 101)
    s = b.add(b.var(0), b.var(1))
    c = b.build(b.mul(s, s))
    assert evaluate(c, [1, 2]) == 9
    assert not is_tree(c)


def test_forward_reference_rejected():
    b = CircuitBuilder(2, 101)
    b.var(0)
    with pytest.raises(CircuitError):
        from chasm.core.circuit import Circuit, Gate, MUL
        Circuit(list(b.gates) + [Gate(MUL, 0, (0, 3), 0)], 1, 2, 101)


def test_parse_three_gate_circuit():
    text = """circuit c p=101 nvars=2
gate g0 = var 0
gate g1 = var 1
gate g2 = mul g0 g1
output g2
"""
    c = parse_circuit(text)
    assert c.size == 3 and c.degree == 2


def test_parse_forward_reference_error():
    text = """circuit c p=101 nvars=2
gate g0 = var 0
gate g1 = var 1
gate g2 = mul g0 g3
gate g3 = var 1
output g2
"""
    with pytest.raises(ParseError, match="topological"):
        parse_circuit(text)


@pytest.mark.parametrize("text, fragment", [
    ("gate g0 = var 0\noutput g0\n", "header"),
    ("circuit c p=100 nvars=1\ngate g0 = var 0\noutput g0\n", "prime"),
    ("circuit c p=101 nvars=1\ngate g0 = var 0\n", "output"),
    ("circuit c p=101 nvars=1\ngate g0 = var 0\ngate g0 = var 0\noutput g0\n", "g0"),
    ("circuit c p=101 nvars=1\ngate g0 = add g0\noutput g0\n", "cyclic"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_circuit(text)


@pytest.mark.parametrize("seed", range(10))
def test_circuit_round_trip(seed):
    c = random_homogeneous(4, 6, 50, seed, dag=seed % 2 == 1)
    back = parse_circuit(serialize_circuit(c))
    assert back.structure() == c.structure()
    assert back.output == c.output


@pytest.mark.parametrize("seed", range(5))
def test_evaluate_matches_expansion(seed):
    c = random_homogeneous(4, 5, 50, seed, dag=True)
    f = expand_to_sparse(c)
    rnd = random.Random(seed)
    pts = [[rnd.randrange(c.p) for _ in range(c.nvars)] for _ in range(20)]
    assert evaluate_many(c, pts) == [f.evaluate(pt) for pt in pts]


def test_homogenize_splits_components():
    b = CircuitBuilder(2, 101)
    x, y = b.var(0), b.var(1)
    c = b.build(b.add(b.mul(x, y), x))
    comps = homogeneous_components(c)
    assert sorted(comps) == [1, 2]
    assert format_poly(expand_to_sparse(comps[1])) == "x0"
    assert format_poly(expand_to_sparse(comps[2])) == "x0*x1"
    h = homogenize(c)
    assert expand_to_sparse(h) == expand_to_sparse(c)
    for i, q in gate_polys(h).items():
        if i != h.output and q:
            assert q.is_homogeneous()


def test_binarize_rebrackets_products():
    b = CircuitBuilder(6, 101)
    g1 = b.var(0)
    g2 = b.mul(b.var(1), b.var(2), b.var(3))
    g3 = b.mul(b.var(4), b.var(5))
    c = b.build(b.mul(g1, g2, g3))
    out = binarize_left_heavy(c)
    assert is_binary_left_heavy(out)
    assert expand_to_sparse(out) == expand_to_sparse(c)
    again = binarize_left_heavy(out)
    assert again.size == out.size


def test_binarize_needs_homogeneous_sums():
    b = CircuitBuilder(2, 101)
    c = b.build(b.add(b.mul(b.var(0), b.var(1)), b.var(0)))
    with pytest.raises(NotHomogeneousError):
        binarize_left_heavy(c)


def test_fold_constants_keeps_polynomial():
    b = CircuitBuilder(2, 101)
    x = b.var(0)
    zero = b.mul(b.const(0), b.var(1))
    c = b.build(b.add(b.mul(b.const(3), b.const(4), x), zero))
    folded = fold_constants(c)
    assert expand_to_sparse(folded) == expand_to_sparse(c)
    assert folded.size < c.size


# -- depth-four exchange -------------------------------------------------------------

def test_depth4_round_trip():
    c = random_homogeneous(4, 8, 60, 3)
    d4 = reduce_general(c, 3)
    back = parse_depth4(serialize_depth4(d4))
    assert back.to_sparse() == d4.to_sparse() == expand_to_sparse(c)


# -- vectorized arithmetic -------------------------------------------------------------

@pytest.mark.parametrize("p", [101, 2**31 - 1, DEFAULT_PRIME, 2**89 - 1])
def test_vecmod_matches_python_ints(p):
    rnd = random.Random(p)
    a = [rnd.randrange(p) for _ in range(200)] + [p - 1, 0]
    b = [rnd.randrange(p) for _ in range(200)] + [p - 1, p - 1]
    va, vb = vecmod.asarray(a, p), vecmod.asarray(b, p)
    assert [int(v) for v in vecmod.mulmod(va, vb, p)] == [x * y % p for x, y in zip(a, b)]
    assert [int(v) for v in vecmod.addmod(va, vb, p)] == [(x + y) % p for x, y in zip(a, b)]
    assert int(vecmod.summod(va, p)) == sum(a) % p


def test_vecmod_polynomial_table():
    p = DEFAULT_PRIME
    f = parse_poly("3*x0^2*x1 + x2 + 7", 3, p)
    pts = [[2, 5, 1], [p - 1, p - 2, 3]]
    table = vecmod.eval_polys([f], vecmod.points_array(pts, 3, p), p)
    assert [int(v) for v in np.asarray(table[0])] == [f.evaluate(pt) for pt in pts]
