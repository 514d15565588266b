import pytest

from chasm.analysis import check_homogeneous, pit_equivalent
from chasm.core.circuit import CircuitBuilder, NotHomogeneousError, expand_to_sparse
from chasm.core.poly import format_poly
from chasm.generators import balanced_product, linear_product, random_homogeneous
from chasm.vsbr import (
    DEPTH_CONSTANT, MAX_ROW_LENGTH, QNode, expansion_rows, reduced_violations, vsbr_reduce,
)


def test_linear_form_unchanged():
    b = CircuitBuilder(3, 101)
    c = b.build(b.add(b.var(0), b.mul(b.const(4), b.var(2))))
    r = vsbr_reduce(c)
    assert r.circuit is c


def test_rejects_inhomogeneous():
    b = CircuitBuilder(2, 101)
    c = b.build(b.add(b.mul(b.var(0), b.var(1)), b.var(0)))
    with pytest.raises(NotHomogeneousError):
        vsbr_reduce(c)


def test_product_of_eight_forms():
    c = balanced_product(4, 8, 5)
    r = vsbr_reduce(c)
    assert reduced_violations(r) == []
    assert pit_equivalent(c, r.circuit, trials=64).equal
    rows = expansion_rows(r)
    assert rows
    for row in rows:
        assert sum(row.degrees) == 8
        assert max(row.degrees) <= 4
        assert len(row.nodes) <= MAX_ROW_LENGTH


def test_rows_of_two_term_sum():
    b = CircuitBuilder(3, 101)
    x0, x1, x2 = b.var(0), b.var(1), b.var(2)
    g = b.add(b.mul(x0, x1), b.mul(x1, x2))
    r = vsbr_reduce(b.build(g))
    rows = expansion_rows(r)
    assert [row.degrees for row in rows] == [(1, 1), (1, 1)]
    sys_ = r.system
    got = sorted(tuple(sorted(format_poly(sys_.node_poly(f)) for f in row.nodes))
                 for row in rows)
    assert got == [("x0", "x1"), ("x1", "x2")]


def test_expansion_rows_degree_one_rejected():
    r = vsbr_reduce(balanced_product(3, 4, 0))
    leaf = next(i for i, g in enumerate(r.base.gates) if g.formal_degree == 1)
    with pytest.raises(ValueError):
        expansion_rows(r, leaf)


@pytest.mark.parametrize("seed", range(6))
def test_row_sums_match_node(seed):
    c = random_homogeneous(4, 8, 60, seed)
    r = vsbr_reduce(c)
    sys_ = r.system
    for node in list(r.quotient_gates)[:30]:
        if sys_.deg(node) < 2:
            continue
        total = None
        for row in expansion_rows(r, node):
            term = sys_.node_poly(row.nodes[0]).scale(row.coeff)
            for f in row.nodes[1:]:
                term = term * sys_.node_poly(f)
            total = term if total is None else total + term
        assert total == sys_.node_poly(node)


@pytest.mark.parametrize("seed", range(8))
def test_random_formula_invariants(seed):
    c = random_homogeneous(4, 8, 60, seed)
    r = vsbr_reduce(c)
    assert reduced_violations(r) == []
    assert check_homogeneous(r.circuit)
    assert r.depth <= DEPTH_CONSTANT * 3
    assert pit_equivalent(c, r.circuit).equal


def test_dag_input():
    c = random_homogeneous(3, 10, 50, 4, dag=True)
    r = vsbr_reduce(c)
    assert reduced_violations(r) == []
    assert expand_to_sparse(r.circuit) == expand_to_sparse(c)


def test_quotient_annotations():
    r = vsbr_reduce(linear_product(3, 6, 1))
    notes = r.annotations()
    for node, gid in r.quotient_gates.items():
        if node.v >= 0:
            assert f"quotient {node.u} {node.v}" in notes[gid]
    assert QNode(r.base.output) in r.quotient_gates
