import math

import pytest

from chasm.analysis import bound_a, pit_equivalent
from chasm.core import expr as ex
from chasm.core.circuit import (
    CircuitBuilder, NotAFormulaError, NotHomogeneousError, expand_to_sparse,
)
from chasm.depth4 import (
    SHALLOW_CONSTANT, SummandCapExceeded, hy_rows, reduce_general, reduce_hom_formula,
    reduce_hom_formula_alt, reduce_shallow, row_violations, shallow_bound,
    shallow_row_violations, shallow_rows,
)
from chasm.depth4.hy import regroup, window
from chasm.generators import balanced_product, linear_product, random_homogeneous, shallow


def pair_product(p=101):
    b = CircuitBuilder(8, p)
    forms = [b.add(b.var(2 * i), b.var(2 * i + 1)) for i in range(4)]
    return b.build(b.mul(*forms), formula=True)


# -- general pass --------------------------------------------------------------------

def test_general_pairs_t2():
    f = pair_product()
    d4 = reduce_general(f, 2)
    assert d4.max_bottom_degree() <= 2
    assert d4.to_sparse() == expand_to_sparse(f)
    assert d4.report.audit["violations"] == []


def test_general_t_equals_d():
    f = pair_product()
    d4 = reduce_general(f, 4)
    assert d4.report.iteration_count == 0
    assert d4.report.audit["degenerate"]
    assert d4.to_sparse() == expand_to_sparse(f)


def test_general_sixteen_forms_lineage():
    f = balanced_product(4, 16, 1)
    d4 = reduce_general(f, 4)
    assert all(sum(sm.degrees) == 16 for sm in d4.summands)
    audit = d4.report.audit
    assert audit["violation_count"] == 0
    assert audit["max_bad_count"] <= 8 * 16 / 4
    assert pit_equivalent(f, d4).equal


@pytest.mark.parametrize("t", [0, 9])
def test_general_cut_range(t):
    with pytest.raises(ValueError):
        reduce_general(balanced_product(3, 8, 0), t)


def test_general_needs_homogeneous():
    b = CircuitBuilder(2, 101)
    c = b.build(b.add(b.mul(b.var(0), b.var(1)), b.var(0)))
    with pytest.raises(NotHomogeneousError):
        reduce_general(c, 1)


def test_summand_cap():
    with pytest.raises(SummandCapExceeded):
        reduce_general(random_homogeneous(4, 12, 80, 0), 2, cap=2)


# -- decomposition rows ----------------------------------------------------------------

def test_hy_degree_one():
    b = CircuitBuilder(3, 101)
    f = b.build(b.add(b.var(0), b.var(1)), formula=True)
    rows = hy_rows(f)
    assert len(rows) == 1 and rows[0].degrees == (1,)


def test_hy_product_of_eight():
    rows = hy_rows(balanced_product(4, 8, 2))
    assert len(rows) == 1
    assert rows[0].degrees == (4, 2, 1, 1)
    bounds = [window(8, j) for j in range(1, 5)]
    assert [round(x, 2) for lo_hi in bounds for x in lo_hi] == \
        [2.67, 5.33, 0.89, 3.56, 0.3, 2.37, 0.1, 1.58]
    assert row_violations(rows[0].degrees, 8) == []


def test_hy_sum_of_two_products():
    p = 101
    b = CircuitBuilder(8, p)

    def product(offset):
        forms = [b.add(b.var((offset + i) % 8), b.var((offset + i + 1) % 8)) for i in range(8)]
        while len(forms) > 1:
            forms = [b.mul(forms[i], forms[i + 1]) for i in range(0, len(forms), 2)]
        return forms[0]

    f = b.build(b.add(product(0), product(3)), formula=True)
    rows = hy_rows(f)
    assert 1 <= len({r.factors[0] for r in rows}) <= 2
    for r in rows:
        assert row_violations(r.degrees, 8) == []
    total = None
    for r in rows:
        term = r.polys(8, p)[0]
        for q in r.polys(8, p)[1:]:
            term = term * q
        total = term if total is None else total + term
    assert total == expand_to_sparse(f)


@pytest.mark.parametrize("seed", range(10))
def test_hy_windows_random(seed):
    f = random_homogeneous(4, 12, 80, seed)
    for r in hy_rows(f):
        assert row_violations(r.degrees, 12) == []


def test_hy_needs_formula():
    b = CircuitBuilder(1, 101)
    x = b.var(0)
    with pytest.raises(NotAFormulaError):
        hy_rows(b.build(b.mul(x, x)))


# -- structured passes -------------------------------------------------------------------

def test_hom_sixty_four_forms():
    f = balanced_product(6, 64, 0)
    d4 = reduce_hom_formula(f, 8)
    r = d4.report
    assert r.min_factor_count >= math.ceil(bound_a(64, 8)) == 3
    assert r.audit["violation_count"] == 0
    assert r.audit["max_big_degree_drop"] <= 24
    assert r.iteration_count <= 9 * 64 / 8
    alt = reduce_hom_formula_alt(f, 8)
    assert pit_equivalent(d4, alt).equal
    assert pit_equivalent(f, d4).equal


def test_hom_degenerate():
    f = balanced_product(3, 8, 0)
    d4 = reduce_hom_formula(f, 8)
    assert d4.report.audit["degenerate"] and d4.top_fanin == 1
    assert d4.report.iteration_count == 0
    assert d4.to_sparse() == expand_to_sparse(f)


@pytest.mark.parametrize("seed", range(5))
def test_hom_random_d12(seed):
    f = random_homogeneous(4, 12, 80, seed)
    for run in (reduce_hom_formula, reduce_hom_formula_alt):
        d4 = run(f, 4, seed=seed)
        assert d4.report.min_factor_count >= 1
        assert d4.max_bottom_degree() <= 4
        assert d4.report.audit["violations"] == []
        assert pit_equivalent(f, d4, trials=64, seed=seed).equal


def test_regroup_single_factor_noop():
    e = ex.from_circuit(linear_product(3, 4, 0))
    assert regroup([e], 4, 101) == [e]


def test_regroup_degrees():
    forms = [ex.var(i) for i in range(7)]
    groups = regroup(forms, 4, 101)
    assert sorted(g.degree for g in groups) == [2, 2, 3]


# -- shallow formulas -------------------------------------------------------------------------

def test_shallow_single_product():
    f = linear_product(4, 6, 0)
    rows = shallow_rows(f, 1)
    assert len(rows) == 1
    assert len(rows[0].factors) == 6 and rows[0].ell >= 2
    assert all(x.degree == 1 for x in rows[0].factors)
    assert rows[0].polys(4, f.p)[0] * 0 == expand_to_sparse(f) * 0


def test_shallow_delta_two():
    f = shallow(4, 16, 2, 0)
    rows = shallow_rows(f, 2)
    assert all(r.ell >= 2 for r in rows)
    assert shallow_row_violations(rows, 16, 2, f.size) == []


def test_shallow_removal_zeroes_tree():
    b = CircuitBuilder(4, 101)
    f = b.build(b.mul(b.add(b.var(0), b.var(1)), b.add(b.var(2), b.var(3))), formula=True)
    assert len(shallow_rows(f, 1)) == 1


def test_shallow_depth_exceeded():
    with pytest.raises(ValueError, match="product depth"):
        shallow_rows(shallow(4, 16, 2, 0), 1)


def test_reduce_shallow_product_of_sixteen():
    f = linear_product(4, 16, 0)
    d4 = reduce_shallow(f, 4, 1)
    assert d4.report.min_factor_count >= shallow_bound(16, 4, 1) == SHALLOW_CONSTANT[1] * 16
    assert d4.to_sparse() == expand_to_sparse(f)


def test_reduce_shallow_delta_two():
    f = shallow(4, 16, 2, 1)
    d4 = reduce_shallow(f, 4, 2)
    r = d4.report
    assert r.audit["shallow_bound"] == pytest.approx(shallow_bound(16, 4, 2))
    assert r.min_factor_count >= r.audit["shallow_bound"]
    assert r.audit["violations"] == []
    assert pit_equivalent(f, d4).equal


def test_reduce_shallow_degenerate():
    f = shallow(4, 8, 2, 0)
    d4 = reduce_shallow(f, 8, 2)
    assert d4.top_fanin == 1 and d4.report.audit["degenerate"]
