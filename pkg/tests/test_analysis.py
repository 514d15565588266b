import json
import math

import pytest

from chasm.analysis import (
    ReductionReport, bound_a, check_homogeneous, check_set_multilinear, formal_degrees,
    pit_equivalent, product_depth, report_violations, sample_points, structure_report,
    top_fanin_within,
)
from chasm.core.circuit import CircuitBuilder, NotAFormulaError, expand_to_sparse
from chasm.core.depth_four import DepthFourCircuit, Summand
from chasm.core.partition import Partition
from chasm.core.poly import SparsePoly, parse_poly
from chasm.depth4 import reduce_general, reduce_hom_formula
from chasm.generators import balanced_product, imm, random_homogeneous, shallow


def test_check_homogeneous_fails_at_sum():
    b = CircuitBuilder(3, 101)
    x0, x1 = b.var(0), b.var(1)
    bad = b.add(b.mul(x0, x1), x0)
    res = check_homogeneous(b.build(bad))
    assert not res and res.gate == bad


def test_check_homogeneous_passes():
    b = CircuitBuilder(3, 101)
    x0, x1, x2 = b.var(0), b.var(1), b.var(2)
    assert check_homogeneous(b.build(b.add(b.mul(x0, x1), b.mul(x1, x2))), deep=True)


def test_formal_degrees():
    b = CircuitBuilder(3, 101)
    out = b.mul(b.var(0), b.add(b.var(1), b.var(2)))
    five = b.const(5)
    c = b.build(out)
    assert formal_degrees(c)[out] == 2
    assert b.build(five).degree == 0


@pytest.mark.parametrize("seed", range(10))
def test_formal_degree_bounds_true_degree(seed):
    c = random_homogeneous(4, 6, 40, seed, dag=True)
    f = expand_to_sparse(c)
    assert c.degree >= f.degree()
    if f:
        assert f.degree() == c.degree and f.is_homogeneous()


def test_product_depth():
    b = CircuitBuilder(3, 101)
    f = b.build(b.mul(b.var(0), b.var(1), b.var(2)), formula=True)
    assert product_depth(f) == 1
    assert product_depth(balanced_product(4, 8, 0)) == 3
    assert product_depth(shallow(4, 16, 2, 0)) == 2


def test_product_depth_needs_formula():
    b = CircuitBuilder(1, 101)
    x = b.var(0)
    with pytest.raises(NotAFormulaError):
        product_depth(b.build(b.mul(x, x)))


def test_pit_self_and_shapes():
    b = CircuitBuilder(1, 101)
    x = b.var(0)
    sq = b.build(b.mul(x, x))
    assert pit_equivalent(sq, sq).equal
    assert pit_equivalent(sq, parse_poly("x0^2", 1, 101)).equal


def test_pit_detects_constant_difference():
    b = CircuitBuilder(1, 101)
    x = b.var(0)
    c1 = b.build(x)
    c2 = b.build(b.add(x, b.const(1)))
    v = pit_equivalent(c1, c2, trials=8, seed=3)
    assert not v.equal
    assert v.witness is not None and v.values[0] != v.values[1]
    assert (v.values[1] - v.values[0]) % 101 == 1


def test_pit_failure_bound():
    c = balanced_product(3, 8, 0)
    v = pit_equivalent(c, c, trials=4)
    from fractions import Fraction
    assert v.failure_bound == Fraction(8, c.p) ** 4


def test_pit_arity_mismatch():
    with pytest.raises(ValueError):
        pit_equivalent(SparsePoly.zero(2, 101), SparsePoly.zero(3, 101))


def test_sample_points_independent_of_trial_count():
    a = sample_points(3, 101, 5, seed=9)
    b = sample_points(3, 101, 9, seed=9)
    assert (a == b[:, :5]).all()


def test_check_set_multilinear():
    part = Partition.uniform(2, 2)  # blocks {0,1}, {2,3}
    assert check_set_multilinear(parse_poly("x0*x3", 4, 101), part)
    res = check_set_multilinear(parse_poly("x0*x1", 4, 101), part)
    assert not res and res.monomial == ((0, 1), (1, 1))


def test_imm_is_set_multilinear():
    f, part = imm(2, 3)
    assert part.sizes == (4, 4, 4)
    assert check_set_multilinear(f, part)


def test_structure_report_counts():
    p, n = 101, 4
    x = [SparsePoly.variable(i, n, p) for i in range(n)]
    sq = x[0] * x[1]
    d4 = DepthFourCircuit([Summand((sq, x[2])), Summand((x[0], x[3])), Summand((x[1], x[2]))],
                          t=2, d=3, nvars=n, p=p, homogeneous=False)
    r = structure_report(d4, {"input_size": 5})
    assert (r.top_fanin, r.min_factor_count, r.max_bottom_degree) == (3, 2, 2)


def test_general_top_fanin_bound_is_asserted():
    c = random_homogeneous(4, 8, 20, 2)
    d4 = reduce_general(c, 4)
    r = d4.report
    assert r.bound_top_fanin == pytest.approx(c.size ** 16)
    assert top_fanin_within(r.top_fanin, c.size, 8, 4, 8)
    assert report_violations(r) == []


def test_bound_a_on_product_formula():
    f = balanced_product(6, 64, 0)
    d4 = reduce_hom_formula(f, 8)
    assert bound_a(64, 8) == pytest.approx(2.4)
    assert d4.report.min_factor_count >= math.ceil(bound_a(64, 8)) == 3


def test_report_json_round_trip():
    d4 = reduce_general(random_homogeneous(4, 6, 40, 1), 2, seed=1)
    data = json.loads(d4.report.to_json())
    assert ReductionReport.from_dict(data) == d4.report
    assert set(data) >= {"input_size", "num_vars", "degree", "cut", "top_fanin",
                         "min_factor_count", "max_factor_count", "max_bottom_degree",
                         "iteration_count", "bad_term_histogram", "bound_top_fanin",
                         "bound_a", "pass_name", "seed"}


def test_report_flags_tampered_fields():
    d4 = reduce_hom_formula(random_homogeneous(4, 12, 80, 0), 4)
    r = ReductionReport.from_dict(json.loads(d4.report.to_json()))
    r.max_bottom_degree = 5
    r.iteration_count = 100
    msgs = report_violations(r)
    assert any("bottom degree" in m for m in msgs)
    assert any("iterations" in m for m in msgs)
