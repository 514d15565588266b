import pytest

from chasm.analysis import check_homogeneous, check_set_multilinear, product_depth
from chasm.core.circuit import expand_to_sparse, is_tree
from chasm.core.exchange import serialize_circuit
from chasm.generators import (
    GeneratorParams, generate, imm, random_homogeneous, random_sml_formula, shallow,
)
from chasm.tensor import Tensor


def test_balanced_product_deterministic():
    params = GeneratorParams("balanced-product", seed=7, n=4, d=8)
    f = generate(params)
    assert product_depth(f) == 3 and f.degree == 8
    assert serialize_circuit(generate(params)) == serialize_circuit(f)


def test_imm_blocks():
    f = generate(GeneratorParams("imm", n=2, d=3))
    _, part = imm(2, 3)
    assert part.d == 3 and part.sizes == (4, 4, 4)
    assert check_set_multilinear(f, part)


def test_random_homogeneous_formula():
    f = generate(GeneratorParams("random-homogeneous-formula", seed=0, d=12, s=80))
    assert check_homogeneous(f, deep=True)
    assert f.degree == 12 and f.size <= 80 and is_tree(f)


@pytest.mark.parametrize("seed", range(5))
def test_dag_variant_shares_gates(seed):
    c = random_homogeneous(4, 8, 60, seed, dag=True)
    assert check_homogeneous(c) and c.degree == 8


@pytest.mark.parametrize("delta", [1, 2, 3])
def test_shallow_depth(delta):
    f = shallow(4, 16, delta, 0)
    assert product_depth(f) == delta and f.degree == 16


@pytest.mark.parametrize("seed", range(5))
def test_random_sml(seed):
    f, part = random_sml_formula(2, 4, 40, seed)
    assert check_set_multilinear(f, part)
    assert expand_to_sparse(f).degree() == 4


def test_random_tensor_family():
    t = generate(GeneratorParams("random-tensor", seed=3, n=3, d=3, p=101))
    assert isinstance(t, Tensor) and t.shape == (3, 3, 3)


def test_unknown_family():
    with pytest.raises(ValueError, match="unknown family"):
        generate(GeneratorParams("nope"))
