"""Seeded corpus generators.

Every family draws from a single Philox stream keyed by the seed, consumed
in a fixed traversal order, so identical parameters give bit-identical
output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core.circuit import Circuit, CircuitBuilder, Formula
from .core.field import DEFAULT_PRIME
from .core.partition import Partition

FAMILIES = ("random-homogeneous-formula", "balanced-product", "shallow", "imm",
            "random-sml-formula", "random-tensor")


@dataclass(frozen=True)
class GeneratorParams:
    family: str
    seed: int = 0
    n: int = 4
    d: int = 4
    s: int = 60
    delta: Optional[int] = None
    width: int = 2
    dag: bool = False
    p: int = DEFAULT_PRIME


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def generate(params: GeneratorParams):
    fam = params.family
    if fam == "random-homogeneous-formula":
        return random_homogeneous(params.n, params.d, params.s, params.seed, params.p, params.dag)
    if fam == "balanced-product":
        return balanced_product(params.n, params.d, params.seed, params.p)
    if fam in ("shallow", "shallow-delta"):
        if params.delta is None:
            raise ValueError("shallow family needs delta")
        return shallow(params.n, params.d, params.delta, params.seed, params.p, params.width)
    if fam == "imm":
        return imm(params.n, params.d, params.p)[0]
    if fam == "random-sml-formula":
        return random_sml_formula(params.n, params.d, params.s, params.seed, params.p)[0]
    if fam == "random-tensor":
        from .tensor import random_tensor
        return random_tensor((params.n,) * params.d, params.p, params.seed)
    raise ValueError(f"unknown family {fam!r}; choose from {', '.join(FAMILIES)}")


# -- random homogeneous formulas and circuits -----------------------------------------

def _min_size(k: int) -> int:
    return 1 if k == 1 else k + 1


def _composition(gen, k: int, parts: int) -> List[int]:
    cuts = sorted(gen.choice(np.arange(1, k), size=parts - 1, replace=False).tolist())
    bounds = [0] + cuts + [k]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def _split_budget(gen, budget: int, needs: Sequence[int]) -> List[int]:
    """Share ``budget`` among children, each getting at least its need."""
    spare = budget - sum(needs)
    weights = gen.random(len(needs))
    shares = [int(spare * w / weights.sum()) for w in weights]
    return [n + s for n, s in zip(needs, shares)]


def random_homogeneous(n: int, d: int, s: int, seed: int, p: int = DEFAULT_PRIME,
                       dag: bool = False) -> Circuit:
    """A random homogeneous formula (or, with ``dag``, a circuit that reuses
    earlier gates) of degree ``d`` with at most ``s`` live gates."""
    if d < 1 or s < _min_size(d):
        raise ValueError(f"size budget {s} too small for degree {d} (need {_min_size(d)})")
    gen = rng(seed)
    b = CircuitBuilder(n, p)
    pool: Dict[int, List[Tuple[int, int]]] = {}  # degree -> [(gate, subtree size)]

    def leaf(budget: int) -> Tuple[int, int]:
        # a linear form over distinct variables, some terms scaled
        picks = gen.permutation(n)[:int(gen.integers(min(2, n), n + 1))].tolist()
        terms, used = [], 0
        for v in picks:
            room = budget - used - (1 if terms else 0)
            scaled = room >= 3 + (1 if terms else 0) and gen.random() < 0.25
            if room < (3 if scaled else 1) + (1 if terms else 0):
                break
            x = b.var(int(v))
            if scaled:
                x = b.mul(b.const(int(gen.integers(1, p))), x)
            terms.append(x)
            used += 3 if scaled else 1
        if len(terms) == 1:
            return terms[0], used
        return b.add(*terms), used + 1

    def build_all(degs: List[int], budget: int) -> List[Tuple[int, int]]:
        # unused budget of each child carries over to its later siblings
        shares = _split_budget(gen, budget, [_min_size(x) for x in degs])
        kids, carry = [], 0
        for x, share in zip(degs, shares):
            gid, used = build(x, share + carry)
            carry += share - used
            kids.append((gid, used))
        return kids

    def build(k: int, budget: int) -> Tuple[int, int]:
        if dag and pool.get(k) and gen.random() < 0.25:
            cands = pool[k]
            return cands[int(gen.integers(len(cands)))][0], 0
        if k == 1:
            gid, used = leaf(budget)
        elif budget >= 2 * _min_size(k) + 1 and gen.random() < 0.65:
            arity = 2 if budget < 3 * _min_size(k) + 1 or gen.random() < 0.7 else 3
            kids = build_all([k] * arity, budget - 1)
            gid, used = b.add(*(g for g, _ in kids)), 1 + sum(u for _, u in kids)
        else:
            arity = min(k, 2 if gen.random() < 0.6 else 3)
            if budget < sum(_min_size(x) for x in [1] * k) + 1:
                arity = k
            degs = _composition(gen, k, arity)
            needs = [_min_size(x) for x in degs]
            while sum(needs) + 1 > budget and arity < k:
                arity += 1
                degs = _composition(gen, k, arity)
                needs = [_min_size(x) for x in degs]
            kids = build_all(degs, budget - 1)
            gid, used = b.mul(*(g for g, _ in kids)), 1 + sum(u for _, u in kids)
        pool.setdefault(k, []).append((gid, used))
        return gid, used

    out, _ = build(d, s)
    c = b.build(out, name=f"rhf_n{n}_d{d}_s{s}_seed{seed}", formula=not dag)
    assert c.size <= s, (c.size, s)
    return c


# -- structured families --------------------------------------------------------

def _subset_form(b: CircuitBuilder, gen, n: int) -> int:
    """Sum of a random nonempty set of variables (no product gates)."""
    k = int(gen.integers(1, min(n, 3) + 1))
    vs = sorted(gen.choice(n, size=k, replace=False).tolist())
    xs = [b.var(v) for v in vs]
    return xs[0] if k == 1 else b.add(*xs)


def balanced_product(n: int, d: int, seed: int, p: int = DEFAULT_PRIME) -> Formula:
    """Product of ``d`` random 0/1 linear forms as a balanced binary tree
    (product depth ``ceil(log2 d)``)."""
    gen = rng(seed)
    b = CircuitBuilder(n, p)

    def build(k: int) -> int:
        if k == 1:
            return _subset_form(b, gen, n)
        left = build((k + 1) // 2)
        right = build(k // 2)
        return b.mul(left, right)

    return b.build(build(d), name=f"bp_n{n}_d{d}_seed{seed}", formula=True)


def linear_product(n: int, d: int, seed: int, p: int = DEFAULT_PRIME) -> Formula:
    """A single product gate over ``d`` random 0/1 linear forms."""
    gen = rng(seed)
    b = CircuitBuilder(n, p)
    forms = [_subset_form(b, gen, n) for _ in range(d)]
    return b.build(b.mul(*forms), name=f"lp_n{n}_d{d}_seed{seed}", formula=True)


def shallow(n: int, d: int, delta: int, seed: int, p: int = DEFAULT_PRIME,
            width: int = 2) -> Formula:
    """Homogeneous formula of product depth exactly ``delta``.

    Each product level has fan-in about ``d**(1/delta)``; sums of ``width``
    independent sub-formulas separate the product levels.
    """
    if delta < 1 or d < 2 ** (delta - 1) + (1 if delta == 1 else 0):
        raise ValueError(f"degree {d} too small for product depth {delta}")
    gen = rng(seed)
    b = CircuitBuilder(n, p)

    def build(k: int, level: int) -> int:
        if k == 1 or level == 0:
            return _subset_form(b, gen, n)
        if level == 1:
            return b.mul(*[_subset_form(b, gen, n) for _ in range(k)])
        fan = max(2, min(k, round(k ** (1.0 / level))))
        degs = [k // fan + (1 if i < k % fan else 0) for i in range(fan)]
        kids = []
        for j, x in enumerate(degs):
            # the first child keeps the full remaining product depth
            lvl = level - 1 if j == 0 or x > 1 else 0
            terms = [build(x, lvl) for _ in range(width if x > 1 else 1)]
            kids.append(terms[0] if len(terms) == 1 else b.add(*terms))
        return b.mul(*kids)

    return b.build(build(d, delta), name=f"sh_n{n}_d{d}_D{delta}_seed{seed}", formula=True)


def imm(w: int, d: int, p: int = DEFAULT_PRIME) -> Tuple[Formula, Partition]:
    """Entry (0, 0) of a product of ``d`` generic ``w x w`` matrices.

    Matrix ``j`` uses variables ``j*w*w + a*w + b``; the natural partition
    has one block per matrix.  Built by divide and conquer as a formula.
    """
    b = CircuitBuilder(w * w * d, p)

    def entry(lo: int, hi: int, i: int, k: int) -> int:
        if hi - lo == 1:
            return b.var(lo * w * w + i * w + k)
        mid = (lo + hi) // 2
        terms = [b.mul(entry(lo, mid, i, j), entry(mid, hi, j, k)) for j in range(w)]
        return terms[0] if w == 1 else b.add(*terms)

    f = b.build(entry(0, d, 0, 0), name=f"imm_w{w}_d{d}", formula=True)
    return f, Partition.uniform(d, w * w)


def random_sml_formula(n: int, d: int, s: int, seed: int,
                       p: int = DEFAULT_PRIME) -> Tuple[Formula, Partition]:
    """Random set-multilinear formula over ``d`` blocks of ``n`` variables:
    every product splits its block set, every sum shares it."""
    gen = rng(seed)
    part = Partition.uniform(d, n)
    b = CircuitBuilder(n * d, p)

    def form(block: int) -> int:
        vs = part.blocks[block]
        k = int(gen.integers(1, len(vs) + 1))
        pick = sorted(gen.choice(len(vs), size=k, replace=False).tolist())
        terms = [b.mul(b.const(int(gen.integers(1, p))), b.var(vs[i])) for i in pick]
        return terms[0] if k == 1 else b.add(*terms)

    def build(blocks: List[int], budget: int) -> int:
        if len(blocks) == 1:
            return form(blocks[0])
        if budget > 6 * len(blocks) and gen.random() < 0.35:
            return b.add(build(blocks, budget // 2), build(blocks, budget // 2))
        order = [blocks[i] for i in gen.permutation(len(blocks))]
        cut = int(gen.integers(1, len(blocks)))
        left, right = sorted(order[:cut]), sorted(order[cut:])
        return b.mul(build(left, budget // 2), build(right, budget // 2))

    f = b.build(build(list(range(d)), s), name=f"sml_n{n}_d{d}_seed{seed}", formula=True)
    return f, part
