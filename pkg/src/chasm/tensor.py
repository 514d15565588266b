"""Set-multilinear polynomials as tensors, constructive rank upper bounds,
an exhaustive rank oracle for tiny fields, and rank certificates obtained
from the homogeneous-formula depth-four pass.

Tensor indices are 0-based: index ``(i_1, ..., i_d)`` stands for the
monomial taking the ``i_j``-th variable of block ``j``.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .analysis import check_homogeneous, sml_block_set
from .core.circuit import Circuit, expand_to_sparse, gate_polys
from .core.depth_four import Summand
from .core.field import DEFAULT_PRIME, is_prime
from .core.partition import Partition
from .core.poly import Monomial, SparsePoly, poly_product, poly_sum

Index = Tuple[int, ...]


class NotSetMultilinearError(ValueError):
    """A monomial does not take exactly one variable from every block."""

    def __init__(self, monomial: Monomial, reason: str = ""):
        self.monomial = monomial
        text = "*".join(f"x{v}" if e == 1 else f"x{v}^{e}" for v, e in monomial) or "1"
        super().__init__(f"monomial {text} is not set-multilinear{': ' + reason if reason else ''}")


class BudgetExceeded(RuntimeError):
    """The exhaustive rank search would exceed its work budget."""


class CertificateError(AssertionError):
    """A rank decomposition failed its exact re-summation check."""


def shape_partition(shape: Sequence[int], offset: int = 0) -> Partition:
    """Consecutive blocks with the given sizes."""
    blocks, start = [], offset
    for n in shape:
        blocks.append(range(start, start + n))
        start += n
    return Partition(blocks)


# -- tensors -----------------------------------------------------------------

class Tensor:
    """A map from block-index tuples to nonzero residues."""

    __slots__ = ("partition", "coeffs", "p")

    def __init__(self, partition: Partition, coeffs: Dict[Index, int], p: int = DEFAULT_PRIME):
        shape = partition.sizes
        clean = {}
        for idx, c in coeffs.items():
            idx = tuple(idx)
            if len(idx) != len(shape) or any(not 0 <= i < n for i, n in zip(idx, shape)):
                raise IndexError(f"index {idx} outside shape {shape}")
            c %= p
            if c:
                clean[idx] = c
        self.partition = partition
        self.coeffs = clean
        self.p = p

    @classmethod
    def zeros(cls, shape: Sequence[int], p: int = DEFAULT_PRIME) -> "Tensor":
        return cls(shape_partition(shape), {}, p)

    @classmethod
    def from_array(cls, arr, p: int = DEFAULT_PRIME,
                   partition: Optional[Partition] = None) -> "Tensor":
        arr = np.asarray(arr, dtype=object)
        part = partition or shape_partition(arr.shape)
        return cls(part, {idx: int(c) for idx, c in np.ndenumerate(arr)}, p)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.partition.sizes

    @property
    def d(self) -> int:
        return self.partition.d

    @property
    def nnz(self) -> int:
        return len(self.coeffs)

    def get(self, idx: Index) -> int:
        return self.coeffs.get(tuple(idx), 0)

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.int64)
        for idx, c in self.coeffs.items():
            out[idx] = c
        return out

    def __add__(self, other: "Tensor") -> "Tensor":
        _same_space(self, other)
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = out.get(idx, 0) + c
        return Tensor(self.partition, out, self.p)

    def __eq__(self, other):
        return (isinstance(other, Tensor) and self.p == other.p
                and self.shape == other.shape and self.coeffs == other.coeffs)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, nnz={self.nnz}, p={self.p})"


def _same_space(a: Tensor, b: Tensor):
    if a.p != b.p:
        raise ValueError(f"field mismatch: {a.p} vs {b.p}")
    if a.partition != b.partition:
        raise ValueError("partition mismatch")


def _mono_blocks(m: Monomial, part: Partition) -> Optional[Tuple[int, ...]]:
    try:
        return part.sml_blocks(m)
    except ValueError:
        return None


def tensor_of(f: SparsePoly, part: Partition) -> Tensor:
    """The tensor of a polynomial that is set-multilinear over ``part``."""
    coeffs = {}
    for m, c in f.sorted_terms():
        blocks = _mono_blocks(m, part)
        if blocks is None or len(blocks) != part.d:
            raise NotSetMultilinearError(m)
        idx = [0] * part.d
        for v, _ in m:
            j, pos = part.locate(v)
            idx[j] = pos
        coeffs[tuple(idx)] = c
    return Tensor(part, coeffs, f.p)


def poly_of(t: Tensor, nvars: Optional[int] = None) -> SparsePoly:
    part = t.partition
    n = part.nvars if nvars is None else nvars
    terms = {}
    for idx, c in t.coeffs.items():
        terms[tuple(sorted((part.blocks[j][i], 1) for j, i in enumerate(idx)))] = c
    return SparsePoly(terms, n, t.p)


def sml_restriction(f: SparsePoly, part: Partition) -> SparsePoly:
    """The monomials of ``f`` taking exactly one variable from each block."""
    def keep(m):
        blocks = _mono_blocks(m, part)
        return blocks is not None and len(blocks) == part.d
    return f.filter(keep)


def random_tensor(shape: Sequence[int], p: int = DEFAULT_PRIME, seed: int = 0) -> Tensor:
    """Dense tensor with coefficients uniform in ``[0, p)``."""
    from .generators import rng
    gen = rng(seed)
    shape = tuple(shape)
    if p < 1 << 62:
        vals = gen.integers(0, p, size=shape, dtype=np.int64)
    else:
        vals = np.vectorize(lambda _: int(gen.integers(0, p, dtype=np.uint64)), otypes=[object])(
            np.empty(shape, dtype=object))
    return Tensor.from_array(vals, p)


# -- rank decompositions -----------------------------------------------------------

class RankOneTerm(NamedTuple):
    """``l_1(x_1) * ... * l_d(x_d)``; ``forms[j]`` holds the coefficients of
    the linear form over block ``j``."""

    forms: Tuple[Tuple[int, ...], ...]

    def is_zero(self) -> bool:
        return any(not any(f) for f in self.forms)

    def coeffs(self, p: int) -> Dict[Index, int]:
        supports = [[(i, c) for i, c in enumerate(f) if c % p] for f in self.forms]
        out = {}
        for combo in itertools.product(*supports):
            c = 1
            for _, x in combo:
                c = c * x % p
            out[tuple(i for i, _ in combo)] = c
        return out


def _resum(terms: Iterable[RankOneTerm], part: Partition, p: int) -> Tensor:
    acc: Dict[Index, int] = {}
    for term in terms:
        for idx, c in term.coeffs(p).items():
            acc[idx] = acc.get(idx, 0) + c
    return Tensor(part, acc, p)


@dataclass
class RankDecomposition:
    terms: List[RankOneTerm]
    target: Tensor

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def partition(self) -> Partition:
        return self.target.partition

    @property
    def p(self) -> int:
        return self.target.p

    def resum(self) -> Tensor:
        return _resum(self.terms, self.partition, self.p)

    def verify(self) -> bool:
        """Exact coefficient-wise comparison with the target."""
        shape = self.target.shape
        for term in self.terms:
            if tuple(len(f) for f in term.forms) != shape:
                return False
        return self.resum() == self.target


def trivial_decomposition(t: Tensor) -> RankDecomposition:
    """At most ``prod(n_i) / max(n_i)`` terms: one per index assignment to
    the blocks other than the largest (first on ties), carrying the fiber of
    ``t`` over the largest block.  Zero fibers are skipped."""
    shape = t.shape
    if not shape:
        return RankDecomposition([], t)
    big = max(range(len(shape)), key=lambda j: (shape[j], -j))
    fibers: Dict[Index, List[int]] = {}
    for idx, c in t.coeffs.items():
        key = idx[:big] + idx[big + 1:]
        fibers.setdefault(key, [0] * shape[big])[idx[big]] = c
    terms = []
    for key in sorted(fibers):
        forms = []
        for j, n in enumerate(shape):
            if j == big:
                forms.append(tuple(fibers[key]))
            else:
                i = key[j if j < big else j - 1]
                forms.append(tuple(1 if k == i else 0 for k in range(n)))
        terms.append(RankOneTerm(tuple(forms)))
    return RankDecomposition(terms, t)


def trivial_bound(shape: Sequence[int]) -> int:
    return math.prod(shape) // max(shape) if shape else 0


def combine_add(a: RankDecomposition, b: RankDecomposition, prune_zero: bool = False
                ) -> RankDecomposition:
    """Decomposition of the sum: the two term lists concatenated."""
    _same_space(a.target, b.target)
    terms = list(a.terms) + list(b.terms)
    out = RankDecomposition(terms, a.target + b.target)
    return prune(out, reduce_matrix=False) if prune_zero else out


def combine_mul(a: RankDecomposition, b: RankDecomposition) -> RankDecomposition:
    """Decomposition of the product over disjoint variable sets, on the
    concatenated partition; term count ``|a| * |b|``."""
    if a.p != b.p:
        raise ValueError(f"field mismatch: {a.p} vs {b.p}")
    shared = set(a.partition.variables()) & set(b.partition.variables())
    if shared:
        raise ValueError(f"factors share variables {sorted(shared)[:5]}")
    p = a.p
    part = a.partition.concat(b.partition)
    coeffs = {ia + ib: ca * cb % p for ia, ca in a.target.coeffs.items()
              for ib, cb in b.target.coeffs.items()}
    terms = [RankOneTerm(ta.forms + tb.forms) for ta in a.terms for tb in b.terms]
    return RankDecomposition(terms, Tensor(part, coeffs, p))


def permute_blocks(dec: RankDecomposition, part: Partition) -> RankDecomposition:
    """Reorder the blocks of ``dec`` to match ``part`` (same blocks, any order)."""
    where = {block: j for j, block in enumerate(dec.partition.blocks)}
    try:
        order = [where[block] for block in part.blocks]
    except KeyError:
        raise ValueError("partitions have different blocks") from None
    terms = [RankOneTerm(tuple(t.forms[j] for j in order)) for t in dec.terms]
    coeffs = {tuple(idx[j] for j in order): c for idx, c in dec.target.coeffs.items()}
    return RankDecomposition(terms, Tensor(part, coeffs, dec.p))


def row_reduce(rows: List[List[int]], p: int) -> Tuple[List[List[int]], List[int]]:
    """Reduced row echelon form over GF(p) and its pivot columns."""
    m = [[x % p for x in r] for r in rows]
    ncols = len(m[0]) if m else 0
    pivots, r = [], 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][col], -1, p)
        m[r] = [x * inv % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    return m[:r], pivots


def prune(dec: RankDecomposition, reduce_matrix: bool = True) -> RankDecomposition:
    """Drop terms with a zero form; for matrices (``d = 2``) also replace the
    terms by a rank factorization from row reduction when that is shorter."""
    terms = [t for t in dec.terms if not t.is_zero()]
    if reduce_matrix and dec.target.d == 2:
        p = dec.p
        n1, n2 = dec.target.shape
        mat = [[0] * n2 for _ in range(n1)]
        for (i, j), c in dec.resum().coeffs.items():
            mat[i][j] = c
        echelon, pivots = row_reduce(mat, p)
        if len(pivots) < len(terms):
            terms = [RankOneTerm((tuple(mat[i][col] for i in range(n1)), tuple(row)))
                     for col, row in zip(pivots, echelon)]
    return RankDecomposition(terms, dec.target)


# -- exhaustive rank over tiny fields ------------------------------------------------

DEFAULT_RANK_BUDGET = 5 * 10**6


def _monic_vectors(n: int, q: int) -> np.ndarray:
    """Nonzero vectors of length ``n`` whose first nonzero entry is 1."""
    out = []
    for lead in range(n):
        for tail in itertools.product(range(q), repeat=n - lead - 1):
            out.append((0,) * lead + (1,) + tail)
    return np.asarray(out, dtype=np.int64)


def rank_one_tensors(shape: Sequence[int], q: int) -> np.ndarray:
    """Every nonzero rank-one tensor of ``shape`` over GF(q), flattened in
    C order, one per row: a scalar times a product of monic forms."""
    flat = np.ones((1, 1), dtype=np.int64)
    for n in shape:
        vecs = _monic_vectors(n, q)
        flat = (flat[:, None, :, None] * vecs[None, :, None, :]).reshape(
            flat.shape[0] * vecs.shape[0], flat.shape[1] * n) % q
    scaled = [(lam * flat) % q for lam in range(1, q)]
    return np.concatenate(scaled, axis=0)


class _RankSearch:
    """Breadth-first layers of tensors by exact rank for one shape and field.

    Layer ``r`` holds the codes of tensors of rank exactly ``r``: every such
    tensor is a rank ``r - 1`` tensor plus a rank-one tensor.
    """

    def __init__(self, shape: Tuple[int, ...], q: int, budget: int):
        size = math.prod(shape)
        if size * math.log2(q) > 62:
            raise BudgetExceeded(f"{q}^{size} tensors do not fit the search encoding")
        self.shape, self.q, self.budget = shape, q, budget
        self.powers = q ** np.arange(size, dtype=np.int64)
        self.units = rank_one_tensors(shape, q)
        self.layers = [np.zeros(1, dtype=np.int64)]
        self._frontier = np.zeros((1, size), dtype=np.int64)
        self._seen = self.layers[0]

    def encode(self, digits: np.ndarray) -> int:
        return int(digits.reshape(-1) @ self.powers)

    def _grow(self):
        work = len(self._frontier) * len(self.units)
        if work > self.budget:
            raise BudgetExceeded(f"rank layer {len(self.layers)} needs {work} sums "
                                 f"(budget {self.budget})")
        cand = (self._frontier[:, None, :] + self.units[None, :, :]) % self.q
        cand = cand.reshape(-1, cand.shape[-1])
        codes, first = np.unique(cand @ self.powers, return_index=True)
        fresh = ~np.isin(codes, self._seen, assume_unique=True)
        self.layers.append(codes[fresh])
        self._frontier = cand[first[fresh]]
        self._seen = np.union1d(self._seen, codes[fresh])

    def rank_of(self, code: int, max_rank: Optional[int] = None) -> Optional[int]:
        r = 0
        while True:
            if r == len(self.layers):
                if len(self.layers[-1]) == 0:
                    raise AssertionError("rank search exhausted without finding the tensor")
                self._grow()
            layer = self.layers[r]
            pos = np.searchsorted(layer, code)
            if pos < len(layer) and layer[pos] == code:
                return r
            r += 1
            if max_rank is not None and r > max_rank:
                return None


@functools.lru_cache(maxsize=16)
def _search(shape: Tuple[int, ...], q: int, budget: int) -> _RankSearch:
    return _RankSearch(shape, q, budget)


def brute_force_rank(t: Tensor, q: Optional[int] = None, budget: int = DEFAULT_RANK_BUDGET,
                     max_rank: Optional[int] = None) -> Optional[int]:
    """Exact tensor rank over GF(q) by exhaustive search with ranks ascending.

    ``q`` defaults to the tensor's field; a different prime reduces the
    coefficients mod ``q``.  Returns None if the rank exceeds ``max_rank``.
    Raises :class:`BudgetExceeded` when a search layer would need more than
    ``budget`` candidate sums.
    """
    q = t.p if q is None else q
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime")
    digits = np.zeros(t.shape, dtype=np.int64)
    for idx, c in t.coeffs.items():
        digits[idx] = c % q
    search = _search(tuple(t.shape), q, budget)
    return search.rank_of(search.encode(digits), max_rank)


# -- set-multilinear projections of a product ------------------------------------

@dataclass
class SmlSplit:
    """``SML(coeff * Q_1 * ... * Q_a)`` as a sum over block-set partitions."""

    projections: Dict[Tuple[int, Tuple[int, ...]], SparsePoly]
    partitions: List[Tuple[Tuple[int, ...], ...]]
    rows: List[Tuple[int, Tuple[SparsePoly, ...]]]
    multinomial_bound: Optional[int]
    nvars: int
    p: int

    def expand(self) -> SparsePoly:
        return poly_sum((poly_product(fs, self.nvars, self.p).scale(c) for c, fs in self.rows),
                        self.nvars, self.p)


def multinomial(d: int, parts: Sequence[int]) -> int:
    if sum(parts) != d:
        return 0
    out, left = 1, d
    for k in parts:
        out *= math.comb(left, k)
        left -= k
    return out


def projections(f: SparsePoly, part: Partition) -> Dict[Tuple[int, ...], SparsePoly]:
    """``S -> Q_S``: the monomials of ``f`` taking one variable from each block
    of ``S`` and nothing else, for every block set ``S`` that occurs."""
    groups: Dict[Tuple[int, ...], Dict[Monomial, int]] = {}
    for m, c in f.terms.items():
        blocks = _mono_blocks(m, part)
        if blocks is not None:
            groups.setdefault(blocks, {})[m] = c
    return {s: SparsePoly(terms, f.nvars, f.p, clean=False) for s, terms in sorted(groups.items())}


def sml_of_summand(sm: Summand, part: Partition) -> SmlSplit:
    """Expansion of the set-multilinear part of a depth-four summand.

    Block sets are assigned factor by factor with backtracking, using only
    block sets on which the factor has a nonzero projection, so the row
    count never exceeds the multinomial count of all block-set partitions
    with sizes ``deg(Q_1), ..., deg(Q_a)`` when the factors are homogeneous.
    """
    factors = list(sm.factors)
    if not factors:
        raise ValueError("summand has no factors")
    nvars, p = factors[0].nvars, factors[0].p
    proj = [projections(f, part) for f in factors]
    table = {(i, s): q for i, pr in enumerate(proj) for s, q in pr.items()}
    everything = frozenset(range(part.d))
    found: List[Tuple[Tuple[int, ...], ...]] = []

    def walk(i: int, used: frozenset, chosen: List[Tuple[int, ...]]):
        if i == len(factors):
            if used == everything:
                found.append(tuple(chosen))
            return
        for s in proj[i]:
            if used.isdisjoint(s):
                chosen.append(s)
                walk(i + 1, used | frozenset(s), chosen)
                chosen.pop()

    walk(0, frozenset(), [])
    rows = [(sm.coeff % p, tuple(table[(i, s)] for i, s in enumerate(sets))) for sets in found]
    homog = all(f.is_homogeneous() for f in factors)
    bound = multinomial(part.d, [f.degree() for f in factors]) if homog else None
    return SmlSplit(table, found, rows, bound, nvars, p)


# -- rank certificates --------------------------------------------------------------

@dataclass
class CertificateReport:
    mode: str
    n: int
    d: int
    c: float
    size: int
    t: int
    log2_t_requested: int
    t_clamped: bool
    top_fanin: int
    a_min: int
    term_count: int
    term_bound: int
    within_bound: bool
    max_rows_per_summand: int
    multinomial_bound: Optional[int]
    bound_exponent: float
    savings_exponent: float
    multinomial_surcharge: float
    log_n_term_count: Optional[float]
    factor_sml_checks: int
    exact: bool
    audit: Dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _check_sml_formula(f: Circuit, part: Partition):
    polys = gate_polys(f)
    for g, q in polys.items():
        if q and sml_block_set(q, part) is None:
            raise ValueError(f"gate {g} is not set-multilinear over the partition")
    out = polys[f.output]
    blocks = sml_block_set(out, part) if out else tuple(range(part.d))
    if blocks != tuple(range(part.d)):
        raise ValueError("output does not cover every block")


def certificate_cut(c: float, d: int) -> Tuple[int, int, bool]:
    """``(t, log2 of requested t, clamped)`` for the size exponent ``c``:
    requested ``t = 2 ** ceil(110 c)``, clamped to ``[1, d - 1]``."""
    k = max(0, math.ceil(110 * c - 1e-12))
    t = min(1 << k, max(1, d - 1))
    return t, k, t != 1 << k


def _factor_decomposition(q: SparsePoly, blocks: Tuple[int, ...], part: Partition
                          ) -> RankDecomposition:
    sub = part.sub(blocks)
    return trivial_decomposition(tensor_of(q, sub))


def _scale_first(dec: RankDecomposition, coeff: int) -> RankDecomposition:
    p = dec.p
    if coeff % p == 1:
        return dec
    terms = [RankOneTerm((tuple(x * coeff % p for x in t.forms[0]),) + t.forms[1:])
             for t in dec.terms]
    target = Tensor(dec.partition, {i: c * coeff for i, c in dec.target.coeffs.items()}, p)
    return RankDecomposition(terms, target)


def rank_certificate(f: Circuit, part: Partition, c: float, mode: str = "sml",
                     t: Optional[int] = None, cap: Optional[int] = None
                     ) -> Tuple[RankDecomposition, CertificateReport]:
    """Explicit rank decomposition of the set-multilinear part of ``f``.

    The formula is reduced to depth four with cut ``t`` (by default
    ``2 ** ceil(110 c)`` clamped below ``d``); each summand's factors are
    decomposed by the trivial bound and multiplied out, after projecting to
    block sets first in ``homogeneous`` mode.  The result is checked by
    exact re-summation.
    """
    from .depth4.hy import reduce_hom_formula

    mode = {"hom": "homogeneous"}.get(mode, mode)
    if mode not in ("sml", "homogeneous"):
        raise ValueError(f"unknown mode {mode!r}")
    n, d, s = max(part.sizes), part.d, f.size
    if n > 1 and math.log(s) > c * math.log(n) + 1e-9:
        raise ValueError(f"formula size {s} exceeds n^c = {n}^{c}")
    if mode == "sml":
        _check_sml_formula(f, part)
    elif not check_homogeneous(f):
        raise ValueError("homogeneous mode needs a homogeneous formula")
    auto_t, log2_req, clamped = certificate_cut(c, f.degree)
    if t is None:
        t = auto_t
    else:
        clamped = t != 1 << log2_req
    d4 = reduce_hom_formula(f, t, cap=cap)
    p = f.p
    empty = Tensor(part, {}, p)
    total = RankDecomposition([], empty)
    sml_checks, max_rows = 0, 0
    for sm in d4.summands:
        if mode == "sml":
            sets = []
            for q in sm.factors:
                blocks = sml_block_set(q, part)
                if blocks is None:
                    raise CertificateError("a depth-four factor is not set-multilinear")
                sml_checks += 1
                sets.append(blocks)
            rows = [(sm.coeff, tuple(sm.factors), tuple(sets))]
        else:
            split = sml_of_summand(sm, part)
            rows = [(cf, fs, sets) for (cf, fs), sets in zip(split.rows, split.partitions)]
        max_rows = max(max_rows, len(rows))
        for coeff, factors, sets in rows:
            dec = None
            for q, blocks in zip(factors, sets):
                if not blocks:
                    coeff = coeff * q.constant_term() % p
                    continue
                piece = _factor_decomposition(q, blocks, part)
                dec = piece if dec is None else combine_mul(dec, piece)
            if dec is None or not coeff:
                continue
            total = combine_add(total, _scale_first(permute_blocks(dec, part), coeff))
    target = tensor_of(sml_restriction(expand_to_sparse(f), part), part)
    exact = total.target == target and total.verify()
    if not exact:
        raise CertificateError("certificate does not re-sum to the set-multilinear part of f")
    dec = RankDecomposition(total.terms, target)
    a_min = min((len(sm.factors) for sm in d4.summands), default=0)
    surcharge = d * math.log2(d) / math.log2(n) if mode == "homogeneous" and n > 1 else 0.0
    bound_rows = max_rows if mode == "homogeneous" else 1
    term_bound = d4.top_fanin * bound_rows * n ** (d - a_min)
    report = CertificateReport(
        mode=mode, n=n, d=d, c=c, size=s, t=t, log2_t_requested=log2_req, t_clamped=clamped,
        top_fanin=d4.top_fanin, a_min=a_min, term_count=dec.rank, term_bound=term_bound,
        within_bound=dec.rank <= term_bound, max_rows_per_summand=max_rows,
        multinomial_bound=max((multinomial(d, [q.degree() for q in sm.factors])
                               for sm in d4.summands), default=None)
        if mode == "homogeneous" else None,
        bound_exponent=d - a_min + 10 * c * d / t + surcharge,
        savings_exponent=a_min - 10 * c * d / t - surcharge,
        multinomial_surcharge=surcharge,
        log_n_term_count=(math.log(dec.rank, n) if dec.rank and n > 1 else None),
        factor_sml_checks=sml_checks, exact=exact,
        audit={"depth4_violations": list(d4.report.audit.get("violations", [])),
               "degenerate": bool(d4.report.audit.get("degenerate"))},
    )
    return dec, report


# -- text formats --------------------------------------------------------------------

def _shape_text(shape: Sequence[int]) -> str:
    return "x".join(str(n) for n in shape)


def _header_fields(line: str, kind: str) -> Dict[str, str]:
    parts = line.split()
    if not parts or parts[0] != kind:
        raise ValueError(f"expected a '{kind} ...' header, got {line!r}")
    out = {}
    for item in parts[1:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"malformed header field {item!r}")
        out[key] = value
    return out


def _parse_shape(text: str) -> Tuple[int, ...]:
    shape = tuple(int(x) for x in text.split("x"))
    if any(n < 1 for n in shape):
        raise ValueError(f"bad shape {text!r}")
    return shape


def format_tensor(t: Tensor) -> str:
    lines = [f"tensor p={t.p} shape={_shape_text(t.shape)}"]
    for idx in sorted(t.coeffs):
        lines.append(" ".join(str(i) for i in idx) + f" {t.coeffs[idx]}")
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> List[str]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def parse_tensor(text: str) -> Tensor:
    lines = _content_lines(text)
    if not lines:
        raise ValueError("empty tensor file")
    head = _header_fields(lines[0], "tensor")
    p, shape = int(head["p"]), _parse_shape(head["shape"])
    coeffs: Dict[Index, int] = {}
    for line in lines[1:]:
        vals = [int(x) for x in line.split()]
        if len(vals) != len(shape) + 1:
            raise ValueError(f"expected {len(shape)} indices and a coefficient: {line!r}")
        idx = tuple(vals[:-1])
        coeffs[idx] = (coeffs.get(idx, 0) + vals[-1]) % p
    return Tensor(shape_partition(shape), coeffs, p)


def format_decomposition(dec: RankDecomposition) -> str:
    lines = [f"rank p={dec.p} shape={_shape_text(dec.target.shape)} terms={dec.rank}"]
    for k, term in enumerate(dec.terms):
        lines.append(f"term {k}:")
        lines.extend(" ".join(str(x) for x in form) for form in term.forms)
    return "\n".join(lines) + "\n"


def parse_decomposition(text: str, target: Optional[Tensor] = None) -> RankDecomposition:
    """Read a decomposition; without ``target`` the target is its re-sum."""
    lines = _content_lines(text)
    if not lines:
        raise ValueError("empty decomposition file")
    head = _header_fields(lines[0], "rank")
    p, shape = int(head["p"]), _parse_shape(head["shape"])
    terms, i = [], 1
    while i < len(lines):
        if not (lines[i].startswith("term") and lines[i].endswith(":")):
            raise ValueError(f"expected 'term k:', got {lines[i]!r}")
        forms = []
        for j, n in enumerate(shape):
            vals = tuple(int(x) % p for x in lines[i + 1 + j].split())
            if len(vals) != n:
                raise ValueError(f"form {j} of {lines[i]} has {len(vals)} entries, expected {n}")
            forms.append(vals)
        terms.append(RankOneTerm(tuple(forms)))
        i += 1 + len(shape)
    if "terms" in head and int(head["terms"]) != len(terms):
        raise ValueError(f"header says {head['terms']} terms, found {len(terms)}")
    part = shape_partition(shape)
    if target is None:
        target = _resum(terms, part, p)
    return RankDecomposition(terms, target)
