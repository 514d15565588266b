"""Gate-list intermediate representation for arithmetic circuits and formulas.

Gates are stored in topological order: every child index is smaller than the
index of its parent.  Formal degrees follow the usual rules (input 1, constant
0, sum = max, product = sum) and are computed once at construction.
"""

from __future__ import annotations

from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .field import DEFAULT_PRIME, PrimeField
from .poly import DEFAULT_MONOMIAL_CAP, MonomialCapExceeded, SparsePoly
from .vecmod import addmod, asarray, mulmod, points_array

VAR, CONST, ADD, MUL = "var", "const", "add", "mul"


class CircuitError(ValueError):
    pass


class NotHomogeneousError(CircuitError):
    pass


class NotAFormulaError(CircuitError):
    pass


class Gate(NamedTuple):
    kind: str
    arg: int = 0  # variable index for VAR, residue for CONST
    children: Tuple[int, ...] = ()
    formal_degree: int = 0


def _degree(kind: str, children: Sequence[int], degrees: Sequence[int]) -> int:
    if kind == VAR:
        return 1
    if kind == CONST:
        return 0
    if kind == ADD:
        return max((degrees[c] for c in children), default=0)
    return sum(degrees[c] for c in children)


class Circuit:
    """An arithmetic circuit with a single output gate.

    ``gates`` may contain dead gates (unreachable from the output); they are
    kept for serialization but excluded from :attr:`size`.
    """

    is_formula = False

    def __init__(self, gates: Sequence[Gate], output: int, nvars: int,
                 p: int = DEFAULT_PRIME, name: str = "c"):
        PrimeField(p)  # primality check
        norm: List[Gate] = []
        degrees: List[int] = []
        for i, g in enumerate(gates):
            kind = g.kind
            if kind not in (VAR, CONST, ADD, MUL):
                raise CircuitError(f"gate {i}: unknown kind {kind!r}")
            children = tuple(g.children)
            for ch in children:
                if not 0 <= ch < i:
                    raise CircuitError(f"gate {i}: child {ch} is not an earlier gate")
            arg = g.arg
            if kind == VAR:
                if not 0 <= arg < nvars:
                    raise CircuitError(f"gate {i}: variable {arg} out of range")
                if children:
                    raise CircuitError(f"gate {i}: input gate with children")
            elif kind == CONST:
                arg %= p
                if children:
                    raise CircuitError(f"gate {i}: constant gate with children")
            else:
                arg = 0
            deg = _degree(kind, children, degrees)
            degrees.append(deg)
            norm.append(Gate(kind, arg, children, deg))
        if not 0 <= output < len(norm):
            raise CircuitError(f"output {output} is not a gate")
        self.gates: Tuple[Gate, ...] = tuple(norm)
        self.output = output
        self.nvars = nvars
        self.p = p
        self.name = name
        self._live: Optional[Tuple[bool, ...]] = None
        self._parents = None

    # -- structure --------------------------------------------------------

    @property
    def live(self) -> Tuple[bool, ...]:
        if self._live is None:
            live = [False] * len(self.gates)
            live[self.output] = True
            for i in range(self.output, -1, -1):
                if live[i]:
                    for ch in self.gates[i].children:
                        live[ch] = True
            self._live = tuple(live)
        return self._live

    def live_indices(self) -> List[int]:
        return [i for i, alive in enumerate(self.live) if alive]

    @property
    def size(self) -> int:
        return sum(self.live)

    @property
    def degree(self) -> int:
        """Formal degree of the output gate."""
        return self.gates[self.output].formal_degree

    def formal_degree(self, i: int) -> int:
        return self.gates[i].formal_degree

    def parent_counts(self) -> List[int]:
        """Number of parent edges (with multiplicity) from live gates."""
        if self._parents is None:
            counts = [0] * len(self.gates)
            for i, alive in enumerate(self.live):
                if alive:
                    for ch in self.gates[i].children:
                        counts[ch] += 1
            self._parents = counts
        return self._parents

    def depth(self) -> int:
        """Length (in gates) of the longest path from the output to a leaf."""
        depth = [0] * len(self.gates)
        for i in self.live_indices():
            g = self.gates[i]
            depth[i] = 1 + max((depth[c] for c in g.children), default=0)
        return depth[self.output]

    def with_output(self, output: int) -> "Circuit":
        return Circuit(self.gates, output, self.nvars, self.p, self.name)

    def structure(self):
        """Hashable structural content, used for round-trip comparisons."""
        return (self.p, self.nvars, self.output,
                tuple((g.kind, g.arg, g.children) for g in self.gates))

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.structure() == other.structure()

    def __hash__(self):
        return hash(self.structure())

    def __repr__(self):
        kind = "Formula" if self.is_formula else "Circuit"
        return (f"<{kind} {self.name}: {self.size} live gates, degree {self.degree}, "
                f"nvars={self.nvars}, p={self.p}>")


class Formula(Circuit):
    """A circuit whose live gates form a tree rooted at the output."""

    is_formula = True

    def __init__(self, gates, output, nvars, p=DEFAULT_PRIME, name="f"):
        super().__init__(gates, output, nvars, p, name)
        counts = self.parent_counts()
        for i in self.live_indices():
            if i != self.output and counts[i] != 1:
                raise NotAFormulaError(f"gate {i} has {counts[i]} parents")

    @classmethod
    def from_circuit(cls, c: Circuit) -> "Formula":
        return cls(c.gates, c.output, c.nvars, c.p, c.name)


def is_tree(c: Circuit) -> bool:
    counts = c.parent_counts()
    return all(counts[i] == 1 for i in c.live_indices() if i != c.output)


def as_formula(c: Circuit) -> Formula:
    if isinstance(c, Formula):
        return c
    return Formula.from_circuit(c)


class CircuitBuilder:
    """Incremental construction of a :class:`Circuit`.

    >>> b = CircuitBuilder(nvars=2, p=101)
    >>> x, y = b.var(0), b.var(1)
    >>> c = b.build(b.add(b.mul(x, y), b.const(2)))
    """

    def __init__(self, nvars: int, p: int = DEFAULT_PRIME):
        self.nvars = nvars
        self.p = p
        self.gates: List[Gate] = []
        self.degrees: List[int] = []

    def _push(self, kind, arg=0, children=()):
        children = tuple(children)
        self.degrees.append(_degree(kind, children, self.degrees))
        self.gates.append(Gate(kind, arg, children, self.degrees[-1]))
        return len(self.gates) - 1

    def var(self, k: int) -> int:
        return self._push(VAR, k)

    def const(self, c: int) -> int:
        return self._push(CONST, c % self.p)

    def add(self, *children: int) -> int:
        return self._push(ADD, 0, children)

    def mul(self, *children: int) -> int:
        return self._push(MUL, 0, children)

    def degree(self, i: int) -> int:
        return self.degrees[i]

    def build(self, output: Optional[int] = None, name: str = "c", formula: bool = False):
        if output is None:
            output = len(self.gates) - 1
        cls = Formula if formula else Circuit
        return cls(self.gates, output, self.nvars, self.p, name)


# -- evaluation -----------------------------------------------------------

def gate_values(c: Circuit, point: Sequence[int]) -> List[Optional[int]]:
    p = c.p
    vals: List[Optional[int]] = [None] * len(c.gates)
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == VAR:
            vals[i] = point[g.arg] % p
        elif g.kind == CONST:
            vals[i] = g.arg
        elif g.kind == ADD:
            vals[i] = sum(vals[ch] for ch in g.children) % p
        else:
            v = 1
            for ch in g.children:
                v = v * vals[ch] % p
            vals[i] = v
    return vals


def evaluate(c: Circuit, point: Sequence[int]) -> int:
    """Value of the circuit's output at ``point`` (exact, mod p)."""
    if len(point) != c.nvars:
        raise ValueError(f"point has {len(point)} coordinates, circuit has {c.nvars} variables")
    return gate_values(c, point)[c.output]


def evaluate_array(c: Circuit, pts: np.ndarray) -> np.ndarray:
    """Output values at the columns of an ``(nvars, k)`` residue array."""
    p = c.p
    k = pts.shape[1]
    vals: Dict[int, np.ndarray] = {}
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == VAR:
            v = pts[g.arg]
        elif g.kind == CONST:
            v = asarray([g.arg] * k, p)
        else:
            kids = g.children
            if not kids:
                v = asarray([0 if g.kind == ADD else 1] * k, p)
            else:
                op = addmod if g.kind == ADD else mulmod
                v = vals[kids[0]]
                for ch in kids[1:]:
                    v = op(v, vals[ch], p)
        vals[i] = v
    return vals[c.output]


def evaluate_many(c: Circuit, points: Sequence[Sequence[int]]) -> List[int]:
    return [int(v) for v in evaluate_array(c, points_array(points, c.nvars, c.p))]


def gate_polys(c: Circuit, cap: int = DEFAULT_MONOMIAL_CAP,
               gates: Optional[Sequence[int]] = None) -> Dict[int, SparsePoly]:
    """Sparse polynomials computed at the live gates (or at ``gates`` and their
    descendants)."""
    n, p = c.nvars, c.p
    if gates is None:
        wanted = c.live_indices()
    else:
        mark = [False] * len(c.gates)
        for g in gates:
            mark[g] = True
        for i in range(len(c.gates) - 1, -1, -1):
            if mark[i]:
                for ch in c.gates[i].children:
                    mark[ch] = True
        wanted = [i for i, m in enumerate(mark) if m]
    polys: Dict[int, SparsePoly] = {}
    for i in wanted:
        g = c.gates[i]
        if g.kind == VAR:
            f = SparsePoly.variable(g.arg, n, p)
        elif g.kind == CONST:
            f = SparsePoly.constant(g.arg, n, p)
        elif g.kind == ADD:
            f = SparsePoly.zero(n, p)
            for ch in g.children:
                f = f + polys[ch]
        else:
            f = SparsePoly.constant(1, n, p)
            for ch in g.children:
                f = f.mul(polys[ch], cap)
        if len(f) > cap:
            raise MonomialCapExceeded(f"gate {i} exceeds {cap} monomials")
        polys[i] = f
    return polys


def expand_to_sparse(c: Circuit, cap: int = DEFAULT_MONOMIAL_CAP) -> SparsePoly:
    """The exact sparse polynomial computed by ``c``.

    Raises MonomialCapExceeded when an intermediate gate exceeds ``cap``
    monomials, i.e. the instance is too large to serve as an oracle.
    """
    return gate_polys(c, cap, [c.output])[c.output]


# -- normalization passes ---------------------------------------------------

def fold_constants(c: Circuit) -> Circuit:
    """Evaluate constant sub-circuits and prune syntactic zeros.

    Sums drop zero summands, products by zero become zero, products by one
    drop the factor, and single-child sums/products collapse to the child.
    Tree shape is preserved (constant gates are re-created per use).
    """
    p = c.p
    b = CircuitBuilder(c.nvars, p)
    # new[i] is ("c", value) for constants or ("g", new_index)
    new: Dict[int, Tuple[str, int]] = {}

    def emit(ref):
        kind, v = ref
        return b.const(v) if kind == "c" else v

    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == VAR:
            new[i] = ("g", b.var(g.arg))
        elif g.kind == CONST:
            new[i] = ("c", g.arg)
        elif g.kind == ADD:
            total = 0
            rest = []
            for ch in g.children:
                kind, v = new[ch]
                if kind == "c":
                    total += v
                else:
                    rest.append(v)
            total %= p
            if not rest:
                new[i] = ("c", total)
            elif len(rest) == 1 and total == 0:
                new[i] = ("g", rest[0])
            else:
                if total:
                    rest.append(b.const(total))
                new[i] = ("g", b.add(*rest))
        else:
            prod = 1
            rest = []
            for ch in g.children:
                kind, v = new[ch]
                if kind == "c":
                    prod = prod * v % p
                else:
                    rest.append(v)
            if prod == 0:
                new[i] = ("c", 0)
            elif not rest:
                new[i] = ("c", prod)
            elif len(rest) == 1 and prod == 1:
                new[i] = ("g", rest[0])
            else:
                if prod != 1:
                    rest.append(b.const(prod))
                new[i] = ("g", b.mul(*rest))
    out = emit(new[c.output])
    cls = Formula if isinstance(c, Formula) else Circuit
    return cls(b.gates, out, c.nvars, p, c.name)


def check_formal_homogeneous(c: Circuit) -> Optional[int]:
    """Index of the first live sum gate whose children differ in formal
    degree, or None."""
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == ADD and len({c.gates[ch].formal_degree for ch in g.children}) > 1:
            return i
    return None


def homogeneous_components(c: Circuit, max_degree: Optional[int] = None) -> Dict[int, Circuit]:
    """Split ``c`` into circuits for its homogeneous components.

    Uses the per-gate degree split: every gate ``g`` gets gates ``g^(k)``
    computing its degree-``k`` part, for ``k`` up to the output's formal degree.
    Only syntactically nonzero components are returned.
    """
    shared, comps = _homogenize_gates(c, max_degree)
    return {k: Circuit(shared.gates, gid, c.nvars, c.p, f"{c.name}_deg{k}")
            for k, gid in sorted(comps.items())}


def _homogenize_gates(c: Circuit, max_degree: Optional[int]):
    D = c.degree if max_degree is None else max_degree
    b = CircuitBuilder(c.nvars, c.p)
    comps: Dict[int, Dict[int, int]] = {}
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == VAR:
            comps[i] = {1: b.var(g.arg)} if D >= 1 else {}
        elif g.kind == CONST:
            comps[i] = {0: b.const(g.arg)} if g.arg else {}
        elif g.kind == ADD:
            by_k: Dict[int, List[int]] = {}
            for ch in g.children:
                for k, gid in comps[ch].items():
                    by_k.setdefault(k, []).append(gid)
            comps[i] = {k: (ids[0] if len(ids) == 1 else b.add(*ids))
                        for k, ids in sorted(by_k.items())}
        else:
            cur: Dict[int, int] = {0: b.const(1)} if not g.children else None
            for ch in g.children:
                nxt = comps[ch]
                if cur is None:
                    cur = dict(nxt)
                    continue
                by_k = {}
                for i1, a in cur.items():
                    for j1, bb in nxt.items():
                        k = i1 + j1
                        if k <= D:
                            by_k.setdefault(k, []).append(b.mul(a, bb))
                cur = {k: (ids[0] if len(ids) == 1 else b.add(*ids))
                       for k, ids in sorted(by_k.items())}
            comps[i] = cur
    return b, comps[c.output]


def homogenize(c: Circuit, degree: Optional[int] = None) -> Circuit:
    """Rewrite ``c`` so that every gate computes a homogeneous polynomial.

    With ``degree`` given, the result computes exactly the degree-``degree``
    component.  Otherwise the result computes the same polynomial and its
    output is the sum of the component gates (the only gate that may be
    inhomogeneous, and only when several components are present).
    """
    b, comps = _homogenize_gates(c, degree)
    if degree is not None:
        out = comps.get(degree)
        if out is None:
            out = b.const(0)
    elif not comps:
        out = b.const(0)
    elif len(comps) == 1:
        out = next(iter(comps.values()))
    else:
        out = b.add(*[comps[k] for k in sorted(comps)])
    return Circuit(b.gates, out, c.nvars, c.p, c.name)


def binarize_left_heavy(c: Circuit) -> Circuit:
    """Rebracket every sum/product to fan-in exactly 2.

    Products get their heavier (higher formal degree) child on the left.
    Fan-in-one gates collapse into their child; empty sums/products become
    the constants 0/1.  Tree shape is preserved.
    """
    bad = check_formal_homogeneous(c)
    if bad is not None:
        raise NotHomogeneousError(f"sum gate {bad} has children of different degrees")
    b = CircuitBuilder(c.nvars, c.p)
    new: Dict[int, int] = {}
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == VAR:
            new[i] = b.var(g.arg)
        elif g.kind == CONST:
            new[i] = b.const(g.arg)
        else:
            kids = [new[ch] for ch in g.children]
            if not kids:
                new[i] = b.const(0 if g.kind == ADD else 1)
                continue
            acc = kids[-1]
            for k in reversed(kids[:-1]):
                if g.kind == ADD:
                    acc = b.add(k, acc)
                elif b.degree(k) >= b.degree(acc):
                    acc = b.mul(k, acc)
                else:
                    acc = b.mul(acc, k)
            new[i] = acc
    cls = Formula if isinstance(c, Formula) else Circuit
    return cls(b.gates, new[c.output], c.nvars, c.p, c.name)


def is_binary_left_heavy(c: Circuit) -> bool:
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind in (ADD, MUL) and len(g.children) != 2:
            return False
        if g.kind == MUL:
            left, right = g.children
            if c.gates[left].formal_degree < c.gates[right].formal_degree:
                return False
    return True
