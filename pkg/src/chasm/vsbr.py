"""Log-depth reduction of homogeneous circuits through gate quotients.

Work on a binary, left-heavy, constant-folded homogeneous circuit.  For gates
``u`` and ``v`` the quotient ``[u:v]`` is defined by

* ``[v:v] = 1``;
* ``[u:v] = [a:v] + [b:v]`` for a sum gate ``u = a + b``;
* ``[u:v] = [L:v] * [R]`` for a product gate ``u = L * R`` (heavier child on
  the left);
* ``[u:v] = 0`` for any other leaf.

It is nonzero only when ``v`` is reachable from ``u`` through sum children
and left product children; ``reach[u]`` is that set, as a bitmask.

For ``m < deg(u)`` the frontier ``F_m(u)`` is the set of product gates ``w``
reachable from ``u`` with ``deg(w) > m >= deg(w_L)``, and

    [u]   = sum over w in F_m(u)                  of [u:w] [w_L] [w_R]
    [u:v] = sum over w in F_m(u), v reachable from w_L, of [u:w] [w_L:v] [w_R]

(the second for ``deg(v) <= m``).  Choosing ``m = floor(deg(u)/2)`` in the
first and ``m = deg(v) + floor((deg(u) - deg(v))/2)`` in the second keeps every
factor at most half the degree of the left-hand side, except possibly
``[w_R]`` in the second; that one is replaced by its own expansion, giving
rows of at most five factors.  Materializing every node as a sum of its rows
yields a circuit of depth ``2 floor(log2 d) + 3``.
"""

from __future__ import annotations

import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .analysis import check_homogeneous
from .core.circuit import (
    ADD, CONST, MUL, VAR, Circuit, CircuitBuilder, CircuitError, NotHomogeneousError,
    binarize_left_heavy, check_formal_homogeneous, fold_constants, is_binary_left_heavy,
)
from .core.expr import Expr
from .core import expr as ex
from .core.poly import SparsePoly

DEPTH_CONSTANT = 5
MAX_ROW_LENGTH = 5


class QNode(NamedTuple):
    """``[u]`` when ``v == -1``, the quotient ``[u:v]`` otherwise."""
    u: int
    v: int = -1

    @property
    def is_quotient(self) -> bool:
        return self.v >= 0


class Row(NamedTuple):
    coeff: int
    factors: Tuple[QNode, ...]


def prepare(c: Circuit) -> Circuit:
    """Fold constants and rebracket to binary left-heavy form."""
    return fold_constants(binarize_left_heavy(fold_constants(c)))


class QuotientSystem:
    """Rows, constants and polynomials of the nodes ``[u]`` and ``[u:v]``.

    Everything is computed lazily and memoized, so passes that only touch
    a few nodes never pay for the rest.
    """

    def __init__(self, base: Circuit):
        bad = check_formal_homogeneous(base)
        if bad is not None:
            raise NotHomogeneousError(f"sum gate {bad} has children of different degrees")
        if not is_binary_left_heavy(base):
            raise CircuitError("circuit is not binary left-heavy (run prepare first)")
        self.base = base
        self.p = base.p
        self.nvars = base.nvars
        gates = base.gates
        live = base.live_indices()
        reach: Dict[int, int] = {}
        for i in live:
            g = gates[i]
            r = 1 << i
            if g.kind == ADD:
                r |= reach[g.children[0]] | reach[g.children[1]]
            elif g.kind == MUL:
                r |= reach[g.children[0]]
            reach[i] = r
        self.reach = reach
        self.mul_gates = [i for i in live if gates[i].kind == MUL]
        self.frontier_cache: Dict[Tuple[int, int], Tuple[int, ...]] = {}
        self._rows: Dict[QNode, Tuple[Row, ...]] = {}
        self._const: Dict[Tuple[int, int], int] = {}
        self._poly: Dict[QNode, SparsePoly] = {}
        self._gate_poly: Dict[int, SparsePoly] = {}
        self._exprs: Optional[Dict[int, Expr]] = None

    # -- basic queries -----------------------------------------------------

    def deg(self, node: QNode) -> int:
        d = self.base.gates[node.u].formal_degree
        return d if node.v < 0 else d - self.base.gates[node.v].formal_degree

    def reaches(self, u: int, v: int) -> bool:
        return bool(self.reach[u] >> v & 1)

    def frontier(self, u: int, m: int) -> Tuple[int, ...]:
        key = (u, m)
        hit = self.frontier_cache.get(key)
        if hit is None:
            gates = self.base.gates
            r = self.reach[u]
            hit = tuple(w for w in self.mul_gates
                        if r >> w & 1 and gates[w].formal_degree > m
                        >= gates[gates[w].children[0]].formal_degree)
            self.frontier_cache[key] = hit
        return hit

    def qconst(self, u: int, v: int) -> int:
        """Value of a degree-0 quotient ``[u:v]``."""
        key = (u, v)
        hit = self._const.get(key)
        if hit is not None:
            return hit
        g = self.base.gates[u]
        if u == v:
            val = 1
        elif g.kind == ADD:
            val = sum(self.qconst(ch, v) for ch in g.children if self.reaches(ch, v)) % self.p
        elif g.kind == MUL:
            left, right = g.children
            rg = self.base.gates[right]
            if not self.reaches(left, v) or rg.kind != CONST:
                val = 0
            else:
                val = self.qconst(left, v) * rg.arg % self.p
        else:
            val = 0
        self._const[key] = val
        return val

    # -- exact polynomials (oracle and bottom-layer conversion) -----------------

    def gate_poly(self, u: int) -> SparsePoly:
        hit = self._gate_poly.get(u)
        if hit is not None:
            return hit
        g = self.base.gates[u]
        n, p = self.nvars, self.p
        if g.kind == VAR:
            f = SparsePoly.variable(g.arg, n, p)
        elif g.kind == CONST:
            f = SparsePoly.constant(g.arg, n, p)
        elif g.kind == ADD:
            f = self.gate_poly(g.children[0]) + self.gate_poly(g.children[1])
        else:
            f = self.gate_poly(g.children[0]) * self.gate_poly(g.children[1])
        self._gate_poly[u] = f
        return f

    def node_poly(self, node: QNode) -> SparsePoly:
        """Exact polynomial of a node, by the defining recursion."""
        if node.v < 0:
            return self.gate_poly(node.u)
        hit = self._poly.get(node)
        if hit is not None:
            return hit
        u, v = node
        g = self.base.gates[u]
        n, p = self.nvars, self.p
        if u == v:
            f = SparsePoly.constant(1, n, p)
        elif not self.reaches(u, v):
            f = SparsePoly.zero(n, p)
        elif g.kind == ADD:
            f = self.node_poly(QNode(g.children[0], v)) + self.node_poly(QNode(g.children[1], v))
        else:
            left, right = g.children
            f = self.node_poly(QNode(left, v)) * self.gate_poly(right)
        self._poly[node] = f
        return f

    def node_expr(self, node: QNode) -> Expr:
        """The node as an expression tree over the base gates.

        ``[u]`` is the sub-circuit at ``u``; ``[u:v]`` is the product of the
        right children met on the path from ``u`` down to ``v``, which is its
        exact value when the base circuit is a tree.
        """
        if node.v < 0:
            return self._gate_expr(node.u)
        u, v = node
        gates, p = self.base.gates, self.p
        kids = []
        while u != v:
            g = gates[u]
            if g.kind == ADD:
                u = next(ch for ch in g.children if self.reaches(ch, v))
            elif g.kind == MUL:
                kids.append(self._gate_expr(g.children[1]))
                u = g.children[0]
            else:
                raise CircuitError(f"gate {v} is not reachable from {node.u}")
        return ex.mul(kids, p)

    def _gate_expr(self, u: int) -> Expr:
        if self._exprs is None:
            p = self.p
            memo: Dict[int, Expr] = {}
            for i in self.base.live_indices():
                g = self.base.gates[i]
                if g.kind == VAR:
                    memo[i] = ex.var(g.arg)
                elif g.kind == CONST:
                    memo[i] = ex.const(g.arg, p)
                else:
                    kids = [memo[ch] for ch in g.children]
                    memo[i] = ex.add(kids, p) if g.kind == ADD else ex.mul(kids, p)
            self._exprs = memo
        return self._exprs[u]

    # -- expansion rows ---------------------------------------------------------

    def is_zero_node(self, node: QNode) -> bool:
        """Syntactically zero: a dead quotient, or a node with no rows."""
        d = self.deg(node)
        if node.v >= 0 and not self.reaches(node.u, node.v):
            return True
        if d == 1:
            return not self.node_poly(node)
        if d >= 2:
            return not self.rows(node)
        return False

    def rows(self, node: QNode) -> Tuple[Row, ...]:
        """Expansion rows of a node of degree at least 2.

        Each row is a scalar times at most five nodes, each of degree at least
        1 and at most half the degree of ``node``, with degrees summing to the
        node's degree.
        """
        hit = self._rows.get(node)
        if hit is not None:
            return hit
        k = self.deg(node)
        if k < 2:
            raise ValueError(f"node {tuple(node)} has degree {k}; rows need degree >= 2")
        gates = self.base.gates
        u, v = node
        raw: List[Row] = []
        if v < 0:
            for w in self.frontier(u, k // 2):
                left, right = gates[w].children
                parts = [self._part(QNode(u, w)), self._part(QNode(left))]
                parts.append(self._part(QNode(right)))
                raw.extend(self._combine(parts))
        elif self.reaches(u, v):
            dv = gates[v].formal_degree
            for w in self.frontier(u, dv + k // 2):
                left, right = gates[w].children
                if not self.reaches(left, v):
                    continue
                parts = [self._part(QNode(u, w)), self._part(QNode(left, v))]
                right_node = QNode(right)
                if 2 * self.deg(right_node) > k:
                    parts.append(list(self.rows(right_node)))
                else:
                    parts.append(self._part(right_node))
                raw.extend(self._combine(parts))
        merged: Dict[Tuple[QNode, ...], int] = {}
        for row in raw:
            merged[row.factors] = (merged.get(row.factors, 0) + row.coeff) % self.p
        out = tuple(Row(c, f) for f, c in merged.items() if c)
        self._rows[node] = out
        return out

    def _part(self, node: QNode) -> List[Row]:
        """A factor as a one-row list: a scalar when it has degree 0, empty
        when it is zero."""
        d = self.deg(node)
        if d == 0:
            if node.v < 0:
                g = self.base.gates[node.u]
                c = g.arg if g.kind == CONST else 0
            else:
                c = self.qconst(node.u, node.v)
            return [Row(c, ())] if c else []
        if self.is_zero_node(node):
            return []
        return [Row(1, (node,))]

    def _combine(self, parts: Sequence[List[Row]]) -> List[Row]:
        out = [Row(1, ())]
        for options in parts:
            out = [Row(a.coeff * b.coeff % self.p, a.factors + b.factors)
                   for a in out for b in options]
        return [r for r in out if r.coeff]


class ReducedCircuit:
    """Output of :func:`vsbr_reduce`.

    ``circuit`` is the materialized log-depth circuit; ``quotient_gates`` maps
    each materialized node ``(u, v)`` (``v = -1`` for ``[u]``) to its gate.
    """

    def __init__(self, system: QuotientSystem, circuit: Circuit,
                 quotient_gates: Dict[QNode, int], output_node: QNode,
                 row_gates: Dict[QNode, Tuple[int, ...]]):
        self.system = system
        self.base = system.base
        self.circuit = circuit
        self.quotient_gates = quotient_gates
        self.output_node = output_node
        self.row_gates = row_gates

    @property
    def frontier_cache(self):
        return self.system.frontier_cache

    @property
    def size(self) -> int:
        return self.circuit.size

    @property
    def depth(self) -> int:
        return self.circuit.depth()

    @property
    def degree(self) -> int:
        return self.circuit.degree

    def depth_bound(self) -> float:
        return DEPTH_CONSTANT * max(1.0, math.log2(max(self.degree, 1)))

    def annotations(self) -> Dict[int, List[str]]:
        notes: Dict[int, List[str]] = {}
        for node, gid in self.quotient_gates.items():
            if node.v >= 0:
                notes.setdefault(gid, []).append(f"quotient {node.u} {node.v}")
        return notes


def vsbr_reduce(c: Circuit, prepared: bool = False) -> ReducedCircuit:
    """Rebuild ``c`` (homogeneous) as a log-depth circuit of products of
    fan-in at most five.

    The input is first constant-folded and binarized unless ``prepared`` is
    set, in which case it must already be binary left-heavy.  Circuits of
    degree at most one are returned unchanged.
    """
    if check_formal_homogeneous(c) is not None:
        raise NotHomogeneousError("vsbr_reduce needs a homogeneous circuit")
    base = c if prepared else prepare(c)
    system = QuotientSystem(base)
    out_node = QNode(base.output)
    if base.degree <= 1:
        return ReducedCircuit(system, c, {}, out_node, {})
    return _materialize(system, out_node, c.name)


def _materialize(system: QuotientSystem, out_node: QNode, name: str) -> ReducedCircuit:
    base = system.base
    b = CircuitBuilder(base.nvars, base.p)
    gate_of: Dict[QNode, int] = {}
    row_gates: Dict[QNode, Tuple[int, ...]] = {}

    def linear(node: QNode) -> int:
        terms = []
        for m, coef in system.node_poly(node).sorted_terms():
            x = b.var(m[0][0])
            terms.append(x if coef == 1 else b.mul(b.const(coef), x))
        return terms[0] if len(terms) == 1 else b.add(*terms)

    def emit(node: QNode) -> int:
        hit = gate_of.get(node)
        if hit is not None:
            return hit
        d = system.deg(node)
        if d == 1:
            gid = linear(node)
        else:
            mults = []
            for row in system.rows(node):
                kids = [emit(f) for f in row.factors]
                if row.coeff != 1:
                    kids.append(b.const(row.coeff))
                mults.append(kids[0] if len(kids) == 1 else b.mul(*kids))
            row_gates[node] = tuple(mults)
            gid = mults[0] if len(mults) == 1 else b.add(*mults)
        gate_of[node] = gid
        return gid

    if system.deg(out_node) == 0 or system.is_zero_node(out_node):
        out = b.const(0 if system.deg(out_node) else base.gates[out_node.u].arg)
    else:
        out = emit(out_node)
    circuit = b.build(out, name=name)
    return ReducedCircuit(system, circuit, gate_of, out_node, row_gates)


class ExpansionRow(NamedTuple):
    coeff: int
    nodes: Tuple[QNode, ...]
    gates: Tuple[int, ...]
    degrees: Tuple[int, ...]


def expansion_rows(r: ReducedCircuit, g: Optional[object] = None) -> List[ExpansionRow]:
    """Rows ``coeff * g_1 * ... * g_k`` (``k <= 5``) summing to the node ``g``.

    ``g`` is a base gate index, a :class:`QNode`, or None for the output.
    Gate references point into ``r.circuit`` when the node is materialized.
    """
    if g is None:
        node = r.output_node
    elif isinstance(g, QNode):
        node = g
    else:
        node = QNode(int(g))
    sys_ = r.system
    if sys_.deg(node) < 2:
        raise ValueError(f"node {tuple(node)} has degree {sys_.deg(node)}; no expansion defined")
    out = []
    for row in sys_.rows(node):
        gates = tuple(r.quotient_gates.get(f, -1) for f in row.factors)
        out.append(ExpansionRow(row.coeff, row.factors, gates,
                                tuple(sys_.deg(f) for f in row.factors)))
    return out


def reduced_violations(r: ReducedCircuit) -> List[str]:
    """Checks of the three structural guarantees on the materialized circuit.

    Scalar multiplications (a single non-constant child) are not counted as
    products: their constant child is a row coefficient.
    """
    c = r.circuit
    out = []
    hom = check_homogeneous(c)
    if not hom:
        out.append(f"not homogeneous at gate {hom.gate}: {hom.reason}")
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind != MUL:
            continue
        real = [ch for ch in g.children if c.gates[ch].kind != CONST]
        if len(real) < 2:
            continue
        if len(real) > MAX_ROW_LENGTH:
            out.append(f"gate {i}: product fan-in {len(real)} > {MAX_ROW_LENGTH}")
        for ch in real:
            if 2 * c.gates[ch].formal_degree > g.formal_degree:
                out.append(f"gate {i}: child {ch} of degree {c.gates[ch].formal_degree} "
                           f"exceeds half of {g.formal_degree}")
    if r.base.degree >= 2 and c.depth() > r.depth_bound():
        out.append(f"depth {c.depth()} exceeds {DEPTH_CONSTANT} log2 d = {r.depth_bound():.2f}")
    return out
