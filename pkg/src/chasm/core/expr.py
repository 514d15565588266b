"""Immutable expression trees for formula surgery.

The depth-four passes for formulas cut and splice sub-formulas; doing that on
a gate list is clumsy, so formulas are lifted into hash-consed :class:`Expr`
trees.  The smart constructors :func:`add` and :func:`mul` flatten nested
operators of the same kind, fold constants and drop syntactic zeros, so every
``Expr`` built through them is in a small normal form:

* a sum has at least two children, none of them a sum or the constant 0;
* a product has at least two children, none of them a product, and at most
  one constant child (never 0 or 1), stored first.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .circuit import ADD, CONST, MUL, VAR, Circuit, CircuitBuilder, Formula
from .poly import DEFAULT_MONOMIAL_CAP, SparsePoly


class Expr:
    __slots__ = ("op", "value", "children", "degree", "size", "_hash")

    def __init__(self, op: str, value: int = 0, children: Tuple["Expr", ...] = ()):
        self.op = op
        self.value = value
        self.children = children
        if op == VAR:
            self.degree = 1
        elif op == CONST:
            self.degree = 0
        elif op == ADD:
            self.degree = max(c.degree for c in children)
        else:
            self.degree = sum(c.degree for c in children)
        self.size = 1 + sum(c.size for c in children)
        self._hash = hash((op, value, children))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or self._hash != other._hash:
            return False
        return (self.op == other.op and self.value == other.value
                and self.children == other.children)

    def is_const(self) -> bool:
        return self.op == CONST

    def __repr__(self):
        return f"Expr({to_text(self)})"


def var(k: int) -> Expr:
    return Expr(VAR, k)


def const(c: int, p: int) -> Expr:
    return Expr(CONST, c % p)


def add(children: Sequence[Expr], p: int) -> Expr:
    total = 0
    rest: List[Expr] = []
    for ch in children:
        if ch.op == CONST:
            total += ch.value
        elif ch.op == ADD:
            for g in ch.children:
                if g.op == CONST:
                    total += g.value
                else:
                    rest.append(g)
        else:
            rest.append(ch)
    total %= p
    if not rest:
        return Expr(CONST, total)
    if total:
        rest.append(Expr(CONST, total))
    if len(rest) == 1:
        return rest[0]
    return Expr(ADD, 0, tuple(rest))


def mul(children: Sequence[Expr], p: int) -> Expr:
    prod = 1
    rest: List[Expr] = []
    for ch in children:
        if ch.op == CONST:
            prod = prod * ch.value % p
        elif ch.op == MUL:
            for g in ch.children:
                if g.op == CONST:
                    prod = prod * g.value % p
                else:
                    rest.append(g)
        else:
            rest.append(ch)
    if prod == 0:
        return Expr(CONST, 0)
    if not rest:
        return Expr(CONST, prod)
    if prod != 1:
        rest.insert(0, Expr(CONST, prod))
    if len(rest) == 1:
        return rest[0]
    return Expr(MUL, 0, tuple(rest))


ZERO = Expr(CONST, 0)


def is_zero(e: Expr) -> bool:
    return e.op == CONST and e.value == 0


# -- conversion ---------------------------------------------------------------

def from_circuit(c: Circuit) -> Expr:
    """Lift the live part of ``c`` into a normalized expression tree."""
    memo: Dict[int, Expr] = {}
    p = c.p
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == VAR:
            memo[i] = var(g.arg)
        elif g.kind == CONST:
            memo[i] = const(g.arg, p)
        elif g.kind == ADD:
            memo[i] = add([memo[ch] for ch in g.children], p)
        else:
            memo[i] = mul([memo[ch] for ch in g.children], p)
    return memo[c.output]


def to_formula(e: Expr, nvars: int, p: int, name: str = "f") -> Formula:
    """Write ``e`` out as a tree-shaped gate list (shared nodes duplicated)."""
    b = CircuitBuilder(nvars, p)

    def emit(node: Expr) -> int:
        if node.op == VAR:
            return b.var(node.value)
        if node.op == CONST:
            return b.const(node.value)
        kids = [emit(ch) for ch in node.children]
        return b.add(*kids) if node.op == ADD else b.mul(*kids)

    out = emit(e)
    return b.build(out, name=name, formula=True)


def to_sparse(e: Expr, nvars: int, p: int, cache: Optional[Dict[Expr, SparsePoly]] = None,
              cap: int = DEFAULT_MONOMIAL_CAP) -> SparsePoly:
    if cache is None:
        cache = {}

    def rec(node: Expr) -> SparsePoly:
        hit = cache.get(node)
        if hit is not None:
            return hit
        if node.op == VAR:
            f = SparsePoly.variable(node.value, nvars, p)
        elif node.op == CONST:
            f = SparsePoly.constant(node.value, nvars, p)
        elif node.op == ADD:
            f = SparsePoly.zero(nvars, p)
            for ch in node.children:
                f = f + rec(ch)
        else:
            f = SparsePoly.constant(1, nvars, p)
            for ch in node.children:
                f = f.mul(rec(ch), cap)
        cache[node] = f
        return f

    return rec(e)


def evaluate(e: Expr, point: Sequence[int], p: int,
             cache: Optional[Dict[Expr, int]] = None) -> int:
    if cache is None:
        cache = {}

    def rec(node: Expr) -> int:
        hit = cache.get(node)
        if hit is not None:
            return hit
        if node.op == VAR:
            v = point[node.value] % p
        elif node.op == CONST:
            v = node.value
        elif node.op == ADD:
            v = sum(rec(ch) for ch in node.children) % p
        else:
            v = 1
            for ch in node.children:
                v = v * rec(ch) % p
        cache[node] = v
        return v

    return rec(e)


def product_depth(e: Expr) -> int:
    if e.op in (VAR, CONST):
        return 0
    inner = max(product_depth(ch) for ch in e.children)
    return inner + 1 if e.op == MUL else inner


def variables(e: Expr) -> set:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node.op == VAR:
            out.add(node.value)
        else:
            stack.extend(node.children)
    return out


def subexpr(e: Expr, path: Sequence[int]) -> Expr:
    for i in path:
        e = e.children[i]
    return e


def replace(e: Expr, path: Sequence[int], new: Expr, p: int) -> Expr:
    """Copy of ``e`` with the node at ``path`` replaced by ``new``."""
    if not path:
        return new
    i = path[0]
    child = replace(e.children[i], path[1:], new, p)
    kids = e.children[:i] + (child,) + e.children[i + 1:]
    return add(kids, p) if e.op == ADD else mul(kids, p)


def to_text(e: Expr) -> str:
    if e.op == VAR:
        return f"x{e.value}"
    if e.op == CONST:
        return str(e.value)
    sep = " + " if e.op == ADD else "*"
    return "(" + sep.join(to_text(ch) for ch in e.children) + ")"
