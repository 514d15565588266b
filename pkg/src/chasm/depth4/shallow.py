"""Expansion rows and depth-four reduction for formulas of small product depth.

For a homogeneous formula of product depth ``delta`` and degree ``D`` some
product gate has at least ``ceil(D ** (1/delta))`` non-constant children,
since degree can only grow at product gates.  Taking each decomposition row
``f_1 * f_2 * ... * f_r`` and splitting its first factor repeatedly as
``f_1 = A_1 [h_1] + ... + A_m [h_m]`` (``h_k`` a widest product gate of what
is left after removing the earlier ones) gives rows whose leading part is the
children of ``h_k`` together with the factors of ``A_k``.
"""

from __future__ import annotations

import math
from typing import Dict, List, NamedTuple, Optional, Tuple

from ..analysis import product_depth
from ..core import expr as ex
from ..core.circuit import CONST, MUL, Circuit
from ..core.depth_four import DepthFourCircuit
from ..core.expr import Expr
from ..core.poly import SparsePoly
from .engine import RowSource, expand, to_depth_four
from .hy import HySplitter, _degenerate, _finish, formula_expr

# lower bound constants for the smallest product width: a_min >= c * (d/t) * t**(1/delta)
SHALLOW_CONSTANT = {1: 0.25, 2: 0.25}
DEFAULT_SHALLOW_CONSTANT = 0.25


def shallow_constant(delta: int) -> float:
    return SHALLOW_CONSTANT.get(delta, DEFAULT_SHALLOW_CONSTANT)


def shallow_bound(d: int, t: int, delta: int) -> float:
    return shallow_constant(delta) * (d / t) * t ** (1.0 / max(delta, 1))


def min_split(d: int, delta: int) -> int:
    """Guaranteed number of split factors per row, ``floor((d/3)**(1/delta))``."""
    return int(math.floor((d / 3) ** (1.0 / delta) + 1e-9))


class ShallowRow(NamedTuple):
    coeff: int
    split_factors: Tuple[Expr, ...]
    hy_factors: Tuple[Expr, ...]

    @property
    def factors(self) -> Tuple[Expr, ...]:
        return self.split_factors + self.hy_factors

    @property
    def ell(self) -> int:
        return len(self.split_factors)

    def polys(self, nvars: int, p: int) -> List[SparsePoly]:
        return [ex.to_sparse(f, nvars, p) for f in self.factors]


def _width(e: Expr) -> int:
    return sum(1 for ch in e.children if ch.op != CONST) if e.op == MUL else 0


def widest_product(e: Expr) -> Optional[Tuple[List[int], Expr]]:
    """Path to the first (preorder) product gate of largest non-constant fan-in."""
    best: Optional[Tuple[int, List[int], Expr]] = None
    stack = [(e, [])]
    while stack:
        node, path = stack.pop()
        w = _width(node)
        if w >= 2 and (best is None or w > best[0]):
            best = (w, path, node)
        for i in reversed(range(len(node.children))):
            stack.append((node.children[i], path + [i]))
    return None if best is None else (best[1], best[2])


def _siblings(e: Expr, path: List[int]) -> List[Expr]:
    out, node = [], e
    for i in path:
        if node.op == MUL:
            out.extend(ch for j, ch in enumerate(node.children) if j != i)
        node = node.children[i]
    return out


def _split_scalar(factors, p: int) -> Tuple[int, Tuple[Expr, ...]]:
    c, out = 1, []
    for f in factors:
        if f.op == CONST:
            c = c * f.value % p
        else:
            out.append(f)
    return c, tuple(out)


class ShallowSplitter:
    """Memoized shallow rows over expression trees in one field."""

    def __init__(self, p: int):
        self.p = p
        self.hy = HySplitter(p)
        self._split: Dict[Expr, Tuple[Tuple[int, Tuple[Expr, ...]], ...]] = {}
        self._rows: Dict[Expr, List[ShallowRow]] = {}

    def split_first(self, e: Expr) -> Tuple[Tuple[int, Tuple[Expr, ...]], ...]:
        """``e = sum_k c_k * prod(parts_k)``: siblings on the path to a widest
        product ``h_k`` followed by the children of ``h_k``."""
        hit = self._split.get(e)
        if hit is not None:
            return hit
        p = self.p
        out = []
        rest = e
        while not ex.is_zero(rest):
            if rest.degree <= 1:
                out.append(_split_scalar([rest], p))
                break
            found = widest_product(rest)
            if found is None:
                raise ValueError(f"no product gate in {ex.to_text(rest)}")
            path, h = found
            c, parts = _split_scalar(_siblings(rest, path) + list(h.children), p)
            if c:
                out.append((c, parts))
            rest = ex.replace(rest, path, ex.ZERO, p)
        res = tuple(out)
        self._split[e] = res
        return res

    def rows(self, e: Expr) -> List[ShallowRow]:
        hit = self._rows.get(e)
        if hit is not None:
            return hit
        p = self.p
        out = []
        for c, fs in self.hy.coeff_rows(e):
            head, tail = fs[0], fs[1:]
            for sc, parts in self.split_first(head):
                cc = c * sc % p
                if cc:
                    out.append(ShallowRow(cc, parts, tail))
        self._rows[e] = out
        return out

    def coeff_rows(self, e: Expr) -> List[Tuple[int, Tuple[Expr, ...]]]:
        return [(r.coeff, r.factors) for r in self.rows(e)]


def _check_depth(f: Circuit, delta: Optional[int]) -> int:
    depth = product_depth(f)
    if delta is not None and depth > delta:
        raise ValueError(f"product depth {depth} exceeds delta={delta}")
    return depth if delta is None else delta


def shallow_rows(f: Circuit, delta: Optional[int] = None) -> List[ShallowRow]:
    """Rows summing to the homogeneous formula ``f`` of product depth at most
    ``delta``, each led by at least ``floor((d/3)**(1/delta))`` split factors.

    Raises ValueError when the product depth of ``f`` exceeds ``delta``.
    """
    if f.degree < 2:
        raise ValueError("shallow rows need degree at least 2")
    e = formula_expr(f)
    _check_depth(f, delta)
    return ShallowSplitter(f.p).rows(e)


def shallow_row_violations(rows: List[ShallowRow], d: int, delta: int,
                           size: Optional[int] = None) -> List[str]:
    out = []
    need = min_split(d, delta)
    for i, r in enumerate(rows):
        if r.ell < need:
            out.append(f"row {i}: {r.ell} split factors < {need}")
        if any(f.degree < 1 for f in r.factors):
            out.append(f"row {i}: factor of degree 0")
        if sum(f.degree for f in r.factors) != d:
            out.append(f"row {i}: degrees do not sum to {d}")
    if size is not None and len(rows) > size * size:
        out.append(f"{len(rows)} rows exceed s^2 = {size * size}")
    return out


def reduce_shallow(f: Circuit, t: int, delta: Optional[int] = None, cap: Optional[int] = None,
                   seed: Optional[int] = None) -> DepthFourCircuit:
    """Depth-four circuit with bottom degree at most ``t`` for a formula of
    small product depth, expanding every factor above ``t`` by its shallow
    rows.  The report records the constant used for the product-width bound
    and the measured product depth."""
    if not isinstance(f, Circuit):
        raise TypeError("reduce_shallow takes a formula")
    e = formula_expr(f)
    delta = _check_depth(f, delta)
    d = f.degree
    if t < 1:
        raise ValueError(f"cut t={t} must be at least 1")
    extra = {"product_depth": delta, "shallow_constant": shallow_constant(delta),
             "shallow_bound": shallow_bound(d, t, delta) if t < d else 0.0}
    if t >= d:
        d4 = _degenerate(e, f, t, "shallow", seed)
        d4.report.audit.update(extra)
        return d4
    splitter = ShallowSplitter(f.p)
    cache: Dict[Expr, SparsePoly] = {}
    p, n = f.p, f.nvars
    source = RowSource(lambda x: x.degree, splitter.coeff_rows,
                       lambda x: ex.to_sparse(x, n, p, cache), n, p)
    initial = splitter.coeff_rows(e)
    result = expand(initial, source, t, d, bad_den=9, monotone=False, cap=cap)
    d4 = to_depth_four(result, source, t, d)
    d4 = _finish(d4, f, result, "shallow", seed, extra)
    a_min = d4.report.min_factor_count
    if d4.summands and a_min < extra["shallow_bound"] - 1e-9:
        d4.report.audit["violations"].append(
            f"a_min={a_min} below {extra['shallow_constant']}*(d/t)*t^(1/{delta})"
            f" = {extra['shallow_bound']:.3f}")
    return d4
