"""Geometric-degree decomposition of homogeneous formulas and the structured
depth-four passes built on it.

A homogeneous formula ``f`` of degree ``R`` contains a node ``v`` (possibly a
product of some children of one product gate) with ``R/3 <= deg(v) <= 2R/3``.
Because ``f`` is linear in the value of any single node of the tree,
``f = A * [v] + B`` where ``A`` is the product of the siblings met on the way
down to ``v`` and ``B`` is ``f`` with ``v`` set to zero.  Splitting ``A`` the
same way and recursing into ``B`` gives rows ``f_1 * f_2 * ... * f_r`` with
``deg(f_j)`` in ``[R_{j-1}/3, 2R_{j-1}/3]``, where ``R_j`` is the degree left
after the first ``j`` factors.
"""

from __future__ import annotations

import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from ..analysis import check_homogeneous, report_violations, structure_report
from ..core import expr as ex
from ..core.circuit import ADD, CONST, MUL, Circuit, NotAFormulaError, NotHomogeneousError, is_tree
from ..core.depth_four import DepthFourCircuit
from ..core.expr import Expr
from ..core.poly import SparsePoly
from ..vsbr import QuotientSystem, prepare
from .engine import RowSource, expand, to_depth_four
from .general import general_initial, quotient_source


class HyRow(NamedTuple):
    index: int
    factors: Tuple[Expr, ...]

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(f.degree for f in self.factors)

    def polys(self, nvars: int, p: int) -> List[SparsePoly]:
        return [ex.to_sparse(f, nvars, p) for f in self.factors]


def window(d: int, j: int) -> Tuple[float, float]:
    """Allowed degree range of the ``j``-th factor (1-based) of a row."""
    return d / 3 ** j, d * (2 / 3) ** j


def max_row_length(d: int) -> float:
    return math.log(d, 1.5) + 2 if d > 1 else 1


def row_violations(degrees: Sequence[int], d: int) -> List[str]:
    out = []
    for j, dj in enumerate(degrees, 1):
        lo, hi = window(d, j)
        if not lo - 1e-9 <= dj <= hi + 1e-9:
            out.append(f"factor {j} has degree {dj} outside [{lo:.3f}, {hi:.3f}]")
    if len(degrees) > max_row_length(d) + 1e-9:
        out.append(f"{len(degrees)} factors exceed log_1.5(d) + 2 = {max_row_length(d):.2f}")
    return out


class HySplitter:
    """Memoized decomposition of expression trees (all over one field)."""

    def __init__(self, p: int):
        self.p = p
        self._rows: Dict[Expr, Tuple[Tuple[Expr, ...], ...]] = {}

    def locate(self, e: Expr) -> Tuple[Expr, Expr, Expr]:
        """Split ``e = A * v + B`` with ``deg(v)`` in ``[R/3, 2R/3]``."""
        p = self.p
        R = e.degree
        lo, hi = -(-R // 3), (2 * R) // 3
        node, path, siblings = e, [], []
        while not lo <= node.degree <= hi:
            if node.op == ADD:
                path.append(0)
                node = node.children[0]
                continue
            if node.op != MUL:
                raise ValueError(f"cannot split {ex.to_text(node)}")
            kids = node.children
            best = max(range(len(kids)), key=lambda i: (kids[i].degree, -i))
            if kids[best].degree >= lo:
                siblings.extend(k for i, k in enumerate(kids) if i != best)
                path.append(best)
                node = kids[best]
                continue
            # aim for half of R; every child is below R/3, so the group
            # cannot pass 2R/3 while it is still below R/3
            order = sorted(range(len(kids)), key=lambda i: (-kids[i].degree, i))
            group, total = [], 0
            for i in order:
                if 2 * total >= R or (total >= lo and total + kids[i].degree > hi):
                    break
                group.append(i)
                total += kids[i].degree
            chosen = set(group)
            siblings.extend(k for i, k in enumerate(kids) if i not in chosen)
            v = ex.mul([kids[i] for i in sorted(group)], p)
            return ex.mul(siblings, p), v, ex.replace(e, path, ex.ZERO, p)
        return ex.mul(siblings, p), node, ex.replace(e, path, ex.ZERO, p)

    def rows(self, e: Expr) -> Tuple[Tuple[Expr, ...], ...]:
        hit = self._rows.get(e)
        if hit is not None:
            return hit
        if ex.is_zero(e):
            out: Tuple[Tuple[Expr, ...], ...] = ()
        elif e.degree <= 1:
            out = ((e,),)
        else:
            a, v, b = self.locate(e)
            out = tuple((v,) + r for r in self.rows(a)) + self.rows(b)
        self._rows[e] = out
        return out

    def coeff_rows(self, e: Expr) -> List[Tuple[int, Tuple[Expr, ...]]]:
        """Rows with constant factors pulled out as a scalar.

        Constants only occur as coefficients inside products; a factor that
        is a bare constant cannot arise for degree >= 1 but is folded anyway.
        """
        out = []
        for r in self.rows(e):
            c, fs = 1, []
            for f in r:
                if f.op == CONST:
                    c = c * f.value % self.p
                else:
                    fs.append(f)
            if c:
                out.append((c, tuple(fs)))
        return out


def formula_expr(f: Circuit) -> Expr:
    """Validate a homogeneous formula and lift it to an expression tree."""
    if not is_tree(f):
        raise NotAFormulaError("input is not a formula (some gate has several parents)")
    bad = check_homogeneous(f)
    if not bad:
        raise NotHomogeneousError(f"gate {bad.gate}: {bad.reason}")
    return ex.from_circuit(f)


def hy_rows(f: Union[Circuit, Expr], p: Optional[int] = None) -> List[HyRow]:
    """Rows ``f_1 * ... * f_r`` summing to the homogeneous formula ``f``.

    Factor ``j`` has degree within ``[(1/3)^j d, (2/3)^j d]`` (checked by
    :func:`row_violations`), and every factor is a product of disjoint
    sub-formulas of ``f``.
    """
    if isinstance(f, Expr):
        e, prime = f, p
    else:
        e, prime = formula_expr(f), f.p
    if prime is None:
        raise ValueError("field modulus needed for an expression input")
    return [HyRow(i, r) for i, r in enumerate(HySplitter(prime).rows(e))]


def hy_source(splitter: HySplitter, nvars: int) -> RowSource:
    cache: Dict[Expr, SparsePoly] = {}
    p = splitter.p
    return RowSource(lambda e: e.degree, splitter.coeff_rows,
                     lambda e: ex.to_sparse(e, nvars, p, cache), nvars, p)


def _degenerate(e: Expr, f: Circuit, t: int, pass_name: str, seed) -> DepthFourCircuit:
    """Single summand holding ``f`` itself, for ``t >= d``."""
    from .engine import EngineResult, Audit
    res = EngineResult([(1, (e,))] if not ex.is_zero(e) else [], 0, {}, Audit(9))
    src = hy_source(HySplitter(f.p), f.nvars)
    d4 = to_depth_four(res, src, t, f.degree)
    audit = res.audit.as_dict()
    audit["degenerate"] = True
    d4.report = structure_report(d4, dict(input_size=f.size, pass_name=pass_name, seed=seed,
                                          iteration_count=0, bad_term_histogram={}, audit=audit))
    d4.report.audit["violations"] = report_violations(d4.report)
    return d4


def _finish(d4: DepthFourCircuit, f: Circuit, result, pass_name: str, seed, extra=None):
    audit = result.audit.as_dict()
    audit["degenerate"] = False
    audit.update(extra or {})
    report = structure_report(d4, dict(input_size=f.size, pass_name=pass_name, seed=seed,
                                       iteration_count=result.iterations,
                                       bad_term_histogram=result.histogram, audit=audit))
    report.audit["violations"] = report_violations(report) + d4.violations()
    d4.report = report
    return d4


def reduce_hom_formula(f: Circuit, t: int, cap: Optional[int] = None,
                       seed: Optional[int] = None) -> DepthFourCircuit:
    """Depth-four circuit with bottom degree at most ``t`` whose products
    have many factors, obtained by expanding decomposition rows in place.

    Audits both potentials: the number of factors of degree above ``t/9``
    rises with every expansion, and the total degree of factors above ``t``
    drops by at most ``3t``.
    """
    e = formula_expr(f)
    d = f.degree
    if t < 1:
        raise ValueError(f"cut t={t} must be at least 1")
    if t >= d:
        return _degenerate(e, f, t, "hom", seed)
    splitter = HySplitter(f.p)
    source = hy_source(splitter, f.nvars)
    initial = splitter.coeff_rows(e)
    result = expand(initial, source, t, d, bad_den=9, big_drop_limit=3 * t, cap=cap)
    d4 = to_depth_four(result, source, t, d)
    return _finish(d4, f, result, "hom", seed)


def regroup(factors: Sequence[Expr], t: int, p: int) -> List[Expr]:
    """Greedily multiply factors of degree at most ``t/2`` into groups of
    degree in ``[t/2, t]``; larger factors stay alone.  A final group still
    below ``t/2`` is merged into another group when that stays within ``t``.
    """
    groups: List[List[Expr]] = []
    current: List[Expr] = []
    cur_deg = 0
    for f in factors:
        if 2 * f.degree > t:
            groups.append([f])
            continue
        current.append(f)
        cur_deg += f.degree
        if 2 * cur_deg >= t:
            groups.append(current)
            current, cur_deg = [], 0
    if current:
        target = None
        for g in groups:
            gd = sum(x.degree for x in g)
            if gd + cur_deg <= t and (target is None or gd < target[0]):
                target = (gd, g)
        if target is not None:
            target[1].extend(current)
        else:
            groups.append(current)
    return [ex.mul(g, p) for g in groups]


def reduce_hom_formula_alt(f: Circuit, t: int, cap: Optional[int] = None,
                           seed: Optional[int] = None) -> DepthFourCircuit:
    """Alternate route: run the general reduction on the formula, regroup
    each summand's factors to degrees in ``[t/2, t]`` using their formula
    provenance, then expand every group once by its decomposition rows."""
    from .engine import SummandCapExceeded, summand_cap
    e = formula_expr(f)
    d = f.degree
    if t < 1:
        raise ValueError(f"cut t={t} must be at least 1")
    if t >= d:
        return _degenerate(e, f, t, "hom-alt", seed)
    system = QuotientSystem(prepare(f))
    first = expand(general_initial(system, d), quotient_source(system), t, d, bad_den=8,
                   cap=cap)
    limit = summand_cap(cap)
    p = f.p
    splitter = HySplitter(p)
    out: List[Tuple[int, Tuple[Expr, ...]]] = []
    group_sizes = []
    for coeff, handles in first.summands:
        provenance = []
        for h in handles:
            node_e = system.node_expr(h)
            if node_e is None:
                raise ValueError(f"factor {tuple(h)} has no formula provenance")
            provenance.append(node_e)
        groups = regroup(provenance, t, p)
        group_sizes.append(len(groups))
        partial = [(coeff, ())]
        for g in groups:
            options = splitter.coeff_rows(g)
            partial = [(c * rc % p, fs + rf) for c, fs in partial for rc, rf in options]
            partial = [x for x in partial if x[0]]
            if len(out) + len(partial) > limit:
                raise SummandCapExceeded(f"more than {limit} summands")
        out.extend(partial)
    from .engine import EngineResult
    result = EngineResult(out, first.iterations, first.histogram, first.audit)
    d4 = to_depth_four(result, hy_source(splitter, f.nvars), t, d)
    extra = {"groups_per_summand_min": min(group_sizes, default=0),
             "groups_per_summand_max": max(group_sizes, default=0),
             "general_summands": len(first.summands)}
    return _finish(d4, f, result, "hom-alt", seed, extra)
