"""Iterative in-place expansion shared by all depth-four passes.

A pass supplies a :class:`RowSource`: factor handles with a degree, an
expansion into rows, and an exact polynomial.  The engine repeatedly takes
every summand's largest-degree factor (first one on ties) and, while its
degree exceeds ``t``, replaces it in place by each row of its expansion.
Along the way it audits the potential functions the bounds rely on.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from ..core.depth_four import DepthFourCircuit, Summand
from ..core.poly import SparsePoly

DEFAULT_SUMMAND_CAP = 10**6


class SummandCapExceeded(RuntimeError):
    """The number of summands passed the configured cap."""


def summand_cap(cap: Optional[int] = None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("CHASM_SUMMAND_CAP")
    return int(env) if env else DEFAULT_SUMMAND_CAP


Handle = Hashable
RowList = Sequence[Tuple[int, Tuple[Handle, ...]]]


@dataclass
class RowSource:
    degree: Callable[[Handle], int]
    rows: Callable[[Handle], RowList]
    poly: Callable[[Handle], SparsePoly]
    nvars: int
    p: int
    max_rows: Optional[int] = None  # asserted bound on rows per expansion


@dataclass
class Audit:
    """Potential-function checks collected during a run."""

    bad_den: int
    big_drop_limit: Optional[int] = None
    monotone: bool = True
    violations: List[str] = field(default_factory=list)
    max_lineage_depth: int = 0
    max_branching: int = 0
    max_bad: int = 0
    max_big_drop: int = 0
    expansions: int = 0
    violation_count: int = 0

    def flag(self, message: str):
        self.violation_count += 1
        if len(self.violations) < 50:
            self.violations.append(message)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "bad_threshold": f"t/{self.bad_den}",
            "max_lineage_depth": self.max_lineage_depth,
            "max_branching": self.max_branching,
            "max_bad_count": self.max_bad,
            "max_big_degree_drop": self.max_big_drop,
            "expansions": self.expansions,
            "violation_count": self.violation_count,
            "violations": list(self.violations),
        }


@dataclass
class EngineResult:
    summands: List[Tuple[int, Tuple[Handle, ...]]]
    iterations: int
    histogram: Dict[str, Dict[str, int]]
    audit: Audit


def _histogram(items) -> Dict[str, int]:
    out: Dict[int, int] = {}
    for bad in items:
        out[bad] = out.get(bad, 0) + 1
    return {str(k): v for k, v in sorted(out.items())}


def expand(initial: Sequence[Tuple[int, Tuple[Handle, ...]]], source: RowSource, t: int, d: int,
           bad_den: int, big_drop_limit: Optional[int] = None, monotone: bool = True,
           cap: Optional[int] = None) -> EngineResult:
    """Run the expansion loop to completion.

    ``bad_den`` sets the badness threshold ``t / bad_den``; with ``monotone``
    every child summand must carry strictly more bad factors than its
    parent and never more than ``bad_den * d / t``.  ``big_drop_limit``
    bounds the per-expansion drop of the total degree of factors above
    ``t``.
    """
    cap = summand_cap(cap)
    deg = source.degree
    deg_cache: Dict[Handle, int] = {}

    def dg(h):
        v = deg_cache.get(h)
        if v is None:
            v = deg_cache[h] = deg(h)
        return v

    def bad_of(factors) -> int:
        return sum(1 for f in factors if bad_den * dg(f) > t)

    def big_of(factors) -> int:
        return sum(dg(f) for f in factors if dg(f) > t)

    audit = Audit(bad_den, big_drop_limit, monotone)
    bad_limit = bad_den * d / t
    # work items: (coeff, factors, bad, lineage depth)
    active = []
    done: List[Tuple[int, Tuple[Handle, ...]]] = []
    done_bad: List[int] = []
    for coeff, factors in initial:
        b = bad_of(factors)
        audit.max_bad = max(audit.max_bad, b)
        if max((dg(f) for f in factors), default=0) > t:
            active.append((coeff, tuple(factors), b, 0))
        else:
            done.append((coeff, tuple(factors)))
            done_bad.append(b)
    if len(active) + len(done) > cap:
        raise SummandCapExceeded(f"{len(active) + len(done)} summands exceed cap {cap}")
    histogram = {"0": _histogram(done_bad + [a[2] for a in active])}
    rounds = 0
    p = source.p
    while active:
        rounds += 1
        nxt = []
        for coeff, factors, bad, depth in active:
            degs = [dg(f) for f in factors]
            top = max(degs)
            j = degs.index(top)
            rows = source.rows(factors[j])
            audit.expansions += 1
            audit.max_branching = max(audit.max_branching, len(rows))
            if source.max_rows is not None and len(rows) > source.max_rows:
                audit.flag(
                    f"expansion of degree-{top} factor gave {len(rows)} rows > {source.max_rows}")
            parent_big = big_of(factors)
            head, tail = factors[:j], factors[j + 1:]
            for rc, rf in rows:
                c = coeff * rc % p
                if not c:
                    continue
                child = head + tuple(rf) + tail
                cb = bad_of(child)
                audit.max_bad = max(audit.max_bad, cb)
                if monotone and cb <= bad:
                    audit.flag(f"bad count {bad} -> {cb} did not increase")
                if monotone and cb > bad_limit:
                    audit.flag(f"bad count {cb} exceeds {bad_den}d/t = {bad_limit:g}")
                if big_drop_limit is not None:
                    drop = parent_big - big_of(child)
                    audit.max_big_drop = max(audit.max_big_drop, drop)
                    if drop > big_drop_limit:
                        audit.flag(f"big-factor degree dropped by {drop} > {big_drop_limit}")
                if max(dg(f) for f in child) > t:
                    nxt.append((c, child, cb, depth + 1))
                else:
                    done.append((c, child))
                    done_bad.append(cb)
                    audit.max_lineage_depth = max(audit.max_lineage_depth, depth + 1)
            if len(nxt) + len(done) > cap:
                raise SummandCapExceeded(f"more than {cap} summands after {rounds} rounds")
        active = nxt
        histogram[str(rounds)] = _histogram(done_bad + [a[2] for a in active])
    return EngineResult(done, rounds, histogram, audit)


def to_depth_four(result: EngineResult, source: RowSource, t: int, d: int,
                  homogeneous: bool = True) -> DepthFourCircuit:
    """Convert factor handles to sparse polynomials (each handle once).

    Summands with an identically zero factor are dropped.
    """
    cache: Dict[Handle, SparsePoly] = {}
    out = []
    for coeff, factors in result.summands:
        polys = []
        for h in factors:
            f = cache.get(h)
            if f is None:
                f = cache[h] = source.poly(h)
            polys.append(f)
        if all(polys):
            out.append(Summand(tuple(polys), coeff, provenance=tuple(factors)))
    return DepthFourCircuit(out, t, d, source.nvars, source.p, homogeneous)
