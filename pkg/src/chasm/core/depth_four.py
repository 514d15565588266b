"""Depth-four (sum of products of sparse polynomials) circuits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .poly import DEFAULT_MONOMIAL_CAP, MonomialCapExceeded, SparsePoly
from .vecmod import addmod, asarray, eval_polys, mulmod, points_array, summod


@dataclass(frozen=True)
class Summand:
    """``coeff * factors[0] * factors[1] * ...``.

    ``coeff`` holds the scalar picked up from constant gates, so that every
    entry of ``factors`` is a genuine polynomial of degree at least one.
    ``provenance`` names the source sub-computations of the factors.
    """

    factors: Tuple[SparsePoly, ...]
    coeff: int = 1
    provenance: Optional[tuple] = field(default=None, compare=False)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(f.degree() for f in self.factors)

    @property
    def factor_count(self) -> int:
        return len(self.factors)


class DepthFourCircuit:
    def __init__(self, summands: Sequence[Summand], t: int, d: int, nvars: int, p: int,
                 homogeneous: bool = True):
        self.summands: Tuple[Summand, ...] = tuple(summands)
        self.t = t
        self.d = d
        self.nvars = nvars
        self.p = p
        self.homogeneous = homogeneous
        self.report = None  # filled in by the pass that built this circuit

    @property
    def top_fanin(self) -> int:
        return len(self.summands)

    @property
    def degree(self) -> int:
        return self.d

    def factor_counts(self) -> List[int]:
        return [s.factor_count for s in self.summands]

    def max_bottom_degree(self) -> int:
        return max((f.degree() for s in self.summands for f in s.factors), default=0)

    def distinct_factors(self) -> List[SparsePoly]:
        seen: Dict[int, SparsePoly] = {}
        for s in self.summands:
            for f in s.factors:
                seen.setdefault(id(f), f)
        return list(seen.values())

    def violations(self) -> List[str]:
        """Structural invariant violations (empty when well formed)."""
        out = []
        for i, s in enumerate(self.summands):
            if not s.factors:
                out.append(f"summand {i}: no factors")
            for f in s.factors:
                deg = f.degree()
                if deg < 1:
                    out.append(f"summand {i}: factor of degree {deg}")
                elif deg > self.t:
                    out.append(f"summand {i}: factor degree {deg} exceeds t={self.t}")
            if self.homogeneous and sum(s.degrees) != self.d:
                out.append(f"summand {i}: degrees {s.degrees} do not sum to d={self.d}")
        return out

    def evaluate(self, point: Sequence[int]) -> int:
        return self.evaluate_many([point])[0]

    def evaluate_many(self, points: Sequence[Sequence[int]]) -> List[int]:
        return [int(v) for v in self.evaluate_array(points_array(points, self.nvars, self.p))]

    def evaluate_array(self, pts: np.ndarray) -> np.ndarray:
        """Output values at the columns of an ``(nvars, k)`` residue array."""
        p = self.p
        k = pts.shape[1]
        factors = self.distinct_factors()
        where = {id(f): i for i, f in enumerate(factors)}
        table = eval_polys(factors, pts, p)
        total = asarray(np.zeros(k, dtype=np.uint64), p)
        by_len: Dict[int, List[Summand]] = {}
        for s in self.summands:
            by_len.setdefault(len(s.factors), []).append(s)
        for length, group in sorted(by_len.items()):
            idx = np.asarray([[where[id(f)] for f in s.factors] for s in group],
                             dtype=np.int64).reshape(len(group), length)
            vals = np.repeat(asarray([s.coeff for s in group], p)[:, None], k, axis=1)
            for j in range(length):
                vals = mulmod(vals, table[idx[:, j]], p)
            total = addmod(total, summod(vals, p), p)
        return total

    def to_sparse(self, cap: int = DEFAULT_MONOMIAL_CAP) -> SparsePoly:
        """Exact expansion.  Summands sharing a factor prefix share the
        partial products."""
        n, p = self.nvars, self.p
        acc: Dict = {}
        get = acc.get
        one = SparsePoly.constant(1, n, p)
        prefix_ids: List[int] = []
        prefix_polys: List[SparsePoly] = [one]
        for s in sorted(self.summands, key=lambda s: tuple(id(f) for f in s.factors)):
            ids = [id(f) for f in s.factors]
            common = 0
            while (common < len(ids) and common < len(prefix_ids)
                   and ids[common] == prefix_ids[common]):
                common += 1
            del prefix_ids[common:]
            del prefix_polys[common + 1:]
            for f in s.factors[common:]:
                prefix_ids.append(id(f))
                prefix_polys.append(prefix_polys[-1].mul(f, cap))
            c = s.coeff
            for m, v in prefix_polys[-1].terms.items():
                acc[m] = get(m, 0) + v * c
            if len(acc) > cap:
                raise MonomialCapExceeded(f"depth-four expansion exceeds {cap} monomials")
        return SparsePoly(acc, n, p)

    def __repr__(self):
        return (f"<DepthFourCircuit top_fanin={self.top_fanin} d={self.d} t={self.t} "
                f"nvars={self.nvars} p={self.p}>")
