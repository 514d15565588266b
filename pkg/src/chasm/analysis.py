"""Validators, randomized identity testing and pass reports."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .core.circuit import (
    ADD, MUL, Circuit, NotAFormulaError, evaluate, evaluate_array, gate_polys, is_tree,
)
from .core.depth_four import DepthFourCircuit
from .core.partition import Partition
from .core.poly import DEFAULT_MONOMIAL_CAP, Monomial, SparsePoly
from .core.vecmod import asarray, eval_polys


# -- structural validators ----------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    ok: bool
    gate: Optional[int] = None
    monomial: Optional[Monomial] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def formal_degrees(c: Circuit) -> Dict[int, int]:
    """Formal degree of every live gate."""
    return {i: c.gates[i].formal_degree for i in c.live_indices()}


def check_homogeneous(c: Circuit, deep: bool = False,
                      cap: int = DEFAULT_MONOMIAL_CAP) -> CheckResult:
    """Formal homogeneity: every sum gate's children share one formal degree.

    With ``deep=True`` every live gate is also expanded and checked to be a
    homogeneous polynomial of its formal degree (or zero).
    """
    for i in c.live_indices():
        g = c.gates[i]
        if g.kind == ADD:
            degs = sorted({c.gates[ch].formal_degree for ch in g.children})
            if len(degs) > 1:
                return CheckResult(False, gate=i, reason=f"sum of degrees {degs}")
    if deep:
        for i, f in gate_polys(c, cap).items():
            if f and not (f.is_homogeneous() and f.degree() == c.gates[i].formal_degree):
                return CheckResult(False, gate=i, reason="gate polynomial not homogeneous "
                                                         "of its formal degree")
    return CheckResult(True)


def product_depth(f: Circuit) -> int:
    """Largest number of product gates on a path from the output to a leaf."""
    if not is_tree(f):
        raise NotAFormulaError("product depth is defined for formulas")
    depth: Dict[int, int] = {}
    for i in f.live_indices():
        g = f.gates[i]
        inner = max((depth[ch] for ch in g.children), default=0)
        depth[i] = inner + (1 if g.kind == MUL else 0)
    return depth[f.output]


def check_set_multilinear(x: Union[SparsePoly, Circuit], part: Partition,
                          cap: int = DEFAULT_MONOMIAL_CAP) -> CheckResult:
    """Every monomial takes exactly one variable, to the first power, from
    each block of ``part``.

    Raises ValueError for a variable outside the partition.
    """
    f = x if isinstance(x, SparsePoly) else gate_polys(x, cap, [x.output])[x.output]
    for m, _ in f.sorted_terms():
        blocks = part.sml_blocks(m)
        if blocks is None or len(blocks) != part.d:
            return CheckResult(False, monomial=m)
    return CheckResult(True)


def sml_block_set(f: SparsePoly, part: Partition) -> Optional[Tuple[int, ...]]:
    """The common block set of a polynomial that is set-multilinear over some
    sub-partition of ``part``, or None if there is no such set."""
    found = None
    for m in f.terms:
        blocks = part.sml_blocks(m)
        if blocks is None or (found is not None and blocks != found):
            return None
        found = blocks
    return found


# -- identity testing ------------------------------------------------------------

@dataclass(frozen=True)
class PitVerdict:
    equal: bool
    trials: int
    failure_bound: Fraction = field(repr=False)
    seed: int = 0
    witness: Optional[Tuple[int, ...]] = None
    values: Optional[Tuple[int, int]] = None

    def __bool__(self):
        return self.equal


def sample_points(nvars: int, p: int, trials: int, seed: int) -> np.ndarray:
    """``(nvars, trials)`` array of uniform residues.

    Trial ``j`` draws its coordinates from a Philox stream keyed by ``seed``
    with counter ``j``, so each point is independent of the others and of
    the order in which trials run.
    """
    if p >= 1 << 64:
        raise ValueError("sampling supports moduli below 2^64")
    cols = []
    for j in range(trials):
        gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, j]))
        cols.append(gen.integers(0, p, size=nvars, dtype=np.uint64))
    if not cols:
        return asarray(np.zeros((nvars, 0), dtype=np.uint64), p)
    return asarray(np.stack(cols, axis=1), p)


def _shape(x) -> Tuple[int, int, int]:
    """``(nvars, p, degree bound)`` of anything PIT can evaluate."""
    x = getattr(x, "circuit", x)
    if isinstance(x, SparsePoly):
        return x.nvars, x.p, max(x.degree(), 0)
    if isinstance(x, DepthFourCircuit):
        deg = max((sum(s.degrees) for s in x.summands), default=0)
        return x.nvars, x.p, deg
    if isinstance(x, Circuit):
        return x.nvars, x.p, x.degree
    raise TypeError(f"cannot evaluate {type(x).__name__}")


def _evaluate_array(x, pts: np.ndarray) -> np.ndarray:
    x = getattr(x, "circuit", x)
    if isinstance(x, SparsePoly):
        return eval_polys([x], pts, x.p)[0]
    if isinstance(x, DepthFourCircuit):
        return x.evaluate_array(pts)
    return evaluate_array(x, pts)


def _evaluate_one(x, point: Sequence[int]) -> int:
    x = getattr(x, "circuit", x)
    if isinstance(x, (SparsePoly, DepthFourCircuit)):
        return x.evaluate(point)
    return evaluate(x, point)


def pit_equivalent(a, b, trials: int = 64, seed: int = 0) -> PitVerdict:
    """Schwartz-Zippel identity test of two polynomial representations.

    Accepts circuits, formulas, reduced circuits, depth-four circuits and
    sparse polynomials.  An unequal verdict carries a witness point at which
    the two sides were re-evaluated independently and differ.
    """
    na, pa, da = _shape(a)
    nb, pb, db = _shape(b)
    if na != nb:
        raise ValueError(f"arity mismatch: {na} vs {nb} variables")
    if pa != pb:
        raise ValueError(f"field mismatch: {pa} vs {pb}")
    bound = Fraction(max(da, db, 1), pa) ** trials
    pts = sample_points(na, pa, trials, seed)
    va = _evaluate_array(a, pts)
    vb = _evaluate_array(b, pts)
    diff = np.flatnonzero(va != vb)
    if diff.size == 0:
        return PitVerdict(True, trials, bound, seed)
    j = int(diff[0])
    point = tuple(int(v) for v in pts[:, j])
    xa, xb = _evaluate_one(a, point), _evaluate_one(b, point)
    if xa == xb:
        raise AssertionError(f"vectorized and scalar evaluation disagree at {point}")
    return PitVerdict(False, trials, bound, seed, witness=point, values=(xa, xb))


# -- reports ---------------------------------------------------------------------

TOP_FANIN_EXPONENT = {"general": 8, "hom": 9, "hom-alt": 10, "shallow": 10}


@dataclass
class ReductionReport:
    input_size: int
    num_vars: int
    degree: int
    cut: int
    top_fanin: int
    min_factor_count: int
    max_factor_count: int
    max_bottom_degree: int
    iteration_count: int
    bad_term_histogram: Dict[str, Dict[str, int]]
    bound_top_fanin: Optional[float]
    bound_a: float
    pass_name: str
    seed: Optional[int]
    audit: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ReductionReport":
        return cls(**data)


def bound_a(d: int, t: int) -> float:
    """``(1/10) (d/t) log2 t``."""
    return (d / t) * math.log2(t) / 10 if t >= 1 else 0.0


def log2_top_fanin_bound(s: int, d: int, t: int, exponent: int) -> float:
    return exponent * d / t * math.log2(max(s, 1))


def top_fanin_within(top_fanin: int, s: int, d: int, t: int, exponent: int) -> bool:
    """``top_fanin <= s ** (exponent * d / t)``, compared in log space."""
    if top_fanin <= 1:
        return True
    if s <= 1:
        return False
    return math.log2(top_fanin) <= log2_top_fanin_bound(s, d, t, exponent) + 1e-9


def structure_report(d4: DepthFourCircuit, meta: Optional[Mapping[str, Any]] = None) -> ReductionReport:
    """Measure ``d4`` and attach the pass metadata and bound values.

    ``meta`` may carry ``input_size``, ``pass_name``, ``seed``,
    ``iteration_count``, ``bad_term_histogram`` and an ``audit`` dict.
    """
    meta = dict(meta or {})
    s = int(meta.get("input_size", 0))
    d, t = d4.d, d4.t
    pass_name = meta.get("pass_name", "general")
    counts = d4.factor_counts()
    exponent = TOP_FANIN_EXPONENT.get(pass_name, 8)
    log_bound = log2_top_fanin_bound(s, d, t, exponent) if s > 0 and t > 0 else 0.0
    bound = 2.0 ** log_bound if log_bound < 1000 else None
    audit = dict(meta.get("audit", {}))
    audit.setdefault("log2_bound_top_fanin", log_bound)
    audit.setdefault("top_fanin_exponent", exponent)
    return ReductionReport(
        input_size=s,
        num_vars=d4.nvars,
        degree=d,
        cut=t,
        top_fanin=d4.top_fanin,
        min_factor_count=min(counts, default=0),
        max_factor_count=max(counts, default=0),
        max_bottom_degree=d4.max_bottom_degree(),
        iteration_count=int(meta.get("iteration_count", 0)),
        bad_term_histogram=dict(meta.get("bad_term_histogram", {})),
        bound_top_fanin=bound,
        bound_a=bound_a(d, t),
        pass_name=pass_name,
        seed=meta.get("seed"),
        audit=audit,
    )


def report_violations(report: ReductionReport) -> List[str]:
    """Asserted invariants that ``report`` breaks (empty when healthy)."""
    out = []
    d, t = report.degree, report.cut
    if report.max_bottom_degree > t:
        out.append(f"max bottom degree {report.max_bottom_degree} exceeds t={t}")
    name = report.pass_name
    if name == "general" and t < d:
        if report.iteration_count > 8 * d / t:
            out.append(f"{report.iteration_count} iterations exceed 8d/t")
        if not top_fanin_within(report.top_fanin, report.input_size, d, t, 8):
            out.append("top fan-in exceeds s^(8d/t)")
    if name in ("hom", "hom-alt") and t < d:
        if report.min_factor_count < math.ceil(report.bound_a - 1e-12):
            out.append(f"a_min={report.min_factor_count} below bound {report.bound_a:.3f}")
        if name == "hom" and report.iteration_count > 9 * d / t:
            out.append(f"{report.iteration_count} iterations exceed 9d/t")
    out.extend(report.audit.get("violations", []))
    return out
