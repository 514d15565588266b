"""Depth-four reduction of general homogeneous circuits.

Start from the output's quotient expansion rows and keep expanding each
summand's largest factor through its own rows until every factor has
degree at most ``t``.  Each expansion of a factor of degree ``k > t`` brings
in at least two factors of degree ``>= k/8 > t/8``, which is what the
per-lineage audit checks.
"""

from __future__ import annotations

from typing import Optional

from ..analysis import report_violations, structure_report
from ..core.circuit import Circuit, NotHomogeneousError, check_formal_homogeneous
from ..core.depth_four import DepthFourCircuit
from ..vsbr import QNode, QuotientSystem, prepare
from .engine import RowSource, expand, to_depth_four


def quotient_source(system: QuotientSystem) -> RowSource:
    return RowSource(system.deg, system.rows, system.node_poly, system.nvars, system.p)


def general_initial(system: QuotientSystem, d: int):
    out = QNode(system.base.output)
    if system.base.degree != d or system.is_zero_node(out):
        return []  # the circuit computes zero
    if d == 1:
        return [(1, (out,))]
    return [(row.coeff, row.factors) for row in system.rows(out)]


def reduce_general(c: Circuit, t: int, cap: Optional[int] = None,
                   seed: Optional[int] = None) -> DepthFourCircuit:
    """Homogeneous depth-four circuit with bottom degree at most ``t``.

    The result carries its :class:`~chasm.analysis.ReductionReport` in
    ``.report``; ``.report.audit["violations"]`` lists any failed potential
    check.
    """
    if check_formal_homogeneous(c) is not None:
        raise NotHomogeneousError("reduce_general needs a homogeneous circuit (homogenize first)")
    d = c.degree
    if not 1 <= t <= d:
        raise ValueError(f"cut t={t} outside [1, d={d}]")
    system = QuotientSystem(prepare(c))
    source = quotient_source(system)
    result = expand(general_initial(system, d), source, t, d, bad_den=8, cap=cap)
    d4 = to_depth_four(result, source, t, d)
    audit = result.audit.as_dict()
    audit["quotient_nodes_expanded"] = len(system._rows)
    audit["frontiers"] = len(system.frontier_cache)
    audit["degenerate"] = t >= d
    meta = dict(input_size=c.size, pass_name="general", seed=seed,
                iteration_count=result.iterations, bad_term_histogram=result.histogram,
                audit=audit)
    report = structure_report(d4, meta)
    report.audit["violations"] = report_violations(report) + d4.violations()
    d4.report = report
    return d4
