"""Command-line front end.

Every transforming subcommand writes its artifact next to the input (or to
``-o``) together with a JSON report, and exits with status 1 when an
asserted invariant fails.  Usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

from .analysis import (
    check_homogeneous, pit_equivalent, product_depth, report_violations, ReductionReport,
)
from .core.circuit import Circuit, CircuitError, homogenize
from .core.exchange import parse_circuit, parse_depth4, serialize_circuit, serialize_depth4
from .core.field import DEFAULT_PRIME
from .core.partition import Partition
from .depth4 import PASSES, SummandCapExceeded
from .generators import FAMILIES, GeneratorParams, generate
from .tensor import (
    BudgetExceeded, CertificateError, Tensor, brute_force_rank, format_decomposition,
    format_tensor, parse_tensor, rank_certificate,
)
from .vsbr import DEPTH_CONSTANT, reduced_violations, vsbr_reduce


class UsageError(Exception):
    pass


def _write(path: Path, text: str):
    path.write_text(text)


def _dump(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _stem(path: Path) -> Path:
    return path.with_suffix("") if path.suffix else path


def _sidecar(path: Path, suffix: str) -> Path:
    """``f.vsbr.ac`` -> ``f.vsbr<suffix>``: only the last extension is replaced."""
    return Path(str(_stem(path)) + suffix)


def _load(path: Path):
    """A circuit, depth-four circuit or tensor, by its header keyword."""
    text = path.read_text()
    first = next((ln.split("#", 1)[0].split() for ln in text.splitlines()
                  if ln.split("#", 1)[0].strip()), [""])
    kind = first[0]
    if kind == "depth4":
        return parse_depth4(text)
    if kind == "tensor":
        return parse_tensor(text)
    return parse_circuit(text)


def _load_circuit(path: Path) -> Circuit:
    obj = _load(path)
    if not isinstance(obj, Circuit):
        raise UsageError(f"{path} does not hold a circuit")
    return obj


def _finish(violations: List[str]) -> int:
    if violations:
        for v in violations[:20]:
            print(f"invariant failed: {v}", file=sys.stderr)
        return 1
    return 0


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    params = GeneratorParams(family=args.family, seed=args.seed, n=args.n, d=args.d, s=args.s,
                             delta=args.delta, width=args.width, dag=args.dag, p=args.p)
    obj = generate(params)
    out = Path(args.output)
    violations = []
    if isinstance(obj, Tensor):
        _write(out, format_tensor(obj))
        meta = {"family": args.family, "shape": list(obj.shape), "nnz": obj.nnz}
    else:
        _write(out, serialize_circuit(obj))
        hom = check_homogeneous(obj)
        if not hom:
            violations.append(f"generated circuit not homogeneous at gate {hom.gate}")
        meta = {"family": args.family, "size": obj.size, "degree": obj.degree,
                "nvars": obj.nvars, "formula": not args.dag}
        if args.family.startswith("shallow") and args.delta is not None:
            meta["product_depth"] = product_depth(obj)
            if meta["product_depth"] != args.delta:
                violations.append(f"product depth {meta['product_depth']} != {args.delta}")
    meta.update({"seed": args.seed, "n": args.n, "d": args.d, "s": args.s, "p": args.p,
                 "violations": violations})
    _write(_sidecar(out, ".gen.json"), _dump(meta))
    return _finish(violations)


def cmd_homogenize(args) -> int:
    src = Path(args.file)
    c = _load_circuit(src)
    h = homogenize(c, args.degree)
    out = Path(args.output) if args.output else _sidecar(src, ".hom.ac")
    _write(out, serialize_circuit(h))
    verdict = pit_equivalent(c, h, args.trials, args.seed) if args.degree is None else None
    violations = []
    if verdict is not None and not verdict.equal:
        violations.append(f"homogenized circuit differs at {verdict.witness}")
    report = {"input_size": c.size, "output_size": h.size, "degree": h.degree,
              "pit_equal": None if verdict is None else verdict.equal, "violations": violations}
    _write(_sidecar(out, ".report.json"), _dump(report))
    return _finish(violations)


def cmd_vsbr(args) -> int:
    src = Path(args.file)
    c = _load_circuit(src)
    r = vsbr_reduce(c)
    out = Path(args.output) if args.output else _sidecar(src, ".vsbr.ac")
    _write(out, serialize_circuit(r.circuit, r.annotations()))
    violations = reduced_violations(r)
    verdict = pit_equivalent(c, r, args.trials, args.seed)
    if not verdict.equal:
        violations.append(f"reduced circuit differs at {verdict.witness}")
    report = {"input_size": c.size, "output_size": r.size, "degree": r.degree,
              "depth": r.depth, "depth_constant": DEPTH_CONSTANT,
              "depth_bound": r.depth_bound(), "pit_equal": verdict.equal,
              "violations": violations}
    _write(_sidecar(out, ".report.json"), _dump(report))
    return _finish(violations)


def cmd_depth4(args) -> int:
    if args.t < 1:
        raise UsageError(f"--t must be at least 1, got {args.t}")
    src = Path(args.file)
    c = _load_circuit(src)
    fn = PASSES[args.pass_name]
    d4 = fn(c, args.t, seed=args.seed)
    out = Path(args.output) if args.output else _sidecar(src, ".d4")
    _write(out, serialize_depth4(d4))
    report = d4.report
    violations = list(report.audit.get("violations", []))
    if args.verify:
        verdict = pit_equivalent(c, d4, args.trials, args.seed)
        report.audit["pit_equal"] = verdict.equal
        if not verdict.equal:
            violations.append(f"depth-four output differs at {verdict.witness}")
    _write(_sidecar(out, ".report.json"), report.to_json() + "\n")
    return _finish(violations)


def cmd_verify(args) -> int:
    a, b = _load(Path(args.file)), _load(Path(args.against))
    verdict = pit_equivalent(a, b, args.trials, args.seed)
    result = {"equal": verdict.equal, "trials": verdict.trials, "seed": verdict.seed,
              "log2_failure_bound": _log2_fraction(verdict.failure_bound)}
    if not verdict.equal:
        result["witness"] = list(verdict.witness)
        result["values"] = list(verdict.values)
    print(_dump(result), end="")
    return 0 if verdict.equal else 1


def _log2_fraction(x) -> Optional[float]:
    if x == 0:
        return None
    return math.log2(x.numerator) - math.log2(x.denominator)


def _blocks(args, c: Circuit) -> Partition:
    d = args.blocks or c.degree
    if d < 1 or c.nvars % d:
        raise UsageError(f"{c.nvars} variables do not split into {d} equal blocks")
    return Partition.uniform(d, c.nvars // d)


def cmd_rank_cert(args) -> int:
    src = Path(args.file)
    c = _load_circuit(src)
    part = _blocks(args, c)
    dec, report = rank_certificate(c, part, args.c, args.mode, t=args.t)
    out = Path(args.output) if args.output else _sidecar(src, ".rank")
    _write(out, format_decomposition(dec))
    _write(_sidecar(out, ".cert.json"), report.to_json() + "\n")
    violations = [] if report.within_bound else [
        f"{report.term_count} terms exceed bound {report.term_bound}"]
    violations += report.audit.get("depth4_violations", [])
    return _finish(violations)


def cmd_brute_rank(args) -> int:
    t = _load(Path(args.file))
    if not isinstance(t, Tensor):
        raise UsageError(f"{args.file} does not hold a tensor")
    r = brute_force_rank(t, args.q, budget=args.budget)
    print(_dump({"shape": list(t.shape), "q": args.q or t.p, "rank": r}), end="")
    return 0


def cmd_report(args) -> int:
    """Summarize reduction reports; nonzero if any reports a violation."""
    bad = 0
    rows = []
    for name in args.files:
        data = json.loads(Path(name).read_text())
        if "pass_name" in data:
            report = ReductionReport.from_dict(data)
            violations = report_violations(report)
            rows.append({"file": name, "pass": report.pass_name, "d": report.degree,
                         "t": report.cut, "top_fanin": report.top_fanin,
                         "a_min": report.min_factor_count,
                         "max_bottom_degree": report.max_bottom_degree,
                         "iterations": report.iteration_count,
                         "violations": len(violations)})
        else:
            violations = list(data.get("violations", []))
            rows.append({"file": name, "violations": len(violations)})
        bad += bool(violations)
    if args.json:
        print(_dump(rows), end="")
    else:
        for row in rows:
            print("  ".join(f"{k}={v}" for k, v in row.items()))
    return 1 if bad else 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chasm", description="Depth reduction for arithmetic "
                                 "circuits and rank certificates for tensors.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded corpus instance")
    g.add_argument("--family", required=True, choices=FAMILIES + ("shallow-delta",))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=4, help="variables (or block size / matrix width)")
    g.add_argument("--d", type=int, default=4, help="degree (or tensor order)")
    g.add_argument("--s", type=int, default=60, help="size budget")
    g.add_argument("--delta", type=int, default=None, help="product depth for shallow")
    g.add_argument("--width", type=int, default=2, help="sum width for shallow")
    g.add_argument("--dag", action="store_true", help="allow gate reuse (circuit, not formula)")
    g.add_argument("--p", type=int, default=DEFAULT_PRIME)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    h = sub.add_parser("homogenize", help="split gates into homogeneous components")
    h.add_argument("file")
    h.add_argument("--degree", type=int, default=None, help="keep only this component")
    h.add_argument("-o", "--output")
    h.add_argument("--trials", type=int, default=64)
    h.add_argument("--seed", type=int, default=0)
    h.set_defaults(func=cmd_homogenize)

    v = sub.add_parser("vsbr", help="log-depth rebuild of a homogeneous circuit")
    v.add_argument("file")
    v.add_argument("-o", "--output")
    v.add_argument("--trials", type=int, default=64)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_vsbr)

    d = sub.add_parser("depth4", help="reduce to a depth-four circuit with bottom degree <= t")
    d.add_argument("file")
    d.add_argument("--t", type=int, required=True)
    d.add_argument("--pass", dest="pass_name", default="general", choices=sorted(PASSES))
    d.add_argument("-o", "--output")
    d.add_argument("--no-verify", dest="verify", action="store_false",
                   help="skip the identity test of output against input")
    d.add_argument("--trials", type=int, default=64)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_depth4)

    w = sub.add_parser("verify", help="randomized identity test of two files")
    w.add_argument("file")
    w.add_argument("--against", required=True)
    w.add_argument("--trials", type=int, default=64)
    w.add_argument("--seed", type=int, default=0)
    w.set_defaults(func=cmd_verify)

    t = sub.add_parser("tensor", help="tensor rank tools")
    tsub = t.add_subparsers(dest="tensor_command", required=True)
    rc = tsub.add_parser("rank-cert", help="rank certificate for a formula")
    rc.add_argument("file")
    rc.add_argument("--mode", choices=("sml", "hom", "homogeneous"), default="sml")
    rc.add_argument("--c", type=float, required=True, help="size exponent: size <= n^c")
    rc.add_argument("--t", type=int, default=None, help="override the cut")
    rc.add_argument("--blocks", type=int, default=None,
                    help="number of equal consecutive variable blocks (default: degree)")
    rc.add_argument("-o", "--output")
    rc.set_defaults(func=cmd_rank_cert)
    br = tsub.add_parser("brute-rank", help="exact rank by exhaustive search")
    br.add_argument("file")
    br.add_argument("--q", type=int, default=None, help="field size (default: tensor's)")
    br.add_argument("--budget", type=int, default=5 * 10**6)
    br.set_defaults(func=cmd_brute_rank)

    r = sub.add_parser("report", help="summarize JSON reports")
    r.add_argument("files", nargs="+")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        ap.error(str(e))
    except (CircuitError, SummandCapExceeded, BudgetExceeded, CertificateError,
            OSError, ValueError) as e:
        print(f"chasm: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
