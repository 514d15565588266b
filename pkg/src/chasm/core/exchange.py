"""Text exchange formats for circuits and depth-four circuits.

Circuit format, one statement per line (``#`` starts a comment)::

    circuit <name> p=<modulus> nvars=<n>
    gate <id> = var <k>
    gate <id> = const <c>
    gate <id> = add <id> <id> ...
    gate <id> = mul <id> <id> ...
    output <id>

Gate ids must be defined before they are used.

Depth-four format::

    depth4 p=<p> nvars=<n> d=<d> t=<t>
    summand <coeff> : <poly> | <poly> | ...

with polynomials written as ``c*x0^2*x3 + x1`` in canonical monomial order.
"""

from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence, Union

from .circuit import ADD, CONST, MUL, VAR, Circuit, CircuitError, Formula, Gate, is_tree
from .depth_four import DepthFourCircuit, Summand
from .field import is_prime
from .poly import format_poly, parse_poly


class ParseError(CircuitError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _header_fields(tokens: Sequence[str], lineno: int) -> Dict[str, str]:
    out = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq:
            raise ParseError(lineno, f"expected key=value, got {tok!r}")
        out[key] = val
    return out


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_circuit(text: str, formula: Optional[bool] = None) -> Union[Circuit, Formula]:
    """Parse the circuit exchange format.

    Returns a :class:`Formula` when the live gates form a tree (or raises when
    ``formula=True`` and they do not), a :class:`Circuit` otherwise.
    """
    lines = text.splitlines()
    header = None
    defined_at: Dict[str, int] = {}
    for lineno, raw in enumerate(lines, 1):
        toks = _strip(raw).split()
        if len(toks) >= 2 and toks[0] == "gate":
            if toks[1] in defined_at:
                raise ParseError(lineno, f"gate {toks[1]} defined twice")
            defined_at[toks[1]] = lineno

    index: Dict[str, int] = {}
    gates: List[Gate] = []
    output = None
    name, p, nvars = "c", None, None
    for lineno, raw in enumerate(lines, 1):
        line = _strip(raw)
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == "circuit":
            if header is not None:
                raise ParseError(lineno, "duplicate circuit header")
            if len(toks) < 2:
                raise ParseError(lineno, "circuit header needs a name")
            header = _header_fields(toks[2:], lineno)
            name = toks[1]
            try:
                p = int(header["p"])
                nvars = int(header["nvars"])
            except (KeyError, ValueError):
                raise ParseError(lineno, "header needs integer p= and nvars=") from None
            if not is_prime(p):
                raise ParseError(lineno, f"modulus {p} is not prime")
        elif head == "gate":
            if header is None:
                raise ParseError(lineno, "gate before circuit header")
            if len(toks) < 4 or toks[2] != "=":
                raise ParseError(lineno, "expected 'gate <id> = <kind> ...'")
            gid, kind, args = toks[1], toks[3], toks[4:]
            if kind == VAR:
                if len(args) != 1:
                    raise ParseError(lineno, "var takes one argument")
                k = args[0][1:] if args[0].startswith("x") else args[0]
                try:
                    k = int(k)
                except ValueError:
                    raise ParseError(lineno, f"bad variable {args[0]!r}") from None
                if not 0 <= k < nvars:
                    raise ParseError(lineno, f"variable {k} out of range (nvars={nvars})")
                gate = Gate(VAR, k)
            elif kind == CONST:
                if len(args) != 1:
                    raise ParseError(lineno, "const takes one argument")
                try:
                    gate = Gate(CONST, int(args[0]) % p)
                except ValueError:
                    raise ParseError(lineno, f"bad constant {args[0]!r}") from None
            elif kind in (ADD, MUL):
                kids = []
                for a in args:
                    if a == gid:
                        raise ParseError(lineno, f"cyclic reference: {gid} uses itself")
                    if a not in index:
                        if a in defined_at:
                            raise ParseError(
                                lineno, f"gate {a} used before its definition on line "
                                        f"{defined_at[a]} (gates must be in topological order)")
                        raise ParseError(lineno, f"unknown gate id {a!r}")
                    kids.append(index[a])
                gate = Gate(kind, 0, tuple(kids))
            else:
                raise ParseError(lineno, f"unknown gate kind {kind!r}")
            index[gid] = len(gates)
            gates.append(gate)
        elif head == "output":
            if len(toks) != 2:
                raise ParseError(lineno, "expected 'output <id>'")
            if toks[1] not in index:
                raise ParseError(lineno, f"unknown gate id {toks[1]!r}")
            output = index[toks[1]]
        else:
            raise ParseError(lineno, f"unknown statement {head!r}")
    if header is None:
        raise ParseError(1, "missing circuit header")
    if output is None:
        raise ParseError(len(lines), "missing output statement")
    c = Circuit(gates, output, nvars, p, name)
    if formula is True or (formula is None and is_tree(c)):
        return Formula.from_circuit(c)
    return c


def serialize_circuit(c: Circuit, annotations: Optional[Mapping[int, Sequence[str]]] = None) -> str:
    """Exchange-format text for ``c`` (dead gates included).

    ``annotations`` maps gate indices to comment lines written just before
    the gate.
    """
    out = [f"circuit {c.name} p={c.p} nvars={c.nvars}"]
    for i, g in enumerate(c.gates):
        if annotations and i in annotations:
            out.extend(f"# {note}" for note in annotations[i])
        if g.kind == VAR:
            out.append(f"gate g{i} = var {g.arg}")
        elif g.kind == CONST:
            out.append(f"gate g{i} = const {g.arg}")
        else:
            kids = " ".join(f"g{ch}" for ch in g.children)
            out.append(f"gate g{i} = {g.kind} {kids}".rstrip())
    out.append(f"output g{c.output}")
    return "\n".join(out) + "\n"


def serialize_depth4(d4: DepthFourCircuit) -> str:
    out = [f"depth4 p={d4.p} nvars={d4.nvars} d={d4.d} t={d4.t}"]
    for s in d4.summands:
        polys = " | ".join(format_poly(f) for f in s.factors)
        out.append(f"summand {s.coeff} : {polys}")
    return "\n".join(out) + "\n"


def parse_depth4(text: str) -> DepthFourCircuit:
    header = None
    summands = []
    cache: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("depth4"):
            header = _header_fields(line.split()[1:], lineno)
            try:
                p, n = int(header["p"]), int(header["nvars"])
                d, t = int(header["d"]), int(header["t"])
            except (KeyError, ValueError):
                raise ParseError(lineno, "header needs integer p=, nvars=, d=, t=") from None
            if not is_prime(p):
                raise ParseError(lineno, f"modulus {p} is not prime")
        elif line.startswith("summand"):
            if header is None:
                raise ParseError(lineno, "summand before depth4 header")
            body = line[len("summand"):]
            coeff, colon, rest = body.partition(":")
            if not colon:
                raise ParseError(lineno, "expected 'summand <coeff> : <poly> | ...'")
            factors = []
            for chunk in rest.split("|"):
                key = chunk.strip()
                if key not in cache:
                    try:
                        cache[key] = parse_poly(key, n, p)
                    except ValueError as exc:
                        raise ParseError(lineno, str(exc)) from None
                factors.append(cache[key])
            summands.append(Summand(tuple(factors), int(coeff) % p))
        else:
            raise ParseError(lineno, f"unknown statement {line.split()[0]!r}")
    if header is None:
        raise ParseError(1, "missing depth4 header")
    return DepthFourCircuit(summands, t, d, n, p)
