"""Sparse multivariate polynomials over GF(p).

A monomial is a tuple of ``(var, exponent)`` pairs with strictly increasing
variable indices and positive exponents; ``()`` is the constant monomial.
A :class:`SparsePoly` maps monomials to nonzero residues.  Instances are
treated as immutable.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, Sequence, Tuple

from .field import DEFAULT_PRIME

Monomial = Tuple[Tuple[int, int], ...]

DEFAULT_MONOMIAL_CAP = 10**6


class MonomialCapExceeded(RuntimeError):
    """An intermediate polynomial grew past the configured monomial cap."""


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_vars(m: Monomial) -> Tuple[int, ...]:
    return tuple(v for v, _ in m)


class SparsePoly:
    __slots__ = ("terms", "nvars", "p", "_hash")

    def __init__(self, terms: Dict[Monomial, int], nvars: int, p: int = DEFAULT_PRIME,
                 *, clean: bool = True):
        if clean:
            terms = {m: c % p for m, c in terms.items() if c % p}
        self.terms = terms
        self.nvars = nvars
        self.p = p
        self._hash = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, p: int = DEFAULT_PRIME) -> "SparsePoly":
        return cls({}, nvars, p, clean=False)

    @classmethod
    def constant(cls, c: int, nvars: int, p: int = DEFAULT_PRIME) -> "SparsePoly":
        return cls({(): c}, nvars, p)

    @classmethod
    def variable(cls, k: int, nvars: int, p: int = DEFAULT_PRIME) -> "SparsePoly":
        if not 0 <= k < nvars:
            raise IndexError(f"variable x{k} out of range for {nvars} variables")
        return cls({((k, 1),): 1}, nvars, p, clean=False)

    @classmethod
    def linear(cls, coeffs: Dict[int, int], nvars: int, p: int = DEFAULT_PRIME) -> "SparsePoly":
        return cls({((k, 1),): c for k, c in coeffs.items()}, nvars, p)

    # -- basic queries ----------------------------------------------------

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        if not self.terms:
            return -1
        return max(mono_degree(m) for m in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {mono_degree(m) for m in self.terms}
        return len(degs) <= 1

    def coeff(self, m: Monomial) -> int:
        return self.terms.get(m, 0)

    def constant_term(self) -> int:
        return self.terms.get((), 0)

    def variables(self) -> set:
        out = set()
        for m in self.terms:
            out.update(v for v, _ in m)
        return out

    def sorted_terms(self):
        """Terms in canonical order: by degree, then lexicographically."""
        return sorted(self.terms.items(), key=lambda mc: (mono_degree(mc[0]), mc[0]))

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "SparsePoly"):
        if self.p != other.p:
            raise ValueError(f"field mismatch: {self.p} vs {other.p}")

    def _like(self, terms, clean=False, nvars=None):
        return SparsePoly(terms, self.nvars if nvars is None else nvars, self.p, clean=clean)

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        if isinstance(other, int):
            other = SparsePoly.constant(other, self.nvars, self.p)
        self._check(other)
        p = self.p
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            v = (out.get(m, 0) + c) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return self._like(out, nvars=max(self.nvars, other.nvars))

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        p = self.p
        return self._like({m: (-c) % p for m, c in self.terms.items()})

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        if isinstance(other, int):
            other = SparsePoly.constant(other, self.nvars, self.p)
        return self + (-other)

    def scale(self, c: int) -> "SparsePoly":
        c %= self.p
        if c == 0:
            return self._like({})
        if c == 1:
            return self
        p = self.p
        return self._like({m: (v * c) % p for m, v in self.terms.items()})

    def mul(self, other: "SparsePoly", cap: int = DEFAULT_MONOMIAL_CAP) -> "SparsePoly":
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return self._like({}, nvars=max(self.nvars, other.nvars))
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            ((mb, cb),) = b.items()
            if mb == ():
                return self._like({m: c * cb for m, c in a.items()}, clean=True,
                                  nvars=max(self.nvars, other.nvars))
        p = self.p
        out: Dict[Monomial, int] = {}
        get = out.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                m = mono_mul(ma, mb)
                out[m] = get(m, 0) + ca * cb
            if len(out) > cap:
                raise MonomialCapExceeded(f"product exceeds {cap} monomials")
        return SparsePoly(out, max(self.nvars, other.nvars), p, clean=True)

    def __mul__(self, other):
        return self.mul(other)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "SparsePoly":
        if e < 0:
            raise ValueError("negative power")
        result = SparsePoly.constant(1, self.nvars, self.p)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- evaluation and projections --------------------------------------

    def evaluate(self, point: Sequence[int]) -> int:
        p = self.p
        total = 0
        powcache = {}
        for m, c in self.terms.items():
            v = c
            for k, e in m:
                key = (k, e)
                pv = powcache.get(key)
                if pv is None:
                    pv = pow(point[k], e, p)
                    powcache[key] = pv
                v = v * pv % p
            total += v
        return total % p

    def filter(self, keep: Callable[[Monomial], bool]) -> "SparsePoly":
        return self._like({m: c for m, c in self.terms.items() if keep(m)})

    def homogeneous_component(self, k: int) -> "SparsePoly":
        return self.filter(lambda m: mono_degree(m) == k)

    def components(self) -> Dict[int, "SparsePoly"]:
        comps: Dict[int, Dict[Monomial, int]] = {}
        for m, c in self.terms.items():
            comps.setdefault(mono_degree(m), {})[m] = c
        return {k: self._like(t) for k, t in sorted(comps.items())}

    # -- comparisons ------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = SparsePoly.constant(other, self.nvars, self.p)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.p == other.p and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"SparsePoly({format_poly(self)!r}, p={self.p})"


def poly_sum(polys: Iterable[SparsePoly], nvars: int, p: int) -> SparsePoly:
    out: Dict[Monomial, int] = {}
    get = out.get
    for f in polys:
        for m, c in f.terms.items():
            out[m] = get(m, 0) + c
    return SparsePoly(out, nvars, p, clean=True)


def poly_product(polys: Iterable[SparsePoly], nvars: int, p: int,
                 cap: int = DEFAULT_MONOMIAL_CAP) -> SparsePoly:
    result = SparsePoly.constant(1, nvars, p)
    for f in polys:
        result = result.mul(f, cap)
        if not result:
            break
    return result


def format_monomial(m: Monomial) -> str:
    return "*".join(f"x{k}" if e == 1 else f"x{k}^{e}" for k, e in m)


def format_poly(f: SparsePoly) -> str:
    if not f.terms:
        return "0"
    parts = []
    for m, c in f.sorted_terms():
        if not m:
            parts.append(str(c))
        elif c == 1:
            parts.append(format_monomial(m))
        else:
            parts.append(f"{c}*{format_monomial(m)}")
    return " + ".join(parts)


def parse_poly(text: str, nvars: int, p: int = DEFAULT_PRIME) -> SparsePoly:
    """Inverse of :func:`format_poly`."""
    text = text.strip()
    if text == "0":
        return SparsePoly.zero(nvars, p)
    terms: Dict[Monomial, int] = {}
    for raw in text.split("+"):
        coeff = 1
        exps: Dict[int, int] = {}
        for factor in raw.strip().split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"malformed term {raw!r}")
            if factor[0] == "x":
                name, _, e = factor.partition("^")
                k = int(name[1:])
                if not 0 <= k < nvars:
                    raise ValueError(f"variable {name} out of range")
                exps[k] = exps.get(k, 0) + (int(e) if e else 1)
            else:
                coeff = coeff * int(factor) % p
        m = tuple(sorted(exps.items()))
        terms[m] = terms.get(m, 0) + coeff
    return SparsePoly(terms, nvars, p)
