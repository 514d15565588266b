"""Arithmetic in prime fields GF(p).

Polynomial code works on plain ``int`` residues for speed; :class:`PrimeField`
carries the modulus and the few operations that need it, and
:class:`FieldElement` is the user-facing boxed value.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import gmpy2

MERSENNE61 = (1 << 61) - 1
DEFAULT_PRIME = MERSENNE61


def is_prime(p: int) -> bool:
    return p >= 2 and bool(gmpy2.is_prime(p, 50))


@functools.lru_cache(maxsize=None)
def PrimeField(p: int = DEFAULT_PRIME) -> "_PrimeField":
    """Return the (cached) field of residues mod ``p``.

    Raises ValueError if ``p`` is not prime.
    """
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    return _PrimeField(p)


class _PrimeField:
    __slots__ = ("p",)

    def __init__(self, p: int):
        self.p = p

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, _PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.p, self.p)

    def reduce(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(p)")
        return pow(a, -1, self.p)

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.p)


@dataclass(frozen=True)
class FieldElement:
    """A residue ``value`` in ``[0, p)``."""

    value: int
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if not 0 <= self.value < self.p:
            raise ValueError(f"{self.value} is not a residue mod {self.p}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError("field mismatch")
            return other.value
        if isinstance(other, int):
            return other % self.p
        return NotImplemented

    def __int__(self):
        return self.value

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement((self.value + b) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement((self.value - b) % self.p, self.p)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement((b - self.value) % self.p, self.p)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement((self.value * b) % self.p, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement((-self.value) % self.p, self.p)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(pow(self.value, e, self.p), self.p)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self * FieldElement(b, self.p).inverse()

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero in GF(p)")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __repr__(self):
        return f"{self.value} (mod {self.p})"
