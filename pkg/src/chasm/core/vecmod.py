"""Vectorized modular arithmetic on numpy arrays.

Residues live in ``uint64`` arrays.  Moduli below 2^32 multiply directly;
the Mersenne prime 2^61 - 1 uses a split 32-bit product with the usual
folding; any other modulus falls back to object arrays of Python ints.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .field import MERSENNE61

_M61 = np.uint64(MERSENNE61)
_LO32 = np.uint64(0xFFFFFFFF)
_LO29 = np.uint64((1 << 29) - 1)
_S29, _S32, _S61, _S3 = np.uint64(29), np.uint64(32), np.uint64(61), np.uint64(3)


def _fold61(x):
    # x < 2^64 -> x mod (2^61 - 1), result in [0, p)
    x = (x & _M61) + (x >> _S61)
    return x - np.where(x >= _M61, _M61, np.uint64(0))


def _mul61(a, b):
    a0, a1 = a & _LO32, a >> _S32
    b0, b1 = b & _LO32, b >> _S32
    lo = _fold61(a0 * b0)
    mid = a1 * b0 + a0 * b1  # < 2^62
    # 2^32 * mid = (mid >> 29) * 2^61 + (mid & (2^29 - 1)) * 2^32
    mid = _fold61((mid >> _S29) + ((mid & _LO29) << _S32))
    hi = _fold61((a1 * b1) << _S3)  # 2^64 = 8 mod p; a1*b1 < 2^58
    return _fold61(lo + mid + hi)


def dtype_for(p: int):
    return np.uint64 if p < (1 << 32) or p == MERSENNE61 else object


def asarray(values, p: int) -> np.ndarray:
    dt = dtype_for(p)
    if dt is object:
        return np.array([int(v) % p for v in np.ravel(values)], dtype=object).reshape(np.shape(values))
    return np.asarray(values, dtype=np.uint64)


def mulmod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if p == MERSENNE61 and a.dtype == np.uint64:
        return _mul61(a, b)
    if a.dtype == np.uint64:
        return (a * b) % np.uint64(p)
    return (a * b) % p


def addmod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    if a.dtype == np.uint64:
        s = a + b  # both < 2^61 or < 2^32: no overflow
        q = np.uint64(p)
        return s - np.where(s >= q, q, np.uint64(0))
    return (a + b) % p


def summod(values: np.ndarray, p: int, axis: int = 0) -> np.ndarray:
    """Sum of residues along ``axis`` without overflow."""
    if values.dtype != np.uint64:
        return values.sum(axis=axis) % p
    lo = (values & _LO32).sum(axis=axis, dtype=np.uint64)
    hi = (values >> _S32).sum(axis=axis, dtype=np.uint64)
    return combine_halves(lo, hi, p)


def segment_summod(values: np.ndarray, starts: Sequence[int], p: int) -> np.ndarray:
    """Sums of consecutive row segments ``values[starts[i]:starts[i+1]]``."""
    if values.dtype != np.uint64:
        return np.add.reduceat(values, starts, axis=0) % p
    lo = np.add.reduceat(values & _LO32, starts, axis=0)
    hi = np.add.reduceat(values >> _S32, starts, axis=0)
    return combine_halves(lo, hi, p)


def combine_halves(lo, hi, p: int):
    """``(hi * 2^32 + lo) mod p`` for partial sums below 2^64 each."""
    q = np.uint64(p)
    if p == MERSENNE61:
        return _fold61(_mul61(_fold61(hi), np.full_like(hi, 1 << 32)) + _fold61(lo))
    shift = np.uint64((1 << 32) % p)
    return ((hi % q) * shift % q + lo % q) % q


def powmod_table(xs: np.ndarray, max_exp: int, p: int) -> np.ndarray:
    """``table[e] = xs ** e`` for ``e`` in ``0..max_exp``."""
    out = np.empty((max_exp + 1,) + xs.shape, dtype=xs.dtype)
    out[0] = 1
    for e in range(1, max_exp + 1):
        out[e] = mulmod(out[e - 1], xs, p)
    return out


def points_array(points, nvars: int, p: int) -> np.ndarray:
    """``(nvars, k)`` residue array from a sequence of ``k`` points."""
    pts = [tuple(pt) for pt in points]
    for pt in pts:
        if len(pt) != nvars:
            raise ValueError(f"point has {len(pt)} coordinates, expected {nvars}")
    if not pts:
        return asarray(np.zeros((nvars, 0), dtype=np.uint64), p)
    return asarray([[int(pt[v]) % p for pt in pts] for v in range(nvars)], p)


def eval_polys(polys, pts: np.ndarray, p: int, chunk: int = 1 << 14) -> np.ndarray:
    """Values of sparse polynomials at the columns of ``pts``.

    Returns an array of shape ``(len(polys), k)``.
    """
    nvars, k = pts.shape
    polys = list(polys)
    out = np.zeros((len(polys), k), dtype=pts.dtype)
    if not polys or k == 0:
        return out
    max_exp = max((e for f in polys for m in f.terms for _, e in m), default=0)
    width = max((len(m) for f in polys for m in f.terms), default=0)
    table = powmod_table(pts, max_exp, p).reshape((max_exp + 1) * nvars, k)
    # flatten monomials; padding slots point at table[0, 0] == 1
    owners, coeffs, slots = [], [], []
    for i, f in enumerate(polys):
        for m, c in f.terms.items():
            owners.append(i)
            coeffs.append(c)
            row = [e * nvars + v for v, e in m]
            slots.append(row + [0] * (width - len(row)))
    owners = np.asarray(owners, dtype=np.int64)
    slots = np.asarray(slots, dtype=np.int64).reshape(len(owners), width)
    coeffs = asarray(coeffs, p)
    for lo in range(0, len(owners), chunk):
        hi = min(lo + chunk, len(owners))
        vals = np.repeat(coeffs[lo:hi, None], k, axis=1)
        for j in range(width):
            vals = mulmod(vals, table[slots[lo:hi, j]], p)
        own = owners[lo:hi]
        starts = np.flatnonzero(np.r_[True, own[1:] != own[:-1]])
        sums = segment_summod(vals, starts, p)
        targets = own[starts]
        out[targets] = addmod(out[targets], sums, p)
    return out
