"""Rank certificate for an iterated matrix product, checked by re-summation."""

import math

from chasm.generators import imm
from chasm.tensor import rank_certificate, trivial_bound

for d in (3, 4, 5):
    f, part = imm(2, d)
    c = math.log(f.size, max(part.sizes))
    dec, rep = rank_certificate(f, part, c)
    print(f"d={d}: size {f.size}, cut t={rep.t}, a_min {rep.a_min}, "
          f"{dec.rank} terms (bound {rep.term_bound}, trivial {trivial_bound(part.sizes)}), "
          f"exact {rep.exact}")
