"""Exact rank of every 2x2x2 tensor over GF(2), by exhaustive search."""

import itertools
from collections import Counter

from chasm.tensor import Tensor, brute_force_rank, shape_partition

part = shape_partition((2, 2, 2))
cells = list(itertools.product(range(2), repeat=3))
counts = Counter()
for bits in range(256):
    t = Tensor(part, {c: 1 for k, c in enumerate(cells) if bits >> k & 1}, 2)
    counts[brute_force_rank(t)] += 1
for r in sorted(counts):
    print(f"rank {r}: {counts[r]} tensors")

w = Tensor(part, {(0, 0, 1): 1, (0, 1, 0): 1, (1, 0, 0): 1}, 2)
print("W tensor rank:", brute_force_rank(w))
