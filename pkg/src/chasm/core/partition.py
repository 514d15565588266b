"""Variable partitions for set-multilinear polynomials."""

from __future__ import annotations

from typing import Dict, Iterable, Optional, Sequence, Tuple

from .poly import Monomial


class Partition:
    """Disjoint, nonempty blocks of variable indices.

    Block order matters: a tensor index ``(i_1, ..., i_d)`` picks the
    ``i_j``-th variable of block ``j``.
    """

    __slots__ = ("blocks", "_where")

    def __init__(self, blocks: Iterable[Sequence[int]]):
        self.blocks: Tuple[Tuple[int, ...], ...] = tuple(tuple(b) for b in blocks)
        where: Dict[int, Tuple[int, int]] = {}
        for j, block in enumerate(self.blocks):
            if not block:
                raise ValueError(f"block {j} is empty")
            for pos, v in enumerate(block):
                if v in where:
                    raise ValueError(f"variable x{v} appears in blocks {where[v][0]} and {j}")
                where[v] = (j, pos)
        self._where = where

    @classmethod
    def uniform(cls, d: int, n: int, offset: int = 0) -> "Partition":
        """``d`` consecutive blocks of ``n`` variables each."""
        return cls([range(offset + j * n, offset + (j + 1) * n) for j in range(d)])

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def nvars(self) -> int:
        """One more than the largest variable index used."""
        return 1 + max(self._where)

    def variables(self):
        return self._where.keys()

    def locate(self, v: int) -> Tuple[int, int]:
        """``(block, position)`` of variable ``v``."""
        try:
            return self._where[v]
        except KeyError:
            raise ValueError(f"variable x{v} is outside the partition") from None

    def block_of(self, v: int) -> int:
        return self.locate(v)[0]

    def sub(self, block_ids: Sequence[int]) -> "Partition":
        return Partition([self.blocks[j] for j in block_ids])

    def concat(self, other: "Partition") -> "Partition":
        return Partition(self.blocks + other.blocks)

    def sml_blocks(self, m: Monomial) -> Optional[Tuple[int, ...]]:
        """Sorted blocks touched by ``m`` if it takes at most one variable,
        to the first power, from each block; otherwise None."""
        seen = []
        for v, e in m:
            if e != 1:
                return None
            j = self.locate(v)[0]
            if j in seen:
                return None
            seen.append(j)
        return tuple(sorted(seen))

    def __eq__(self, other):
        return isinstance(other, Partition) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"Partition({[list(b) for b in self.blocks]})"
