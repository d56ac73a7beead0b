"""Edit-distance primitives over category sequences, plus full distance matrices.

Distances operate on the six-category symbols only; event durations and
activity labels never influence them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import EmptyCollection
from .ingest import AuthorId, Collection


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Unit-cost insert/delete/substitute edit distance.

    Uses the Myers/Hyyro bit-parallel formulation: the pattern is packed into
    one arbitrary-precision integer per distinct symbol, so a length-m vs
    length-n comparison costs O(n) big-int operations instead of O(m*n)
    cell updates.
    """
    if len(a) > len(b):
        a, b = b, a
    m = len(a)
    if m == 0:
        return len(b)
    if tuple(a) == tuple(b):
        return 0
    peq: dict[Hashable, int] = {}
    bit = 1
    for c in a:
        peq[c] = peq.get(c, 0) | bit
        bit <<= 1
    mask = (1 << m) - 1
    high = 1 << (m - 1)
    pv = mask
    mv = 0
    score = m
    for c in b:
        eq = peq.get(c, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & mask)
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = ((ph << 1) | 1) & mask
        mh = (mh << 1) & mask
        pv = mh | (~(xv | ph) & mask)
        mv = ph & xv
    return score


def normalized_distance(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """levenshtein(a, b) / max(|a|, |b|); 0.0 when both are empty.

    Normalizing by the longer length keeps the value symmetric and within
    [0, 1] for any pair of lengths.
    """
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distances in collection author order."""

    authors: tuple[AuthorId, ...]
    values: np.ndarray  # shape (n, n), zero diagonal

    def __post_init__(self):
        n = len(self.authors)
        if self.values.shape != (n, n):
            raise ValueError("matrix shape does not match author list")

    def get(self, a: AuthorId, b: AuthorId) -> float:
        i = self.authors.index(a)
        j = self.authors.index(b)
        return float(self.values[i, j])


def distance_matrix(c: Collection, normalized: bool = False) -> DistanceMatrix:
    """All pairwise distances between the collection's category sequences."""
    if not c.sequences:
        raise EmptyCollection(f"no sequences in {c.role.value}/{c.stage.value}")
    cats = [s.categories for s in c.sequences]
    n = len(cats)
    values = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = levenshtein(cats[i], cats[j])
            if normalized:
                longest = max(len(cats[i]), len(cats[j]))
                d = d / longest if longest else 0.0
            values[i, j] = values[j, i] = d
    return DistanceMatrix(authors=c.authors, values=values)
