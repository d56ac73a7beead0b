"""Agglomerative average-linkage clustering with deterministic tie-breaking.

Built directly instead of delegating to a library linkage routine because the
merge order must be reproducible bit-for-bit: ties on linkage height are
broken by the smallest pair of member indices in author order, which
downstream consensus matching relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyMatrix, KOutOfRange
from .distance import DistanceMatrix
from .ingest import AuthorId


@dataclass(frozen=True)
class Merge:
    left: int  # node id: 0..n-1 are leaves, n+k is the cluster made by merge k
    right: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[AuthorId, ...]
    merges: tuple[Merge, ...]


@dataclass(frozen=True)
class Partition:
    """Disjoint non-empty author sets covering a collection."""

    clusters: tuple[frozenset[AuthorId], ...]

    def __post_init__(self):
        seen: set[AuthorId] = set()
        for cluster in self.clusters:
            if not cluster:
                raise ValueError("empty cluster in partition")
            if seen & cluster:
                raise ValueError("overlapping clusters in partition")
            seen |= cluster

    @property
    def authors(self) -> frozenset[AuthorId]:
        return frozenset().union(*self.clusters) if self.clusters else frozenset()


def _sorted_clusters(
    clusters: list[set[AuthorId]], author_index: dict[AuthorId, int]
) -> tuple[frozenset[AuthorId], ...]:
    return tuple(
        frozenset(c)
        for c in sorted(clusters, key=lambda c: min(author_index[a] for a in c))
    )


def agglomerate(m: DistanceMatrix) -> Dendrogram:
    """Average-linkage agglomeration over the whole matrix.

    At every step the pair of active clusters with minimal mean pairwise
    distance is merged; equal linkages are resolved by the smallest
    (min leaf index, min leaf index) pair, so the result is deterministic.
    """
    n = len(m.authors)
    if n == 0:
        raise EmptyMatrix("cannot cluster an empty matrix")
    # Active clusters: node id -> (min leaf index, size). Linkage between
    # clusters is maintained with the Lance-Williams update for average link.
    link: dict[tuple[int, int], float] = {}
    active: dict[int, tuple[int, int]] = {i: (i, 1) for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            link[(i, j)] = float(m.values[i, j])

    merges: list[Merge] = []
    next_id = n
    while len(active) > 1:
        best: tuple[float, int, int, int, int] | None = None
        for (u, v), d in link.items():
            ku, kv = active[u][0], active[v][0]
            lo, hi = (ku, kv) if ku < kv else (kv, ku)
            cand = (d, lo, hi, u, v)
            if best is None or cand[:3] < best[:3]:
                best = cand
        d, _, _, u, v = best
        ku, su = active[u]
        kv, sv = active[v]
        left, right = (u, v) if ku < kv else (v, u)
        merged = next_id
        next_id += 1
        merges.append(Merge(left=left, right=right, height=d))
        del active[u], active[v]
        for w in active:
            a = link.pop((min(u, w), max(u, w)))
            b = link.pop((min(v, w), max(v, w)))
            link[(w, merged)] = (su * a + sv * b) / (su + sv)
        del link[(min(u, v), max(u, v))]
        active[merged] = (min(ku, kv), su + sv)
    return Dendrogram(leaves=m.authors, merges=tuple(merges))


def cut(d: Dendrogram, k: int) -> Partition:
    """Undo the last k-1 merges, yielding exactly k clusters."""
    n = len(d.leaves)
    if not 1 <= k <= n:
        raise KOutOfRange(f"k must be in [1, {n}], got {k}")
    members: dict[int, set[AuthorId]] = {i: {a} for i, a in enumerate(d.leaves)}
    for step, merge in enumerate(d.merges[: n - k]):
        members[n + step] = members.pop(merge.left) | members.pop(merge.right)
    author_index = {a: i for i, a in enumerate(d.leaves)}
    return Partition(clusters=_sorted_clusters(list(members.values()), author_index))
