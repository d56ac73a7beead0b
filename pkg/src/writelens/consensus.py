"""Consensus between the two clustering methods.

For a requested K, Method I (synopsis) and Method II (average-linkage over
normalized edit distances) each produce a partition; clusters are matched
one-to-one by maximum total member overlap, and only intersections of size
at least two survive as agreed clusters. Everything else becomes a
singleton awaiting manual placement.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .distance import distance_matrix
from .errors import AuthorSetMismatch, KOutOfRange, NTooSmall
from .hicluster import Dendrogram, Partition, agglomerate, cut
from .ingest import AuthorId, Collection, EventType
from .synopsis import max_pattern_count, synopsize


@dataclass(frozen=True)
class ConsensusCluster:
    members: frozenset[AuthorId]
    pattern: tuple[EventType, ...]  # display pattern from the Method-I cluster


@dataclass(frozen=True)
class ConsensusResult:
    k: int
    clusters: tuple[ConsensusCluster, ...]
    singletons: frozenset[AuthorId]


def _author_key(a: AuthorId) -> tuple[int, str]:
    return (a.team, a.role.value)


def _partition_key(p: Partition) -> tuple:
    return tuple(sorted(tuple(sorted(map(_author_key, cl))) for cl in p.clusters))


def match_clusters(a: Partition, b: Partition) -> list[tuple[int, int, int]]:
    """One-to-one cluster matching maximizing total member overlap.

    When cluster counts differ, the smaller side is padded with empty
    dummies; dummy pairings are dropped from the output. To keep the agreed
    family independent of argument order, the assignment always runs on the
    canonically-oriented overlap matrix.
    """
    if a.authors != b.authors:
        raise AuthorSetMismatch("partitions cover different author sets")
    overlap = np.zeros((len(a.clusters), len(b.clusters)), dtype=np.int64)
    for i, ca in enumerate(a.clusters):
        for j, cb in enumerate(b.clusters):
            overlap[i, j] = len(ca & cb)
    transposed = _partition_key(b) < _partition_key(a)
    matrix = overlap.T if transposed else overlap
    size = max(matrix.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: matrix.shape[0], : matrix.shape[1]] = matrix
    rows, cols = linear_sum_assignment(padded, maximize=True)
    pairs = []
    for r, c in zip(rows, cols):
        i, j = (c, r) if transposed else (r, c)
        if i < len(a.clusters) and j < len(b.clusters):
            pairs.append((int(i), int(j), int(overlap[i, j])))
    pairs.sort()
    return pairs


@functools.lru_cache(maxsize=32)
def _normalized_dendrogram(c: Collection) -> Dendrogram:
    return agglomerate(distance_matrix(c, normalized=True))


def consensus_partition(c: Collection, k: int, alpha: float = 1.0) -> ConsensusResult:
    """Agreed clusters (intersection >= 2) between both methods at K = k,
    with all remaining authors as singletons."""
    n_max = max_pattern_count(c, alpha)
    if not 2 <= k <= n_max:
        raise KOutOfRange(f"k must be in [2, {n_max}], got {k}")
    syn = synopsize(c, k, alpha)
    method_a = syn.partition()
    method_b = cut(_normalized_dendrogram(c), k)
    agreed: list[ConsensusCluster] = []
    for ia, ib, _ in match_clusters(method_a, method_b):
        intersection = syn.clusters[ia].members & method_b.clusters[ib]
        if len(intersection) >= 2:
            agreed.append(
                ConsensusCluster(
                    members=frozenset(intersection),
                    pattern=syn.clusters[ia].pattern,
                )
            )
    agreed.sort(key=lambda cl: min(map(_author_key, cl.members)))
    clustered = frozenset().union(*(cl.members for cl in agreed)) if agreed else frozenset()
    singletons = frozenset(c.authors) - clustered
    return ConsensusResult(k=k, clusters=tuple(agreed), singletons=singletons)


def default_k(c: Collection, alpha: float = 1.0) -> int:
    """The K in [2, N] with the fewest singletons (ties toward smaller K);
    used to initialize new sessions."""
    n_max = max_pattern_count(c, alpha)
    if n_max < 2:
        raise NTooSmall(f"need at least 2 synopsis patterns, got {n_max}")
    best_k = 2
    best_count = None
    for k in range(2, n_max + 1):
        count = len(consensus_partition(c, k, alpha).singletons)
        if best_count is None or count < best_count:
            best_k, best_count = k, count
    return best_k
