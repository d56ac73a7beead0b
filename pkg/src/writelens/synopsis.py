"""Joint clustering + one representative pattern per cluster (Method I).

The objective balances pattern conciseness against information loss:

    total_cost = alpha * sum(len(pattern))  +  sum(lev(seq, pattern of its cluster))

Clusters are grown by greedy agglomeration from singletons. After every
candidate merge the merged cluster's pattern is the medoid member sequence,
greedily trimmed one element at a time while a removal lowers total_cost.
All ties (merge choice, medoid choice, trim position) resolve toward the
smallest author index / position, so results are fully deterministic.

The full merge trajectory from n clusters down to 1 is computed once per
(collection, alpha) and memoized; every K and the natural stopping point
are read off the same trajectory.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .distance import distance_matrix
from .errors import EmptyCollection, KOutOfRange
from .hicluster import Partition
from .ingest import AuthorId, Collection, EventType


@dataclass(frozen=True)
class SynopsisCluster:
    pattern: tuple[EventType, ...]
    members: frozenset[AuthorId]


@dataclass(frozen=True)
class SynopsisResult:
    clusters: tuple[SynopsisCluster, ...]
    alpha: float
    total_cost: float

    def partition(self) -> Partition:
        """Cluster memberships in result order (patterns dropped)."""
        return Partition(clusters=tuple(c.members for c in self.clusters))


def _forward_dp(pattern: np.ndarray, seq: np.ndarray) -> np.ndarray:
    """Full edit-distance table F[i, j] = lev(pattern[:i], seq[:j]).

    Rows are filled with vectorized numpy ops; the in-row dependency of the
    insertion move is resolved with the classic min-accumulate identity
    cur[j] = j + min_k(t[k] - k).
    """
    n_p, n_s = len(pattern), len(seq)
    table = np.empty((n_p + 1, n_s + 1), dtype=np.int32)
    table[0] = np.arange(n_s + 1)
    if n_s == 0:
        table[:, 0] = np.arange(n_p + 1)
        return table
    js = np.arange(1, n_s + 1, dtype=np.int32)
    for i in range(1, n_p + 1):
        prev = table[i - 1]
        cost = (seq != pattern[i - 1]).astype(np.int32)
        t = np.minimum(prev[1:] + 1, prev[:-1] + cost)
        acc = np.minimum.accumulate(t - js)
        table[i, 0] = i
        table[i, 1:] = np.minimum(acc + js, i + js)
    return table


def _removal_losses(pattern: np.ndarray, seq: np.ndarray) -> np.ndarray:
    """lev(pattern with position p removed, seq) for every position p.

    Splits the alignment at the removed element: forward table of prefixes
    plus backward table of suffixes, minimized over the split point. Costs
    two DP tables instead of len(pattern) full recomputations.
    """
    fwd = _forward_dp(pattern, seq)
    rev = _forward_dp(pattern[::-1], seq[::-1])
    bwd = rev[::-1, ::-1]
    return (fwd[:-1] + bwd[1:]).min(axis=1)


def _trim(
    pattern: np.ndarray,
    member_seqs: list[np.ndarray],
    losses: np.ndarray,
    alpha: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Greedy trim: repeatedly drop the single element whose removal lowers
    total_cost the most, until no removal helps."""
    losses = losses.astype(np.float64)
    while len(pattern):
        per_member = np.stack([_removal_losses(pattern, s) for s in member_seqs])
        totals = per_member.sum(axis=0)
        best = int(np.argmin(totals))  # ties -> smallest position
        if totals[best] - losses.sum() < alpha:
            losses = per_member[:, best].astype(np.float64)
            pattern = np.delete(pattern, best)
        else:
            break
    return pattern, losses


@dataclass(frozen=True)
class _ClusterState:
    members: tuple[int, ...]  # sorted author indices
    pattern: tuple[int, ...]
    cost: float
    pairsum: float  # sum of pairwise raw distances between members
    maxlen: int


@dataclass(frozen=True)
class _Step:
    k_before: int
    left: tuple[int, ...]
    right: tuple[int, ...]
    delta: float


@dataclass(frozen=True)
class _Trajectory:
    authors: tuple[AuthorId, ...]
    snapshots: dict[int, tuple[_ClusterState, ...]]
    costs: dict[int, float]
    steps: tuple[_Step, ...]
    stop_k: int


def _evaluate_merge(
    members: tuple[int, ...],
    seq_arrays: list[np.ndarray],
    dist: np.ndarray,
    alpha: float,
) -> tuple[tuple[int, ...], float]:
    """Pattern and cost of a cluster over the given member indices."""
    idx = np.array(members)
    sub = dist[np.ix_(idx, idx)]
    medoid_pos = int(np.argmin(sub.sum(axis=1)))  # ties -> smallest author index
    pattern = seq_arrays[members[medoid_pos]].copy()
    losses = sub[:, medoid_pos]
    pattern, losses = _trim(pattern, [seq_arrays[m] for m in members], losses, alpha)
    cost = alpha * len(pattern) + float(losses.sum())
    return tuple(int(x) for x in pattern), cost


def _merge_lower_bound(x: _ClusterState, y: _ClusterState, cross: float, alpha: float) -> float:
    """Sound lower bound on the merged cluster's cost, from pairwise
    distances alone (triangle inequality) and the longest member sequence."""
    pairsum = x.pairsum + y.pairsum + cross
    size = len(x.members) + len(y.members)
    by_pairs = pairsum / (size - 1)
    by_length = min(alpha, 1.0) * max(x.maxlen, y.maxlen)
    return max(by_pairs, by_length)


def _build_trajectory(c: Collection, alpha: float) -> _Trajectory:
    cats = [s.categories for s in c.sequences]
    n = len(cats)
    seq_arrays = [np.array([int(x) for x in s], dtype=np.uint8) for s in cats]
    dist = distance_matrix(c).values

    clusters: list[_ClusterState] = [
        _ClusterState(
            members=(i,),
            pattern=tuple(int(x) for x in cats[i]),
            cost=alpha * len(cats[i]),
            pairsum=0.0,
            maxlen=len(cats[i]),
        )
        for i in range(n)
    ]
    snapshots: dict[int, tuple[_ClusterState, ...]] = {n: tuple(clusters)}
    costs: dict[int, float] = {n: sum(cl.cost for cl in clusters)}
    steps: list[_Step] = []
    cache: dict[frozenset, tuple[tuple[int, ...], float]] = {}
    stop_k = None

    k = n
    while k > 1:
        # Rank candidate merges by exact delta where cached, else by a sound
        # lower bound; evaluate in that order until the bound exceeds the
        # best exact delta found (ties included, then broken by index pair).
        ranked = []
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                x, y = clusters[i], clusters[j]
                key = frozenset(x.members + y.members)
                cross = float(dist[np.ix_(np.array(x.members), np.array(y.members))].sum())
                if key in cache:
                    delta = cache[key][1] - x.cost - y.cost
                    exact = True
                else:
                    delta = _merge_lower_bound(x, y, cross, alpha) - x.cost - y.cost
                    exact = False
                tie = (min(x.members[0], y.members[0]), max(x.members[0], y.members[0]))
                ranked.append((delta, tie, i, j, exact, cross))
        ranked.sort(key=lambda r: (r[0], r[1]))

        best: tuple[float, tuple[int, int], int, int] | None = None
        for delta, tie, i, j, exact, cross in ranked:
            if best is not None and delta > best[0]:
                break
            if not exact:
                key = frozenset(clusters[i].members + clusters[j].members)
                if key not in cache:
                    members = tuple(sorted(clusters[i].members + clusters[j].members))
                    cache[key] = _evaluate_merge(members, seq_arrays, dist, alpha)
                delta = cache[key][1] - clusters[i].cost - clusters[j].cost
            if best is None or (delta, tie) < (best[0], best[1]):
                best = (delta, tie, i, j)

        delta, _, i, j = best
        x, y = clusters[i], clusters[j]
        members = tuple(sorted(x.members + y.members))
        pattern, cost = cache[frozenset(members)]
        cross = float(dist[np.ix_(np.array(x.members), np.array(y.members))].sum())
        merged = _ClusterState(
            members=members,
            pattern=pattern,
            cost=cost,
            pairsum=x.pairsum + y.pairsum + cross,
            maxlen=max(x.maxlen, y.maxlen),
        )
        if stop_k is None and delta > 0:
            stop_k = k
        steps.append(_Step(k_before=k, left=x.members, right=y.members, delta=delta))
        clusters = [cl for p, cl in enumerate(clusters) if p not in (i, j)]
        clusters.append(merged)
        clusters.sort(key=lambda cl: cl.members[0])
        k -= 1
        snapshots[k] = tuple(clusters)
        costs[k] = sum(cl.cost for cl in clusters)

    return _Trajectory(
        authors=c.authors,
        snapshots=snapshots,
        costs=costs,
        steps=tuple(steps),
        stop_k=stop_k if stop_k is not None else 1,
    )


@functools.lru_cache(maxsize=32)
def _trajectory(c: Collection, alpha: float) -> _Trajectory:
    if not c.sequences:
        raise EmptyCollection(f"no sequences in {c.role.value}/{c.stage.value}")
    return _build_trajectory(c, alpha)


def synopsize(c: Collection, k: int, alpha: float = 1.0) -> SynopsisResult:
    """Greedy agglomeration down to exactly k clusters with trimmed medoid
    patterns; see the module docstring for the objective."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    traj = _trajectory(c, alpha)
    n = len(traj.authors)
    if not 1 <= k <= n:
        raise KOutOfRange(f"k must be in [1, {n}], got {k}")
    clusters = tuple(
        SynopsisCluster(
            pattern=tuple(EventType(v) for v in cl.pattern),
            members=frozenset(traj.authors[m] for m in cl.members),
        )
        for cl in traj.snapshots[k]
    )
    return SynopsisResult(clusters=clusters, alpha=alpha, total_cost=traj.costs[k])


def max_pattern_count(c: Collection, alpha: float = 1.0) -> int:
    """Cluster count where greedy merging stops paying off: the first state
    in which every candidate merge would increase total_cost."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return _trajectory(c, alpha).stop_k
