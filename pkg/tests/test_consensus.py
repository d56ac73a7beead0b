"""Consensus matching vs exhaustive-permutation assignment oracle."""

from __future__ import annotations

import itertools
import random

import pytest

from writelens.consensus import consensus_partition, default_k, match_clusters
from writelens.errors import AuthorSetMismatch, KOutOfRange, NTooSmall
from writelens.hicluster import Partition
from writelens.ingest import AuthorId, Role
from writelens.synopsis import max_pattern_count

from .conftest import AS, NT, PS, W, WC, WE, make_collection


def authors(*teams: int) -> frozenset[AuthorId]:
    return frozenset(AuthorId(team=t, role=Role.NS) for t in teams)


def partition(*groups) -> Partition:
    return Partition(clusters=tuple(authors(*g) for g in groups))


def brute_force_overlap(a: Partition, b: Partition) -> int:
    """Oracle: maximum total overlap over every injective cluster mapping."""
    na, nb = len(a.clusters), len(b.clusters)
    best = 0
    if na <= nb:
        for perm in itertools.permutations(range(nb), na):
            best = max(
                best,
                sum(len(a.clusters[i] & b.clusters[j]) for i, j in enumerate(perm)),
            )
    else:
        for perm in itertools.permutations(range(na), nb):
            best = max(
                best,
                sum(len(a.clusters[i] & b.clusters[j]) for j, i in enumerate(perm)),
            )
    return best


def test_identical_partitions():
    a = partition((1, 2), (3, 4))
    b = partition((1, 2), (3, 4))
    pairs = match_clusters(a, b)
    assert [(o) for (_, _, o) in pairs] == [2, 2]
    assert sum(o for _, _, o in pairs) == 4


def test_spec_crossover_example():
    a = partition((1, 2, 3), (4, 5))
    b = partition((1, 2), (3, 4, 5))
    pairs = match_clusters(a, b)
    assert pairs == [(0, 0, 2), (1, 1, 2)]


def test_padding_rule():
    a = partition((1,), (2,), (3,))
    b = partition((1, 2, 3))
    pairs = match_clusters(a, b)
    assert len(pairs) == 1
    assert pairs[0][1] == 0
    assert pairs[0][2] == 1  # singleton overlaps the big cluster by one


def test_author_set_mismatch():
    with pytest.raises(AuthorSetMismatch):
        match_clusters(partition((1, 2)), partition((1, 3)))


def random_partition(rng: random.Random, teams: list[int], max_clusters: int) -> Partition:
    k = rng.randint(1, min(max_clusters, len(teams)))
    groups = [[] for _ in range(k)]
    for i, t in enumerate(teams):
        groups[i % k].append(t)
    rng.shuffle(teams)
    groups = [[] for _ in range(k)]
    for t in teams:
        groups[rng.randrange(k)].append(t)
    groups = [g for g in groups if g]
    return partition(*groups)


def test_assignment_optimality_randomized():
    rng = random.Random(37)
    for _ in range(100):
        teams = list(range(1, rng.randint(4, 10)))
        a = random_partition(rng, teams[:], 6)
        b = random_partition(rng, teams[:], 6)
        pairs = match_clusters(a, b)
        assert sum(o for _, _, o in pairs) == brute_force_overlap(a, b)


def test_swap_invariance_of_agreed_family():
    rng = random.Random(41)
    for _ in range(60):
        teams = list(range(1, rng.randint(4, 9)))
        a = random_partition(rng, teams[:], 4)
        b = random_partition(rng, teams[:], 4)
        ab = {
            frozenset(a.clusters[i] & b.clusters[j])
            for i, j, o in match_clusters(a, b)
            if o >= 2
        }
        ba = {
            frozenset(b.clusters[i] & a.clusters[j])
            for i, j, o in match_clusters(b, a)
            if o >= 2
        }
        assert ab == ba


FIXTURE = [
    [W, AS, W, AS, W, AS, W],
    [W, AS, W, AS, W],
    [AS, W, AS, W, AS],
    [WC, W, WC, W, WC, W, WC],
    [WC, W, WC, W, WC],
    [WC, WC, W, W, WC],
    [WE, PS, WE, PS, WE, PS],
    [WE, PS, WE, PS],
    [NT, NT, NT, NT, NT],
]

# Frozen random fixture with a known singleton profile: 3 singletons at K=2,
# none at K=3, so the default K search must return 3.
DISAGREEMENT_FIXTURE = [
    [WE, AS, AS, WE, W],
    [W, AS, W, W],
    [PS, NT],
    [WE, PS, WC, WE, WC, PS, WE, WC],
    [NT, AS, NT],
    [W, W, AS, W, PS],
    [NT, WE, PS, PS, NT, AS, PS, AS, WC],
    [AS, NT],
]


def test_consensus_full_agreement():
    c = make_collection([[W, AS, W]] * 3 + [[WC, WC, WC, WC]] * 3)
    result = consensus_partition(c, 2)
    assert len(result.clusters) == 2
    assert result.singletons == frozenset()
    sizes = sorted(len(cl.members) for cl in result.clusters)
    assert sizes == [3, 3]


def test_consensus_covers_collection():
    c = make_collection(FIXTURE)
    n_max = max_pattern_count(c)
    for k in range(2, n_max + 1):
        result = consensus_partition(c, k)
        clustered = set()
        for cl in result.clusters:
            assert len(cl.members) >= 2
            assert not clustered & cl.members
            clustered |= cl.members
        assert clustered | result.singletons == set(c.authors)
        assert not clustered & result.singletons


def test_agreed_clusters_subset_of_both_methods():
    from writelens.distance import distance_matrix
    from writelens.hicluster import agglomerate, cut
    from writelens.synopsis import synopsize

    c = make_collection(FIXTURE)
    k = 3
    result = consensus_partition(c, k)
    method_a = synopsize(c, k).partition()
    method_b = cut(agglomerate(distance_matrix(c, normalized=True)), k)
    for cl in result.clusters:
        assert any(cl.members <= cluster for cluster in method_a.clusters)
        assert any(cl.members <= cluster for cluster in method_b.clusters)


def test_consensus_k_out_of_range():
    c = make_collection(FIXTURE)
    n_max = max_pattern_count(c)
    with pytest.raises(KOutOfRange):
        consensus_partition(c, 1)
    with pytest.raises(KOutOfRange):
        consensus_partition(c, n_max + 1)


def test_consensus_pattern_comes_from_synopsis():
    from writelens.synopsis import synopsize

    c = make_collection(FIXTURE)
    result = consensus_partition(c, 2)
    syn = synopsize(c, 2)
    syn_patterns = {cl.pattern for cl in syn.clusters}
    for cl in result.clusters:
        assert cl.pattern in syn_patterns


def test_default_k_full_agreement_prefers_smallest():
    c = make_collection([[W, AS, W]] * 3 + [[WC, WC, WC, WC]] * 3)
    assert default_k(c) == 2


def test_default_k_minimizes_singletons():
    c = make_collection(DISAGREEMENT_FIXTURE)
    counts = {
        k: len(consensus_partition(c, k).singletons)
        for k in range(2, max_pattern_count(c) + 1)
    }
    assert counts[2] == 3
    assert counts[3] == 0
    assert default_k(c) == 3


def test_default_k_too_small():
    c = make_collection([[W, AS, W]] * 4)  # identical: only one pattern
    with pytest.raises(NTooSmall):
        default_k(c)
