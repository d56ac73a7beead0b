"""Derived analytics behind the panels: transition profiles (arc-diagram
data), similar-author recommendations, two-method scatter coordinates, and
the crossing-minimized comparison layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .distance import levenshtein, normalized_distance
from .errors import UnknownAuthor
from .ingest import AuthorId, BehaviorSequence, EventType, StageKind
from .patterns import mine_maximal, representative
from .session import SessionState, SINGLETONS

# Arc diagrams hide arcs leaving this category (events *preceding* writing
# are the interesting ones). Purely a display hint: profiles always contain
# every transition, and the API forwards the hint instead of deleting data.
ARC_HIDDEN_SOURCE = EventType.WRITING


@dataclass(frozen=True)
class TransitionEntry:
    source: EventType
    destination: EventType
    frequency: float


@dataclass(frozen=True)
class TransitionProfile:
    author: AuthorId
    stage: StageKind
    entries: tuple[TransitionEntry, ...]
    total_transitions: int


@dataclass(frozen=True)
class Recommendation:
    candidate: AuthorId
    score: float
    seq_term: float  # raw edit distance between the two sequences
    pattern_term: float  # raw edit distance between the two cluster patterns


@dataclass(frozen=True)
class ScatterPoint:
    other: AuthorId
    d1: float  # Method-I proxy: distance between cluster patterns
    d2: float  # Method-II: normalized sequence distance


@dataclass(frozen=True)
class ComparisonLayout:
    left_order: tuple[AuthorId, ...]
    right_order: tuple[AuthorId, ...]
    arrows: tuple[tuple[int, AuthorId, AuthorId], ...]  # (team, left, right)
    crossings: int


def transition_profile(s: BehaviorSequence) -> TransitionProfile:
    """Normalized first-order transition frequencies of one sequence.

    Every consecutive pair counts, self-transitions included; sequences
    shorter than two events yield an empty profile.
    """
    cats = s.categories
    counts: dict[tuple[EventType, EventType], int] = {}
    for src, dst in zip(cats, cats[1:]):
        counts[(src, dst)] = counts.get((src, dst), 0) + 1
    total = len(cats) - 1 if len(cats) >= 2 else 0
    entries = tuple(
        TransitionEntry(source=src, destination=dst, frequency=count / total)
        for (src, dst), count in sorted(counts.items())
    )
    return TransitionProfile(
        author=s.author, stage=s.stage, entries=entries, total_transitions=total
    )


def _sequence_of(state: SessionState, author: AuthorId) -> tuple[EventType, ...]:
    seq = state.collection.sequence_for(author)
    if seq is None:
        raise UnknownAuthor(f"{author} is not in session {state.id}")
    return seq.categories


def cluster_pattern(state: SessionState, author: AuthorId) -> tuple[EventType, ...]:
    """Display pattern of the author's current cluster.

    Consensus clusters carry their Method-I pattern; manual clusters fall
    back to the representative mined pattern of their members; a singleton
    stands alone, so its pattern is its own sequence.
    """
    location = state.location_of(author)
    if location == SINGLETONS:
        return _sequence_of(state, author)
    cluster = state.cluster_by_id(location)
    if cluster.pattern is not None:
        return cluster.pattern
    members = [state.collection.sequence_for(a) for a in sorted(cluster.members, key=lambda a: (a.team, a.role.value))]
    mined = mine_maximal([m for m in members if m is not None])
    return representative(mined).symbols


def recommend(
    query: AuthorId, state: SessionState, k: int = 5
) -> list[Recommendation]:
    """Top-k most similar authors outside the query's current cluster.

    score = lev(sequences) + lev(cluster patterns), both raw; ascending,
    ties broken by author order. May return fewer than k.
    """
    query_seq = _sequence_of(state, query)
    query_pattern = cluster_pattern(state, query)
    location = state.location_of(query)
    excluded = (
        state.cluster_by_id(location).members if location != SINGLETONS else {query}
    )
    results = []
    for index, other in enumerate(state.collection.authors):
        if other == query or other in excluded:
            continue
        seq_term = float(levenshtein(query_seq, _sequence_of(state, other)))
        pattern_term = float(
            levenshtein(query_pattern, cluster_pattern(state, other))
        )
        results.append(
            (
                seq_term + pattern_term,
                index,
                Recommendation(
                    candidate=other,
                    score=seq_term + pattern_term,
                    seq_term=seq_term,
                    pattern_term=pattern_term,
                ),
            )
        )
    results.sort(key=lambda r: (r[0], r[1]))
    return [rec for _, _, rec in results[:k]]


def scatter_coords(query: AuthorId, state: SessionState) -> list[ScatterPoint]:
    """One point per other author: x is the Method-I pattern-distance proxy
    (0 for same-cluster authors), y the normalized sequence distance. The
    query itself sits at the origin."""
    query_seq = _sequence_of(state, query)
    query_pattern = cluster_pattern(state, query)
    state.location_of(query)  # raises UnknownAuthor for strangers
    points = []
    for other in state.collection.authors:
        if other == query:
            continue
        points.append(
            ScatterPoint(
                other=other,
                d1=float(levenshtein(query_pattern, cluster_pattern(state, other))),
                d2=normalized_distance(query_seq, _sequence_of(state, other)),
            )
        )
    return points


def _count_crossings(
    left_order: Sequence[AuthorId], right_order: Sequence[AuthorId]
) -> int:
    left_pos = {a.team: i for i, a in enumerate(left_order)}
    right_pos = {a.team: i for i, a in enumerate(right_order)}
    spans = sorted(
        (left_pos[team], right_pos[team]) for team in left_pos if team in right_pos
    )
    crossings = 0
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            if spans[i][1] > spans[j][1]:
                crossings += 1
    return crossings


def _barycenter_pass(
    fixed_order: Sequence[AuthorId], blocks: list[list[AuthorId]]
) -> list[list[AuthorId]]:
    fixed_pos = {a.team: i for i, a in enumerate(fixed_order)}
    flat_pos = {a: i for i, a in enumerate(a for b in blocks for a in b)}
    sorted_blocks = []
    for block in blocks:
        centers = {
            a: float(fixed_pos.get(a.team, flat_pos[a])) for a in block
        }
        ordered = sorted(block, key=lambda a: (centers[a], flat_pos[a]))
        sorted_blocks.append((sum(centers.values()) / len(centers), ordered))
    sorted_blocks.sort(key=lambda pair: pair[0])
    return [block for _, block in sorted_blocks]


def comparison_layout(
    left_blocks: Sequence[Sequence[AuthorId]],
    right_blocks: Sequence[Sequence[AuthorId]],
    max_rounds: int = 10,
) -> ComparisonLayout:
    """Side-by-side author orders with same-team arrows, refined by
    alternating barycenter passes under the constraint that cluster blocks
    stay contiguous. Never worse than the initial block order."""
    left = [list(b) for b in left_blocks if b]
    right = [list(b) for b in right_blocks if b]

    def flat(blocks: list[list[AuthorId]]) -> tuple[AuthorId, ...]:
        return tuple(a for b in blocks for a in b)

    best_left, best_right = flat(left), flat(right)
    best_crossings = _count_crossings(best_left, best_right)
    for _ in range(max_rounds):
        right = _barycenter_pass(flat(left), right)
        left = _barycenter_pass(flat(right), left)
        crossings = _count_crossings(flat(left), flat(right))
        if crossings < best_crossings:
            best_left, best_right, best_crossings = flat(left), flat(right), crossings
        else:
            break

    left_teams = {a.team: a for a in best_left}
    right_teams = {a.team: a for a in best_right}
    arrows = tuple(
        (team, left_teams[team], right_teams[team])
        for team in sorted(left_teams)
        if team in right_teams
    )
    return ComparisonLayout(
        left_order=best_left,
        right_order=best_right,
        arrows=arrows,
        crossings=best_crossings,
    )
