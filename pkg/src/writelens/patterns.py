"""Maximal sequential pattern mining within a cluster (Method II summaries).

A pattern is contained in a sequence as a gapped subsequence; support counts
each sequence at most once. A frequent pattern is maximal when it is not a
gapped subsequence of another frequent pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyCluster, NoPatterns
from .ingest import BehaviorSequence, EventType

ALPHABET = tuple(EventType)


@dataclass(frozen=True)
class Pattern:
    symbols: tuple[EventType, ...]
    support: int


def is_subsequence(small: Sequence, big: Sequence) -> bool:
    """Gapped-subsequence containment (greedy two-pointer scan)."""
    it = iter(big)
    return all(any(x == y for y in it) for x in small)


def _next_tables(seq: tuple[EventType, ...]) -> list[list[int]]:
    # nxt[i][sym] = smallest j >= i with seq[j] == sym, else len(seq)
    n = len(seq)
    nxt = [[n] * len(ALPHABET) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = nxt[i + 1][:]
        row[int(seq[i])] = i
        nxt[i] = row
    return nxt


def mine_frequent(
    sequences: list[tuple[EventType, ...]], threshold: int
) -> list[tuple[tuple[EventType, ...], int]]:
    """All gapped-subsequence patterns contained in >= threshold sequences.

    Depth-first extension over the six-symbol alphabet; each search state
    keeps, per containing sequence, the position just after the earliest
    match, so extension support checks are a single table lookup.
    """
    tables = [_next_tables(s) for s in sequences]
    lengths = [len(s) for s in sequences]
    found: list[tuple[tuple[EventType, ...], int]] = []

    def extend(prefix: tuple[EventType, ...], occupancy: list[tuple[int, int]]):
        for sym in ALPHABET:
            advanced = []
            for si, pos in occupancy:
                j = tables[si][pos][int(sym)]
                if j < lengths[si]:
                    advanced.append((si, j + 1))
            if len(advanced) >= threshold:
                pattern = prefix + (sym,)
                found.append((pattern, len(advanced)))
                extend(pattern, advanced)

    extend((), [(si, 0) for si in range(len(sequences))])
    return found


def mine_maximal(
    cluster: Sequence[BehaviorSequence], min_support: float = 0.5
) -> list[Pattern]:
    """Frequent maximal patterns of a cluster at the given support fraction.

    Returns patterns sorted by support desc, length desc, then canonical
    symbol order, so the representative is always first.
    """
    if not cluster:
        raise EmptyCluster("cannot mine an empty cluster")
    if not 0 < min_support <= 1:
        raise ValueError(f"min_support must be in (0, 1], got {min_support}")
    sequences = [s.categories for s in cluster]
    threshold = math.ceil(round(min_support * len(sequences), 9))
    if threshold == 1:
        # Every subsequence of any member is frequent, so the maximal ones
        # are exactly the member sequences themselves (minus subsumed
        # duplicates). Short-circuiting avoids enumerating the exponential
        # subsequence space of long sequences.
        candidates = sorted(set(sequences), key=lambda s: (-len(s), s))
        maximal = []
        for symbols in candidates:
            if not symbols:
                continue
            if any(is_subsequence(symbols, kept.symbols) for kept in maximal):
                continue
            support = sum(1 for s in sequences if is_subsequence(symbols, s))
            maximal.append(Pattern(symbols=symbols, support=support))
        maximal.sort(key=lambda p: (-p.support, -len(p.symbols), p.symbols))
        return maximal
    frequent = mine_frequent(sequences, threshold)

    # Keep only maximal patterns: longest-first, reject anything subsumed by
    # an already accepted pattern.
    frequent.sort(key=lambda ps: (-len(ps[0]), ps[0]))
    maximal: list[Pattern] = []
    for symbols, support in frequent:
        if any(is_subsequence(symbols, kept.symbols) for kept in maximal):
            continue
        maximal.append(Pattern(symbols=symbols, support=support))
    maximal.sort(key=lambda p: (-p.support, -len(p.symbols), p.symbols))
    return maximal


def representative(patterns: Sequence[Pattern]) -> Pattern:
    """Maximum support, then maximum length, then smallest in canonical
    symbol order."""
    if not patterns:
        raise NoPatterns("no patterns to choose a representative from")
    return min(patterns, key=lambda p: (-p.support, -len(p.symbols), p.symbols))
