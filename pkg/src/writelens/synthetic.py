"""Deterministic synthetic event logs for demos, fixtures, and scale tests.

Authors follow role-specific behavior archetypes (motif cycles with noise),
so the generated collections contain recoverable cluster structure without
resembling any particular real dataset.
"""

from __future__ import annotations

import random

from .ingest import (
    COLLABORATIVE_TURNS,
    AuthorId,
    Event,
    EventType,
    Role,
    serialize_event_log,
)

W = EventType.WRITING
NT = EventType.NOTE_TAKING
WC = EventType.WORDSMITH_CROSSLINGUAL
WE = EventType.WORDSMITH_ENGLISH
AS = EventType.ACTIVE_SEARCH
PS = EventType.PASSIVE_SEARCH

# (style name, motif cycle) per role and stage, assigned round-robin by team
# so every collection contains a few of each. Motifs are kept nearly
# symbol-disjoint across styles: that keeps behavior families separable at
# the default conciseness weight, and it keeps within-cluster common
# subsequences short enough for exact pattern mining.
INDIVIDUAL_STYLES = {
    Role.NS: [
        ("deep-writer", [W, W, W]),
        ("researcher", [AS, W, AS]),
        ("wordsmith", [WE, WE, W]),
    ],
    Role.NNS: [
        ("crosslingual", [WC, W, WC]),
        ("cross-searcher", [AS, WC, AS]),
        ("noter", [NT, W, NT]),
    ],
}
COLLABORATIVE_STYLES = {
    Role.NS: [
        ("editor", [WE, W, WE]),
        ("researcher", [AS, PS, AS]),
        ("deep-writer", [W, W, W]),
    ],
    Role.NNS: [
        ("crosslingual", [WC, W, WC]),
        ("reader", [PS, NT, PS]),
        ("cross-searcher", [AS, WC, AS]),
    ],
}

_ACTIVITY = {
    W: "On the shared document",
    NT: "Writing a note",
    WC: "Using translators to write",
    WE: "Checking a thesaurus",
    AS: "Searching for online information",
    PS: "Opening a URL to read information",
}

_DURATION_RANGES = {
    W: (60, 600),
    NT: (20, 120),
    WC: (20, 240),
    WE: (15, 120),
    AS: (30, 300),
    PS: (20, 180),
}


NOISE_RATE = 0.15


def _sequence(rng: random.Random, motif: list[EventType], length: int) -> list[EventType]:
    cats: list[EventType] = []
    while len(cats) < length:
        for sym in motif:
            if rng.random() < NOISE_RATE:
                sym = rng.choice(list(EventType))  # coding noise
            cats.append(sym)
            if len(cats) >= length:
                break
    return cats


def _events(rng: random.Random, cats: list[EventType], turn: int) -> list[Event]:
    events = []
    clock = 0.0
    for cat in cats:
        lo, hi = _DURATION_RANGES[cat]
        duration = float(rng.randint(lo, hi))
        events.append(
            Event(
                category=cat,
                activity_label=_ACTIVITY[cat],
                turn=turn,
                start_s=clock,
                end_s=clock + duration,
            )
        )
        clock += duration + float(rng.randint(1, 20))
    return events


def synthetic_events(
    teams: int = 27, seed: int = 7
) -> list[tuple[AuthorId, Event]]:
    """One individual turn plus two collaborative turns for every author of
    every team; fully determined by (teams, seed)."""
    log: list[tuple[AuthorId, Event]] = []
    for team in range(1, teams + 1):
        for role_idx, role in enumerate(Role):
            author = AuthorId(team=team, role=role)
            rng = random.Random(seed * 1_000_003 + team * 101 + role_idx)
            style_pick = (team + seed) % len(INDIVIDUAL_STYLES[role])
            _, ind_motif = INDIVIDUAL_STYLES[role][style_pick]
            _, collab_motif = COLLABORATIVE_STYLES[role][
                (team + seed + role_idx) % len(COLLABORATIVE_STYLES[role])
            ]
            ind_cats = _sequence(rng, ind_motif, rng.randint(6, 20))
            log.extend((author, e) for e in _events(rng, ind_cats, turn=0))
            for turn in COLLABORATIVE_TURNS[role]:
                collab_cats = _sequence(rng, collab_motif, rng.randint(6, 14))
                log.extend((author, e) for e in _events(rng, collab_cats, turn=turn))
    return log


def synthetic_csv(teams: int = 27, seed: int = 7) -> bytes:
    return serialize_event_log(synthetic_events(teams, seed), format="csv")
