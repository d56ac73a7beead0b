"""Shared fixture builders for hand-constructed collections and sessions."""

from __future__ import annotations

import pytest

from writelens.ingest import (
    AuthorId,
    BehaviorSequence,
    Collection,
    Event,
    EventType,
    Role,
    StageKind,
)

W = EventType.WRITING
NT = EventType.NOTE_TAKING
WC = EventType.WORDSMITH_CROSSLINGUAL
WE = EventType.WORDSMITH_ENGLISH
AS = EventType.ACTIVE_SEARCH
PS = EventType.PASSIVE_SEARCH


def make_sequence(
    team: int,
    cats: list[EventType],
    role: Role = Role.NS,
    stage: StageKind = StageKind.INDIVIDUAL,
    duration: float = 60.0,
) -> BehaviorSequence:
    turn = 0 if stage is StageKind.INDIVIDUAL else (1 if role is Role.NS else 2)
    events = tuple(
        Event(
            category=cat,
            activity_label=cat.label,
            turn=turn,
            start_s=i * duration,
            end_s=(i + 1) * duration,
        )
        for i, cat in enumerate(cats)
    )
    return BehaviorSequence(author=AuthorId(team=team, role=role), stage=stage, events=events)


def make_collection(
    cat_lists: list[list[EventType]],
    role: Role = Role.NS,
    stage: StageKind = StageKind.INDIVIDUAL,
) -> Collection:
    sequences = tuple(
        make_sequence(team, cats, role=role, stage=stage)
        for team, cats in enumerate(cat_lists, start=1)
    )
    return Collection(role=role, stage=stage, sequences=sequences)


@pytest.fixture
def tiny_collection() -> Collection:
    return make_collection([[W, AS, W], [W, AS, W], [WC, W]])
