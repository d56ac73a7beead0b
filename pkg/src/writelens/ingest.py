"""Event-log ingestion: domain types, parsing, sequence assembly, activity stats.

An event log is a flat table of coded writing-related events
(``team_id,author_role,turn,event_category,activity_label,start_s,end_s``).
Events are grouped into per-author behavior sequences by writing stage:
turn 0 is the individual stage; the collaborative stage concatenates an
author's collaborative turns (1 and 3 for NS, 2 and 4 for NNS) in turn order.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import statistics
from dataclasses import dataclass

from .errors import (
    EmptyCollection,
    MalformedRow,
    NegativeDuration,
    RoleTurnMismatch,
    UnknownCategory,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "team_id",
    "author_role",
    "turn",
    "event_category",
    "activity_label",
    "start_s",
    "end_s",
)


class EventType(enum.IntEnum):
    """The six coded behavior categories, in canonical order."""

    WRITING = 0
    NOTE_TAKING = 1
    WORDSMITH_CROSSLINGUAL = 2
    WORDSMITH_ENGLISH = 3
    ACTIVE_SEARCH = 4
    PASSIVE_SEARCH = 5

    @property
    def code(self) -> str:
        """Two-letter shorthand used in compact labels (W, NT, WC, WE, AS, PS)."""
        return _CODES[self]

    @property
    def label(self) -> str:
        """Category name as it appears in event-log files."""
        return _LABELS[self]

    @property
    def display(self) -> str:
        """Hyphenated human-readable name used in prompts and figures."""
        return _DISPLAY[self]

    @classmethod
    def from_label(cls, value: str) -> "EventType":
        try:
            return _BY_LABEL[value]
        except KeyError:
            raise UnknownCategory(value) from None


_CODES = {
    EventType.WRITING: "W",
    EventType.NOTE_TAKING: "NT",
    EventType.WORDSMITH_CROSSLINGUAL: "WC",
    EventType.WORDSMITH_ENGLISH: "WE",
    EventType.ACTIVE_SEARCH: "AS",
    EventType.PASSIVE_SEARCH: "PS",
}

_LABELS = {
    EventType.WRITING: "Writing",
    EventType.NOTE_TAKING: "NoteTaking",
    EventType.WORDSMITH_CROSSLINGUAL: "WordsmithCrosslingual",
    EventType.WORDSMITH_ENGLISH: "WordsmithEnglish",
    EventType.ACTIVE_SEARCH: "ActiveSearch",
    EventType.PASSIVE_SEARCH: "PassiveSearch",
}

_DISPLAY = {
    EventType.WRITING: "Writing",
    EventType.NOTE_TAKING: "Note-Taking",
    EventType.WORDSMITH_CROSSLINGUAL: "Wordsmith-Crosslingual",
    EventType.WORDSMITH_ENGLISH: "Wordsmith-English",
    EventType.ACTIVE_SEARCH: "Active-Search",
    EventType.PASSIVE_SEARCH: "Passive-Search",
}

_BY_LABEL = {label: et for et, label in _LABELS.items()}


class Role(enum.Enum):
    """Author linguistic background: native / non-native English speaker."""

    NS = "NS"
    NNS = "NNS"

    @classmethod
    def parse(cls, value: str) -> "Role":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown author role {value!r}") from None


class StageKind(enum.Enum):
    INDIVIDUAL = "individual"
    COLLABORATIVE = "collaborative"

    @classmethod
    def parse(cls, value: str) -> "StageKind":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(f"unknown stage {value!r}") from None


# Turn-taking protocol: turn 0 is written individually by both authors;
# the collaborative turns alternate NS (1, 3) and NNS (2, 4).
COLLABORATIVE_TURNS = {Role.NS: (1, 3), Role.NNS: (2, 4)}
VALID_TURNS = (0, 1, 2, 3, 4)


@dataclass(frozen=True, order=True)
class AuthorId:
    team: int
    role: Role

    def __str__(self) -> str:
        return f"{self.role.value}-{self.team}"

    @classmethod
    def parse(cls, value: str) -> "AuthorId":
        role_str, sep, team_str = value.partition("-")
        if not sep or not team_str.isdigit():
            raise ValueError(f"bad author id {value!r}, expected e.g. 'NS-3'")
        return cls(team=int(team_str), role=Role.parse(role_str))


@dataclass(frozen=True)
class Event:
    category: EventType
    activity_label: str
    turn: int
    start_s: float
    end_s: float

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class BehaviorSequence:
    """Ordered events of one author in one writing stage; the clustering unit."""

    author: AuthorId
    stage: StageKind
    events: tuple[Event, ...]

    @property
    def categories(self) -> tuple[EventType, ...]:
        return tuple(e.category for e in self.events)

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class Collection:
    """All behavior sequences sharing a (role, stage) pair, one per author."""

    role: Role
    stage: StageKind
    sequences: tuple[BehaviorSequence, ...]

    @property
    def authors(self) -> tuple[AuthorId, ...]:
        return tuple(s.author for s in self.sequences)

    def sequence_for(self, author: AuthorId) -> BehaviorSequence | None:
        for s in self.sequences:
            if s.author == author:
                return s
        return None

    def __len__(self) -> int:
        return len(self.sequences)


@dataclass(frozen=True)
class SequenceStats:
    min: int
    max: int
    mean: float
    std: float  # population formula (N divisor)


def _build_event(
    team_str: str,
    role_str: str,
    turn_str: str,
    category_str: str,
    activity_label: str,
    start_str: str,
    end_str: str,
    line: int,
) -> tuple[AuthorId, Event]:
    try:
        team = int(team_str)
        turn = int(turn_str)
        start_s = float(start_str)
        end_s = float(end_str)
    except (TypeError, ValueError):
        raise MalformedRow(line, "non-numeric team/turn/time field") from None
    if team <= 0:
        raise MalformedRow(line, f"team_id must be positive, got {team}")
    if turn not in VALID_TURNS:
        raise MalformedRow(line, f"turn must be 0-4, got {turn}")
    if start_s < 0:
        raise MalformedRow(line, f"start_s must be non-negative, got {start_s}")
    try:
        role = Role.parse(role_str)
    except ValueError as exc:
        raise MalformedRow(line, str(exc)) from None
    try:
        category = EventType.from_label(category_str)
    except UnknownCategory:
        raise UnknownCategory(category_str, line) from None
    if end_s < start_s:
        raise NegativeDuration(line)
    author = AuthorId(team=team, role=role)
    return author, Event(category, activity_label, turn, start_s, end_s)


def parse_event_log(data: bytes, format: str = "csv") -> list[tuple[AuthorId, Event]]:
    """Parse a raw CSV or JSON event log into validated (author, event) pairs.

    Raises MalformedRow / UnknownCategory / NegativeDuration with the
    offending 1-based line (CSV) or array position (JSON).
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedRow(0, "input is not valid UTF-8") from None
    if format == "csv":
        return _parse_csv(text)
    if format == "json":
        return _parse_json(text)
    raise ValueError(f"unknown format {format!r}, expected 'csv' or 'json'")


def _parse_csv(text: str) -> list[tuple[AuthorId, Event]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "empty file, header required") from None
    header = [h.strip() for h in header]
    if header != list(CSV_COLUMNS):
        raise MalformedRow(1, f"header must be {','.join(CSV_COLUMNS)}")
    out = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise MalformedRow(line, f"expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        out.append(_build_event(*row, line=line))
    return out


def _parse_json(text: str) -> list[tuple[AuthorId, Event]]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRow(exc.lineno, "invalid JSON") from None
    if not isinstance(payload, list):
        raise MalformedRow(1, "top-level JSON value must be an array")
    out = []
    for pos, obj in enumerate(payload, start=1):
        if not isinstance(obj, dict):
            raise MalformedRow(pos, "array entries must be objects")
        missing = [c for c in CSV_COLUMNS if c not in obj]
        if missing:
            raise MalformedRow(pos, f"missing fields: {', '.join(missing)}")
        out.append(
            _build_event(
                str(obj["team_id"]),
                str(obj["author_role"]),
                str(obj["turn"]),
                str(obj["event_category"]),
                str(obj["activity_label"]),
                str(obj["start_s"]),
                str(obj["end_s"]),
                line=pos,
            )
        )
    return out


def serialize_event_log(events: list[tuple[AuthorId, Event]], format: str = "csv") -> bytes:
    """Inverse of parse_event_log: parse(serialize(events)) == events."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for author, e in events:
            writer.writerow(
                [
                    author.team,
                    author.role.value,
                    e.turn,
                    e.category.label,
                    e.activity_label,
                    repr(e.start_s),
                    repr(e.end_s),
                ]
            )
        return buf.getvalue().encode("utf-8")
    if format == "json":
        rows = [
            {
                "team_id": author.team,
                "author_role": author.role.value,
                "turn": e.turn,
                "event_category": e.category.label,
                "activity_label": e.activity_label,
                "start_s": e.start_s,
                "end_s": e.end_s,
            }
            for author, e in events
        ]
        return json.dumps(rows, indent=2).encode("utf-8")
    raise ValueError(f"unknown format {format!r}, expected 'csv' or 'json'")


def _event_sort_key(e: Event) -> tuple:
    # Stable order inside a stage: turn, then onset; ties by end then category.
    return (e.turn, e.start_s, e.end_s, int(e.category))


def _warn_overlaps(author: AuthorId, events: list[Event]) -> None:
    by_turn: dict[int, list[Event]] = {}
    for e in events:
        by_turn.setdefault(e.turn, []).append(e)
    for turn, turn_events in by_turn.items():
        turn_events.sort(key=_event_sort_key)
        overlaps = sum(
            1
            for prev, cur in zip(turn_events, turn_events[1:])
            if cur.start_s < prev.end_s
        )
        if overlaps:
            logger.warning(
                "%s turn %d: %d overlapping event pair(s); keeping start-time order",
                author,
                turn,
                overlaps,
            )


def assemble_collections(
    events: list[tuple[AuthorId, Event]],
) -> dict[tuple[Role, StageKind], Collection]:
    """Group validated events into the four (role, stage) collections.

    Turn-0 events form individual sequences; collaborative turns are
    concatenated in (turn, start time) order. Authors with no events in a
    stage are omitted from that collection. Input row order is irrelevant.
    """
    per_author: dict[AuthorId, list[Event]] = {}
    for author, event in events:
        if event.turn != 0 and event.turn not in COLLABORATIVE_TURNS[author.role]:
            raise RoleTurnMismatch(
                f"{author} cannot act in turn {event.turn}; "
                f"{author.role.value} writes in turns {COLLABORATIVE_TURNS[author.role]}"
            )
        per_author.setdefault(author, []).append(event)

    stage_events: dict[tuple[Role, StageKind], dict[AuthorId, list[Event]]] = {
        (role, stage): {} for role in Role for stage in StageKind
    }
    for author, author_events in per_author.items():
        _warn_overlaps(author, author_events)
        individual = sorted(
            (e for e in author_events if e.turn == 0), key=_event_sort_key
        )
        collaborative = sorted(
            (e for e in author_events if e.turn != 0), key=_event_sort_key
        )
        if individual:
            stage_events[(author.role, StageKind.INDIVIDUAL)][author] = individual
        if collaborative:
            stage_events[(author.role, StageKind.COLLABORATIVE)][author] = collaborative

    collections = {}
    for (role, stage), by_author in stage_events.items():
        sequences = tuple(
            BehaviorSequence(author=author, stage=stage, events=tuple(evts))
            for author, evts in sorted(by_author.items(), key=lambda kv: kv[0].team)
        )
        collections[(role, stage)] = Collection(role=role, stage=stage, sequences=sequences)
    return collections


@dataclass(frozen=True)
class ActivityCell:
    duration_h: float
    duration_pct: float
    count: int
    count_pct: float


def activity_table(
    collections: list[Collection],
) -> dict[Role, dict[EventType, ActivityCell]]:
    """Per-role duration (hours) and frequency of each category, with column
    percentages that each sum to 100 (up to rounding) over the six categories.
    """
    totals: dict[Role, dict[EventType, list[float]]] = {}
    for c in collections:
        role_totals = totals.setdefault(
            c.role, {et: [0.0, 0] for et in EventType}
        )
        for seq in c.sequences:
            for e in seq.events:
                cell = role_totals[e.category]
                cell[0] += e.duration_s
                cell[1] += 1

    table: dict[Role, dict[EventType, ActivityCell]] = {}
    for role, role_totals in totals.items():
        total_duration = sum(v[0] for v in role_totals.values())
        total_count = sum(v[1] for v in role_totals.values())
        table[role] = {
            et: ActivityCell(
                duration_h=duration / 3600.0,
                duration_pct=100.0 * duration / total_duration if total_duration else 0.0,
                count=int(count),
                count_pct=100.0 * count / total_count if total_count else 0.0,
            )
            for et, (duration, count) in role_totals.items()
        }
    return table


def sequence_stats(c: Collection) -> SequenceStats:
    """Min/max/mean and population standard deviation of event counts."""
    if not c.sequences:
        raise EmptyCollection(f"no sequences in {c.role.value}/{c.stage.value}")
    lengths = [len(s) for s in c.sequences]
    return SequenceStats(
        min=min(lengths),
        max=max(lengths),
        mean=statistics.fmean(lengths),
        std=statistics.pstdev(lengths),
    )
