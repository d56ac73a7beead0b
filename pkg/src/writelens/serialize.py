"""JSON views of engine results, shared by the CLI and the HTTP service.

Field order and collection ordering are deterministic so CLI output can be
compared byte-for-byte against golden files.
"""

from __future__ import annotations

from .consensus import ConsensusResult
from .ingest import (
    ActivityCell,
    AuthorId,
    Collection,
    EventType,
    Role,
    SequenceStats,
    StageKind,
)
from .insight import (
    ARC_HIDDEN_SOURCE,
    ComparisonLayout,
    Recommendation,
    ScatterPoint,
    TransitionProfile,
)
from .patterns import Pattern
from .session import SessionState
from .summarize import Summary

DISPLAY_HINT = {"hide_arcs_from_source": ARC_HIDDEN_SOURCE.label}


def author_json(a: AuthorId) -> str:
    return str(a)


def authors_json(authors) -> list[str]:
    return sorted(str(a) for a in authors)


def pattern_symbols_json(symbols: tuple[EventType, ...]) -> list[str]:
    return [s.label for s in symbols]


def collection_key(c: Collection) -> str:
    return f"{c.role.value}-{c.stage.value}"


def consensus_json(c: Collection, result: ConsensusResult, k_max: int) -> dict:
    return {
        "role": c.role.value,
        "stage": c.stage.value,
        "n_authors": len(c),
        "k": result.k,
        "k_max": k_max,
        "clusters": [
            {
                "members": authors_json(cl.members),
                "size": len(cl.members),
                "pattern": pattern_symbols_json(cl.pattern),
            }
            for cl in result.clusters
        ],
        "singletons": authors_json(result.singletons),
    }


def patterns_json(patterns: list[Pattern]) -> list[dict]:
    return [
        {"symbols": pattern_symbols_json(p.symbols), "support": p.support}
        for p in patterns
    ]


def profile_json(profile: TransitionProfile) -> dict:
    return {
        "author": str(profile.author),
        "stage": profile.stage.value,
        "total_transitions": profile.total_transitions,
        "entries": [
            {
                "source": e.source.label,
                "destination": e.destination.label,
                "frequency": round(e.frequency, 6),
            }
            for e in profile.entries
        ],
        "display_hint": DISPLAY_HINT,
    }


def summary_json(summary: Summary) -> dict:
    return {
        "cluster": summary.cluster_id,
        "name": summary.name,
        "description": summary.description,
        "source": summary.source,
        "model_id": summary.model_id,
    }


def activity_json(table: dict[Role, dict[EventType, ActivityCell]]) -> dict:
    return {
        role.value: {
            et.label: {
                "duration_h": round(cell.duration_h, 4),
                "duration_pct": round(cell.duration_pct, 2),
                "count": cell.count,
                "count_pct": round(cell.count_pct, 2),
            }
            for et, cell in sorted(cells.items())
        }
        for role, cells in sorted(table.items(), key=lambda kv: kv[0].value)
    }


def stats_json(stats: SequenceStats) -> dict:
    return {
        "min": stats.min,
        "max": stats.max,
        "mean": round(stats.mean, 4),
        "std": round(stats.std, 4),
    }


def recommendations_json(recs: list[Recommendation]) -> list[dict]:
    return [
        {
            "candidate": str(r.candidate),
            "score": round(r.score, 6),
            "seq_term": round(r.seq_term, 6),
            "pattern_term": round(r.pattern_term, 6),
        }
        for r in recs
    ]


def scatter_json(points: list[ScatterPoint]) -> list[dict]:
    return [
        {"other": str(p.other), "d1": round(p.d1, 6), "d2": round(p.d2, 6)}
        for p in points
    ]


def comparison_json(layout: ComparisonLayout) -> dict:
    return {
        "left_order": [str(a) for a in layout.left_order],
        "right_order": [str(a) for a in layout.right_order],
        "arrows": [
            {"team": team, "left": str(left), "right": str(right)}
            for team, left, right in layout.arrows
        ],
        "crossings": layout.crossings,
    }


def session_json(state: SessionState) -> dict:
    return {
        "id": state.id,
        "dataset_id": state.dataset_id,
        "role": state.collection.role.value,
        "stage": state.collection.stage.value,
        "k": state.k,
        "k_max": state.k_max,
        "clusters": [
            {
                "id": cl.id,
                "members": authors_json(cl.members),
                "pattern": (
                    pattern_symbols_json(cl.pattern) if cl.pattern is not None else None
                ),
                "provenance": cl.provenance,
                "name": cl.name,
                "description": cl.description,
                "summary_source": cl.summary_source,
                "summary_model": cl.summary_model,
            }
            for cl in state.clusters
        ],
        "singletons": authors_json(state.singletons),
        "edit_count": len(state.edit_log),
    }


def parse_stage(value: str) -> StageKind:
    return StageKind.parse(value)


def parse_selection(value: str) -> tuple[Role, StageKind]:
    """Parse a collection selection like 'NS-individual'."""
    role_str, sep, stage_str = value.partition("-")
    if not sep:
        raise ValueError(f"bad selection {value!r}, expected e.g. 'NS-individual'")
    return Role.parse(role_str), StageKind.parse(stage_str)
