"""Static report figures rendered with matplotlib (Agg, file output only).

The category palette here is the single source of truth for engine-side
rendering; the studio frontend mirrors the same hex values in its
constants module.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Arc, Rectangle

from .consensus import ConsensusResult
from .ingest import ActivityCell, Collection, EventType, Role, sequence_stats
from .insight import ARC_HIDDEN_SOURCE, ScatterPoint, TransitionProfile

PALETTE = {
    EventType.WRITING: "#4C78A8",
    EventType.NOTE_TAKING: "#F58518",
    EventType.WORDSMITH_CROSSLINGUAL: "#E45756",
    EventType.WORDSMITH_ENGLISH: "#72B7B2",
    EventType.ACTIVE_SEARCH: "#54A24B",
    EventType.PASSIVE_SEARCH: "#B279A2",
}


def _legend_handles():
    return [
        Rectangle((0, 0), 1, 1, facecolor=PALETTE[et], label=et.display)
        for et in EventType
    ]


def save_sequence_overview(c: Collection, path: Path) -> Path:
    """One row per author; rectangles are events, width is duration."""
    rows = len(c.sequences)
    fig, ax = plt.subplots(figsize=(10, max(2.0, 0.32 * rows + 1.2)))
    for y, seq in enumerate(c.sequences):
        offset = 0.0
        for event in seq.events:
            width = max(event.duration_s, 1.0)
            ax.add_patch(
                Rectangle(
                    (offset, rows - 1 - y),
                    width,
                    0.8,
                    facecolor=PALETTE[event.category],
                    edgecolor="none",
                )
            )
            offset += width
    ax.set_yticks([rows - 1 - y + 0.4 for y in range(rows)])
    ax.set_yticklabels([str(seq.author) for seq in c.sequences], fontsize=7)
    ax.set_xlabel("seconds (stacked event durations)")
    ax.set_title(f"{c.role.value} {c.stage.value} behavior sequences")
    ax.autoscale()
    ax.legend(handles=_legend_handles(), fontsize=6, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_cluster_overview(c: Collection, result: ConsensusResult, path: Path) -> Path:
    """Consensus clusters as rows of pattern circles plus member lists."""
    rows = len(result.clusters) + (1 if result.singletons else 0)
    fig, ax = plt.subplots(figsize=(10, max(2.0, 0.6 * rows + 1.0)))
    y = rows - 1
    for i, cluster in enumerate(result.clusters):
        for x, symbol in enumerate(cluster.pattern):
            ax.scatter([x], [y], s=120, color=PALETTE[symbol], zorder=3)
        members = ", ".join(sorted(str(a) for a in cluster.members))
        ax.text(
            len(cluster.pattern) + 0.5,
            y,
            f"[{len(cluster.members)}] {members}",
            va="center",
            fontsize=7,
        )
        ax.text(-0.8, y, f"#{i}", va="center", fontsize=8)
        y -= 1
    if result.singletons:
        singles = ", ".join(sorted(str(a) for a in result.singletons))
        ax.text(-0.8, y, f"unclustered: {singles}", va="center", fontsize=7)
    ax.set_xlim(-1.5, 30)
    ax.set_ylim(-0.8, rows)
    ax.axis("off")
    ax.set_title(
        f"{c.role.value} {c.stage.value}: consensus clusters at K={result.k}"
    )
    ax.legend(handles=_legend_handles(), fontsize=6, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_transition_arcs(
    profile: TransitionProfile, path: Path, hide_writing_sources: bool = True
) -> Path:
    """Arc diagram: the six categories on a baseline, arc width = frequency.

    Writing-sourced arcs are hidden by default (display rule); pass
    hide_writing_sources=False to draw everything.
    """
    fig, ax = plt.subplots(figsize=(7, 3.2))
    positions = {et: float(i) for i, et in enumerate(EventType)}
    for et, x in positions.items():
        ax.scatter([x], [0], s=320, color=PALETTE[et], zorder=3)
        ax.text(x, -0.28, et.code, ha="center", fontsize=8)
    for entry in profile.entries:
        if hide_writing_sources and entry.source is ARC_HIDDEN_SOURCE:
            continue
        x1, x2 = positions[entry.source], positions[entry.destination]
        if x1 == x2:  # self transition: small loop above the node
            ax.add_patch(
                Arc(
                    (x1, 0.12),
                    0.3,
                    0.3,
                    theta1=0,
                    theta2=360,
                    linewidth=0.5 + 6 * entry.frequency,
                    color=PALETTE[entry.source],
                    alpha=0.7,
                )
            )
            continue
        center = ((x1 + x2) / 2, 0.0)
        width = abs(x2 - x1)
        ax.add_patch(
            Arc(
                center,
                width,
                width * 0.8,
                theta1=0,
                theta2=180,
                linewidth=0.5 + 6 * entry.frequency,
                color=PALETTE[entry.source],
                alpha=0.7,
            )
        )
    ax.set_xlim(-0.7, len(EventType) - 0.3)
    ax.set_ylim(-0.6, 2.6)
    ax.axis("off")
    ax.set_title(
        f"{profile.author} {profile.stage.value} transitions "
        f"(n={profile.total_transitions})",
        fontsize=9,
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_scatter(
    query: str, points: list[ScatterPoint], path: Path
) -> Path:
    """Pairwise-distance scatter with the query author at the origin."""
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter([0], [0], color="#D62728", marker="*", s=160, zorder=3, label=query)
    xs = [p.d1 for p in points]
    ys = [p.d2 for p in points]
    ax.scatter(xs, ys, color="#4C78A8", s=30, alpha=0.8)
    for p in points:
        ax.annotate(str(p.other), (p.d1, p.d2), fontsize=6, alpha=0.7)
    ax.set_xlabel("pattern distance (method I proxy)")
    ax.set_ylabel("normalized sequence distance (method II)")
    ax.set_title(f"distances from {query}", fontsize=10)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_activity_csv(
    table: dict[Role, dict[EventType, ActivityCell]], path: Path
) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["role", "category", "duration_h", "duration_pct", "count", "count_pct"]
        )
        for role in sorted(table, key=lambda r: r.value):
            for et in EventType:
                cell = table[role][et]
                writer.writerow(
                    [
                        role.value,
                        et.label,
                        f"{cell.duration_h:.4f}",
                        f"{cell.duration_pct:.2f}",
                        cell.count,
                        f"{cell.count_pct:.2f}",
                    ]
                )
    return path


def write_stats_csv(collections: list[Collection], path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["role", "stage", "n_authors", "min", "max", "mean", "std"])
        for c in collections:
            if not c.sequences:
                continue
            stats = sequence_stats(c)
            writer.writerow(
                [
                    c.role.value,
                    c.stage.value,
                    len(c),
                    stats.min,
                    stats.max,
                    f"{stats.mean:.4f}",
                    f"{stats.std:.4f}",
                ]
            )
    return path
