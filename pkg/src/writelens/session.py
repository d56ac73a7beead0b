"""Editable clustering sessions: K slider, drag-and-drop moves, cluster
management, summaries, persistence.

States are immutable; every operation returns a new state with the edit
appended to the log. Applying an edit is a pure function of (state, edit),
so replaying the log over a fresh init reproduces any state exactly, and
undo is implemented as replay-without-the-last-edit. Manual placements
(clusters touched by hand, authors dropped into the singleton area) survive
K changes; recomputed auto clusters never steal manually placed authors.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

from .consensus import consensus_partition, default_k
from .errors import (
    BadEdit,
    CorruptFile,
    KOutOfRange,
    SchemaVersionMismatch,
    UnknownAuthor,
    UnknownCluster,
)
from .ingest import AuthorId, Collection, EventType
from .synopsis import max_pattern_count

SCHEMA_VERSION = 1
SINGLETONS = "singletons"  # move_author target denoting the unclustered area

EDIT_KINDS = (
    "SetK",
    "MoveAuthor",
    "AddCluster",
    "DeleteCluster",
    "EditText",
    "RegenerateSummary",
)


@dataclass(frozen=True)
class Edit:
    kind: str
    payload: dict
    timestamp: float


@dataclass(frozen=True)
class Cluster:
    id: str
    members: frozenset[AuthorId]
    pattern: tuple[EventType, ...] | None
    provenance: str  # "auto" | "manual"
    name: str | None = None
    description: str | None = None
    summary_source: str | None = None  # "llm" | "fallback" | "manual"
    summary_model: str | None = None


@dataclass(frozen=True)
class SessionState:
    id: str
    dataset_id: str | None
    collection: Collection
    k: int
    k_max: int
    clusters: tuple[Cluster, ...]
    singletons: frozenset[AuthorId]
    manual_singletons: frozenset[AuthorId]
    next_cluster_seq: int
    edit_log: tuple[Edit, ...] = field(default=())

    def cluster_by_id(self, cluster_id: str) -> Cluster:
        for cl in self.clusters:
            if cl.id == cluster_id:
                return cl
        raise UnknownCluster(f"no cluster {cluster_id!r} in session {self.id}")

    def location_of(self, author: AuthorId) -> str:
        """Cluster id containing the author, or SINGLETONS."""
        for cl in self.clusters:
            if author in cl.members:
                return cl.id
        if author in self.singletons:
            return SINGLETONS
        raise UnknownAuthor(f"{author} is not in session {self.id}")


def _check_conservation(state: SessionState) -> SessionState:
    placed: set[AuthorId] = set(state.singletons)
    total = len(state.singletons)
    for cl in state.clusters:
        placed |= cl.members
        total += len(cl.members)
    expected = set(state.collection.authors)
    if placed != expected or total != len(expected):
        raise AssertionError(
            f"membership conservation violated in session {state.id}"
        )
    return state


def init_session(
    c: Collection, session_id: str, dataset_id: str | None = None
) -> SessionState:
    """Fresh session pre-populated with the consensus clustering at the
    default K; disagreements appear as singletons."""
    k = default_k(c)
    result = consensus_partition(c, k)
    clusters = tuple(
        Cluster(
            id=f"c{i}",
            members=cl.members,
            pattern=cl.pattern,
            provenance="auto",
        )
        for i, cl in enumerate(result.clusters)
    )
    state = SessionState(
        id=session_id,
        dataset_id=dataset_id,
        collection=c,
        k=k,
        k_max=max_pattern_count(c),
        clusters=clusters,
        singletons=result.singletons,
        manual_singletons=frozenset(),
        next_cluster_seq=len(clusters),
    )
    return _check_conservation(state)


def _log(state: SessionState, edit: Edit) -> SessionState:
    return replace(state, edit_log=state.edit_log + (edit,))


def _apply_set_k(state: SessionState, payload: dict) -> SessionState:
    k = payload["k"]
    if not isinstance(k, int) or not 2 <= k <= state.k_max:
        raise KOutOfRange(f"k must be in [2, {state.k_max}], got {k}")
    result = consensus_partition(state.collection, k)
    manual_clusters = [cl for cl in state.clusters if cl.provenance == "manual"]
    pinned: set[AuthorId] = set(state.manual_singletons)
    for cl in manual_clusters:
        pinned |= cl.members
    new_clusters = list(manual_clusters)
    seq = state.next_cluster_seq
    for cl in result.clusters:
        remaining = cl.members - pinned
        if remaining:
            new_clusters.append(
                Cluster(
                    id=f"c{seq}",
                    members=frozenset(remaining),
                    pattern=cl.pattern,
                    provenance="auto",
                )
            )
            seq += 1
    singletons = (result.singletons - pinned) | state.manual_singletons
    return replace(
        state,
        k=k,
        clusters=tuple(new_clusters),
        singletons=frozenset(singletons),
        next_cluster_seq=seq,
    )


def _apply_move_author(state: SessionState, payload: dict) -> SessionState:
    try:
        author = AuthorId.parse(payload["author"])
    except ValueError as exc:
        raise UnknownAuthor(str(exc)) from None
    target = payload["target"]
    source = state.location_of(author)
    if target != SINGLETONS:
        state.cluster_by_id(target)  # existence check
    if target == source:
        return state  # no-op move; the edit is still recorded

    clusters = []
    for cl in state.clusters:
        if cl.id == source:
            remaining = cl.members - {author}
            if not remaining:
                continue  # emptied source clusters are deleted
            cl = replace(cl, members=remaining)
        if cl.id == target:
            cl = replace(cl, members=cl.members | {author}, provenance="manual")
        clusters.append(cl)
    singletons = set(state.singletons)
    manual_singletons = set(state.manual_singletons)
    singletons.discard(author)
    manual_singletons.discard(author)
    if target == SINGLETONS:
        singletons.add(author)
        manual_singletons.add(author)
    return replace(
        state,
        clusters=tuple(clusters),
        singletons=frozenset(singletons),
        manual_singletons=frozenset(manual_singletons),
    )


def _apply_add_cluster(state: SessionState, payload: dict) -> SessionState:
    cluster = Cluster(
        id=f"c{state.next_cluster_seq}",
        members=frozenset(),
        pattern=None,
        provenance="manual",
        name=payload.get("name"),
    )
    return replace(
        state,
        clusters=state.clusters + (cluster,),
        next_cluster_seq=state.next_cluster_seq + 1,
    )


def _apply_delete_cluster(state: SessionState, payload: dict) -> SessionState:
    cluster = state.cluster_by_id(payload["cluster"])
    clusters = tuple(cl for cl in state.clusters if cl.id != cluster.id)
    # Members fall back to the unclustered area, unpinned: a later SetK may
    # re-cluster them automatically.
    return replace(
        state,
        clusters=clusters,
        singletons=state.singletons | cluster.members,
        manual_singletons=state.manual_singletons - cluster.members,
    )


def _apply_edit_text(state: SessionState, payload: dict) -> SessionState:
    cluster = state.cluster_by_id(payload["cluster"])
    updated = replace(
        cluster,
        name=payload["name"] if payload.get("name") is not None else cluster.name,
        description=(
            payload["description"]
            if payload.get("description") is not None
            else cluster.description
        ),
        summary_source="manual",
    )
    clusters = tuple(updated if cl.id == cluster.id else cl for cl in state.clusters)
    return replace(state, clusters=clusters)


def _apply_regenerate_summary(state: SessionState, payload: dict) -> SessionState:
    # The generated text travels in the payload so replay never re-calls a
    # (non-deterministic) generation backend.
    cluster = state.cluster_by_id(payload["cluster"])
    updated = replace(
        cluster,
        name=payload["name"],
        description=payload["description"],
        summary_source=payload["source"],
        summary_model=payload.get("model_id"),
    )
    clusters = tuple(updated if cl.id == cluster.id else cl for cl in state.clusters)
    return replace(state, clusters=clusters)


_APPLIERS = {
    "SetK": _apply_set_k,
    "MoveAuthor": _apply_move_author,
    "AddCluster": _apply_add_cluster,
    "DeleteCluster": _apply_delete_cluster,
    "EditText": _apply_edit_text,
    "RegenerateSummary": _apply_regenerate_summary,
}


def apply_edit(state: SessionState, edit: Edit) -> SessionState:
    if edit.kind not in _APPLIERS:
        raise BadEdit(f"unknown edit kind {edit.kind!r}")
    try:
        new_state = _APPLIERS[edit.kind](state, edit.payload)
    except KeyError as exc:
        raise BadEdit(f"edit payload missing field {exc}") from None
    return _check_conservation(_log(new_state, edit))


def _edit(kind: str, payload: dict) -> Edit:
    return Edit(kind=kind, payload=payload, timestamp=time.time())


def set_k(state: SessionState, k: int) -> SessionState:
    return apply_edit(state, _edit("SetK", {"k": k}))


def move_author(state: SessionState, author: AuthorId, target: str) -> SessionState:
    return apply_edit(
        state, _edit("MoveAuthor", {"author": str(author), "target": target})
    )


def add_cluster(state: SessionState, name: str | None = None) -> SessionState:
    """The new cluster is appended, i.e. state.clusters[-1]."""
    return apply_edit(state, _edit("AddCluster", {"name": name}))


def delete_cluster(state: SessionState, cluster_id: str) -> SessionState:
    return apply_edit(state, _edit("DeleteCluster", {"cluster": cluster_id}))


def edit_text(
    state: SessionState,
    cluster_id: str,
    name: str | None = None,
    description: str | None = None,
) -> SessionState:
    return apply_edit(
        state,
        _edit("EditText", {"cluster": cluster_id, "name": name, "description": description}),
    )


def apply_summary(
    state: SessionState,
    cluster_id: str,
    name: str,
    description: str,
    source: str,
    model_id: str | None = None,
) -> SessionState:
    return apply_edit(
        state,
        _edit(
            "RegenerateSummary",
            {
                "cluster": cluster_id,
                "name": name,
                "description": description,
                "source": source,
                "model_id": model_id,
            },
        ),
    )


def replay(
    c: Collection,
    session_id: str,
    dataset_id: str | None,
    edits: tuple[Edit, ...],
) -> SessionState:
    state = init_session(c, session_id, dataset_id)
    for edit in edits:
        state = apply_edit(state, edit)
    return state


def undo(state: SessionState) -> SessionState:
    """Revert the most recent edit by replaying the shortened log."""
    if not state.edit_log:
        return state
    return replay(state.collection, state.id, state.dataset_id, state.edit_log[:-1])


def _cluster_to_json(cl: Cluster) -> dict:
    return {
        "id": cl.id,
        "members": sorted(str(a) for a in cl.members),
        "pattern": [p.label for p in cl.pattern] if cl.pattern is not None else None,
        "provenance": cl.provenance,
        "name": cl.name,
        "description": cl.description,
        "summary_source": cl.summary_source,
        "summary_model": cl.summary_model,
    }


def _cluster_from_json(doc: dict) -> Cluster:
    return Cluster(
        id=doc["id"],
        members=frozenset(AuthorId.parse(a) for a in doc["members"]),
        pattern=(
            tuple(EventType.from_label(p) for p in doc["pattern"])
            if doc["pattern"] is not None
            else None
        ),
        provenance=doc["provenance"],
        name=doc["name"],
        description=doc["description"],
        summary_source=doc["summary_source"],
        summary_model=doc["summary_model"],
    )


def save_session(state: SessionState) -> bytes:
    """Canonical JSON bytes; load_session(save_session(s)) == s."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "id": state.id,
        "dataset_id": state.dataset_id,
        "collection": {
            "role": state.collection.role.value,
            "stage": state.collection.stage.value,
        },
        "k": state.k,
        "k_max": state.k_max,
        "next_cluster_seq": state.next_cluster_seq,
        "clusters": [_cluster_to_json(cl) for cl in state.clusters],
        "singletons": sorted(str(a) for a in state.singletons),
        "manual_singletons": sorted(str(a) for a in state.manual_singletons),
        "edit_log": [
            {"kind": e.kind, "payload": e.payload, "timestamp": e.timestamp}
            for e in state.edit_log
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def load_session(data: bytes, c: Collection) -> SessionState:
    """Rebuild a state from save_session bytes; the caller resolves the
    collection reference stored in the file."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CorruptFile("session file is not valid JSON") from None
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise CorruptFile("session file has no schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"expected schema {SCHEMA_VERSION}, got {doc['schema_version']}"
        )
    try:
        ref = doc["collection"]
        if (ref["role"], ref["stage"]) != (c.role.value, c.stage.value):
            raise CorruptFile(
                f"session references {ref['role']}/{ref['stage']}, "
                f"got collection {c.role.value}/{c.stage.value}"
            )
        state = SessionState(
            id=doc["id"],
            dataset_id=doc["dataset_id"],
            collection=c,
            k=doc["k"],
            k_max=doc["k_max"],
            clusters=tuple(_cluster_from_json(cl) for cl in doc["clusters"]),
            singletons=frozenset(AuthorId.parse(a) for a in doc["singletons"]),
            manual_singletons=frozenset(
                AuthorId.parse(a) for a in doc["manual_singletons"]
            ),
            next_cluster_seq=doc["next_cluster_seq"],
            edit_log=tuple(
                Edit(kind=e["kind"], payload=e["payload"], timestamp=e["timestamp"])
                for e in doc["edit_log"]
            ),
        )
    except CorruptFile:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"session file is structurally invalid: {exc}") from None
    try:
        return _check_conservation(state)
    except AssertionError:
        raise CorruptFile("session file does not cover the collection authors") from None
