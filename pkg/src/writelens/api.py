"""HTTP service exposing datasets, clustering, sessions, analytics, and
summaries; the studio frontend is a thin client over these endpoints.

Responses are pure functions of (dataset, session state, query). Edits go
through a per-session lock, so concurrent requests see consistent snapshots.
"""

from __future__ import annotations

import hashlib
import logging
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import serialize
from .consensus import consensus_partition, default_k
from .errors import (
    EngineError,
    PortInUse,
    UnknownAuthor,
    UnknownDataset,
    UnknownSession,
)
from .ingest import (
    AuthorId,
    Collection,
    Role,
    StageKind,
    activity_table,
    assemble_collections,
    parse_event_log,
    sequence_stats,
)
from .insight import comparison_layout, recommend, scatter_coords, transition_profile
from .session import Edit, SessionState, apply_edit, apply_summary, init_session
from .summarize import HttpTextBackend, summarize_cluster
from .synopsis import max_pattern_count

logger = logging.getLogger(__name__)

NOT_FOUND_CODES = {"UnknownAuthor", "UnknownCluster", "UnknownDataset", "UnknownSession"}


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: Path = Path("./data")
    backend_url: str | None = None
    backend_key: str | None = None
    static_dir: Path | None = None
    cors_origins: tuple[str, ...] = ("*",)


@dataclass
class Dataset:
    id: str
    collections: dict[tuple[Role, StageKind], Collection]
    raw: bytes
    format: str

    @property
    def teams(self) -> int:
        return len(
            {a.team for c in self.collections.values() for a in c.authors}
        )


class DatasetStore:
    """Read-mostly dataset registry persisted as raw files in data_dir."""

    def __init__(self, data_dir: Path):
        self.data_dir = data_dir
        self._datasets: dict[str, Dataset] = {}
        data_dir.mkdir(parents=True, exist_ok=True)
        for path in sorted(data_dir.glob("dataset-*.*")):
            try:
                self._ingest(path.read_bytes(), path.suffix.lstrip("."))
            except EngineError:
                logger.warning("skipping unreadable dataset file %s", path)

    def _ingest(self, raw: bytes, format: str) -> Dataset:
        events = parse_event_log(raw, format)
        dataset = Dataset(
            id=hashlib.sha256(raw).hexdigest()[:12],
            collections=assemble_collections(events),
            raw=raw,
            format=format,
        )
        self._datasets[dataset.id] = dataset
        return dataset

    def add(self, raw: bytes, format: str) -> Dataset:
        dataset = self._ingest(raw, format)
        path = self.data_dir / f"dataset-{dataset.id}.{format}"
        path.write_bytes(raw)
        return dataset

    def get(self, dataset_id: str) -> Dataset:
        try:
            return self._datasets[dataset_id]
        except KeyError:
            raise UnknownDataset(f"no dataset {dataset_id!r}") from None

    def list(self) -> list[Dataset]:
        return [self._datasets[k] for k in sorted(self._datasets)]


@dataclass
class SessionEntry:
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, SessionEntry] = {}

    def create(self, collection: Collection, dataset_id: str) -> SessionState:
        session_id = f"s-{uuid.uuid4().hex[:10]}"
        state = init_session(collection, session_id=session_id, dataset_id=dataset_id)
        self._sessions[session_id] = SessionEntry(state=state)
        return state

    def entry(self, session_id: str) -> SessionEntry:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSession(f"no session {session_id!r}") from None


def _collection(dataset: Dataset, role_str: str, stage_str: str) -> Collection:
    try:
        key = (Role.parse(role_str), StageKind.parse(stage_str))
    except ValueError as exc:
        raise UnknownDataset(str(exc)) from None
    collection = dataset.collections.get(key)
    if collection is None or not collection.sequences:
        raise UnknownDataset(
            f"dataset {dataset.id} has no {role_str}/{stage_str} sequences"
        )
    return collection


def _author(value: str) -> AuthorId:
    try:
        return AuthorId.parse(value)
    except ValueError as exc:
        raise UnknownAuthor(str(exc)) from None


def _comparison_blocks(collection: Collection) -> list[list[AuthorId]]:
    result = consensus_partition(collection, default_k(collection))
    blocks = [sorted(cl.members, key=lambda a: a.team) for cl in result.clusters]
    for author in sorted(result.singletons, key=lambda a: a.team):
        blocks.append([author])
    return blocks


def create_app(config: ApiConfig) -> FastAPI:
    app = FastAPI(title="writelens", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    datasets = DatasetStore(config.data_dir)
    sessions = SessionStore()
    backend = (
        HttpTextBackend(
            url=config.backend_url,
            api_key=config.backend_key,
            audit_path=config.data_dir / "generation_audit.jsonl",
        )
        if config.backend_url
        else None
    )

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        status = 404 if exc.code in NOT_FOUND_CODES else 400
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/datasets")
    def list_datasets():
        return {
            "datasets": [
                {
                    "id": d.id,
                    "teams": d.teams,
                    "collections": {
                        serialize.collection_key(c): len(c)
                        for c in d.collections.values()
                        if c.sequences
                    },
                }
                for d in datasets.list()
            ]
        }

    @app.post("/datasets")
    async def upload_dataset(
        file: UploadFile = File(...), format: str | None = Form(default=None)
    ):
        raw = await file.read()
        fmt = format or ("json" if (file.filename or "").endswith(".json") else "csv")
        dataset = datasets.add(raw, fmt)
        return {
            "id": dataset.id,
            "teams": dataset.teams,
            "collections": {
                serialize.collection_key(c): len(c)
                for c in dataset.collections.values()
                if c.sequences
            },
        }

    @app.get("/datasets/{dataset_id}/stats")
    def dataset_stats(dataset_id: str):
        dataset = datasets.get(dataset_id)
        present = [c for c in dataset.collections.values() if c.sequences]
        return {
            "activity": serialize.activity_json(activity_table(present)),
            "sequences": {
                serialize.collection_key(c): {
                    "n_authors": len(c),
                    **serialize.stats_json(sequence_stats(c)),
                }
                for c in present
            },
        }

    @app.get("/datasets/{dataset_id}/collections/{role}/{stage}/consensus")
    def collection_consensus(dataset_id: str, role: str, stage: str, k: int | None = None):
        collection = _collection(datasets.get(dataset_id), role, stage)
        chosen = k if k is not None else default_k(collection)
        result = consensus_partition(collection, chosen)
        return serialize.consensus_json(collection, result, max_pattern_count(collection))

    @app.get("/datasets/{dataset_id}/authors/{author_id}/{stage}/transitions")
    def author_transitions(dataset_id: str, author_id: str, stage: str):
        dataset = datasets.get(dataset_id)
        author = _author(author_id)
        collection = _collection(dataset, author.role.value, stage)
        seq = collection.sequence_for(author)
        if seq is None:
            raise UnknownAuthor(f"{author} has no {stage} sequence")
        return serialize.profile_json(transition_profile(seq))

    @app.get("/datasets/{dataset_id}/comparison")
    def comparison(dataset_id: str, left: str, right: str):
        dataset = datasets.get(dataset_id)
        try:
            left_role, left_stage = serialize.parse_selection(left)
            right_role, right_stage = serialize.parse_selection(right)
        except ValueError as exc:
            raise UnknownDataset(str(exc)) from None
        left_coll = _collection(dataset, left_role.value, left_stage.value)
        right_coll = _collection(dataset, right_role.value, right_stage.value)
        layout = comparison_layout(
            _comparison_blocks(left_coll), _comparison_blocks(right_coll)
        )
        return {
            "left": left,
            "right": right,
            **serialize.comparison_json(layout),
        }

    @app.post("/sessions")
    def create_session(body: dict):
        dataset = datasets.get(str(body.get("dataset_id", "")))
        collection = _collection(
            dataset, str(body.get("role", "")), str(body.get("stage", ""))
        )
        state = sessions.create(collection, dataset.id)
        return serialize.session_json(state)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return serialize.session_json(sessions.entry(session_id).state)

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, body: dict):
        entry = sessions.entry(session_id)
        edit = Edit(
            kind=str(body.get("kind")),
            payload=dict(body.get("payload") or {}),
            timestamp=time.time(),
        )
        with entry.lock:
            entry.state = apply_edit(entry.state, edit)
            return serialize.session_json(entry.state)

    @app.get("/sessions/{session_id}/authors/{author_id}/recommendations")
    def author_recommendations(session_id: str, author_id: str, k: int = 5):
        state = sessions.entry(session_id).state
        recs = recommend(_author(author_id), state, k=k)
        return {"recommendations": serialize.recommendations_json(recs)}

    @app.get("/sessions/{session_id}/authors/{author_id}/scatter")
    def author_scatter(session_id: str, author_id: str):
        state = sessions.entry(session_id).state
        points = scatter_coords(_author(author_id), state)
        return {"points": serialize.scatter_json(points)}

    @app.post("/sessions/{session_id}/clusters/{cluster_id}/summary")
    def regenerate_summary(session_id: str, cluster_id: str, offline: bool = False):
        entry = sessions.entry(session_id)
        with entry.lock:
            state = entry.state
            cluster = state.cluster_by_id(cluster_id)
            members = sorted(cluster.members, key=lambda a: a.team)
            profiles = [
                transition_profile(state.collection.sequence_for(a)) for a in members
            ]
            chosen_backend = None if offline else backend
            summary = summarize_cluster(cluster_id, profiles, backend=chosen_backend)
            entry.state = apply_summary(
                state,
                cluster_id,
                name=summary.name,
                description=summary.description,
                source=summary.source,
                model_id=summary.model_id,
            )
            return {
                "summary": serialize.summary_json(summary),
                "session": serialize.session_json(entry.state),
            }

    if config.static_dir and config.static_dir.is_dir():
        app.mount(
            "/", StaticFiles(directory=config.static_dir, html=True), name="studio"
        )

    return app


def serve(config: ApiConfig) -> None:
    import uvicorn

    app = create_app(config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except OSError as exc:
        raise PortInUse(f"cannot bind {config.host}:{config.port}: {exc}") from None
