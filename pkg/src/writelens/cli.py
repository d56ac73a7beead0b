"""Batch command-line interface over the analytics engine.

Subcommands: ingest, stats, cluster, mine, profile, summarize, report,
demo, serve. JSON results go to stdout or --out; the report subcommand
renders figures and CSV tables into a directory.

Exit codes: 0 success, 2 validation/engine error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import serialize
from .consensus import consensus_partition, default_k
from .errors import EngineError
from .ingest import (
    Collection,
    Role,
    StageKind,
    activity_table,
    assemble_collections,
    parse_event_log,
    sequence_stats,
    serialize_event_log,
)
from .insight import scatter_coords, transition_profile
from .patterns import mine_maximal, representative
from .session import init_session
from .summarize import HttpTextBackend, summarize_cluster
from .synopsis import max_pattern_count

USAGE_EXIT = 64
VALIDATION_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _infer_format(path: str, override: str | None) -> str:
    if override:
        return override
    return "json" if path.endswith(".json") else "csv"


def _load_collections(args) -> dict[tuple[Role, StageKind], Collection]:
    data = Path(args.infile).read_bytes()
    events = parse_event_log(data, _infer_format(args.infile, args.format))
    return assemble_collections(events)


def _present(collections) -> list[Collection]:
    return [c for c in collections.values() if c.sequences]


def _emit(args, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _consensus_for(c: Collection, k: int | None):
    chosen = k if k is not None else default_k(c)
    return consensus_partition(c, chosen), max_pattern_count(c)


def cmd_ingest(args) -> int:
    data = Path(args.infile).read_bytes()
    events = parse_event_log(data, _infer_format(args.infile, args.format))
    normalized = serialize_event_log(events, args.to)
    if args.out:
        Path(args.out).write_bytes(normalized)
    else:
        sys.stdout.write(normalized.decode("utf-8"))
    return 0


def cmd_stats(args) -> int:
    collections = _load_collections(args)
    present = _present(collections)
    payload = {
        "activity": serialize.activity_json(activity_table(present)),
        "sequences": {
            serialize.collection_key(c): {
                "n_authors": len(c),
                **serialize.stats_json(sequence_stats(c)),
            }
            for c in present
        },
    }
    _emit(args, payload)
    return 0


def cmd_cluster(args) -> int:
    collections = _load_collections(args)
    payload = {"collections": []}
    for c in _present(collections):
        result, k_max = _consensus_for(c, args.k)
        payload["collections"].append(serialize.consensus_json(c, result, k_max))
    _emit(args, payload)
    return 0


def cmd_mine(args) -> int:
    collections = _load_collections(args)
    payload = {"collections": []}
    for c in _present(collections):
        result, k_max = _consensus_for(c, args.k)
        by_author = {seq.author: seq for seq in c.sequences}
        clusters = []
        for cluster in result.clusters:
            members = [by_author[a] for a in sorted(cluster.members, key=lambda a: a.team)]
            mined = mine_maximal(members, min_support=args.min_support)
            clusters.append(
                {
                    "members": serialize.authors_json(cluster.members),
                    "patterns": serialize.patterns_json(mined),
                    "representative": (
                        serialize.patterns_json([representative(mined)])[0]
                        if mined
                        else None
                    ),
                }
            )
        payload["collections"].append(
            {
                "role": c.role.value,
                "stage": c.stage.value,
                "k": result.k,
                "min_support": args.min_support,
                "clusters": clusters,
            }
        )
    _emit(args, payload)
    return 0


def cmd_profile(args) -> int:
    collections = _load_collections(args)
    profiles = []
    for c in _present(collections):
        for seq in c.sequences:
            profiles.append(serialize.profile_json(transition_profile(seq)))
    _emit(args, {"profiles": profiles})
    return 0


def _backend_from_env():
    url = os.environ.get("GEN_BACKEND_URL")
    if not url:
        return None
    return HttpTextBackend(
        url=url,
        api_key=os.environ.get("GEN_BACKEND_KEY"),
        model_id=os.environ.get("GEN_BACKEND_MODEL", "remote"),
        audit_path=os.environ.get("GEN_BACKEND_AUDIT"),
    )


def cmd_summarize(args) -> int:
    collections = _load_collections(args)
    backend = None if args.offline else _backend_from_env()
    payload = {"collections": []}
    for c in _present(collections):
        result, _ = _consensus_for(c, args.k)
        by_author = {seq.author: seq for seq in c.sequences}
        summaries = []
        for i, cluster in enumerate(result.clusters):
            profiles = [
                transition_profile(by_author[a])
                for a in sorted(cluster.members, key=lambda a: a.team)
            ]
            summary = summarize_cluster(f"c{i}", profiles, backend=backend)
            summaries.append(
                {
                    **serialize.summary_json(summary),
                    "members": serialize.authors_json(cluster.members),
                }
            )
        payload["collections"].append(
            {
                "role": c.role.value,
                "stage": c.stage.value,
                "k": result.k,
                "summaries": summaries,
            }
        )
    _emit(args, payload)
    return 0


def cmd_report(args) -> int:
    from . import plots

    collections = _load_collections(args)
    present = _present(collections)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def record(path: Path):
        written.append(str(path.relative_to(out_dir)))

    record(plots.write_activity_csv(activity_table(present), out_dir / "activity_table.csv"))
    record(plots.write_stats_csv(present, out_dir / "sequence_stats.csv"))
    for c in present:
        key = serialize.collection_key(c)
        record(plots.save_sequence_overview(c, out_dir / f"sequences_{key}.png"))
        try:
            result, _ = _consensus_for(c, args.k)
        except EngineError:
            continue  # collections too small to cluster are skipped
        record(plots.save_cluster_overview(c, result, out_dir / f"clusters_{key}.png"))
    if args.focus:
        from .ingest import AuthorId

        author = AuthorId.parse(args.focus)
        for c in present:
            seq = c.sequence_for(author)
            if seq is None:
                continue
            key = serialize.collection_key(c)
            record(
                plots.save_transition_arcs(
                    transition_profile(seq), out_dir / f"arcs_{args.focus}_{key}.png"
                )
            )
            state = init_session(c, session_id=f"report-{key}")
            record(
                plots.save_scatter(
                    args.focus,
                    scatter_coords(author, state),
                    out_dir / f"scatter_{args.focus}_{key}.png",
                )
            )
    _emit(args, {"out_dir": str(out_dir), "files": written})
    return 0


def cmd_demo(args) -> int:
    from .synthetic import synthetic_csv

    data = synthetic_csv(teams=args.teams, seed=args.seed)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def cmd_serve(args) -> int:
    from .api import ApiConfig, serve

    config = ApiConfig(
        host=args.host,
        port=args.port,
        data_dir=Path(args.data_dir),
        backend_url=args.backend_url or os.environ.get("GEN_BACKEND_URL"),
        backend_key=os.environ.get("GEN_BACKEND_KEY"),
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    serve(config)
    return 0


def _add_io_args(p, needs_input=True):
    if needs_input:
        p.add_argument("--in", dest="infile", required=True, help="event log file")
        p.add_argument(
            "--format", choices=["csv", "json"], help="input format (default: by extension)"
        )
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="writelens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate and normalize an event log")
    _add_io_args(p)
    p.add_argument("--to", choices=["csv", "json"], default="json", help="output format")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="activity table and sequence statistics")
    _add_io_args(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("cluster", help="consensus clusters for all collections")
    _add_io_args(p)
    p.add_argument("--k", type=int, help="cluster count (default: per-collection best)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("mine", help="maximal patterns per consensus cluster")
    _add_io_args(p)
    p.add_argument("--k", type=int, help="cluster count (default: per-collection best)")
    p.add_argument("--min-support", type=float, default=0.5, help="support fraction")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("profile", help="transition profiles for every sequence")
    _add_io_args(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("summarize", help="cluster summaries (LLM or fallback)")
    _add_io_args(p)
    p.add_argument("--k", type=int, help="cluster count (default: per-collection best)")
    p.add_argument(
        "--offline",
        action="store_true",
        help="skip any configured generation backend; use the deterministic fallback",
    )
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("report", help="render figures and CSV tables to a directory")
    _add_io_args(p)
    p.add_argument("--out-dir", required=True, help="directory for figures and tables")
    p.add_argument("--k", type=int, help="cluster count (default: per-collection best)")
    p.add_argument("--focus", help="author id (e.g. NS-3) for arc and scatter figures")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("demo", help="generate a synthetic event log")
    p.add_argument("--teams", type=int, default=27)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8000")))
    p.add_argument("--data-dir", default=os.environ.get("DATA_DIR", "./data"))
    p.add_argument("--backend-url", help="text-generation endpoint URL")
    p.add_argument("--static-dir", help="directory with built studio assets")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return USAGE_EXIT
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return VALIDATION_EXIT
    except FileNotFoundError as exc:
        print(f"error [FileNotFound]: {exc}", file=sys.stderr)
        return VALIDATION_EXIT


if __name__ == "__main__":
    sys.exit(main())
