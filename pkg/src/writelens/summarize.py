"""Cluster summaries: prompt construction, pluggable text generation, and a
deterministic template fallback.

The prompt carries every member's transition data; nothing is elided, so a
generation model sees rare transitions a rendered figure would make faint.
Summaries are only produced on explicit request, never as a side effect of
cluster edits.
"""

from __future__ import annotations

import datetime
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .errors import EmptyCluster
from .insight import TransitionProfile

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 30.0
NAME_MAX_CHARS = 60

PROMPT_HEADER = (
    "The data below describes a cluster of event sequences, each showing one "
    "author's writing-related behaviors. There are six types of events: "
    "Writing, Note-Taking, Wordsmith-Crosslingual, Wordsmith-English, "
    "Active-Search, and Passive-Search. Each entry gives a source event, a "
    "destination event, and the normalized transition frequency; in an arc "
    "diagram of the sequence, the arc thickness is the transition frequency "
    "of the two events. Please name this cluster and provide a brief "
    "description."
)


@dataclass(frozen=True)
class Summary:
    cluster_id: str
    name: str
    description: str
    source: str  # "llm" | "fallback"
    model_id: str | None


class GenerationBackend(Protocol):
    model_id: str

    def generate(self, prompt: str, timeout_s: float) -> str: ...


class HttpTextBackend:
    """Plain-text completion over HTTP: POST the prompt, read the body.

    Prompts and responses are appended to an audit file when one is
    configured.
    """

    def __init__(
        self,
        url: str,
        api_key: str | None = None,
        model_id: str = "remote",
        audit_path: str | Path | None = None,
    ):
        self.url = url
        self.api_key = api_key
        self.model_id = model_id
        self.audit_path = Path(audit_path) if audit_path else None

    def generate(self, prompt: str, timeout_s: float) -> str:
        headers = {"Content-Type": "text/plain; charset=utf-8"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = requests.post(
            self.url, data=prompt.encode("utf-8"), headers=headers, timeout=timeout_s
        )
        response.raise_for_status()
        text = response.text
        self._audit(prompt, text)
        return text

    def _audit(self, prompt: str, response: str) -> None:
        if self.audit_path is None:
            return
        record = {
            "ts": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "model_id": self.model_id,
            "prompt": prompt,
            "response": response,
        }
        with self.audit_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")


class StaticBackend:
    """Recorded-response stub for tests; no network involved."""

    def __init__(self, responses: Sequence[str], model_id: str = "static"):
        self._responses = list(responses)
        self._calls = 0
        self.prompts: list[str] = []
        self.model_id = model_id

    def generate(self, prompt: str, timeout_s: float) -> str:
        self.prompts.append(prompt)
        if self._calls >= len(self._responses):
            raise RuntimeError("StaticBackend ran out of recorded responses")
        text = self._responses[self._calls]
        self._calls += 1
        return text


def _fmt_frequency(f: float) -> str:
    return repr(round(f, 3))


def _entry_line(source_display: str, destination_display: str, frequency: float) -> str:
    return (
        f"source: {source_display}, destination: {destination_display}, "
        f"frequency: {_fmt_frequency(frequency)}"
    )


def build_prompt(profiles: Sequence[TransitionProfile]) -> str:
    """Instruction text followed by one transition array per member, in
    member order; byte-stable for identical input."""
    if not profiles:
        raise EmptyCluster("cannot build a prompt for an empty cluster")
    parts = [PROMPT_HEADER]
    for i, profile in enumerate(profiles, start=1):
        lines = [f"Member {i} transitions:", "["]
        for j, entry in enumerate(profile.entries):
            comma = "," if j < len(profile.entries) - 1 else ""
            lines.append(
                "  {"
                + _entry_line(
                    entry.source.display, entry.destination.display, entry.frequency
                )
                + "}"
                + comma
            )
        lines.append("]")
        parts.append("\n".join(lines))
    return "\n\n".join(parts)


def aggregate_transitions(
    profiles: Sequence[TransitionProfile],
) -> list[tuple[tuple, float]]:
    """Member-profile frequencies averaged uniformly (long sequences do not
    dominate), sorted by descending frequency then canonical pair order."""
    sums: dict[tuple, float] = {}
    for profile in profiles:
        for entry in profile.entries:
            key = (entry.source, entry.destination)
            sums[key] = sums.get(key, 0.0) + entry.frequency
    count = len(profiles)
    averaged = [(pair, total / count) for pair, total in sums.items()]
    averaged.sort(key=lambda item: (-item[1], item[0]))
    return averaged


def _fallback_summary(cluster_id: str, profiles: Sequence[TransitionProfile]) -> Summary:
    top = aggregate_transitions(profiles)[:3]
    if not top:
        return Summary(
            cluster_id=cluster_id,
            name="No recurring transitions",
            description=(
                "Member sequences contain fewer than two events; there is no "
                "transition structure to summarize."
            ),
            source="fallback",
            model_id=None,
        )
    (src, dst), _ = top[0]
    listed = ", ".join(
        f"{s.display}→{d.display} ({100 * f:.1f}%)" for (s, d), f in top
    )
    description = (
        f"Across {len(profiles)} member sequence(s), the most common "
        f"transitions are {listed}."
    )
    return Summary(
        cluster_id=cluster_id,
        name=f"{src.code}→{dst.code}-driven writers",
        description=description,
        source="fallback",
        model_id=None,
    )


def summarize_cluster(
    cluster_id: str,
    profiles: Sequence[TransitionProfile],
    backend: GenerationBackend | None = None,
    timeout_s: float = DEFAULT_TIMEOUT_S,
) -> Summary:
    """Name + description for one cluster.

    With a backend, the first non-empty response line becomes the name and
    the remainder the description. Backend failure of any kind falls back to
    the deterministic template; the caller never sees an error.
    """
    if not profiles:
        raise EmptyCluster("cannot summarize an empty cluster")
    if backend is not None:
        prompt = build_prompt(profiles)
        try:
            text = backend.generate(prompt, timeout_s)
            lines = [line.strip() for line in text.splitlines() if line.strip()]
            if lines:
                return Summary(
                    cluster_id=cluster_id,
                    name=lines[0][:NAME_MAX_CHARS],
                    description="\n".join(lines[1:]),
                    source="llm",
                    model_id=backend.model_id,
                )
            logger.warning("generation backend returned empty text; using fallback")
        except Exception:
            logger.warning(
                "generation backend failed for cluster %s; using fallback",
                cluster_id,
                exc_info=True,
            )
    return _fallback_summary(cluster_id, profiles)
