"""Informal-translation generation over the dependency graph.

Groups are translated dependencies-first (SCC condensation order), so each
prompt can quote the already-generated translations of the group's direct
dependencies. Progress is resumable: a state object tracks done, failed, and
pending ids, persisted as append-only JSONL where the last record per id
wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

from .corpus import Corpus, StatementGroup
from .errors import FormatError, GenerationError
from .graph import DependencyGraph, condensation_topo_order

PROMPT_RESOURCE = "translate_v1.txt"


@dataclass
class TranslationState:
    done: dict[int, str] = field(default_factory=dict)
    failed: dict[int, str] = field(default_factory=dict)
    pending: list[int] = field(default_factory=list)


class GenerationClient:
    """Prompt-to-text contract.

    Transport or protocol failures must raise GenerationError; an empty
    generation is a normal (if useless) return value.
    """

    name: str

    def complete(self, prompt: str) -> str:
        raise NotImplementedError


class HttpGenerationClient(GenerationClient):
    """Client for a service speaking {"prompt": ...} -> {"text": ...}."""

    def __init__(self, endpoint: str, name: str = "http", timeout: float = 120.0):
        self.endpoint = endpoint
        self.name = name
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        import httpx

        try:
            response = httpx.post(self.endpoint, json={"prompt": prompt}, timeout=self.timeout)
            response.raise_for_status()
            return str(response.json()["text"])
        except GenerationError:
            raise
        except Exception as exc:
            raise GenerationError(f"generation request failed: {exc}") from exc


def _prompt_template() -> str:
    return resources.files("declsearch").joinpath("prompts").joinpath(PROMPT_RESOURCE).read_text(encoding="utf-8")


def build_prompt(
    group: StatementGroup,
    dep_translations: Mapping[int, str],
    dep_names: Mapping[int, str] | None = None,
) -> str:
    """Render the translation prompt for one group.

    Dependencies are listed sorted by id; those without a translation yet
    appear by name only. The output is byte-deterministic for fixed inputs.
    """
    dep_names = dep_names or {}
    docstring_section = ""
    if group.docstring and group.docstring.strip():
        docstring_section = f"\nDocstring:\n{group.docstring.strip()}\n"
    dep_lines = []
    for dep_id in sorted(group.dependency_ids):
        name = dep_names.get(dep_id, f"group {dep_id}")
        if dep_id in dep_translations:
            dep_lines.append(f"- {name}: {dep_translations[dep_id]}")
        else:
            dep_lines.append(f"- {name}")
    dependencies_section = "".join(line + "\n" for line in dep_lines)
    return _prompt_template().format(
        statement=group.statement_text,
        docstring_section=docstring_section,
        dependencies_section=dependencies_section,
    )


def new_state(corpus: Corpus, graph: DependencyGraph | None = None) -> TranslationState:
    """Fresh state with every group pending, dependencies-first when a graph is given."""
    if graph is not None:
        pending = [gid for scc in condensation_topo_order(graph) for gid in scc]
    else:
        pending = sorted(corpus.by_id)
    return TranslationState(pending=pending)


def translate_corpus(
    corpus: Corpus,
    graph: DependencyGraph,
    client: GenerationClient,
    state: TranslationState | None = None,
    limit: int | None = None,
    record_sink: Callable[[int, str, str], None] | None = None,
) -> TranslationState:
    """Generate translations for all pending groups, dependencies first.

    Client failures mark the group failed and processing continues. At most
    `limit` groups are processed when given. record_sink, if provided, is
    called with (id, status, text) after each group, enabling incremental
    persistence.
    """
    if state is None:
        state = new_state(corpus, graph)
    pending = set(state.pending)
    names = {g.id: g.primary_decl_name for g in corpus.groups}
    processed = 0
    for scc in condensation_topo_order(graph):
        for gid in scc:
            if gid not in pending:
                continue
            if limit is not None and processed >= limit:
                break
            group = corpus.by_id[gid]
            known = {d: state.done[d] for d in group.dependency_ids if d in state.done}
            prompt = build_prompt(group, known, names)
            try:
                text = client.complete(prompt).strip()
            except GenerationError as exc:
                state.failed[gid] = str(exc)
                status, payload = "failed", str(exc)
            else:
                if text:
                    state.done[gid] = text
                    status, payload = "done", text
                else:
                    state.failed[gid] = "empty generation"
                    status, payload = "failed", "empty generation"
            pending.discard(gid)
            processed += 1
            if record_sink is not None:
                record_sink(gid, status, payload)
        if limit is not None and processed >= limit:
            break
    state.pending = [gid for gid in state.pending if gid in pending]
    return state


def load_state(path: str | Path, corpus: Corpus) -> TranslationState:
    """Rebuild state from a translations.jsonl file (last record per id wins)."""
    latest: dict[int, tuple[str, str]] = {}
    path = Path(path)
    if path.is_file():
        with path.open() as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    gid = int(record["id"])
                    status = record["status"]
                    text = str(record["text"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise FormatError(f"bad translation record: {exc}", path=str(path), line=line_no) from exc
                if status not in ("done", "failed"):
                    raise FormatError(f"unknown status {status!r}", path=str(path), line=line_no)
                if gid in corpus.by_id:
                    latest[gid] = (status, text)
    state = TranslationState()
    for gid, (status, text) in latest.items():
        (state.done if status == "done" else state.failed)[gid] = text
    state.pending = [gid for gid in sorted(corpus.by_id) if gid not in latest]
    return state


def append_record(path: str | Path, gid: int, status: str, text: str) -> None:
    with open(path, "a") as fh:
        fh.write(json.dumps({"id": gid, "status": status, "text": text}) + "\n")


def apply_translations(corpus: Corpus, state: TranslationState) -> int:
    """Copy done translations onto groups' informal_description. Returns count."""
    applied = 0
    for gid, text in state.done.items():
        corpus.by_id[gid].informal_description = text
        applied += 1
    return applied
