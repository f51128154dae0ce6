"""Corpus model: statement groups, their members, and text derivation.

A corpus lives in a directory holding ``manifest.json`` plus ``groups.jsonl``
(one JSON object per statement group). A statement group is one user-authored
source block together with every declaration elaborated from it; search
results, dependency edges, and scores all attach to groups, not to individual
declarations.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import FormatError, VersionError
from .textsplit import split_words

SUPPORTED_FORMAT_VERSION = 1

# Facet identifiers, in the order facet_texts emits them.
NAME_FACET = "name"
DOCSTRING_FACET = "docstring"
INFORMAL_FACET = "informal"
FACETS = (NAME_FACET, DOCSTRING_FACET, INFORMAL_FACET)


@dataclass(frozen=True)
class Span:
    """Inclusive line range of a source block."""

    start_line: int
    end_line: int


@dataclass(frozen=True)
class Declaration:
    """A single elaborated declaration."""

    lean_name: str
    kind: str
    docstring: str | None = None
    source_file: str = ""
    span: Span = Span(0, 0)
    package: str = ""


@dataclass
class StatementGroup:
    """One source block and the declarations elaborated from it."""

    id: int
    primary_decl_name: str
    package: str
    source_file: str
    span: Span
    statement_text: str
    docstring: str | None = None
    informal_description: str | None = None
    members: list[Declaration] = field(default_factory=list)
    dependency_ids: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class CorpusManifest:
    format_version: int
    group_count: int
    embedding_dimension: int
    provider_name: str
    created_at: str


@dataclass
class LoadDiagnostics:
    """Non-fatal issues found while loading a corpus."""

    dangling_dependencies: Counter = field(default_factory=Counter)
    self_edges: int = 0

    @property
    def dangling_count(self) -> int:
        return sum(self.dangling_dependencies.values())


@dataclass
class Corpus:
    manifest: CorpusManifest
    groups: list[StatementGroup]
    by_id: dict[int, StatementGroup]
    name_index: dict[str, int]
    packages: list[str]
    diagnostics: LoadDiagnostics = field(default_factory=LoadDiagnostics)


def _require(record: Mapping, key: str, *, path: str, line: int | None = None):
    if key not in record:
        raise FormatError(f"missing required key {key!r}", path=path, line=line)
    return record[key]


def _parse_member(raw: Mapping, group: Mapping, *, path: str, line: int) -> Declaration:
    return Declaration(
        lean_name=str(_require(raw, "lean_name", path=path, line=line)),
        kind=str(_require(raw, "kind", path=path, line=line)),
        docstring=raw.get("docstring"),
        source_file=str(group.get("source_file", "")),
        span=Span(
            int(raw.get("start_line", group["span"]["start_line"])),
            int(raw.get("end_line", group["span"]["end_line"])),
        ),
        package=str(group.get("package", "")),
    )


def _parse_group(record: Mapping, *, path: str, line: int) -> StatementGroup:
    span_raw = _require(record, "span", path=path, line=line)
    if not isinstance(span_raw, Mapping) or "start_line" not in span_raw or "end_line" not in span_raw:
        raise FormatError("span must carry start_line and end_line", path=path, line=line)
    members_raw = _require(record, "members", path=path, line=line)
    if not isinstance(members_raw, list) or not members_raw:
        raise FormatError("members must be a non-empty list", path=path, line=line)
    deps_raw = _require(record, "dependency_ids", path=path, line=line)
    return StatementGroup(
        id=int(_require(record, "id", path=path, line=line)),
        primary_decl_name=str(_require(record, "primary_decl_name", path=path, line=line)),
        package=str(_require(record, "package", path=path, line=line)),
        source_file=str(_require(record, "source_file", path=path, line=line)),
        span=Span(int(span_raw["start_line"]), int(span_raw["end_line"])),
        statement_text=str(_require(record, "statement_text", path=path, line=line)),
        docstring=record.get("docstring"),
        informal_description=record.get("informal_description"),
        members=[_parse_member(m, record, path=path, line=line) for m in members_raw],
        dependency_ids=[int(d) for d in deps_raw],
    )


def load_manifest(corpus_dir: str | Path) -> CorpusManifest:
    path = Path(corpus_dir) / "manifest.json"
    if not path.is_file():
        raise FormatError("manifest.json not found", path=str(path))
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}", path=str(path)) from exc
    version = int(_require(raw, "format_version", path=str(path)))
    if version != SUPPORTED_FORMAT_VERSION:
        raise VersionError(
            f"unsupported format_version {version} (supported: {SUPPORTED_FORMAT_VERSION})",
            path=str(path),
        )
    return CorpusManifest(
        format_version=version,
        group_count=int(_require(raw, "group_count", path=str(path))),
        embedding_dimension=int(_require(raw, "embedding_dimension", path=str(path))),
        provider_name=str(_require(raw, "provider_name", path=str(path))),
        created_at=str(_require(raw, "created_at", path=str(path))),
    )


def load_corpus(corpus_dir: str | Path) -> Corpus:
    """Load and validate a corpus directory.

    Dangling dependency ids are dropped (counted in diagnostics) rather than
    treated as fatal. Unknown keys in any record are ignored.
    """
    corpus_dir = Path(corpus_dir)
    manifest = load_manifest(corpus_dir)
    groups_path = corpus_dir / "groups.jsonl"
    if not groups_path.is_file():
        raise FormatError("groups.jsonl not found", path=str(groups_path))

    groups: list[StatementGroup] = []
    with groups_path.open() as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", path=str(groups_path), line=line_no) from exc
            groups.append(_parse_group(record, path=str(groups_path), line=line_no))

    if len(groups) != manifest.group_count:
        raise FormatError(
            f"manifest declares {manifest.group_count} groups but groups.jsonl has {len(groups)}",
            path=str(groups_path),
        )

    by_id: dict[int, StatementGroup] = {}
    for group in groups:
        if group.id in by_id:
            raise FormatError(f"duplicate group id {group.id}", path=str(groups_path))
        by_id[group.id] = group
    groups.sort(key=lambda g: g.id)

    diagnostics = LoadDiagnostics()
    for group in groups:
        kept = set()
        for d in group.dependency_ids:
            if d == group.id:
                diagnostics.self_edges += 1
            elif d not in by_id:
                diagnostics.dangling_dependencies[d] += 1
            else:
                kept.add(d)
        group.dependency_ids = sorted(kept)
        if group.primary_decl_name not in {m.lean_name for m in group.members}:
            raise FormatError(
                f"group {group.id}: primary_decl_name does not name a member", path=str(groups_path)
            )
        for member in group.members:
            if member.span.start_line < group.span.start_line or member.span.end_line > group.span.end_line:
                raise FormatError(
                    f"group {group.id}: member {member.lean_name} lies outside the group span",
                    path=str(groups_path),
                )

    name_index = {group.primary_decl_name: group.id for group in groups}
    if len(name_index) != len(groups):
        raise FormatError("duplicate primary_decl_name across groups", path=str(groups_path))

    packages = sorted({g.package for g in groups})
    return Corpus(
        manifest=manifest,
        groups=groups,
        by_id=by_id,
        name_index=name_index,
        packages=packages,
        diagnostics=diagnostics,
    )


def _spans_overlap(a: Span, b: Span) -> bool:
    return a.start_line <= b.end_line and b.start_line <= a.end_line


def group_declarations(declarations: Iterable[Declaration]) -> list[StatementGroup]:
    """Merge declarations whose source spans overlap or nest into groups.

    Groups receive dense ids from 0 in (source_file, span start) order. The
    primary member is the one starting earliest; ties prefer the shortest
    lean_name, then the lexicographically smallest.
    """
    decls = sorted(
        declarations,
        key=lambda d: (d.source_file, d.span.start_line, d.span.end_line, d.lean_name),
    )
    clusters: list[list[Declaration]] = []
    current: list[Declaration] = []
    current_span: Span | None = None
    for decl in decls:
        if current and decl.source_file == current[0].source_file and _spans_overlap(current_span, decl.span):
            current.append(decl)
            current_span = Span(
                min(current_span.start_line, decl.span.start_line),
                max(current_span.end_line, decl.span.end_line),
            )
        else:
            if current:
                clusters.append(current)
            current = [decl]
            current_span = decl.span
    if current:
        clusters.append(current)

    groups = []
    for gid, members in enumerate(clusters):
        span = Span(
            min(m.span.start_line for m in members),
            max(m.span.end_line for m in members),
        )
        primary = min(members, key=lambda m: (m.span.start_line, len(m.lean_name), m.lean_name))
        groups.append(
            StatementGroup(
                id=gid,
                primary_decl_name=primary.lean_name,
                package=primary.package,
                source_file=primary.source_file,
                span=span,
                statement_text="",
                docstring=primary.docstring,
                members=members,
            )
        )
    return groups


def path_keywords(source_file: str) -> str:
    """Turn a source path into lowercase search keywords.

    The leading path component and the file extension are dropped; the rest
    splits on camel-case, digit, and separator boundaries:
    "Mathlib/FieldTheory/PolynomialGaloisGroup.lean" -> "field theory
    polynomial galois group". Single-component paths keep their (processed)
    filename.
    """
    parts = [p for p in source_file.split("/") if p]
    if not parts:
        return ""
    if len(parts) > 1:
        parts = parts[1:]
    stem = parts[-1]
    if "." in stem:
        stem = stem.rsplit(".", 1)[0]
    parts[-1] = stem
    words: list[str] = []
    for part in parts:
        words.extend(split_words(part))
    return " ".join(words)


def _present(text: str | None) -> bool:
    return text is not None and bool(text.strip())


def searchable_text(group: StatementGroup) -> str:
    """Newline-joined text used for lexical indexing.

    Order is fixed: primary name, docstring (when present), informal
    description (when present), statement text, path keywords.
    """
    segments = [group.primary_decl_name]
    if _present(group.docstring):
        segments.append(group.docstring)
    if _present(group.informal_description):
        segments.append(group.informal_description)
    segments.append(group.statement_text)
    segments.append(path_keywords(group.source_file))
    return "\n".join(segments)


def facet_texts(group: StatementGroup) -> list[tuple[str, str]]:
    """Texts embedded per group, one per facet.

    The name facet is always present. The docstring facet appears only for a
    non-blank docstring. The informal facet pairs the informal description
    (or, when missing, the statement text) with the path keywords.
    """
    facets = [(NAME_FACET, group.primary_decl_name)]
    if _present(group.docstring):
        facets.append((DOCSTRING_FACET, group.docstring.strip()))
    base = group.informal_description if _present(group.informal_description) else group.statement_text
    informal = f"{(base or '').strip()} {path_keywords(group.source_file)}".strip()
    if not informal:
        informal = group.primary_decl_name
    facets.append((INFORMAL_FACET, informal))
    return facets
