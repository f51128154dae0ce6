"""Index directory build and load.

An index directory holds five files: lexical.json, vectors.bin,
vectors.meta.json, graph.json, and manifest.json (the corpus manifest plus
an "index" object recording artifact checksums and the corpus checksum).
Builds land in a temp directory and are swapped in atomically, so rebuilds
never leave a half-written index.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from pathlib import Path
from typing import Mapping

from .corpus import Corpus, facet_texts, load_corpus, searchable_text
from .errors import FormatError, IndexMismatch
from .graph import build_group_graph, graph_from_payload, graph_payload, pagerank
from .lexical import build_bm25_index, lexical_from_payload, lexical_payload
from .ranker import SearchEngine
from .semantic import (
    EmbeddingProvider,
    FacetRef,
    build_vector_index,
    load_vectors,
    save_vectors,
    test_embedder,
)

INDEX_FILES = ("lexical.json", "vectors.bin", "vectors.meta.json", "graph.json", "manifest.json")
FLAT_CUTOFF = 10_000  # below this many facet entries, clustering buys nothing
DEFAULT_NLIST = 64


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def corpus_checksum(corpus_dir: str | Path) -> str:
    """Checksum of the corpus content an index is built from."""
    corpus_dir = Path(corpus_dir)
    digest = hashlib.sha256()
    for name in ("manifest.json", "groups.jsonl"):
        path = corpus_dir / name
        if not path.is_file():
            raise FormatError(f"{name} not found", path=str(path))
        digest.update(path.read_bytes())
    return digest.hexdigest()


def build_index(
    corpus_dir: str | Path,
    index_dir: str | Path,
    provider: EmbeddingProvider,
    mode: str = "auto",
    nlist: int = DEFAULT_NLIST,
    seed: int = 0,
) -> dict:
    """Build all index artifacts for a corpus. Returns a build summary."""
    corpus_dir = Path(corpus_dir)
    index_dir = Path(index_dir)
    corpus = load_corpus(corpus_dir)
    source_checksum = corpus_checksum(corpus_dir)

    docs = {g.id: searchable_text(g) for g in corpus.groups}
    bm25 = build_bm25_index(docs)

    facets = [
        (FacetRef(group.id, facet), text)
        for group in corpus.groups
        for facet, text in facet_texts(group)
    ]
    if mode == "auto":
        mode = "flat" if len(facets) < FLAT_CUTOFF else "ivf"
    effective_nlist = min(nlist, len(facets)) if mode == "ivf" else 1
    vectors = build_vector_index(facets, provider, mode=mode, nlist=effective_nlist, seed=seed)

    graph = build_group_graph(corpus)
    scores = pagerank(graph)

    tmp_dir = index_dir.parent / f".{index_dir.name}.tmp.{os.getpid()}"
    if tmp_dir.exists():
        shutil.rmtree(tmp_dir)
    tmp_dir.mkdir(parents=True)
    try:
        (tmp_dir / "lexical.json").write_text(json.dumps(lexical_payload(bm25), sort_keys=True))
        save_vectors(vectors, tmp_dir / "vectors.bin", tmp_dir / "vectors.meta.json")
        (tmp_dir / "graph.json").write_text(json.dumps(graph_payload(graph, scores), sort_keys=True))

        manifest = json.loads((corpus_dir / "manifest.json").read_text())
        manifest["index"] = {
            "corpus_checksum": source_checksum,
            "provider_name": provider.name,
            "embedding_dimension": provider.dimension,
            "mode": mode,
            "nlist": effective_nlist,
            "seed": seed,
            "checksums": {
                name: _sha256(tmp_dir / name)
                for name in ("lexical.json", "vectors.bin", "vectors.meta.json", "graph.json")
            },
        }
        (tmp_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))

        if index_dir.exists():
            graveyard = index_dir.parent / f".{index_dir.name}.old.{os.getpid()}"
            if graveyard.exists():
                shutil.rmtree(graveyard)
            os.replace(index_dir, graveyard)
            os.replace(tmp_dir, index_dir)
            shutil.rmtree(graveyard)
        else:
            os.replace(tmp_dir, index_dir)
    finally:
        if tmp_dir.exists():
            shutil.rmtree(tmp_dir)

    return {
        "groups": len(corpus.groups),
        "facets": len(facets),
        "mode": mode,
        "nlist": effective_nlist,
        "pagerank_converged": scores.converged,
        "files": list(INDEX_FILES),
    }


def load_engine(
    corpus_dir: str | Path,
    index_dir: str | Path,
    provider: EmbeddingProvider | None = None,
) -> SearchEngine:
    """Load a corpus and its index directory into a ready SearchEngine.

    Raises IndexMismatch when the corpus changed since the index was built
    or when any artifact's checksum disagrees with the manifest.
    """
    corpus_dir = Path(corpus_dir)
    index_dir = Path(index_dir)
    for name in INDEX_FILES:
        if not (index_dir / name).is_file():
            raise FormatError(f"index file {name} not found", path=str(index_dir / name))

    manifest = json.loads((index_dir / "manifest.json").read_text())
    info = manifest.get("index")
    if not isinstance(info, Mapping):
        raise FormatError("index manifest lacks the index object", path=str(index_dir / "manifest.json"))

    actual = corpus_checksum(corpus_dir)
    recorded = info.get("corpus_checksum", "")
    if actual != recorded:
        raise IndexMismatch(
            f"corpus at {corpus_dir} (checksum {actual[:12]}...) is not the corpus this index was "
            f"built from ({str(recorded)[:12]}...); rebuild the index"
        )
    for name, expected in info.get("checksums", {}).items():
        if _sha256(index_dir / name) != expected:
            raise IndexMismatch(f"index file {name} does not match its recorded checksum")

    corpus = load_corpus(corpus_dir)
    bm25 = lexical_from_payload(json.loads((index_dir / "lexical.json").read_text()))
    vectors = load_vectors(index_dir / "vectors.bin", index_dir / "vectors.meta.json")
    graph, _raw, transformed = graph_from_payload(json.loads((index_dir / "graph.json").read_text()))

    if provider is None:
        name = str(info.get("provider_name", ""))
        if name.startswith("hashing-"):
            provider = test_embedder(int(info["embedding_dimension"]))
        else:
            raise FormatError(
                f"index was built with provider {name!r}; pass a matching provider to load_engine"
            )
    if provider.dimension != vectors.dimension:
        raise IndexMismatch(
            f"provider dimension {provider.dimension} does not match index dimension {vectors.dimension}"
        )

    return SearchEngine(
        corpus=corpus,
        graph=graph,
        pagerank=transformed,
        lexical=bm25,
        vectors=vectors,
        provider=provider,
        checksums={
            "lexical": recorded,
            "vectors": recorded,
            "graph": recorded,
        },
    )


def in_memory_engine(corpus: Corpus, provider: EmbeddingProvider, mode: str = "flat", nlist: int = 1, seed: int = 0) -> SearchEngine:
    """Build a SearchEngine directly from a loaded corpus, no disk artifacts."""
    docs = {g.id: searchable_text(g) for g in corpus.groups}
    facets = [
        (FacetRef(group.id, facet), text)
        for group in corpus.groups
        for facet, text in facet_texts(group)
    ]
    graph = build_group_graph(corpus)
    return SearchEngine(
        corpus=corpus,
        graph=graph,
        pagerank=pagerank(graph).transformed,
        lexical=build_bm25_index(docs),
        vectors=build_vector_index(facets, provider, mode=mode, nlist=nlist, seed=seed),
        provider=provider,
    )
