"""Hybrid ranking pipeline.

Stages, in order: embed the query, oversampled facet kNN, distance to
similarity, similarity threshold, per-group aggregation (max over facets),
package filter, then BM25+ and transformed PageRank for the survivors only.
Each of the three raw signals is min-max normalized over the survivor set,
weighted, summed, and the results are sorted by total (ties by group id).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .corpus import Corpus
from .errors import EmptyQuery, IndexMismatch
from .graph import DependencyGraph
from .lexical import tokenize
from .semantic import (
    EmbeddingProvider,
    FacetRef,
    VectorIndex,
    distance_to_similarity,
    group_semantic_scores,
    knn,
)

DEFAULT_THRESHOLD = 0.525
DEFAULT_LIMIT = 50
DEFAULT_OVERSAMPLE_K = 400
DEFAULT_NPROBE = 8


@dataclass(frozen=True)
class Weights:
    semantic: float = 1.0
    lexical: float = 1.0
    pagerank: float = 0.2


@dataclass
class SearchOptions:
    limit: int = DEFAULT_LIMIT
    packages: set[str] | None = None
    threshold: float = DEFAULT_THRESHOLD
    weights: Weights = field(default_factory=Weights)
    oversample_k: int = DEFAULT_OVERSAMPLE_K
    nprobe: int = DEFAULT_NPROBE

    def __post_init__(self):
        if self.limit < 1:
            raise ValueError("limit must be positive")
        if self.limit > self.oversample_k:
            raise ValueError("limit cannot exceed oversample_k")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0,1]")
        if self.nprobe < 1:
            raise ValueError("nprobe must be positive")


@dataclass
class ScoredResult:
    group_id: int
    raw_semantic: float
    raw_lexical: float
    raw_pagerank: float
    norm_semantic: float
    norm_lexical: float
    norm_pagerank: float
    weighted_semantic: float
    weighted_lexical: float
    weighted_pagerank: float
    total: float


@dataclass
class SearchTrace:
    """Per-stage record of one search, for instrumentation and tests."""

    facet_hits: list[tuple[FacetRef, float]] = field(default_factory=list)
    threshold_survivors: list[int] = field(default_factory=list)
    survivors: list[int] = field(default_factory=list)
    lexical_scored: list[int] = field(default_factory=list)
    pagerank_scored: list[int] = field(default_factory=list)


@dataclass
class SearchEngine:
    """Everything one corpus snapshot needs to serve searches.

    checksums, when present, map artifact names to the corpus checksum each
    artifact was built from; search refuses to run if they disagree.
    """

    corpus: Corpus
    graph: DependencyGraph
    pagerank: Mapping[int, float]  # transformed scores
    lexical: object  # anything with batch_scores(query_text, ids)
    vectors: VectorIndex
    provider: EmbeddingProvider
    checksums: Mapping[str, str] | None = None


def min_max_normalize(values: Mapping[int, float]) -> dict[int, float]:
    """Rescale to [0,1] over the given candidate set.

    A degenerate range (all values equal, or a single candidate) maps
    everything to 1.0 so lone candidates keep their signal.
    """
    if not values:
        return {}
    lo = min(values.values())
    hi = max(values.values())
    if hi == lo:
        return {key: 1.0 for key in values}
    return {key: (value - lo) / (hi - lo) for key, value in values.items()}


def combine(norm_semantic: float, norm_lexical: float, norm_pagerank: float, weights: Weights) -> float:
    """Weighted sum of the three normalized signals."""
    return (
        weights.semantic * norm_semantic
        + weights.lexical * norm_lexical
        + weights.pagerank * norm_pagerank
    )


def score_survivors(
    raw_semantic: Mapping[int, float],
    raw_lexical: Mapping[int, float],
    raw_pagerank: Mapping[int, float],
    weights: Weights,
) -> list[ScoredResult]:
    """Normalize, weight, combine, and sort one survivor set."""
    norm_s = min_max_normalize(raw_semantic)
    norm_l = min_max_normalize(raw_lexical)
    norm_p = min_max_normalize(raw_pagerank)
    results = []
    for group_id in raw_semantic:
        ws = weights.semantic * norm_s[group_id]
        wl = weights.lexical * norm_l[group_id]
        wp = weights.pagerank * norm_p[group_id]
        results.append(
            ScoredResult(
                group_id=group_id,
                raw_semantic=raw_semantic[group_id],
                raw_lexical=raw_lexical[group_id],
                raw_pagerank=raw_pagerank[group_id],
                norm_semantic=norm_s[group_id],
                norm_lexical=norm_l[group_id],
                norm_pagerank=norm_p[group_id],
                weighted_semantic=ws,
                weighted_lexical=wl,
                weighted_pagerank=wp,
                total=ws + wl + wp,
            )
        )
    results.sort(key=lambda r: (-r.total, r.group_id))
    return results


def search(
    engine: SearchEngine,
    query: str,
    opts: SearchOptions | None = None,
    trace: SearchTrace | None = None,
) -> list[ScoredResult]:
    """Run the full pipeline for one query.

    Raises EmptyQuery for blank queries and IndexMismatch when the engine's
    artifacts were built from different corpus snapshots. An empty survivor
    set is a normal empty result, not an error.
    """
    opts = opts or SearchOptions()
    if engine.checksums and len(set(engine.checksums.values())) > 1:
        raise IndexMismatch(f"index artifacts disagree on their corpus: {dict(engine.checksums)}")
    if not query.strip() or not tokenize(query):
        raise EmptyQuery("query is empty")

    query_vector = engine.provider.embed(query.strip())
    hits = knn(engine.vectors, query_vector, k=opts.oversample_k, nprobe=opts.nprobe)
    similarities = [(ref, distance_to_similarity(d)) for ref, d in hits]
    kept = [(ref, s) for ref, s in similarities if s >= opts.threshold]
    group_scores = group_semantic_scores(kept)

    if opts.packages is not None:
        group_scores = {
            gid: s for gid, s in group_scores.items() if engine.corpus.by_id[gid].package in opts.packages
        }
    survivors = sorted(group_scores)

    raw_semantic = {gid: group_scores[gid] for gid in survivors}
    raw_lexical = engine.lexical.batch_scores(query, survivors) if survivors else {}
    raw_pagerank = {gid: float(engine.pagerank.get(gid, 0.0)) for gid in survivors}

    if trace is not None:
        trace.facet_hits = similarities
        trace.threshold_survivors = sorted({ref.group_id for ref, _ in kept})
        trace.survivors = survivors
        trace.lexical_scored = sorted(raw_lexical)
        trace.pagerank_scored = sorted(raw_pagerank)

    results = score_survivors(raw_semantic, raw_lexical, raw_pagerank, opts.weights)
    return results[: opts.limit]
