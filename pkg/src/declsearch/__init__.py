"""Hybrid search over formal-language declaration corpora.

Ranks statement groups by fusing facet-level semantic similarity, BM25+
lexical relevance, and log-transformed PageRank over the group dependency
graph. Exposed as a library, an HTTP API, an MCP stdio tool server, and a
CLI.
"""

from .corpus import (
    Corpus,
    CorpusManifest,
    Declaration,
    Span,
    StatementGroup,
    facet_texts,
    group_declarations,
    load_corpus,
    path_keywords,
    searchable_text,
)
from .errors import (
    DeclSearchError,
    EmptyGraph,
    EmptyIndex,
    EmptyInput,
    EmptyQuery,
    FormatError,
    GenerationError,
    IndexMismatch,
    MismatchedEngines,
    ParseError,
    TooFewEntries,
    UnknownId,
    VersionError,
    WrongArity,
)
from .graph import (
    DependencyGraph,
    PageRankScores,
    build_group_graph,
    condensation_topo_order,
    dependencies,
    dependents,
    log_transform,
    pagerank,
)
from .lexical import Bm25Index, Bm25Params, bm25_batch, bm25_score, build_bm25_index, tokenize
from .ranker import (
    ScoredResult,
    SearchEngine,
    SearchOptions,
    SearchTrace,
    Weights,
    combine,
    min_max_normalize,
    search,
)
from .semantic import (
    EmbeddingProvider,
    FacetRef,
    HttpEmbeddingProvider,
    VectorIndex,
    build_vector_index,
    distance_to_similarity,
    group_semantic_scores,
    knn,
    test_embedder,
)
from .store import build_index, corpus_checksum, in_memory_engine, load_engine

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
