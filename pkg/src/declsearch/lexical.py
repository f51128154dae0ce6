"""BM25+ lexical scoring over group searchable text.

Scoring follows the BM25+ variant: for each distinct query term t present in
the collection,

    idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1)
    score += idf(t) * ((k1 + 1) * tf / (k1 * (1 - b + b * dl / avgdl) + tf) + delta)

A term the candidate lacks still earns its idf * delta lower bound as long
as it occurs somewhere in the collection; terms absent from every document
contribute nothing. Repeated query terms count once.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import UnknownId
from .textsplit import split_words


def tokenize(text: str, *, split_camel: bool = True) -> list[str]:
    """Lowercase word tokens; camel-case splitting is on by default."""
    return split_words(text, split_camel=split_camel)


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.5
    b: float = 0.75
    delta: float = 1.0


@dataclass
class Bm25Index:
    params: Bm25Params
    doc_count: int
    avg_doc_len: float
    doc_len: dict[int, int]
    doc_freq: dict[str, int]
    postings: dict[str, dict[int, int]] = field(repr=False)

    def batch_scores(self, query_text: str, candidate_ids: Iterable[int]) -> dict[int, float]:
        return bm25_batch(self, query_text, candidate_ids)


def build_bm25_index(docs: Mapping[int, str], params: Bm25Params | None = None) -> Bm25Index:
    """Index a doc-id -> text mapping for BM25+ scoring."""
    params = params or Bm25Params()
    postings: dict[str, dict[int, int]] = {}
    doc_len: dict[int, int] = {}
    for doc_id, text in docs.items():
        tokens = tokenize(text)
        doc_len[doc_id] = len(tokens)
        for term, count in Counter(tokens).items():
            postings.setdefault(term, {})[doc_id] = count
    doc_count = len(doc_len)
    avg_doc_len = (sum(doc_len.values()) / doc_count) if doc_count else 0.0
    doc_freq = {term: len(entry) for term, entry in postings.items()}
    return Bm25Index(
        params=params,
        doc_count=doc_count,
        avg_doc_len=avg_doc_len,
        doc_len=doc_len,
        doc_freq=doc_freq,
        postings=postings,
    )


def bm25_score(index: Bm25Index, query_tokens: Iterable[str], doc_id: int) -> float:
    """BM25+ score of one document for pre-tokenized query terms."""
    if doc_id not in index.doc_len:
        raise UnknownId(doc_id)
    k1, b, delta = index.params.k1, index.params.b, index.params.delta
    dl = index.doc_len[doc_id]
    norm = k1 * (1.0 - b + b * dl / index.avg_doc_len) if index.avg_doc_len > 0 else k1
    score = 0.0
    for term in dict.fromkeys(query_tokens):
        df = index.doc_freq.get(term, 0)
        if df == 0:
            continue
        tf = index.postings[term].get(doc_id, 0)
        idf = math.log((index.doc_count - df + 0.5) / (df + 0.5) + 1.0)
        bracket = (k1 + 1.0) * tf / (norm + tf) if tf else 0.0
        score += idf * (bracket + delta)
    return score


def bm25_batch(index: Bm25Index, query_text: str, candidate_ids: Iterable[int]) -> dict[int, float]:
    """Score several candidate documents for a raw query string."""
    tokens = tokenize(query_text)
    return {doc_id: bm25_score(index, tokens, doc_id) for doc_id in candidate_ids}


def lexical_payload(index: Bm25Index) -> dict:
    """JSON-ready form of the index."""
    return {
        "params": {"k1": index.params.k1, "b": index.params.b, "delta": index.params.delta},
        "doc_count": index.doc_count,
        "avg_doc_len": index.avg_doc_len,
        "doc_len": {str(doc_id): length for doc_id, length in sorted(index.doc_len.items())},
        "postings": {
            term: {str(doc_id): tf for doc_id, tf in sorted(entry.items())}
            for term, entry in sorted(index.postings.items())
        },
    }


def lexical_from_payload(payload: Mapping) -> Bm25Index:
    params = Bm25Params(**payload["params"])
    postings = {
        term: {int(doc_id): int(tf) for doc_id, tf in entry.items()}
        for term, entry in payload["postings"].items()
    }
    return Bm25Index(
        params=params,
        doc_count=int(payload["doc_count"]),
        avg_doc_len=float(payload["avg_doc_len"]),
        doc_len={int(doc_id): int(length) for doc_id, length in payload["doc_len"].items()},
        doc_freq={term: len(entry) for term, entry in postings.items()},
        postings=postings,
    )
