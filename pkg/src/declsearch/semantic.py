"""Facet embeddings, exact and inverted-file kNN, similarity mapping.

Every statement group contributes up to three embedded texts (name,
docstring, informal). The index stores one vector per facet; searches return
facet hits that the ranker aggregates per group. Distances are Euclidean
between unit vectors, mapped to [0,1] similarity by 1 - d^2/4.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyIndex, FormatError, TooFewEntries
from .kernels import pairwise_sqdist
from .textsplit import split_words

FACET_CODES = {"name": 0, "docstring": 1, "informal": 2}
CODE_FACETS = {code: facet for facet, code in FACET_CODES.items()}

VECTORS_MAGIC = b"DSVX"
VECTORS_VERSION = 1

KMEANS_ITERATIONS = 25


@dataclass(frozen=True)
class FacetRef:
    """Identifies one embedded facet of one group."""

    group_id: int
    facet: str


class EmbeddingProvider:
    """Text-to-unit-vector contract. Deterministic per text."""

    name: str
    dimension: int

    def embed(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.embed(t) for t in texts]) if texts else np.zeros((0, self.dimension))


class HashingEmbedder(EmbeddingProvider):
    """Deterministic offline embedder: hashed bag of lowercased tokens.

    Each token lands in a bucket chosen by a stable hash, with a hash-chosen
    sign; the accumulated vector is L2-normalized. Texts sharing more tokens
    get higher cosine similarity, which is all the test pipeline needs.
    """

    def __init__(self, dimension: int):
        if dimension < 8:
            raise ValueError("dimension must be at least 8")
        self.name = f"hashing-{dimension}"
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension)
        for token in split_words(text):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "little")
            bucket = value % self.dimension
            sign = 1.0 if (value >> 63) & 1 == 0 else -1.0
            vec[bucket] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return vec / norm


def test_embedder(dimension: int = 64) -> EmbeddingProvider:
    """Deterministic embedding provider for offline use."""
    return HashingEmbedder(dimension)


class HttpEmbeddingProvider(EmbeddingProvider):
    """Provider backed by an HTTP service.

    Request: POST {"texts": [...]} ; response: {"vectors": [[...], ...]}.
    """

    def __init__(self, endpoint: str, dimension: int, name: str = "http", timeout: float = 30.0):
        self.endpoint = endpoint
        self.dimension = dimension
        self.name = name
        self.timeout = timeout

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        import httpx

        if not texts:
            return np.zeros((0, self.dimension))
        response = httpx.post(self.endpoint, json={"texts": list(texts)}, timeout=self.timeout)
        response.raise_for_status()
        vectors = np.asarray(response.json()["vectors"], dtype=np.float64)
        if vectors.shape != (len(texts), self.dimension):
            raise FormatError(
                f"embedding service returned shape {vectors.shape}, expected {(len(texts), self.dimension)}"
            )
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return vectors / norms


@dataclass
class VectorIndex:
    refs: list[FacetRef]
    matrix: np.ndarray  # float32, one row per ref
    dimension: int
    mode: str  # "flat" or "ivf"
    nlist: int = 1
    seed: int = 0
    centroids: np.ndarray | None = None
    cells: list[np.ndarray] | None = None  # entry indices per centroid

    def __len__(self) -> int:
        return len(self.refs)


def _kmeans(matrix: np.ndarray, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded k-means++ clustering, at most KMEANS_ITERATIONS sweeps."""
    rng = np.random.default_rng(seed)
    n = matrix.shape[0]
    centroids = np.empty((k, matrix.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = matrix[first]
    closest = pairwise_sqdist(matrix, centroids[:1]).ravel()
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=closest / total))
        centroids[i] = matrix[pick]
        closest = np.minimum(closest, pairwise_sqdist(matrix, centroids[i : i + 1]).ravel())
    assignment = np.argmin(pairwise_sqdist(matrix, centroids), axis=1)
    for _sweep in range(KMEANS_ITERATIONS):
        for c in range(k):
            mask = assignment == c
            if mask.any():
                centroids[c] = matrix[mask].mean(axis=0)
        new_assignment = np.argmin(pairwise_sqdist(matrix, centroids), axis=1)
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
    return centroids, assignment


def build_vector_index(
    facets: Sequence[tuple[FacetRef, str]],
    provider: EmbeddingProvider,
    mode: str = "flat",
    nlist: int = 1,
    seed: int = 0,
) -> VectorIndex:
    """Embed facet texts and build a searchable index over them."""
    if mode not in ("flat", "ivf"):
        raise ValueError(f"unknown index mode: {mode}")
    if nlist < 1:
        raise ValueError("nlist must be at least 1")
    if mode == "ivf" and nlist > len(facets):
        raise TooFewEntries(f"ivf needs at least nlist={nlist} entries, got {len(facets)}")
    refs = [ref for ref, _ in facets]
    texts = [text for _, text in facets]
    vectors = provider.embed_batch(texts).astype(np.float32)
    index = VectorIndex(
        refs=refs,
        matrix=vectors.reshape(len(refs), provider.dimension),
        dimension=provider.dimension,
        mode=mode,
        nlist=nlist if mode == "ivf" else 1,
        seed=seed,
    )
    if mode == "ivf":
        centroids, assignment = _kmeans(vectors.astype(np.float64), nlist, seed)
        index.centroids = centroids
        index.cells = [np.flatnonzero(assignment == c) for c in range(nlist)]
    return index


def _rank_hits(
    index: VectorIndex, candidate_idx: np.ndarray, query: np.ndarray, k: int
) -> list[tuple[FacetRef, float]]:
    sq = pairwise_sqdist(query[None, :], index.matrix[candidate_idx].astype(np.float64)).ravel()
    gids = np.fromiter((index.refs[i].group_id for i in candidate_idx), dtype=np.int64, count=len(candidate_idx))
    codes = np.fromiter((FACET_CODES[index.refs[i].facet] for i in candidate_idx), dtype=np.int64, count=len(candidate_idx))
    order = np.lexsort((codes, gids, sq))[:k]
    return [(index.refs[candidate_idx[i]], float(np.sqrt(sq[i]))) for i in order]


def knn(index: VectorIndex, query_vector: np.ndarray, k: int, nprobe: int = 1) -> list[tuple[FacetRef, float]]:
    """Nearest facet entries by Euclidean distance, ascending.

    Ties break by (group_id, facet). In ivf mode only the nprobe nearest
    cells are scanned; flat mode ignores nprobe and is exact.
    """
    if len(index) == 0:
        raise EmptyIndex("vector index has no entries")
    if k < 1:
        raise ValueError("k must be at least 1")
    query = np.asarray(query_vector, dtype=np.float64).ravel()
    if index.mode == "flat" or index.centroids is None:
        candidates = np.arange(len(index))
    else:
        nprobe = max(1, min(nprobe, index.nlist))
        cdist = pairwise_sqdist(query[None, :], index.centroids).ravel()
        probe = np.lexsort((np.arange(index.nlist), cdist))[:nprobe]
        parts = [index.cells[c] for c in probe if index.cells[c].size]
        if not parts:
            return []
        candidates = np.sort(np.concatenate(parts))
    return _rank_hits(index, candidates, query, k)


def distance_to_similarity(distance: float) -> float:
    """Map Euclidean distance between unit vectors to [0,1].

    1 - d^2/4, i.e. (1 + cosine)/2. Out-of-range distances are clamped.
    """
    d = min(max(float(distance), 0.0), 2.0)
    return 1.0 - d * d / 4.0


def group_semantic_scores(hits: Iterable[tuple[FacetRef, float]]) -> dict[int, float]:
    """Best similarity per group over its retrieved facets."""
    scores: dict[int, float] = {}
    for ref, similarity in hits:
        if similarity > scores.get(ref.group_id, -1.0):
            scores[ref.group_id] = similarity
    return scores


def save_vectors(index: VectorIndex, bin_path: str | Path, meta_path: str | Path) -> None:
    """Write vectors.bin (little-endian) and vectors.meta.json."""
    with open(bin_path, "wb") as fh:
        fh.write(struct.pack("<4sII", VECTORS_MAGIC, VECTORS_VERSION, index.dimension))
        fh.write(struct.pack("<Q", len(index.refs)))
        for ref, row in zip(index.refs, index.matrix):
            fh.write(struct.pack("<QB", ref.group_id, FACET_CODES[ref.facet]))
            fh.write(np.asarray(row, dtype="<f4").tobytes())
    meta = {
        "mode": index.mode,
        "nlist": index.nlist,
        "seed": index.seed,
        "centroids": None if index.centroids is None else [[float(x) for x in row] for row in index.centroids],
    }
    Path(meta_path).write_text(json.dumps(meta, indent=1) + "\n")


def load_vectors(bin_path: str | Path, meta_path: str | Path) -> VectorIndex:
    """Read an index written by save_vectors; ivf cells are reassigned."""
    data = Path(bin_path).read_bytes()
    if data[:4] != VECTORS_MAGIC:
        raise FormatError("bad magic in vectors.bin", path=str(bin_path))
    version, dimension = struct.unpack_from("<II", data, 4)
    if version != VECTORS_VERSION:
        raise FormatError(f"unsupported vectors.bin version {version}", path=str(bin_path))
    (count,) = struct.unpack_from("<Q", data, 12)
    offset = 20
    entry_size = 9 + 4 * dimension
    if len(data) != offset + count * entry_size:
        raise FormatError("vectors.bin length does not match its header", path=str(bin_path))
    refs: list[FacetRef] = []
    matrix = np.empty((count, dimension), dtype=np.float32)
    for i in range(count):
        group_id, code = struct.unpack_from("<QB", data, offset)
        offset += 9
        if code not in CODE_FACETS:
            raise FormatError(f"unknown facet code {code}", path=str(bin_path))
        refs.append(FacetRef(group_id, CODE_FACETS[code]))
        matrix[i] = np.frombuffer(data, dtype="<f4", count=dimension, offset=offset)
        offset += 4 * dimension
    meta = json.loads(Path(meta_path).read_text())
    index = VectorIndex(
        refs=refs,
        matrix=matrix,
        dimension=dimension,
        mode=meta["mode"],
        nlist=int(meta["nlist"]),
        seed=int(meta["seed"]),
    )
    if meta.get("centroids") is not None:
        index.centroids = np.asarray(meta["centroids"], dtype=np.float64)
        assignment = np.argmin(pairwise_sqdist(matrix.astype(np.float64), index.centroids), axis=1)
        index.cells = [np.flatnonzero(assignment == c) for c in range(index.nlist)]
    return index
