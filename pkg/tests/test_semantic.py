import math
import random

import numpy as np
import pytest

from declsearch.errors import EmptyIndex, FormatError, TooFewEntries
from declsearch.semantic import (
    FACET_CODES,
    FacetRef,
    HashingEmbedder,
    build_vector_index,
    distance_to_similarity,
    group_semantic_scores,
    knn,
    load_vectors,
    save_vectors,
    test_embedder as make_embedder,
)

def make_entries(rng, count, with_facets=True):
    entries = []
    for i in range(count):
        facet = rng.choice(["name", "docstring", "informal"]) if with_facets else "name"
        entries.append((FacetRef(i // 2, facet), f"statement about topic {i} {'x' * (i % 5)}"))
    return entries


def brute_force_knn(index, query_vec, k):
    scored = []
    for row, ref in enumerate(index.refs):
        dist = math.dist(index.matrix[row].astype(np.float64), query_vec.astype(np.float64))
        scored.append((dist, ref.group_id, FACET_CODES[ref.facet], ref))
    scored.sort(key=lambda t: (t[0], t[1], t[2]))
    return [(ref, dist) for dist, _, _, ref in scored[:k]]


def test_embedder_deterministic_and_normalized():
    emb = make_embedder(32)
    v1 = emb.embed("finite morphism of schemes")
    v2 = emb.embed("finite morphism of schemes")
    assert np.array_equal(v1, v2)
    assert np.linalg.norm(v1) == pytest.approx(1.0, abs=1e-6)
    assert v1.shape == (32,)


def test_embedder_shared_tokens_raise_cosine():
    emb = make_embedder(64)
    base = emb.embed("finite morphism of schemes")
    near = emb.embed("finite morphisms between schemes")
    far = emb.embed("prime number distribution")
    assert float(base @ near) > float(base @ far)


def test_embedder_empty_text_falls_back_to_unit_axis():
    emb = make_embedder(16)
    vec = emb.embed("")
    expected = np.zeros(16, dtype=np.float32)
    expected[0] = 1.0
    assert np.array_equal(vec, expected)


def test_embedder_rejects_tiny_dimension():
    with pytest.raises(ValueError):
        HashingEmbedder(dimension=4)


def test_embed_batch_stacks_rows():
    emb = make_embedder(16)
    texts = ["alpha", "beta", "gamma"]
    matrix = emb.embed_batch(texts)
    assert matrix.shape == (3, 16)
    for row, text in zip(matrix, texts):
        assert np.array_equal(row, emb.embed(text))


def test_distance_to_similarity_fixed_points():
    assert distance_to_similarity(0.0) == 1.0
    assert distance_to_similarity(2.0) == 0.0
    assert distance_to_similarity(math.sqrt(2.0)) == pytest.approx(0.5, abs=1e-12)
    # Out-of-range inputs clamp instead of leaving [0, 1].
    assert distance_to_similarity(2.5) == 0.0
    assert distance_to_similarity(-0.1) == 1.0


def test_distance_to_similarity_matches_cosine():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = rng.normal(size=24)
        b = rng.normal(size=24)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        cos = float(a @ b)
        dist = float(np.linalg.norm(a - b))
        assert distance_to_similarity(dist) == pytest.approx((1.0 + cos) / 2.0, abs=1e-9)


def test_build_flat_index_basics():
    rng = random.Random(0)
    entries = make_entries(rng, 10)
    index = build_vector_index(entries, make_embedder(16), mode="flat")
    assert len(index) == 10
    assert index.mode == "flat"
    assert index.matrix.dtype == np.float32
    assert index.dimension == 16


def test_build_rejects_bad_mode_and_nlist():
    entries = make_entries(random.Random(0), 4)
    emb = make_embedder(16)
    with pytest.raises(ValueError):
        build_vector_index(entries, emb, mode="hnsw")
    with pytest.raises(ValueError):
        build_vector_index(entries, emb, mode="ivf", nlist=0)
    with pytest.raises(TooFewEntries):
        build_vector_index(entries, emb, mode="ivf", nlist=10)


def test_knn_finds_self_first():
    phrases = [
        "commutative ring localization",
        "etale cohomology descent",
        "smooth projective variety",
        "galois group extension",
        "measure theoretic entropy",
        "hyperbolic geodesic flow",
        "modular form eigenvalue",
        "symplectic reduction orbit",
    ]
    emb = make_embedder(64)
    entries = [(FacetRef(i, "name"), text) for i, text in enumerate(phrases)]
    index = build_vector_index(entries, emb, mode="flat")
    for i, text in enumerate(phrases):
        hits = knn(index, emb.embed(text), k=1)
        assert hits[0][0].group_id == i
        assert hits[0][1] == pytest.approx(0.0, abs=1e-3)


def test_knn_k_larger_than_index():
    entries = make_entries(random.Random(1), 5)
    index = build_vector_index(entries, make_embedder(16), mode="flat")
    hits = knn(index, make_embedder(16).embed("anything"), k=50)
    assert len(hits) == 5


def test_knn_empty_index_raises():
    index = build_vector_index([], make_embedder(16), mode="flat")
    with pytest.raises(EmptyIndex):
        knn(index, make_embedder(16).embed("q"), k=3)


def test_knn_tie_break_by_group_then_facet():
    # Same text for every entry: all distances tie exactly.
    entries = [
        (FacetRef(3, "informal"), "same text"),
        (FacetRef(1, "docstring"), "same text"),
        (FacetRef(1, "name"), "same text"),
        (FacetRef(2, "name"), "same text"),
    ]
    emb = make_embedder(16)
    index = build_vector_index(entries, emb, mode="flat")
    hits = knn(index, emb.embed("same text"), k=4)
    order = [(h[0].group_id, h[0].facet) for h in hits]
    assert order == [(1, "name"), (1, "docstring"), (2, "name"), (3, "informal")]


def test_flat_knn_matches_brute_force():
    rng = random.Random(6)
    emb = make_embedder(32)
    entries = make_entries(rng, 60)
    index = build_vector_index(entries, emb, mode="flat")
    for _ in range(10):
        query = emb.embed(f"topic {rng.randint(0, 80)}")
        got = knn(index, query, k=7)
        want = brute_force_knn(index, query, 7)
        assert [h[0] for h in got] == [w[0] for w in want]
        for (_, gd), (_, wd) in zip(got, want):
            assert gd == pytest.approx(wd, abs=1e-5)


def test_ivf_full_probe_matches_flat():
    rng = random.Random(13)
    emb = make_embedder(32)
    for trial in range(20):
        count = rng.randint(1, 120)
        entries = make_entries(rng, count)
        nlist = rng.randint(1, max(1, count))
        flat = build_vector_index(entries, emb, mode="flat")
        ivf = build_vector_index(entries, emb, mode="ivf", nlist=nlist, seed=trial)
        query = emb.embed(f"probe text {trial}")
        k = rng.randint(1, 10)
        flat_hits = knn(flat, query, k=k)
        ivf_hits = knn(ivf, query, k=k, nprobe=nlist)
        assert [h[0] for h in flat_hits] == [h[0] for h in ivf_hits]
        assert [h[1] for h in flat_hits] == [h[1] for h in ivf_hits]


def test_ivf_cells_partition_entries():
    rng = random.Random(21)
    emb = make_embedder(16)
    entries = make_entries(rng, 50)
    index = build_vector_index(entries, emb, mode="ivf", nlist=8, seed=3)
    rows = sorted(r for cell in index.cells for r in cell)
    assert rows == list(range(50))
    # Every row sits in the cell of its nearest centroid.
    dists = np.linalg.norm(index.matrix[:, None, :] - index.centroids[None, :, :], axis=2)
    nearest = dists.argmin(axis=1)
    for cell_idx, cell in enumerate(index.cells):
        for row in cell:
            assert dists[row, cell_idx] == pytest.approx(dists[row, nearest[row]], abs=1e-6)


def test_ivf_probe_subset_of_flat():
    rng = random.Random(30)
    emb = make_embedder(32)
    entries = make_entries(rng, 100)
    index = build_vector_index(entries, emb, mode="ivf", nlist=10, seed=1)
    query = emb.embed("some query")
    partial = knn(index, query, k=5, nprobe=2)
    full = {ref for ref, _ in knn(index, query, k=100, nprobe=10)}
    assert all(ref in full for ref, _ in partial)


def test_group_semantic_scores_takes_max():
    hits = [
        (FacetRef(1, "name"), 0.9),
        (FacetRef(1, "informal"), 0.7),
        (FacetRef(2, "docstring"), 0.8),
        (FacetRef(1, "docstring"), 0.95),
    ]
    assert group_semantic_scores(hits) == {1: 0.95, 2: 0.8}


def test_save_load_roundtrip(tmp_path):
    rng = random.Random(2)
    emb = make_embedder(24)
    entries = make_entries(rng, 30)
    index = build_vector_index(entries, emb, mode="ivf", nlist=4, seed=9)
    save_vectors(index, tmp_path / "vectors.bin", tmp_path / "vectors.meta.json")
    loaded = load_vectors(tmp_path / "vectors.bin", tmp_path / "vectors.meta.json")
    assert loaded.refs == index.refs
    assert np.array_equal(loaded.matrix, index.matrix)
    assert loaded.mode == "ivf" and loaded.nlist == 4
    query = emb.embed("roundtrip query")
    assert knn(loaded, query, k=5, nprobe=4) == knn(index, query, k=5, nprobe=4)


def test_save_is_byte_identical(tmp_path):
    rng = random.Random(14)
    emb = make_embedder(16)
    entries = make_entries(rng, 12)
    index = build_vector_index(entries, emb, mode="flat")
    save_vectors(index, tmp_path / "a.bin", tmp_path / "a.json")
    save_vectors(index, tmp_path / "b.bin", tmp_path / "b.json")
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_load_rejects_corrupt_magic(tmp_path):
    emb = make_embedder(16)
    index = build_vector_index(make_entries(random.Random(0), 4), emb, mode="flat")
    save_vectors(index, tmp_path / "v.bin", tmp_path / "v.json")
    blob = bytearray((tmp_path / "v.bin").read_bytes())
    blob[0] = ord("X")
    (tmp_path / "v.bin").write_bytes(bytes(blob))
    with pytest.raises(FormatError):
        load_vectors(tmp_path / "v.bin", tmp_path / "v.json")


def test_load_rejects_truncated_file(tmp_path):
    emb = make_embedder(16)
    index = build_vector_index(make_entries(random.Random(0), 4), emb, mode="flat")
    save_vectors(index, tmp_path / "v.bin", tmp_path / "v.json")
    blob = (tmp_path / "v.bin").read_bytes()
    (tmp_path / "v.bin").write_bytes(blob[: len(blob) - 7])
    with pytest.raises(FormatError):
        load_vectors(tmp_path / "v.bin", tmp_path / "v.json")
