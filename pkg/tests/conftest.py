"""Shared fixtures: corpus writers, the golden scoring fixture, warmup."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from declsearch.corpus import (
    Corpus,
    CorpusManifest,
    Declaration,
    LoadDiagnostics,
    Span,
    StatementGroup,
    facet_texts,
    load_corpus,
    searchable_text,
)
from declsearch.graph import build_group_graph
from declsearch.kernels import warmup
from declsearch.lexical import build_bm25_index
from declsearch.ranker import SearchEngine
from declsearch.semantic import EmbeddingProvider, FacetRef, build_vector_index


@pytest.fixture(scope="session", autouse=True)
def _kernel_warmup():
    warmup()


def make_group(
    gid: int,
    name: str,
    package: str = "Mathlib",
    source_file: str | None = None,
    statement_text: str | None = None,
    docstring: str | None = None,
    informal: str | None = None,
    dependency_ids: list[int] | None = None,
    span: tuple[int, int] = (1, 4),
) -> dict:
    return {
        "id": gid,
        "primary_decl_name": name,
        "package": package,
        "source_file": source_file or f"{package}/Generated/File{gid}.lean",
        "span": {"start_line": span[0], "end_line": span[1]},
        "statement_text": statement_text or f"theorem {name.rsplit('.', 1)[-1]} : True",
        "docstring": docstring,
        "informal_description": informal,
        "members": [
            {
                "lean_name": name,
                "kind": "theorem",
                "docstring": docstring,
                "start_line": span[0],
                "end_line": span[1],
            }
        ],
        "dependency_ids": dependency_ids or [],
    }


def write_corpus_dir(path: Path, groups: list[dict], dimension: int = 64) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    (path / "groups.jsonl").write_text("".join(json.dumps(g) + "\n" for g in groups))
    (path / "manifest.json").write_text(
        json.dumps(
            {
                "format_version": 1,
                "group_count": len(groups),
                "embedding_dimension": dimension,
                "provider_name": f"hashing-{dimension}",
                "created_at": "2026-08-15T00:00:00Z",
            }
        )
    )
    return path


# --- golden scoring fixture ---------------------------------------------
#
# Ten survivors. Eight carry the published normalized signal values; two
# anchors pin the min/max of each signal so min-max normalization over the
# survivor set reproduces those values exactly. Raw ranges: semantic
# [0.5988, 0.6533], lexical [2.4525, 7.2412], pagerank [0.0, 0.4057].

GOLDEN_QUERY = "finite morphism schemes"

SEM_LO, SEM_HI = 0.5988, 0.6533
LEX_LO, LEX_HI = 2.4525, 7.2412
PR_LO, PR_HI = 0.0, 0.4057

# name, norm_semantic, norm_lexical, norm_pagerank
GOLDEN_NORMS = [
    ("AlgebraicGeometry.IsFinite.instLocallyOfFiniteType", 1.0000, 0.9622, 0.0250),
    ("AlgebraicGeometry.IsFinite.instIsIntegralHom", 0.8840, 0.9415, 0.0175),
    ("AlgebraicGeometry.IsFinite.instIsProperOfIsFinite", 0.8202, 0.9007, 0.0000),
    ("AlgebraicGeometry.IsProper.instOfIsFinite", 0.8202, 0.8683, 0.0140),
    ("AlgebraicGeometry.IsFinite.iff_isIntegralHom_and_locallyOfFiniteType", 0.7204, 0.9275, 0.0415),
    ("AlgebraicGeometry.Scheme.Hom.toRationalMap", 0.9188, 0.0418, 0.0130),
    ("AlgebraicGeometry.Scheme.Hom.toPartialMap", 0.8860, 0.0313, 0.0495),
    ("AlgebraicGeometry.Scheme.Cover.Hom.comp", 0.8191, 0.0209, 0.0210),
    ("Anchor.lexicalMax", 0.0, 1.0, 0.0),
    ("Anchor.pagerankMax", 0.0, 0.0, 1.0),
]

HYBRID_TOP5 = [
    ("AlgebraicGeometry.IsFinite.instLocallyOfFiniteType", 1.9672),
    ("AlgebraicGeometry.IsFinite.instIsIntegralHom", 1.8290),
    ("AlgebraicGeometry.IsFinite.instIsProperOfIsFinite", 1.7209),
    ("AlgebraicGeometry.IsProper.instOfIsFinite", 1.6913),
    ("AlgebraicGeometry.IsFinite.iff_isIntegralHom_and_locallyOfFiniteType", 1.6562),
]

NO_LEXICAL_TOP5 = [
    ("AlgebraicGeometry.IsFinite.instLocallyOfFiniteType", 1.0050),
    ("AlgebraicGeometry.Scheme.Hom.toRationalMap", 0.9214),
    ("AlgebraicGeometry.Scheme.Hom.toPartialMap", 0.8959),
    ("AlgebraicGeometry.IsFinite.instIsIntegralHom", 0.8875),
    ("AlgebraicGeometry.Scheme.Cover.Hom.comp", 0.8233),
]


class MappingProvider(EmbeddingProvider):
    """Embeds only pre-registered texts, via a fixed text->vector table."""

    def __init__(self, dimension: int, table: dict[str, np.ndarray]):
        self.name = f"mapping-{dimension}"
        self.dimension = dimension
        self.table = table

    def embed(self, text: str) -> np.ndarray:
        return self.table[text]


class InjectedLexical:
    """Stands in for a BM25+ index with predetermined raw scores."""

    def __init__(self, scores: dict[int, float]):
        self.scores = scores

    def batch_scores(self, query_text: str, candidate_ids) -> dict[int, float]:
        return {gid: self.scores[gid] for gid in candidate_ids}


def _golden_raw(norms: tuple[float, float, float]) -> tuple[float, float, float]:
    s, l, p = norms
    return (
        SEM_LO + s * (SEM_HI - SEM_LO),
        LEX_LO + l * (LEX_HI - LEX_LO),
        PR_LO + p * (PR_HI - PR_LO),
    )


def build_golden_engine() -> tuple[SearchEngine, dict[str, int]]:
    """The worked-example engine with all three raw signals injected."""
    dimension = 16
    corpus_groups = []
    for gid, (name, *_rest) in enumerate(GOLDEN_NORMS):
        corpus_groups.append(
            StatementGroup(
                id=gid,
                primary_decl_name=name,
                package="Mathlib",
                source_file="Mathlib/AlgebraicGeometry/Morphisms.lean",
                span=Span(1, 4),
                statement_text=f"theorem {name.rsplit('.', 1)[-1]} : True",
                docstring=None,
                informal_description=None,
                members=[Declaration(name, "theorem")],
                dependency_ids=[],
            )
        )
    corpus = Corpus(
        manifest=CorpusManifest(1, len(corpus_groups), dimension, f"mapping-{dimension}", "2026-08-15T00:00:00Z"),
        groups=corpus_groups,
        by_id={g.id: g for g in corpus_groups},
        name_index={g.primary_decl_name: g.id for g in corpus_groups},
        packages=["Mathlib"],
        diagnostics=LoadDiagnostics(),
    )

    # one vector per group: cos = 2*sim - 1 against the query direction e0,
    # with a distinct orthogonal component per group
    query_vec = np.zeros(dimension)
    query_vec[0] = 1.0
    table: dict[str, np.ndarray] = {GOLDEN_QUERY: query_vec}
    lex_scores: dict[int, float] = {}
    pr_scores: dict[int, float] = {}
    facet_entries: list[tuple[FacetRef, str]] = []
    for group in corpus.groups:
        raw_sem, raw_lex, raw_pr = _golden_raw(GOLDEN_NORMS[group.id][1:])
        cos = 2.0 * raw_sem - 1.0
        vec = np.zeros(dimension)
        vec[0] = cos
        vec[1 + group.id] = np.sqrt(1.0 - cos * cos)
        for facet, text in facet_texts(group):
            table[text] = vec
            facet_entries.append((FacetRef(group.id, facet), text))
        lex_scores[group.id] = raw_lex
        pr_scores[group.id] = raw_pr

    provider = MappingProvider(dimension, table)
    engine = SearchEngine(
        corpus=corpus,
        graph=build_group_graph(corpus),
        pagerank=pr_scores,
        lexical=InjectedLexical(lex_scores),
        vectors=build_vector_index(facet_entries, provider, mode="flat"),
        provider=provider,
    )
    ids = {name: gid for gid, (name, *_r) in enumerate(GOLDEN_NORMS)}
    return engine, ids


@pytest.fixture(scope="session")
def golden_engine() -> tuple[SearchEngine, dict[str, int]]:
    return build_golden_engine()


# --- disk fixture: real signals, tuned to the worked example's headline --
#
# Unlike the injected golden engine, this corpus exercises the real hash
# embedder, BM25+ index, and PageRank. Texts and edges are arranged so the
# fixture query ranks instLocallyOfFiniteType first with default weights
# and toRationalMap (semantically close, maximally central) second when
# lexical scoring is disabled.

def golden_disk_groups() -> list[dict]:
    path = "Mathlib/AlgebraicGeometry/Morphisms/FiniteType.lean"
    rows = [
        (
            "AlgebraicGeometry.IsFinite.instLocallyOfFiniteType",
            "a finite morphism of schemes is locally of finite type",
            "Finite morphisms of schemes are locally of finite type.",
            [1],
        ),
        (
            "AlgebraicGeometry.Scheme.Hom.toRationalMap",
            "a morphism of schemes induces a rational map of schemes",
            None,
            [],
        ),
        (
            "AlgebraicGeometry.IsFinite.instIsIntegralHom",
            "a finite morphism is integral",
            None,
            [0, 1],
        ),
        (
            "AlgebraicGeometry.IsProper.instOfIsFinite",
            "finiteness implies properness for closed immersions",
            None,
            [0, 1],
        ),
        (
            "AlgebraicGeometry.IsFinite.iff_isIntegralHom_and_locallyOfFiniteType",
            "finiteness is equivalent to integral together with locally of finite type",
            None,
            [0, 1, 2],
        ),
        (
            "AlgebraicGeometry.Scheme.Hom.toPartialMap",
            "a partial map obtained from a homomorphism of sheaves",
            None,
            [1],
        ),
        (
            "AlgebraicGeometry.Scheme.Cover.Hom.comp",
            "composition of covering homomorphisms in the category",
            None,
            [1, 5],
        ),
        (
            "AlgebraicGeometry.Spec.structureSheaf",
            "the structure sheaf on the prime spectrum of a commutative ring",
            None,
            [1],
        ),
    ]
    return [
        make_group(
            gid,
            name,
            source_file=path,
            statement_text=f"instance {name.rsplit('.', 1)[-1]} : P{gid}",
            docstring=doc,
            informal=informal,
            dependency_ids=deps,
        )
        for gid, (name, informal, doc, deps) in enumerate(rows)
    ]


@pytest.fixture()
def golden_disk_dir(tmp_path: Path) -> Path:
    return write_corpus_dir(tmp_path / "golden_corpus", golden_disk_groups())


# --- toy corpus for end-to-end runs --------------------------------------

TOY_TOPICS = [
    "the composition of two continuous maps is continuous",
    "a finite morphism of schemes is locally of finite type",
    "the derivative of a constant function is zero everywhere",
    "every compact subset of a metric space is closed and bounded",
    "the kernel of a ring homomorphism is a two sided ideal",
    "a subgroup of an abelian group is normal",
    "the limit of a sum equals the sum of the limits",
    "an integrable function on a finite measure space has finite integral",
    "the transpose of an invertible matrix is invertible",
    "a polynomial over a field has at most degree many roots",
    "the union of two open sets is open",
    "every cauchy sequence in the real numbers converges",
    "the determinant of a product equals the product of determinants",
    "a prime ideal of a commutative ring is radical",
    "the inverse of a bijective function is bijective",
    "an orthogonal projection onto a closed subspace is linear",
    "the fundamental group of the circle is the integers",
    "a bounded monotone sequence of real numbers converges",
    "the tensor product of vector spaces is associative up to isomorphism",
    "every field is an integral domain",
]


def toy_corpus_groups() -> list[dict]:
    packages = ["Mathlib", "Std", "Aesop"]
    groups = []
    for gid, informal in enumerate(TOY_TOPICS):
        package = packages[gid % len(packages)]
        words = [w.capitalize() for w in informal.split()[:3]]
        name = f"{package}.Topic{gid}.{''.join(words)}"
        deps = sorted({d for d in ((gid % 5, gid // 3) if gid > 4 else ()) if d < gid})
        groups.append(
            make_group(
                gid,
                name,
                package=package,
                source_file=f"{package}/Cat{gid % 4}/Topic{gid}.lean",
                statement_text=f"theorem topic_{gid} : P{gid} -> Q{gid}",
                docstring=f"Fact {gid}: {informal}." if gid % 2 == 0 else None,
                informal=informal,
                dependency_ids=deps,
            )
        )
    return groups


@pytest.fixture()
def toy_corpus_dir(tmp_path: Path) -> Path:
    return write_corpus_dir(tmp_path / "corpus", toy_corpus_groups())


@pytest.fixture()
def toy_corpus(toy_corpus_dir: Path) -> Corpus:
    return load_corpus(toy_corpus_dir)


def brute_force_reference(corpus: Corpus, provider, query: str, threshold: float = 0.525):
    """Independent scoring path used as an oracle for end-to-end checks."""
    import math

    from declsearch.graph import pagerank as graph_pagerank
    from declsearch.lexical import bm25_batch

    qv = provider.embed(query)
    sems = {}
    for group in corpus.groups:
        best = -1.0
        for _facet, text in facet_texts(group):
            tv = provider.embed(text)
            d = math.dist(qv, tv)
            sim = 1.0 - d * d / 4.0
            best = max(best, sim)
        if best >= threshold:
            sems[group.id] = best
    bm25 = build_bm25_index({g.id: searchable_text(g) for g in corpus.groups})
    graph = build_group_graph(corpus)
    pr = graph_pagerank(graph).transformed
    ids = sorted(sems)
    lex = bm25_batch(bm25, query, ids)
    def norm(m):
        if not m:
            return {}
        lo, hi = min(m.values()), max(m.values())
        if hi == lo:
            return {k: 1.0 for k in m}
        return {k: (v - lo) / (hi - lo) for k, v in m.items()}
    ns, nl, np_ = norm(sems), norm(lex), norm({g: pr[g] for g in ids})
    totals = {g: ns[g] + nl[g] + 0.2 * np_[g] for g in ids}
    return sorted(ids, key=lambda g: (-totals[g], g)), totals
