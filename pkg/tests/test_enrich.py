import random

import pytest

from declsearch.corpus import load_corpus
from declsearch.enrich import (
    GenerationClient,
    GenerationError,
    TranslationState,
    append_record,
    apply_translations,
    build_prompt,
    load_state,
    new_state,
    translate_corpus,
)
from declsearch.errors import FormatError
from declsearch.graph import build_group_graph, condensation_topo_order

from conftest import make_group, write_corpus_dir


class EchoClient(GenerationClient):
    """Returns a canned translation; records every prompt it sees."""

    def __init__(self, fail_ids=(), blank_ids=()):
        self.prompts = []
        self.fail_ids = set(fail_ids)
        self.blank_ids = set(blank_ids)

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        marker = prompt.split("theorem g", 1)[1].split(" ", 1)[0] if "theorem g" in prompt else "?"
        gid = int(marker) if marker.isdigit() else -1
        if gid in self.fail_ids:
            raise GenerationError(f"backend rejected group {gid}")
        if gid in self.blank_ids:
            return "   "
        return f"translation of group {gid}"


def chain_corpus(tmp_path, n=4):
    # g0 <- g1 <- g2 <- ... (each depends on the previous)
    groups = []
    for i in range(n):
        deps = [i - 1] if i else []
        groups.append(
            make_group(i, f"Chain.g{i}", statement_text=f"theorem g{i} : True", dependency_ids=deps)
        )
    return load_corpus(write_corpus_dir(tmp_path, groups))


def test_build_prompt_contains_statement_and_deps(tmp_path):
    corpus = chain_corpus(tmp_path, 3)
    prompt = build_prompt(corpus.by_id[2], {1: "the previous lemma"}, dep_names={1: "Chain.g1"})
    assert "theorem g2 : True" in prompt
    assert "- Chain.g1: the previous lemma" in prompt
    assert "Docstring" not in prompt
    assert prompt == build_prompt(corpus.by_id[2], {1: "the previous lemma"}, dep_names={1: "Chain.g1"})


def test_build_prompt_docstring_section(tmp_path):
    groups = [make_group(0, "A.b", docstring="A helpful docstring.")]
    corpus = load_corpus(write_corpus_dir(tmp_path, groups))
    prompt = build_prompt(corpus.by_id[0], {})
    assert "Docstring:" in prompt
    assert "A helpful docstring." in prompt


def test_build_prompt_untranslated_dep_is_name_only(tmp_path):
    corpus = chain_corpus(tmp_path, 2)
    prompt = build_prompt(corpus.by_id[1], {}, dep_names={0: "Chain.g0"})
    assert "- Chain.g0" in prompt
    assert "- Chain.g0:" not in prompt


def test_build_prompt_safe_with_braces(tmp_path):
    groups = [make_group(0, "A.b", statement_text="theorem b : {x // P x} = {y}")]
    corpus = load_corpus(write_corpus_dir(tmp_path, groups))
    prompt = build_prompt(corpus.by_id[0], {})
    assert "{x // P x}" in prompt


def test_new_state_orders_dependencies_first(tmp_path):
    corpus = chain_corpus(tmp_path, 4)
    graph = build_group_graph(corpus)
    state = new_state(corpus, graph)
    assert state.pending == [0, 1, 2, 3]
    assert state.done == {} and state.failed == {}


def test_translate_chain_passes_context_forward(tmp_path):
    corpus = chain_corpus(tmp_path, 3)
    graph = build_group_graph(corpus)
    client = EchoClient()
    state = translate_corpus(corpus, graph, client)
    assert state.done == {
        0: "translation of group 0",
        1: "translation of group 1",
        2: "translation of group 2",
    }
    assert state.pending == []
    # Later prompts embed the dependency's finished translation.
    assert "translation of group 0" in client.prompts[1]
    assert "translation of group 1" in client.prompts[2]


def test_failure_isolated_to_one_group(tmp_path):
    corpus = chain_corpus(tmp_path, 3)
    graph = build_group_graph(corpus)
    state = translate_corpus(corpus, graph, EchoClient(fail_ids={1}))
    assert set(state.done) == {0, 2}
    assert 1 in state.failed
    assert "rejected" in state.failed[1]


def test_blank_generation_marked_failed(tmp_path):
    corpus = chain_corpus(tmp_path, 2)
    graph = build_group_graph(corpus)
    state = translate_corpus(corpus, graph, EchoClient(blank_ids={1}))
    assert state.done == {0: "translation of group 0"}
    assert state.failed[1] == "empty generation"


def test_limit_counts_processed_groups(tmp_path):
    corpus = chain_corpus(tmp_path, 5)
    graph = build_group_graph(corpus)
    client = EchoClient()
    state = translate_corpus(corpus, graph, client, limit=2)
    assert len(state.done) == 2
    assert state.pending == [2, 3, 4]
    assert len(client.prompts) == 2


def test_resume_skips_finished_groups(tmp_path):
    corpus = chain_corpus(tmp_path, 4)
    graph = build_group_graph(corpus)
    first_client = EchoClient()
    state = translate_corpus(corpus, graph, first_client, limit=2)
    second_client = EchoClient()
    state = translate_corpus(corpus, graph, second_client, state=state)
    assert len(state.done) == 4
    assert state.pending == []
    # No group is ever regenerated.
    assert len(first_client.prompts) == 2
    assert len(second_client.prompts) == 2


def test_record_sink_called_per_group(tmp_path):
    corpus = chain_corpus(tmp_path, 3)
    graph = build_group_graph(corpus)
    seen = []
    translate_corpus(
        corpus, graph, EchoClient(fail_ids={2}), record_sink=lambda g, s, t: seen.append((g, s))
    )
    assert seen == [(0, "done"), (1, "done"), (2, "failed")]


def test_random_dags_translate_in_dependency_order(tmp_path):
    rng = random.Random(31)
    for trial in range(10):
        n = rng.randint(1, 50)
        groups = []
        for i in range(n):
            deps = sorted(rng.sample(range(i), k=rng.randint(0, min(i, 3)))) if i else []
            groups.append(
                make_group(i, f"T{trial}.g{i}", statement_text=f"theorem g{i} : True", dependency_ids=deps)
            )
        rng.shuffle(groups)
        corpus = load_corpus(write_corpus_dir(tmp_path / f"t{trial}", groups))
        graph = build_group_graph(corpus)
        client = EchoClient()
        order_seen = []
        translate_corpus(
            corpus, graph, client, record_sink=lambda g, s, t: order_seen.append(g)
        )
        assert sorted(order_seen) == sorted(corpus.by_id)
        assert len(order_seen) == len(set(order_seen))
        position = {g: i for i, g in enumerate(order_seen)}
        for group in corpus.groups:
            for dep in group.dependency_ids:
                assert position[dep] < position[group.id]


def test_translate_matches_condensation_order(tmp_path):
    corpus = chain_corpus(tmp_path, 5)
    graph = build_group_graph(corpus)
    order_seen = []
    translate_corpus(corpus, graph, EchoClient(), record_sink=lambda g, s, t: order_seen.append(g))
    expected = [g for comp in condensation_topo_order(graph) for g in comp]
    assert order_seen == expected


def test_state_file_roundtrip(tmp_path):
    corpus = chain_corpus(tmp_path, 3)
    path = tmp_path / "translations.jsonl"
    append_record(path, 0, "done", "first version")
    append_record(path, 1, "failed", "timeout")
    append_record(path, 0, "done", "second version")
    state = load_state(path, corpus)
    assert state.done == {0: "second version"}
    assert state.failed == {1: "timeout"}
    assert state.pending == [2]


def test_state_file_ignores_unknown_ids(tmp_path):
    corpus = chain_corpus(tmp_path, 2)
    path = tmp_path / "translations.jsonl"
    append_record(path, 777, "done", "ghost")
    state = load_state(path, corpus)
    assert state.done == {}
    assert state.pending == [0, 1]


def test_state_file_bad_record_reports_line(tmp_path):
    corpus = chain_corpus(tmp_path, 2)
    path = tmp_path / "translations.jsonl"
    append_record(path, 0, "done", "fine")
    with open(path, "a") as fh:
        fh.write('{"id": 1}\n')
    with pytest.raises(FormatError) as err:
        load_state(path, corpus)
    assert err.value.line == 2


def test_apply_translations_fills_informal(tmp_path):
    corpus = chain_corpus(tmp_path, 2)
    state = TranslationState(done={0: "now informal"}, failed={}, pending=[1])
    apply_translations(corpus, state)
    assert corpus.by_id[0].informal_description == "now informal"
    assert corpus.by_id[1].informal_description is None
