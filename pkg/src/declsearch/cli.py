"""Command-line interface.

Subcommands: index, search, get, deps, serve, translate, eval. Settings
resolve as flags > DECLSEARCH_* environment variables > declsearch.toml >
defaults. Exit codes: 0 success, 1 environment or IO failure, 2 usage
error, 3 not found.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import enrich, evalstats
from .errors import (
    DeclSearchError,
    EmptyQuery,
    FormatError,
    GenerationError,
    UnknownId,
)
from .graph import build_group_graph
from .corpus import load_corpus
from .ranker import SearchOptions, Weights
from .semantic import HttpEmbeddingProvider, test_embedder
from .service import create_app, dependencies_payload, group_payload, run_search
from .store import DEFAULT_NLIST, build_index, load_engine

EXIT_OK = 0
EXIT_ENV = 1
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3

DEFAULT_DIMENSION = 64

ENV_KEYS = {
    "corpus_dir": "DECLSEARCH_CORPUS_DIR",
    "index_dir": "DECLSEARCH_INDEX_DIR",
    "provider": "DECLSEARCH_PROVIDER",
    "provider_url": "DECLSEARCH_PROVIDER_URL",
    "dimension": "DECLSEARCH_DIMENSION",
    "api_keys_file": "DECLSEARCH_API_KEYS_FILE",
}


@dataclass
class CliConfig:
    corpus_dir: str | None = None
    index_dir: str | None = None
    provider: str = "test"
    provider_url: str | None = None
    dimension: int = DEFAULT_DIMENSION
    api_keys_file: str | None = None


def _load_toml(path: str | None) -> dict:
    candidate = Path(path) if path else Path("declsearch.toml")
    if not candidate.is_file():
        if path:
            raise FormatError("config file not found", path=str(candidate))
        return {}
    with open(candidate, "rb") as fh:
        return tomllib.load(fh)


def resolve_config(args: argparse.Namespace) -> CliConfig:
    toml_cfg = _load_toml(getattr(args, "config", None))
    cfg = CliConfig()
    for key in ("corpus_dir", "index_dir", "provider", "provider_url", "dimension", "api_keys_file"):
        value = getattr(args, key, None)
        if value is None:
            value = os.environ.get(ENV_KEYS[key])
        if value is None:
            value = toml_cfg.get(key)
        if value is not None:
            setattr(cfg, key, int(value) if key == "dimension" else value)
    return cfg


def _weights(args: argparse.Namespace) -> Weights:
    return Weights(
        semantic=1.0,
        lexical=0.0 if getattr(args, "no_lexical", False) else 1.0,
        pagerank=0.0 if getattr(args, "no_pagerank", False) else 0.2,
    )


def _provider_for_build(cfg: CliConfig):
    if cfg.provider == "http":
        if not cfg.provider_url:
            raise FormatError("provider 'http' needs --provider-url or DECLSEARCH_PROVIDER_URL")
        return HttpEmbeddingProvider(cfg.provider_url, cfg.dimension)
    return test_embedder(cfg.dimension)


def _require_dirs(cfg: CliConfig, *, need_corpus: bool = True, need_index: bool = True) -> None:
    if need_corpus and not cfg.corpus_dir:
        raise FormatError("no corpus directory configured (flag --corpus-dir, env DECLSEARCH_CORPUS_DIR, or declsearch.toml)")
    if need_index and not cfg.index_dir:
        raise FormatError("no index directory configured (flag --index-dir, env DECLSEARCH_INDEX_DIR, or declsearch.toml)")


def _engine_from_config(cfg: CliConfig):
    _require_dirs(cfg)
    manifest_path = Path(cfg.index_dir) / "manifest.json"
    provider = None
    if manifest_path.is_file():
        info = json.loads(manifest_path.read_text()).get("index", {})
        name = str(info.get("provider_name", ""))
        if not name.startswith("hashing-"):
            if not cfg.provider_url:
                raise FormatError(
                    f"index was built with provider {name!r}; set --provider-url to embed queries"
                )
            provider = HttpEmbeddingProvider(cfg.provider_url, int(info["embedding_dimension"]))
    return load_engine(cfg.corpus_dir, cfg.index_dir, provider)


class TestGenerationClient(enrich.GenerationClient):
    """Offline deterministic stand-in for a live generation model."""

    name = "test"

    def __init__(self):
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        marker = "Formal statement:\n"
        start = prompt.find(marker)
        head = prompt[start + len(marker) :].splitlines()[0] if start >= 0 else prompt.splitlines()[0]
        return f"Informally: {head.strip()[:120]}"


def cmd_index(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    _require_dirs(cfg)
    provider = _provider_for_build(cfg)
    summary = build_index(
        cfg.corpus_dir,
        cfg.index_dir,
        provider,
        mode=args.mode,
        nlist=args.nlist,
        seed=args.seed,
    )
    print(
        f"indexed {summary['groups']} groups ({summary['facets']} facets, "
        f"mode={summary['mode']}) -> {cfg.index_dir}"
    )
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    if not args.query.strip():
        print("error: query is empty", file=sys.stderr)
        return EXIT_USAGE
    cfg = resolve_config(args)
    engine = _engine_from_config(cfg)
    packages = {p.strip() for p in args.packages.split(",") if p.strip()} if args.packages else None
    base = SearchOptions(threshold=args.threshold) if args.threshold is not None else SearchOptions()
    try:
        payload = run_search(
            engine,
            args.query,
            packages=packages,
            limit=args.limit,
            base_options=base,
            weights=_weights(args),
        )
    except EmptyQuery:
        print("error: query is empty", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    if not payload["results"]:
        print("no results")
        return EXIT_OK
    print(f"{'rank':<5}{'id':<7}{'total':<9}{'sem':<8}{'lex':<8}{'pr':<8}name")
    for rank, result in enumerate(payload["results"], start=1):
        scores = result["scores"]
        print(
            f"{rank:<5}{result['id']:<7}{scores['total']:<9.4f}{scores['semantic']:<8.4f}"
            f"{scores['lexical']:<8.4f}{scores['pagerank']:<8.4f}{result['primary_decl_name']}"
        )
    return EXIT_OK


def cmd_get(args: argparse.Namespace) -> int:
    engine = _engine_from_config(resolve_config(args))
    payload = group_payload(engine, args.id)
    if args.json:
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"id: {payload['id']}")
    print(f"name: {payload['primary_decl_name']}")
    print(f"package: {payload['package']}")
    print(f"file: {payload['source_file']} "
          f"(lines {payload['span']['start_line']}-{payload['span']['end_line']})")
    if payload["docstring"]:
        print(f"docstring: {payload['docstring']}")
    if payload["informal_description"]:
        print(f"informal: {payload['informal_description']}")
    print("statement:")
    print(payload["statement_text"])
    print(f"members: {', '.join(m['lean_name'] for m in payload['members'])}")
    print(f"dependencies: {payload['dependency_ids']}")
    return EXIT_OK


def cmd_deps(args: argparse.Namespace) -> int:
    engine = _engine_from_config(resolve_config(args))
    payload = dependencies_payload(engine, args.id)
    if args.json:
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"group {payload['id']}")
    print("dependencies:")
    for item in payload["dependencies"]:
        print(f"  {item['id']:<7}{item['primary_decl_name']}")
    print("dependents:")
    for item in payload["dependents"]:
        print(f"  {item['id']:<7}{item['primary_decl_name']}")
    return EXIT_OK


def _read_api_keys(cfg: CliConfig) -> set[str]:
    if not cfg.api_keys_file:
        return set()
    path = Path(cfg.api_keys_file)
    if not path.is_file():
        raise FormatError("API keys file not found", path=str(path))
    return {line.strip() for line in path.read_text().splitlines() if line.strip()}


def cmd_serve(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    engine = _engine_from_config(cfg)
    if args.mcp:
        from .mcp import serve_stdio

        serve_stdio(engine)
        return EXIT_OK
    host, _, port_text = args.http.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: --http expects host:port, got {args.http!r}", file=sys.stderr)
        return EXIT_USAGE
    import uvicorn

    app = create_app(engine, api_keys=_read_api_keys(cfg))
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except OSError as exc:
        print(f"error: cannot bind {args.http}: {exc}", file=sys.stderr)
        return EXIT_ENV
    return EXIT_OK


def cmd_translate(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    _require_dirs(cfg, need_index=False)
    corpus = load_corpus(cfg.corpus_dir)
    graph = build_group_graph(corpus)
    if args.client == "http":
        if not cfg.provider_url:
            raise FormatError("client 'http' needs --provider-url or DECLSEARCH_PROVIDER_URL")
        client: enrich.GenerationClient = enrich.HttpGenerationClient(cfg.provider_url)
    else:
        client = TestGenerationClient()
    state_path = Path(args.state) if args.state else Path(cfg.corpus_dir) / "translations.jsonl"
    if args.resume:
        state = enrich.load_state(state_path, corpus)
    else:
        state = enrich.new_state(corpus, graph)
        if state_path.exists():
            state_path.unlink()
    state = enrich.translate_corpus(
        corpus,
        graph,
        client,
        state=state,
        limit=args.limit,
        record_sink=lambda gid, status, text: enrich.append_record(state_path, gid, status, text),
    )
    print(f"done={len(state.done)} failed={len(state.failed)} pending={len(state.pending)}")
    return EXIT_OK


def _fmt_mean_se(value: evalstats.MeanSE) -> str:
    return f"{value.mean:.2f} ± {value.se:.2f}"


def cmd_eval(args: argparse.Namespace) -> int:
    records = evalstats.load_transcript(args.transcript)
    runs, agg = evalstats.evaluate_transcript(records)
    if args.json:
        payload = {
            "n_runs": agg.n_runs,
            "se_defined": agg.se_defined,
            "n_queries_per_run": [run.n_queries for run in runs],
            "place_rates": {
                engine: {
                    str(place): {"mean": ms.mean, "se": ms.se} for place, ms in by_place.items()
                }
                for engine, by_place in agg.place_rates.items()
            },
            "head_to_head": {
                f"{x} vs {y}": {key: {"mean": ms.mean, "se": ms.se} for key, ms in stats.items()}
                for (x, y), stats in agg.head_to_head.items()
            },
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"runs: {agg.n_runs} (queries per run: {[run.n_queries for run in runs]})")
    print("place rates (%):")
    print(f"{'engine':<24}{'1st':>16}{'2nd':>16}{'3rd':>16}")
    for engine, by_place in agg.place_rates.items():
        row = "".join(f"{_fmt_mean_se(by_place[place]):>16}" for place in (1, 2, 3))
        print(f"{engine:<24}{row}")
    print("head-to-head (%):")
    for (x, y), stats in agg.head_to_head.items():
        print(
            f"{x} vs {y}: wins {_fmt_mean_se(stats['wins'])}, "
            f"losses {_fmt_mean_se(stats['losses'])}, ties {_fmt_mean_se(stats['ties'])}"
        )
    return EXIT_OK


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus-dir", dest="corpus_dir")
    common.add_argument("--index-dir", dest="index_dir")
    common.add_argument("--provider", choices=("test", "http"))
    common.add_argument("--provider-url", dest="provider_url")
    common.add_argument("--dimension", type=int)
    common.add_argument("--api-keys-file", dest="api_keys_file")
    common.add_argument("--config")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="declsearch", description="Hybrid search over formal declaration corpora")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    p_index = sub.add_parser("index", parents=[common], help="build index artifacts from a corpus")
    p_index.add_argument("--mode", choices=("auto", "flat", "ivf"), default="auto")
    p_index.add_argument("--nlist", type=int, default=DEFAULT_NLIST)
    p_index.add_argument("--seed", type=int, default=0)
    p_index.set_defaults(func=cmd_index)

    p_search = sub.add_parser("search", parents=[common], help="rank groups for a query")
    p_search.add_argument("query")
    p_search.add_argument("--limit", type=int, default=None)
    p_search.add_argument("--packages", default=None)
    p_search.add_argument("--json", action="store_true")
    p_search.add_argument("--no-lexical", action="store_true", dest="no_lexical")
    p_search.add_argument("--no-pagerank", action="store_true", dest="no_pagerank")
    p_search.add_argument("--threshold", type=float, default=None)
    p_search.set_defaults(func=cmd_search)

    p_get = sub.add_parser("get", parents=[common], help="print one group record")
    p_get.add_argument("id", type=int)
    p_get.add_argument("--json", action="store_true")
    p_get.set_defaults(func=cmd_get)

    p_deps = sub.add_parser("deps", parents=[common], help="print dependencies and dependents")
    p_deps.add_argument("id", type=int)
    p_deps.add_argument("--json", action="store_true")
    p_deps.set_defaults(func=cmd_deps)

    p_serve = sub.add_parser("serve", parents=[common], help="serve HTTP or MCP")
    mode = p_serve.add_mutually_exclusive_group(required=True)
    mode.add_argument("--http", metavar="HOST:PORT")
    mode.add_argument("--mcp", action="store_true")
    p_serve.set_defaults(func=cmd_serve)

    p_translate = sub.add_parser("translate", parents=[common], help="generate informal translations")
    p_translate.add_argument("--client", choices=("test", "http"), default="test")
    p_translate.add_argument("--limit", type=int, default=None)
    p_translate.add_argument("--resume", action="store_true")
    p_translate.add_argument("--state", default=None)
    p_translate.set_defaults(func=cmd_translate)

    p_eval = sub.add_parser("eval", parents=[common], help="summarize a blind-comparison transcript")
    p_eval.add_argument("--transcript", required=True)
    p_eval.add_argument("--json", action="store_true")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownId as exc:
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except EmptyQuery:
        print("error: query is empty", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, GenerationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except DeclSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENV


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
