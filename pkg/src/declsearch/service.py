"""HTTP API over a loaded search engine.

Endpoints (all GET): /api/v1/search, /api/v1/groups/{id},
/api/v1/groups/{id}/dependencies, /api/v1/packages, /healthz. Errors are
{"error": code, "detail": text}. Optional bearer-token auth; CORS is open so
the web UI can call from anywhere.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import EmptyQuery, UnknownId
from .graph import dependencies as graph_dependencies
from .graph import dependents as graph_dependents
from .ranker import SearchEngine, SearchOptions, Weights, search


def run_search(
    engine: SearchEngine,
    query: str,
    packages: set[str] | None = None,
    limit: int | None = None,
    base_options: SearchOptions | None = None,
    weights: Weights | None = None,
) -> dict:
    """Search and shape the response; shared by HTTP, MCP, and the CLI."""
    base = base_options or SearchOptions()
    opts = dataclasses.replace(
        base,
        packages=packages if packages is not None else base.packages,
        limit=limit if limit is not None else base.limit,
        weights=weights if weights is not None else base.weights,
    )
    results = search(engine, query, opts)
    payload = []
    for result in results:
        group = engine.corpus.by_id[result.group_id]
        payload.append(
            {
                "id": group.id,
                "primary_decl_name": group.primary_decl_name,
                "package": group.package,
                "source_file": group.source_file,
                "statement_text": group.statement_text,
                "docstring": group.docstring,
                "informal_description": group.informal_description,
                "scores": {
                    "semantic": result.norm_semantic,
                    "lexical": result.norm_lexical,
                    "pagerank": result.norm_pagerank,
                    "total": result.total,
                },
            }
        )
    return {"query": query, "count": len(payload), "results": payload}


def group_payload(engine: SearchEngine, group_id: int) -> dict:
    group = engine.corpus.by_id.get(group_id)
    if group is None:
        raise UnknownId(group_id)
    return {
        "id": group.id,
        "primary_decl_name": group.primary_decl_name,
        "package": group.package,
        "source_file": group.source_file,
        "span": {"start_line": group.span.start_line, "end_line": group.span.end_line},
        "statement_text": group.statement_text,
        "docstring": group.docstring,
        "informal_description": group.informal_description,
        "members": [
            {
                "lean_name": m.lean_name,
                "kind": m.kind,
                "docstring": m.docstring,
                "start_line": m.span.start_line,
                "end_line": m.span.end_line,
            }
            for m in group.members
        ],
        "dependency_ids": list(group.dependency_ids),
    }


def _named(engine: SearchEngine, ids: Iterable[int]) -> list[dict]:
    return [
        {"id": gid, "primary_decl_name": engine.corpus.by_id[gid].primary_decl_name}
        for gid in ids
    ]


def dependencies_payload(engine: SearchEngine, group_id: int) -> dict:
    if group_id not in engine.corpus.by_id:
        raise UnknownId(group_id)
    return {
        "id": group_id,
        "dependencies": _named(engine, graph_dependencies(engine.graph, group_id)),
        "dependents": _named(engine, graph_dependents(engine.graph, group_id)),
    }


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse({"error": code, "detail": detail}, status_code=status)


def create_app(
    engine: SearchEngine | None = None,
    api_keys: set[str] | None = None,
    base_options: SearchOptions | None = None,
) -> FastAPI:
    """Build the API application. engine may be attached later via app.state."""
    app = FastAPI(title="declsearch", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )
    app.state.engine = engine
    app.state.api_keys = set(api_keys or ())
    app.state.base_options = base_options or SearchOptions()

    def check_auth(request: Request) -> JSONResponse | None:
        if not app.state.api_keys:
            return None
        header = request.headers.get("authorization", "")
        if header.startswith("Bearer ") and header[7:] in app.state.api_keys:
            return None
        return _error(401, "unauthorized", "missing or invalid API key")

    def current_engine() -> SearchEngine | None:
        return app.state.engine

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/v1/search")
    def http_search(request: Request, q: str = "", packages: str = "", limit: int | None = None):
        denied = check_auth(request)
        if denied is not None:
            return denied
        engine = current_engine()
        if engine is None:
            return _error(503, "loading", "indexes are not loaded yet")
        package_set = {p.strip() for p in packages.split(",") if p.strip()} or None
        if limit is not None and limit < 1:
            return _error(400, "bad_limit", "limit must be a positive integer")
        try:
            return run_search(
                engine, q, packages=package_set, limit=limit, base_options=app.state.base_options
            )
        except EmptyQuery:
            return _error(400, "empty_query", "query parameter q is empty")

    @app.get("/api/v1/groups/{group_id}")
    def http_get_group(request: Request, group_id: int):
        denied = check_auth(request)
        if denied is not None:
            return denied
        engine = current_engine()
        if engine is None:
            return _error(503, "loading", "indexes are not loaded yet")
        try:
            return group_payload(engine, group_id)
        except UnknownId:
            return _error(404, "unknown_id", f"no group with id {group_id}")

    @app.get("/api/v1/groups/{group_id}/dependencies")
    def http_get_dependencies(request: Request, group_id: int):
        denied = check_auth(request)
        if denied is not None:
            return denied
        engine = current_engine()
        if engine is None:
            return _error(503, "loading", "indexes are not loaded yet")
        try:
            return dependencies_payload(engine, group_id)
        except UnknownId:
            return _error(404, "unknown_id", f"no group with id {group_id}")

    @app.get("/api/v1/packages")
    def http_packages(request: Request):
        denied = check_auth(request)
        if denied is not None:
            return denied
        engine = current_engine()
        if engine is None:
            return _error(503, "loading", "indexes are not loaded yet")
        return {"packages": engine.corpus.packages}

    return app
