"""MCP tool server: JSON-RPC 2.0, one message per line over stdio.

Three tools are exposed: search, get_by_id, get_dependencies. Tool results
are returned as a single JSON text content block. Requests without an id are
notifications and get no reply; EOF ends the loop.
"""

from __future__ import annotations

import json
import sys
from typing import IO

from .errors import DeclSearchError, EmptyQuery, UnknownId
from .ranker import SearchEngine
from .service import dependencies_payload, group_payload, run_search

PROTOCOL_VERSION = "2024-11-05"

_SEARCH_SCHEMA = {
    "type": "object",
    "properties": {
        "query": {"type": "string"},
        "packages": {"type": "array", "items": {"type": "string"}},
        "limit": {"type": "integer", "minimum": 1},
    },
    "required": ["query"],
}
_ID_SCHEMA = {
    "type": "object",
    "properties": {"id": {"type": "integer"}},
    "required": ["id"],
}

TOOLS = [
    {
        "name": "search",
        "description": "Rank statement groups for a natural-language or formal query.",
        "inputSchema": _SEARCH_SCHEMA,
        "input_schema": _SEARCH_SCHEMA,
    },
    {
        "name": "get_by_id",
        "description": "Fetch one statement group record by its id.",
        "inputSchema": _ID_SCHEMA,
        "input_schema": _ID_SCHEMA,
    },
    {
        "name": "get_dependencies",
        "description": "List a group's direct dependencies and dependents.",
        "inputSchema": _ID_SCHEMA,
        "input_schema": _ID_SCHEMA,
    },
]


def _call_tool(engine: SearchEngine, name: str, arguments: dict) -> dict:
    if name == "search":
        packages = arguments.get("packages")
        return run_search(
            engine,
            str(arguments.get("query", "")),
            packages=set(packages) if packages else None,
            limit=arguments.get("limit"),
        )
    if name == "get_by_id":
        return group_payload(engine, int(arguments["id"]))
    if name == "get_dependencies":
        return dependencies_payload(engine, int(arguments["id"]))
    raise ValueError(f"unknown tool: {name}")


def handle_message(engine: SearchEngine, message: dict) -> dict | None:
    """Dispatch one parsed JSON-RPC request. None for notifications."""
    msg_id = message.get("id")
    method = message.get("method")
    is_notification = "id" not in message

    def result(payload: dict) -> dict | None:
        if is_notification:
            return None
        return {"jsonrpc": "2.0", "id": msg_id, "result": payload}

    def error(code: int, text: str) -> dict | None:
        if is_notification:
            return None
        return {"jsonrpc": "2.0", "id": msg_id, "error": {"code": code, "message": text}}

    if method == "initialize":
        return result(
            {
                "protocolVersion": PROTOCOL_VERSION,
                "capabilities": {"tools": {}},
                "serverInfo": {"name": "declsearch", "version": "0.1.0"},
            }
        )
    if method == "tools/list":
        return result({"tools": TOOLS})
    if method == "tools/call":
        params = message.get("params") or {}
        name = params.get("name", "")
        arguments = params.get("arguments") or {}
        try:
            payload = _call_tool(engine, name, arguments)
        except (EmptyQuery, UnknownId, KeyError, ValueError, TypeError) as exc:
            return error(-32602, f"invalid tool call: {exc}")
        except DeclSearchError as exc:
            return error(-32603, str(exc))
        return result({"content": [{"type": "text", "text": json.dumps(payload)}]})
    return error(-32601, f"method not found: {method}")


def serve_stdio(engine: SearchEngine, stdin: IO[str] | None = None, stdout: IO[str] | None = None) -> None:
    """Serve newline-delimited JSON-RPC until EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            response = {
                "jsonrpc": "2.0",
                "id": None,
                "error": {"code": -32700, "message": "parse error: input is not valid JSON"},
            }
            stdout.write(json.dumps(response) + "\n")
            stdout.flush()
            continue
        if not isinstance(message, dict):
            message = {"id": None, "method": None}
        response = handle_message(engine, message)
        if response is not None:
            stdout.write(json.dumps(response) + "\n")
            stdout.flush()
