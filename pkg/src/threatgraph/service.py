"""Read-only HTTP query service over a sealed graph.

Every response is an envelope::

    {"status": "ok"|"error", "data"|"error": ..., "truncated": bool,
     "elapsed_ms": float}

Errors carry a machine-readable ``code`` plus a human message.  The graph
is shared immutably across request handlers; swapping in a freshly built
graph is a single atomic reference assignment on :class:`GraphRef`.
"""

from __future__ import annotations

import time
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse

from . import analytics
from .errors import (
    BindFailureError,
    LimitZeroError,
    ThreatGraphError,
    UnknownNodeError,
    UnknownProductError,
)
from .graph import NodeKind, ThreatGraph
from .paths import DEFAULT_PATH_LIMIT, QueryFilter, reachable_set, trace_paths


class GraphRef:
    """Shared handle on the current sealed graph; ``swap`` is atomic."""

    def __init__(self, graph: ThreatGraph):
        self._graph = graph

    @property
    def graph(self) -> ThreatGraph:
        return self._graph

    def swap(self, graph: ThreatGraph) -> None:
        self._graph = graph


def _parse_kind(text: str) -> NodeKind:
    try:
        return NodeKind.from_name(text)
    except ValueError as exc:
        raise ValueError(str(exc)) from None


def _parse_years(text: str) -> tuple[int, int]:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return int(lo), int(hi)
        year = int(text)
        return year, year
    except ValueError:
        raise ValueError(f"bad year range {text!r}; expected YYYY or YYYY:YYYY")


def _parse_flag(text: str | None) -> bool:
    return text is not None and text.lower() in ("1", "true", "yes", "on")


def _parse_int(text: str | None, default: int, name: str) -> int:
    if text is None:
        return default
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {text!r}")


def build_filter(years: str | None = None, latest: str | None = None,
                 vendor: str | None = None,
                 product: str | None = None) -> QueryFilter:
    """Query filter from raw request parameters."""
    return QueryFilter(
        year_range=_parse_years(years) if years else None,
        latest_versions_only=_parse_flag(latest),
        vendor=vendor or None,
        product=product or None,
    )


def _node_payload(graph: ThreatGraph, node_id: str) -> dict:
    node = graph.node(node_id)
    return {"id": node.id, "kind": node.kind.value, "name": node.name,
            "properties": node.properties}


def create_app(ref: GraphRef | ThreatGraph,
               ui_dir: str | None = None) -> FastAPI:
    """Build the service app around a graph (or swappable graph ref).

    ``ui_dir`` optionally mounts a built explorer (a directory holding
    index.html and its assets) at ``/ui`` so the browser client is
    same-origin with the API.
    """
    if isinstance(ref, ThreatGraph):
        ref = GraphRef(ref)
    app = FastAPI(title="threatgraph", docs_url=None, redoc_url=None)
    app.state.graph_ref = ref
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    def respond(fn: Callable[[], tuple[object, bool]]) -> JSONResponse:
        start = time.perf_counter()

        def elapsed() -> float:
            return round((time.perf_counter() - start) * 1000.0, 3)

        try:
            data, truncated = fn()
        except (UnknownNodeError, UnknownProductError) as exc:
            code = ("unknown_node" if isinstance(exc, UnknownNodeError)
                    else "unknown_product")
            return JSONResponse(status_code=404, content={
                "status": "error",
                "error": {"code": code, "message": str(exc)},
                "truncated": False, "elapsed_ms": elapsed()})
        except (ValueError, LimitZeroError) as exc:
            return JSONResponse(status_code=400, content={
                "status": "error",
                "error": {"code": "bad_request", "message": str(exc)},
                "truncated": False, "elapsed_ms": elapsed()})
        except ThreatGraphError as exc:
            return JSONResponse(status_code=500, content={
                "status": "error",
                "error": {"code": "internal", "message": str(exc)},
                "truncated": False, "elapsed_ms": elapsed()})
        return JSONResponse({"status": "ok", "data": data,
                             "truncated": truncated, "elapsed_ms": elapsed()})

    @app.get("/nodes/{node_id:path}/neighbors")
    def node_neighbors(node_id: str, direction: str = "both"):
        def run():
            graph = ref.graph
            if direction not in ("up", "down", "both"):
                raise ValueError(
                    f"direction must be up/down/both, got {direction!r}")
            return list(graph.neighbors(node_id, direction)), False
        return respond(run)

    @app.get("/nodes/{node_id:path}")
    def node_lookup(node_id: str):
        def run():
            return _node_payload(ref.graph, node_id), False
        return respond(run)

    @app.get("/paths")
    def route_paths(request: Request):
        params = request.query_params

        def run():
            graph = ref.graph
            from_id = params.get("from")
            to_text = params.get("to")
            if not from_id or not to_text:
                raise ValueError("'from' and 'to' parameters are required")
            to_kind = _parse_kind(to_text)
            query = build_filter(params.get("years") or params.get("year"),
                                 params.get("latest"), params.get("vendor"),
                                 params.get("product"))
            limit = _parse_int(params.get("limit"), DEFAULT_PATH_LIMIT, "limit")
            cursor = _parse_int(params.get("cursor"), 0, "cursor")
            if cursor < 0:
                raise ValueError("cursor must be non-negative")
            result = trace_paths(graph, from_id, to_kind, query,
                                 limit=cursor + limit)
            page = [list(p.nodes) for p in result.paths[cursor:]]
            data = {"paths": page, "count": len(page)}
            if result.truncated:
                data["next_cursor"] = cursor + limit
            return data, result.truncated
        return respond(run)

    @app.get("/reachable")
    def route_reachable(request: Request):
        params = request.query_params

        def run():
            graph = ref.graph
            from_id = params.get("from")
            to_text = params.get("to")
            if not from_id or not to_text:
                raise ValueError("'from' and 'to' parameters are required")
            to_kind = _parse_kind(to_text)
            query = build_filter(params.get("years") or params.get("year"),
                                 params.get("latest"), params.get("vendor"),
                                 params.get("product"))
            limit = _parse_int(params.get("limit"), DEFAULT_PATH_LIMIT, "limit")
            cursor = _parse_int(params.get("cursor"), 0, "cursor")
            if limit <= 0:
                raise ValueError("limit must be positive")
            if cursor < 0:
                raise ValueError("cursor must be non-negative")
            ids = sorted(reachable_set(graph, from_id, to_kind, query))
            page = ids[cursor:cursor + limit]
            truncated = cursor + limit < len(ids)
            data = {"ids": page, "count": len(page), "total": len(ids)}
            if truncated:
                data["next_cursor"] = cursor + limit
            return data, truncated
        return respond(run)

    @app.get("/reports/{kind}")
    def route_report(kind: str, request: Request):
        params = request.query_params

        def run():
            graph = ref.graph
            query = build_filter(params.get("years"), params.get("latest"))
            if kind == "inventory":
                rows = analytics.inventory_report(graph, query)
                return [row.to_record() for row in rows], False
            if kind == "trends":
                rows = analytics.yearly_connectivity(graph, query)
                return [row.to_record() for row in rows], False
            if kind == "severity":
                ledger = analytics.severity_ledger(graph, query)
                return {
                    "years": [year.to_record() for year in ledger.years],
                    "totals": {"unlinked": ledger.unlinked_total,
                               "operational": ledger.operational_total,
                               "total": ledger.grand_total},
                }, False
            if kind == "vendor-tactics":
                vendors = [v for v in (params.get("vendors") or "").split(",") if v]
                if not vendors:
                    raise ValueError("'vendors' parameter is required")
                mode = params.get("mode", "unique_products")
                cells = analytics.vendor_tactic_matrix(graph, vendors, mode)
                return [cell.to_record() for cell in cells], False
            if kind == "vendor-severity":
                vendors = [v for v in (params.get("vendors") or "").split(",") if v]
                if not vendors:
                    raise ValueError("'vendors' parameter is required")
                scoring = params.get("scoring", "max_per_product")
                tactic = params.get("tactic") or None
                dist = analytics.vendor_severity_distribution(
                    graph, vendors, scoring, tactic)
                return dist, False
            if kind == "product-versions":
                vendor = params.get("vendor")
                product = params.get("product")
                if not vendor or not product:
                    raise ValueError("'vendor' and 'product' parameters are required")
                rows = analytics.product_version_report(graph, vendor, product)
                return [row.to_record() for row in rows], False
            raise ValueError(f"unknown report {kind!r}")
        return respond(run)

    @app.get("/search")
    def route_search(request: Request):
        params = request.query_params

        def run():
            graph = ref.graph
            needle = (params.get("q") or "").lower()
            if not needle:
                raise ValueError("'q' parameter is required")
            limit = _parse_int(params.get("limit"), 100, "limit")
            cursor = _parse_int(params.get("cursor"), 0, "cursor")
            if limit <= 0:
                raise ValueError("limit must be positive")
            if cursor < 0:
                raise ValueError("cursor must be non-negative")
            matches = [
                {"id": node.id, "kind": node.kind.value, "name": node.name}
                for node in graph.nodes.values()
                if needle in node.id.lower() or needle in node.name.lower()
            ]
            page = matches[cursor:cursor + limit]
            truncated = cursor + limit < len(matches)
            data = {"matches": page, "count": len(page), "total": len(matches)}
            if truncated:
                data["next_cursor"] = cursor + limit
            return data, truncated
        return respond(run)

    @app.get("/", response_class=HTMLResponse, include_in_schema=False)
    def index():
        return _INDEX_PAGE

    return app


_INDEX_PAGE = """<!doctype html>
<html><head><title>threatgraph service</title></head>
<body><h1>threatgraph query service</h1>
<p>Endpoints: /nodes/{id}, /nodes/{id}/neighbors, /paths, /reachable,
/reports/{inventory|trends|severity|vendor-tactics|vendor-severity|product-versions},
/search?q=</p></body></html>
"""


def serve(graph: ThreatGraph | GraphRef, bind_address: str = "127.0.0.1:8332",
          log_level: str = "info", ui_dir: str | None = None) -> None:
    """Run the service until interrupted; raises
    :class:`BindFailureError` when the address cannot be bound."""
    import uvicorn

    host, _, port_text = bind_address.rpartition(":")
    if not host or not port_text.isdigit():
        raise BindFailureError(f"bad bind address {bind_address!r}")
    app = create_app(graph, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level=log_level)
    except (OSError, SystemExit) as exc:
        raise BindFailureError(f"could not serve on {bind_address}: {exc}") from exc
