"""Bi-directional layered path tracing, reachability, and counting.

A path always reads top to bottom and crosses layers monotonically; the
only within-layer step allowed is one technique parent -> sub-technique
hop.  Queries may start at either end: tracing from a configuration up to
tactics walks the same edges as tracing from a tactic down, and returns
the same top-to-bottom paths.

Filters prune nodes before traversal: a year range applies to
vulnerability nodes, vendor/product and the latest-versions-only flag to
configuration nodes.  An empty filter is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from . import cpe
from .errors import LimitZeroError
from .graph import NodeKind, ThreatGraph

DEFAULT_PATH_LIMIT = 10_000

_TECH = NodeKind.TECHNIQUE


@dataclass(frozen=True)
class Path:
    """An ordered walk from an upper-layer node down to a lower one."""

    nodes: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def top(self) -> str:
        return self.nodes[0]

    @property
    def bottom(self) -> str:
        return self.nodes[-1]


@dataclass(frozen=True)
class QueryFilter:
    """Node constraints applied to every node on a path, endpoints included."""

    year_range: tuple[int, int] | None = None
    latest_versions_only: bool = False
    vendor: str | None = None
    product: str | None = None
    kinds_required: frozenset[NodeKind] | None = None

    @property
    def is_empty(self) -> bool:
        return self == QueryFilter()


@dataclass(frozen=True)
class PathSearchResult:
    paths: tuple[Path, ...]
    truncated: bool

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


def _attr_text(attr: cpe.CpeAttribute) -> str:
    return attr.text if attr.is_value else attr.field_text()


def latest_config_ids(graph: ThreatGraph) -> tuple[frozenset[str], frozenset[str]]:
    """Configuration ids surviving the latest-version rule.

    Returns ``(kept, unversioned)``: per (vendor, product) only the
    maximal concrete version survives; wildcard / not-applicable versions
    never compete for "latest" but are kept and reported separately.
    """
    groups: dict[tuple[str, str], list[tuple[tuple, str]]] = {}
    unversioned = set()
    for config_id in graph.ids_of_kind(NodeKind.CONFIGURATION):
        name = cpe.parse_cpe23(config_id)
        if not name.version.is_value:
            unversioned.add(config_id)
            continue
        key = (_attr_text(name.vendor), _attr_text(name.product))
        groups.setdefault(key, []).append(
            (cpe.version_key(name.version.text), config_id))
    kept = set()
    for entries in groups.values():
        best = max(key for key, _ in entries)
        kept.update(config_id for key, config_id in entries if key == best)
    return frozenset(kept | unversioned), frozenset(unversioned)


def node_predicate(graph: ThreatGraph,
                   query: QueryFilter | None) -> Callable[[str], bool] | None:
    """Compile a filter into an id predicate; None when nothing to prune."""
    if query is None or query.is_empty:
        return None
    checks = []
    if query.year_range is not None:
        lo, hi = query.year_range
        checks.append(lambda node: node.kind is not NodeKind.VULNERABILITY
                      or lo <= node.year <= hi)
    if query.vendor is not None or query.product is not None:
        want_vendor, want_product = query.vendor, query.product

        def vendor_ok(node):
            if node.kind is not NodeKind.CONFIGURATION:
                return True
            name = cpe.parse_cpe23(node.id)
            if want_vendor is not None and _attr_text(name.vendor) != want_vendor:
                return False
            return want_product is None or _attr_text(name.product) == want_product

        checks.append(vendor_ok)
    if query.latest_versions_only:
        kept, _ = latest_config_ids(graph)
        checks.append(lambda node: node.kind is not NodeKind.CONFIGURATION
                      or node.id in kept)

    def predicate(node_id: str) -> bool:
        node = graph.node(node_id)
        return all(check(node) for check in checks)

    return predicate


def _span_covers_required(from_kind: NodeKind, to_kind: NodeKind,
                          query: QueryFilter | None) -> bool:
    # monotonic paths visit exactly the layers between their endpoints,
    # so a required kind outside that span rules out every path
    if query is None or not query.kinds_required:
        return True
    lo = min(from_kind.layer, to_kind.layer)
    hi = max(from_kind.layer, to_kind.layer)
    return all(lo <= kind.layer <= hi for kind in query.kinds_required)


def _step_down(graph, node_id, hops):
    """Legal (child, hops) continuations below node_id."""
    kind = graph.node(node_id).kind
    for child in graph.down(node_id):
        child_kind = graph.node(child).kind
        if child_kind is kind:  # technique parent -> sub hop
            if hops == 0:
                yield child, 1
        else:
            yield child, hops


def _step_up(graph, node_id, hops):
    kind = graph.node(node_id).kind
    for parent in graph.up(node_id):
        parent_kind = graph.node(parent).kind
        if parent_kind is kind:
            if hops == 0:
                yield parent, 1
        else:
            yield parent, hops


def trace_paths(graph: ThreatGraph, from_id: str, to_kind: NodeKind,
                query: QueryFilter | None = None,
                limit: int = DEFAULT_PATH_LIMIT) -> PathSearchResult:
    """All simple layered paths between ``from_id`` and nodes of ``to_kind``.

    Paths are returned top to bottom and sorted lexicographically by node
    ids.  Enumeration stops after ``limit`` paths (deterministically, in
    sorted traversal order) and reports truncation.
    """
    if limit <= 0:
        raise LimitZeroError("path limit must be positive")
    from_kind = graph.node(from_id).kind
    allowed = node_predicate(graph, query)
    if from_kind is to_kind or not _span_covers_required(from_kind, to_kind, query):
        return PathSearchResult((), False)
    if allowed is not None and not allowed(from_id):
        return PathSearchResult((), False)

    descending = from_kind.layer < to_kind.layer
    step = _step_down if descending else _step_up
    target_layer = to_kind.layer
    collected: list[tuple[str, ...]] = []
    truncated = False

    def walk(path: list[str], hops: int) -> bool:
        nonlocal truncated
        for nxt, next_hops in step(graph, path[-1], hops):
            if allowed is not None and not allowed(nxt):
                continue
            layer = graph.node(nxt).kind.layer
            beyond = layer > target_layer if descending else layer < target_layer
            if beyond:
                continue
            path.append(nxt)
            if graph.node(nxt).kind is to_kind:
                if len(collected) >= limit:
                    truncated = True
                    path.pop()
                    return True
                collected.append(tuple(path))
            if walk(path, next_hops):
                path.pop()
                return True
            path.pop()
        return False

    walk([from_id], 0)
    if descending:
        paths = tuple(Path(p) for p in collected)  # DFS order is already sorted
    else:
        paths = tuple(Path(tuple(reversed(p))) for p in collected)
        paths = tuple(sorted(paths, key=lambda p: p.nodes))
    return PathSearchResult(paths, truncated)


def reachable_set(graph: ThreatGraph, from_id: str, to_kind: NodeKind,
                  query: QueryFilter | None = None) -> frozenset[str]:
    """Distinct ``to_kind`` endpoints of any legal path from ``from_id``."""
    from_kind = graph.node(from_id).kind
    allowed = node_predicate(graph, query)
    if from_kind is to_kind or not _span_covers_required(from_kind, to_kind, query):
        return frozenset()
    if allowed is not None and not allowed(from_id):
        return frozenset()
    descending = from_kind.layer < to_kind.layer
    step = _step_down if descending else _step_up
    target_layer = to_kind.layer
    found: set[str] = set()
    seen: set[tuple[str, int]] = set()
    stack = [(from_id, 0)]
    while stack:
        node_id, hops = stack.pop()
        for nxt, next_hops in step(graph, node_id, hops):
            if (nxt, next_hops) in seen:
                continue
            if allowed is not None and not allowed(nxt):
                continue
            layer = graph.node(nxt).kind.layer
            if (layer > target_layer) if descending else (layer < target_layer):
                continue
            seen.add((nxt, next_hops))
            if graph.node(nxt).kind is to_kind:
                found.add(nxt)
            stack.append((nxt, next_hops))
    return frozenset(found)


def count_paths(graph: ThreatGraph, from_kind: NodeKind, to_kind: NodeKind,
                query: QueryFilter | None = None,
                mode: str = "distinct_paths") -> int:
    """Count paths between two kinds over every source node of ``from_kind``.

    ``distinct_paths`` counts distinct node sequences (computed by
    memoized descent, not enumeration); ``distinct_endpoint_pairs`` counts
    distinct (source, target) pairs.  Same-kind queries are 0 by
    definition.
    """
    if mode not in ("distinct_paths", "distinct_endpoint_pairs"):
        raise ValueError(f"unknown counting mode {mode!r}")
    if from_kind is to_kind:
        return 0
    if not _span_covers_required(from_kind, to_kind, query):
        return 0
    allowed = node_predicate(graph, query)
    upper, lower = ((from_kind, to_kind)
                    if from_kind.layer < to_kind.layer else (to_kind, from_kind))
    sources = [node_id for node_id in graph.ids_of_kind(upper)
               if allowed is None or allowed(node_id)]

    if mode == "distinct_endpoint_pairs":
        total = 0
        for source in sources:
            total += len(_descend_reachable(graph, source, lower, allowed))
        return total

    memo: dict[tuple[str, int], int] = {}

    def ways(node_id: str, hops: int) -> int:
        key = (node_id, hops)
        if key in memo:
            return memo[key]
        total = 0
        for child, next_hops in _step_down(graph, node_id, hops):
            if allowed is not None and not allowed(child):
                continue
            if graph.node(child).kind.layer > lower.layer:
                continue
            if graph.node(child).kind is lower:
                total += 1
            total += ways(child, next_hops)
        memo[key] = total
        return total

    return sum(ways(source, 0) for source in sources)


def _descend_reachable(graph, source, lower, allowed):
    found = set()
    seen = set()
    stack = [(source, 0)]
    while stack:
        node_id, hops = stack.pop()
        for child, next_hops in _step_down(graph, node_id, hops):
            if (child, next_hops) in seen:
                continue
            if allowed is not None and not allowed(child):
                continue
            if graph.node(child).kind.layer > lower.layer:
                continue
            seen.add((child, next_hops))
            if graph.node(child).kind is lower:
                found.add(child)
            stack.append((child, next_hops))
    return found


def partition_floaters(graph: ThreatGraph,
                       kind: NodeKind) -> tuple[frozenset[str], frozenset[str]]:
    """Split one kind's nodes into (connected, floaters); floaters have
    no edges at all."""
    connected, floaters = set(), set()
    for node_id in graph.ids_of_kind(kind):
        (floaters if graph.degree(node_id) == 0 else connected).add(node_id)
    return frozenset(connected), frozenset(floaters)


def is_legal_path(graph: ThreatGraph, path: Path) -> bool:
    """Check the structural path invariants against a graph."""
    nodes = path.nodes
    if len(nodes) < 2 or len(set(nodes)) != len(nodes):
        return False
    hops = 0
    for src, dst in zip(nodes, nodes[1:]):
        if dst not in graph.down(src):
            return False
        src_kind, dst_kind = graph.node(src).kind, graph.node(dst).kind
        if src_kind is dst_kind:
            if src_kind is not _TECH:
                return False
            hops += 1
        elif dst_kind.layer != src_kind.layer + 1:
            return False
    return hops <= 1
