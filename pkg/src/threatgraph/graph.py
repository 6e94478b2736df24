"""Layered threat graph: typed nodes, validated adjacency, sealed queries.

Six node kinds form fixed layers, top to bottom: tactics, techniques,
attack patterns, weaknesses, vulnerabilities, affected product
configurations.  Edges cross exactly one layer boundary downward, except
the technique parent -> sub-technique edge which stays inside the
technique layer.  Every edge is stored once and indexed in both a
downward and an upward adjacency map, so traversal is bi-directional even
though the source data links in one direction only.

A graph is assembled through :class:`GraphBuilder` and then sealed;
the sealed :class:`ThreatGraph` is immutable and safe to share across
threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType

from . import cpe
from .errors import (
    DuplicateIdError,
    IllegalLayerPairError,
    InvalidNodeError,
    SealedGraphError,
    SelfEdgeError,
    UnknownEndpointError,
    UnknownNodeError,
)

_CVE_ID = re.compile(r"CVE-(\d{4})-\d{4,}$")


class NodeKind(Enum):
    """Node layer, listed top to bottom."""

    TACTIC = "Tactic"
    TECHNIQUE = "Technique"
    ATTACK_PATTERN = "AttackPattern"
    WEAKNESS = "Weakness"
    VULNERABILITY = "Vulnerability"
    CONFIGURATION = "AffectedProductConfiguration"

    @property
    def layer(self) -> int:
        return _LAYER_INDEX[self]

    @classmethod
    def from_name(cls, text: str) -> "NodeKind":
        """Resolve a kind from its value or a loose lowercase alias."""
        for kind in cls:
            if text == kind.value:
                return kind
        try:
            return _KIND_ALIASES[text.strip().lower().replace("_", "-")]
        except KeyError:
            raise ValueError(f"unknown node kind {text!r}") from None


LAYER_ORDER = tuple(NodeKind)
_LAYER_INDEX = {kind: i for i, kind in enumerate(LAYER_ORDER)}

_KIND_ALIASES = {
    "tactic": NodeKind.TACTIC,
    "technique": NodeKind.TECHNIQUE,
    "attack-pattern": NodeKind.ATTACK_PATTERN,
    "attackpattern": NodeKind.ATTACK_PATTERN,
    "pattern": NodeKind.ATTACK_PATTERN,
    "weakness": NodeKind.WEAKNESS,
    "vulnerability": NodeKind.VULNERABILITY,
    "configuration": NodeKind.CONFIGURATION,
    "affectedproductconfiguration": NodeKind.CONFIGURATION,
    "affected-product-configuration": NodeKind.CONFIGURATION,
}

# (upper kind, lower kind) pairs an edge may connect.  The technique ->
# technique pair is restricted further: destination must be a
# sub-technique of the source (dotted id).
ALLOWED_EDGES = frozenset({
    (NodeKind.TACTIC, NodeKind.TECHNIQUE),
    (NodeKind.TECHNIQUE, NodeKind.TECHNIQUE),
    (NodeKind.TECHNIQUE, NodeKind.ATTACK_PATTERN),
    (NodeKind.ATTACK_PATTERN, NodeKind.WEAKNESS),
    (NodeKind.WEAKNESS, NodeKind.VULNERABILITY),
    (NodeKind.VULNERABILITY, NodeKind.CONFIGURATION),
})


@dataclass(frozen=True)
class ThreatNode:
    """One entry from a source layer, with its verbatim properties."""

    id: str
    kind: NodeKind
    name: str
    properties: dict[str, str] = field(default_factory=dict)

    @property
    def year(self) -> int | None:
        """Reporting year parsed from a CVE id; None for other kinds."""
        m = _CVE_ID.match(self.id)
        return int(m.group(1)) if m else None


@dataclass(frozen=True)
class VersionRange:
    """Version bounds on a vulnerability -> configuration edge."""

    start: str | None = None
    end: str | None = None
    start_inclusive: bool = True
    end_inclusive: bool = True

    def __post_init__(self):
        if self.start is None and self.end is None:
            raise ValueError("a version range needs at least one bound")


@dataclass(frozen=True)
class ThreatEdge:
    """A stored edge, upper node to lower node.

    ``original_direction`` records which way the source data linked the
    pair; traversal is always possible both ways.
    """

    src: str
    dst: str
    original_direction: str = "downward"  # downward | upward | undirected
    version_range: VersionRange | None = None


def _validate_node(node: ThreatNode) -> None:
    if not node.id:
        raise InvalidNodeError("node id must be non-empty")
    if not isinstance(node.kind, NodeKind):
        raise InvalidNodeError(f"bad kind for {node.id!r}")
    if node.kind is NodeKind.VULNERABILITY and node.year is None:
        raise InvalidNodeError(
            f"vulnerability id {node.id!r} does not match CVE-YYYY-NNNN")
    if node.kind is NodeKind.CONFIGURATION:
        try:
            canonical = cpe.parse_cpe23(node.id).to_string()
        except cpe.CpeError as exc:
            raise InvalidNodeError(
                f"configuration id {node.id!r} is not a CPE 2.3 string: {exc}"
            ) from exc
        if canonical != node.id:
            raise InvalidNodeError(
                f"configuration id {node.id!r} is not canonical "
                f"(expected {canonical!r})")


def _sub_technique_of(parent_id: str, child_id: str) -> bool:
    return child_id.startswith(parent_id + ".")


class GraphBuilder:
    """Single-writer accumulator; ``seal()`` yields the immutable graph."""

    def __init__(self):
        self._nodes: dict[str, ThreatNode] = {}
        self._edges: dict[tuple[str, str], ThreatEdge] = {}
        self._sealed = False

    def _check_open(self):
        if self._sealed:
            raise SealedGraphError("graph already sealed")

    def add_node(self, node: ThreatNode) -> None:
        """Add a node; exact re-insertion is a no-op."""
        self._check_open()
        _validate_node(node)
        existing = self._nodes.get(node.id)
        if existing is not None:
            if existing != node:
                raise DuplicateIdError(
                    f"node {node.id!r} re-added with conflicting payload")
            return
        self._nodes[node.id] = node

    def add_edge(self, src: str, dst: str, *,
                 original_direction: str = "downward",
                 version_range: VersionRange | None = None) -> None:
        """Link an upper node to a lower node; exact re-insertion is a no-op."""
        self._check_open()
        if src == dst:
            raise SelfEdgeError(f"self edge on {src!r}")
        try:
            src_node, dst_node = self._nodes[src], self._nodes[dst]
        except KeyError as exc:
            raise UnknownEndpointError(f"unknown endpoint {exc.args[0]!r}") from None
        pair = (src_node.kind, dst_node.kind)
        if pair not in ALLOWED_EDGES:
            raise IllegalLayerPairError(
                f"{pair[0].value} -> {pair[1].value} is not an adjacent layer pair")
        if pair == (NodeKind.TECHNIQUE, NodeKind.TECHNIQUE) and \
                not _sub_technique_of(src, dst):
            raise IllegalLayerPairError(
                f"{dst!r} is not a sub-technique of {src!r}")
        edge = ThreatEdge(src, dst, original_direction, version_range)
        existing = self._edges.get((src, dst))
        if existing is not None:
            if existing != edge:
                raise DuplicateIdError(
                    f"edge {src!r} -> {dst!r} re-added with conflicting annotations")
            return
        self._edges[(src, dst)] = edge

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def has_edge(self, src: str, dst: str) -> bool:
        return (src, dst) in self._edges

    def seal(self) -> "ThreatGraph":
        """Freeze the build into an immutable, query-only graph."""
        self._check_open()
        self._sealed = True
        return ThreatGraph(self._nodes, self._edges)


class ThreatGraph:
    """Immutable layered graph with mirrored up/down adjacency."""

    def __init__(self, nodes: dict[str, ThreatNode],
                 edges: dict[tuple[str, str], ThreatEdge]):
        self._nodes = MappingProxyType(dict(sorted(nodes.items())))
        self._edges = MappingProxyType(dict(sorted(edges.items())))
        down: dict[str, list[str]] = {}
        up: dict[str, list[str]] = {}
        for src, dst in self._edges:
            down.setdefault(src, []).append(dst)
            up.setdefault(dst, []).append(src)
        self._down = {k: tuple(sorted(v)) for k, v in down.items()}
        self._up = {k: tuple(sorted(v)) for k, v in up.items()}

    @property
    def nodes(self):
        return self._nodes

    @property
    def edges(self):
        return self._edges

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> ThreatNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def edge(self, src: str, dst: str) -> ThreatEdge:
        try:
            return self._edges[(src, dst)]
        except KeyError:
            raise UnknownNodeError(f"no edge {src!r} -> {dst!r}") from None

    def down(self, node_id: str) -> tuple[str, ...]:
        """Lower-layer neighbors, sorted by id."""
        self.node(node_id)
        return self._down.get(node_id, ())

    def up(self, node_id: str) -> tuple[str, ...]:
        """Upper-layer neighbors, sorted by id."""
        self.node(node_id)
        return self._up.get(node_id, ())

    def neighbors(self, node_id: str, direction: str = "both") -> tuple[str, ...]:
        """Neighbors in the given direction ("up", "down", or "both")."""
        if direction == "down":
            return self.down(node_id)
        if direction == "up":
            return self.up(node_id)
        if direction == "both":
            self.node(node_id)
            return tuple(sorted(set(self._down.get(node_id, ())) |
                                set(self._up.get(node_id, ()))))
        raise ValueError(f"direction must be up/down/both, got {direction!r}")

    def degree(self, node_id: str) -> int:
        self.node(node_id)
        return len(self._down.get(node_id, ())) + len(self._up.get(node_id, ()))

    def ids_of_kind(self, kind: NodeKind) -> tuple[str, ...]:
        """All node ids of one kind, sorted."""
        return tuple(n.id for n in self._nodes.values() if n.kind is kind)

    def edge_count(self) -> int:
        return len(self._edges)
