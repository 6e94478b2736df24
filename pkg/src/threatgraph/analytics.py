"""Inventories, trends, severity ledgers, and vendor/product studies.

Every report is a plain data structure computed read-only from a sealed
graph; rendering (tables, heat maps) is the CLI's and the UI's job.  All
reports share one record serialization (``to_record``) in the same
line-delimited style as the graph interchange format.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from . import cpe
from .errors import NoEntriesError, UnknownProductError
from .graph import GraphBuilder, NodeKind, ThreatGraph, ThreatNode
from .paths import (
    QueryFilter,
    latest_config_ids,
    node_predicate,
    partition_floaters,
    reachable_set,
)

_UPPER_KINDS = (NodeKind.TACTIC, NodeKind.TECHNIQUE, NodeKind.ATTACK_PATTERN,
                NodeKind.WEAKNESS, NodeKind.VULNERABILITY)


def filtered_view(graph: ThreatGraph, query: QueryFilter | None) -> ThreatGraph:
    """Induced subgraph on the nodes a filter keeps (edges follow)."""
    allowed = node_predicate(graph, query)
    if allowed is None:
        return graph
    builder = GraphBuilder()
    for node in graph.nodes.values():
        if allowed(node.id):
            builder.add_node(node)
    for (src, dst), edge in graph.edges.items():
        if builder.has_node(src) and builder.has_node(dst):
            builder.add_edge(src, dst,
                             original_direction=edge.original_direction,
                             version_range=edge.version_range)
    return builder.seal()


def latest_version_view(graph: ThreatGraph) -> ThreatGraph:
    """Derived graph keeping only each (vendor, product)'s newest
    configuration.

    Configurations with a wildcard or not-applicable version never name a
    newest release; they are retained but flagged with an ``unversioned``
    property.  Vulnerabilities whose every configuration was dropped
    simply lose those edges (they may become floaters).
    """
    kept, unversioned = latest_config_ids(graph)
    builder = GraphBuilder()
    for node in graph.nodes.values():
        if node.kind is NodeKind.CONFIGURATION:
            if node.id not in kept:
                continue
            if node.id in unversioned:
                node = ThreatNode(node.id, node.kind, node.name,
                                  {**node.properties, "unversioned": "true"})
        builder.add_node(node)
    for (src, dst), edge in graph.edges.items():
        if builder.has_node(src) and builder.has_node(dst):
            builder.add_edge(src, dst,
                             original_direction=edge.original_direction,
                             version_range=edge.version_range)
    return builder.seal()


@dataclass(frozen=True)
class InventoryRow:
    """Degree statistics for one kind, floaters counted separately.

    ``total_entries`` and the link statistics cover non-floaters only;
    links are total degree (up + down).
    """

    kind: NodeKind
    total_entries: int
    median_links: float
    min_links: int
    max_links: int
    link_range: int
    floater_count: int

    def to_record(self) -> dict:
        return {"t": "inventory", "kind": self.kind.value,
                "entries": self.total_entries, "median_links": self.median_links,
                "min_links": self.min_links, "max_links": self.max_links,
                "range": self.link_range, "floaters": self.floater_count}


def inventory_report(graph: ThreatGraph,
                     query: QueryFilter | None = None) -> list[InventoryRow]:
    """One row per kind; an optional filter restricts the graph first."""
    view = filtered_view(graph, query)
    rows = []
    for kind in NodeKind:
        connected, floaters = partition_floaters(view, kind)
        degrees = sorted(view.degree(node_id) for node_id in connected)
        if degrees:
            row = InventoryRow(kind, len(degrees),
                               float(statistics.median(degrees)),
                               degrees[0], degrees[-1],
                               degrees[-1] - degrees[0], len(floaters))
        else:
            row = InventoryRow(kind, 0, 0.0, 0, 0, 0, len(floaters))
        rows.append(row)
    return rows


def super_entries(graph: ThreatGraph, kind: NodeKind,
                  percentile: float = 99.0) -> list[str]:
    """Nodes of one kind whose degree reaches the given percentile of the
    kind's non-floater degree distribution."""
    if not 0 < percentile <= 100:
        raise ValueError(f"percentile must be in (0, 100], got {percentile}")
    connected, _ = partition_floaters(graph, kind)
    if not connected:
        raise NoEntriesError(f"no connected {kind.value} entries")
    degrees = {node_id: graph.degree(node_id) for node_id in connected}
    threshold = float(np.percentile(sorted(degrees.values()), percentile))
    return sorted(node_id for node_id, degree in degrees.items()
                  if degree >= threshold)


@dataclass(frozen=True)
class YearlyConnectivity:
    year: int
    cve_count: int
    pct_with_tactic_path: float
    pct_with_pattern_path: float
    pct_without_weakness: float

    def to_record(self) -> dict:
        return {"t": "trend", "year": self.year, "cves": self.cve_count,
                "pct_tactic": self.pct_with_tactic_path,
                "pct_pattern": self.pct_with_pattern_path,
                "pct_no_weakness": self.pct_without_weakness}


def yearly_connectivity(graph: ThreatGraph,
                        query: QueryFilter | None = None) -> list[YearlyConnectivity]:
    """Per reporting year, how far up the layers vulnerabilities connect."""
    view = filtered_view(graph, query)
    buckets: dict[int, list[str]] = {}
    for cve_id in view.ids_of_kind(NodeKind.VULNERABILITY):
        buckets.setdefault(view.node(cve_id).year, []).append(cve_id)
    rows = []
    for year in sorted(buckets):
        cves = buckets[year]
        with_tactic = with_pattern = without_weakness = 0
        for cve_id in cves:
            if reachable_set(view, cve_id, NodeKind.TACTIC):
                with_tactic += 1
            if reachable_set(view, cve_id, NodeKind.ATTACK_PATTERN):
                with_pattern += 1
            if not reachable_set(view, cve_id, NodeKind.WEAKNESS):
                without_weakness += 1
        total = len(cves)
        rows.append(YearlyConnectivity(
            year, total,
            round(100.0 * with_tactic / total, 2),
            round(100.0 * with_pattern / total, 2),
            round(100.0 * without_weakness / total, 2)))
    return rows


@dataclass(frozen=True)
class YearSeverity:
    """Severity sums for one year, in exact tenths under the hood."""

    year: int
    unlinked_sum: float
    operational_sum: float
    total_sum: float
    zero_score_unlinked_fraction: float
    missing_score_count: int

    def to_record(self) -> dict:
        return {"t": "severity", "year": self.year,
                "unlinked": self.unlinked_sum,
                "operational": self.operational_sum,
                "total": self.total_sum,
                "zero_score_unlinked_fraction": self.zero_score_unlinked_fraction,
                "missing_scores": self.missing_score_count}


@dataclass(frozen=True)
class SeverityLedger:
    years: tuple[YearSeverity, ...]

    @property
    def unlinked_total(self) -> float:
        return round(sum(y.unlinked_sum for y in self.years), 1)

    @property
    def operational_total(self) -> float:
        return round(sum(y.operational_sum for y in self.years), 1)

    @property
    def grand_total(self) -> float:
        return round(sum(y.total_sum for y in self.years), 1)


def _score_tenths(node: ThreatNode) -> int | None:
    text = node.properties.get("cvss_score")
    if text is None:
        return None
    return round(float(text) * 10)


def severity_ledger(graph: ThreatGraph,
                    query: QueryFilter | None = None) -> SeverityLedger:
    """Per-year severity sums split by configuration linkage.

    Unlinked severity sums scores of vulnerabilities with no configuration
    edge; operational severity covers those with at least one; the total
    is their sum.  Scores accumulate as exact tenths (one CVSS decimal),
    so total = unlinked + operational holds to the digit.  Vulnerabilities
    without a score contribute zero and are tallied separately.
    """
    view = filtered_view(graph, query)
    per_year: dict[int, dict] = {}
    for cve_id in view.ids_of_kind(NodeKind.VULNERABILITY):
        node = view.node(cve_id)
        bucket = per_year.setdefault(node.year, {
            "unlinked": 0, "operational": 0, "unlinked_count": 0,
            "unlinked_zero": 0, "missing": 0})
        tenths = _score_tenths(node)
        linked = bool(view.down(cve_id))
        if tenths is None:
            bucket["missing"] += 1
            tenths = 0
        if linked:
            bucket["operational"] += tenths
        else:
            bucket["unlinked"] += tenths
            bucket["unlinked_count"] += 1
            if tenths == 0 and node.properties.get("cvss_score") is not None:
                bucket["unlinked_zero"] += 1
    years = []
    for year in sorted(per_year):
        b = per_year[year]
        fraction = (b["unlinked_zero"] / b["unlinked_count"]
                    if b["unlinked_count"] else 0.0)
        years.append(YearSeverity(
            year, b["unlinked"] / 10.0, b["operational"] / 10.0,
            (b["unlinked"] + b["operational"]) / 10.0,
            round(fraction, 4), b["missing"]))
    return SeverityLedger(tuple(years))


def _config_fields(config_id: str) -> tuple[str, str, str]:
    name = cpe.parse_cpe23(config_id)
    def text(attr):
        return attr.text if attr.is_value else attr.field_text()
    return text(name.vendor), text(name.product), text(name.version)


@dataclass(frozen=True)
class VendorTacticCell:
    vendor: str
    tactic_id: str
    count: int

    def to_record(self) -> dict:
        return {"t": "vendor_tactic", "vendor": self.vendor,
                "tactic": self.tactic_id, "count": self.count}


def vendor_tactic_matrix(graph: ThreatGraph, vendors: list[str],
                         mode: str = "unique_products") -> list[VendorTacticCell]:
    """Exposure counts per (vendor, tactic).

    ``unique_products`` counts a product once per tactic no matter how
    many of its versions are affected; ``product_versions`` counts the
    distinct affected (product, version) pairs.  Vendors absent from the
    graph get zero cells rather than errors.
    """
    if mode not in ("unique_products", "product_versions"):
        raise ValueError(f"unknown matrix mode {mode!r}")
    if not vendors:
        raise ValueError("vendor list must be non-empty")
    cells = []
    for tactic_id in graph.ids_of_kind(NodeKind.TACTIC):
        reached = reachable_set(graph, tactic_id, NodeKind.CONFIGURATION)
        by_vendor: dict[str, set] = {vendor: set() for vendor in vendors}
        for config_id in reached:
            vendor, product, version = _config_fields(config_id)
            if vendor not in by_vendor:
                continue
            if mode == "unique_products":
                by_vendor[vendor].add(product)
            else:
                by_vendor[vendor].add((product, version))
        for vendor in vendors:
            cells.append(VendorTacticCell(vendor, tactic_id,
                                          len(by_vendor[vendor])))
    cells.sort(key=lambda cell: (cell.vendor, cell.tactic_id))
    return cells


def vendor_severity_distribution(
        graph: ThreatGraph, vendors: list[str],
        scoring: str = "max_per_product",
        tactic_filter: str | None = None) -> dict[str, list[float]]:
    """Severity score distributions per vendor.

    ``max_per_product`` emits one score per product — the maximum over the
    vulnerabilities linked to any of its configurations; ``all_scores``
    emits every linked vulnerability score per product.  With
    ``tactic_filter``, only products with at least one configuration
    reachable from that tactic participate.  Products with no scored
    vulnerabilities are omitted.
    """
    if scoring not in ("max_per_product", "all_scores"):
        raise ValueError(f"unknown scoring mode {scoring!r}")
    tactic_configs = None
    if tactic_filter is not None:
        tactic_configs = reachable_set(graph, tactic_filter,
                                       NodeKind.CONFIGURATION)
    products: dict[tuple[str, str], set[str]] = {}
    in_tactic: set[tuple[str, str]] = set()
    for config_id in graph.ids_of_kind(NodeKind.CONFIGURATION):
        vendor, product, _version = _config_fields(config_id)
        if vendor not in vendors:
            continue
        key = (vendor, product)
        products.setdefault(key, set()).update(graph.up(config_id))
        if tactic_configs is not None and config_id in tactic_configs:
            in_tactic.add(key)
    out: dict[str, list[float]] = {}
    for (vendor, product) in sorted(products):
        if tactic_configs is not None and (vendor, product) not in in_tactic:
            continue
        scores = []
        for cve_id in sorted(products[(vendor, product)]):
            tenths = _score_tenths(graph.node(cve_id))
            if tenths is not None:
                scores.append(tenths / 10.0)
        if not scores:
            continue
        if scoring == "max_per_product":
            out.setdefault(vendor, []).append(max(scores))
        else:
            out.setdefault(vendor, []).extend(scores)
    return out


@dataclass(frozen=True)
class ProductVersionRow:
    version: str
    tactic_count: int
    technique_count: int
    pattern_count: int
    weakness_count: int
    vulnerability_count: int

    def to_record(self) -> dict:
        return {"t": "product_version", "version": self.version,
                "tactics": self.tactic_count, "techniques": self.technique_count,
                "patterns": self.pattern_count, "weaknesses": self.weakness_count,
                "vulnerabilities": self.vulnerability_count}


def product_version_report(graph: ThreatGraph, vendor: str,
                           product: str) -> list[ProductVersionRow]:
    """Per version of one product, distinct reachable entries of each
    upper kind.  Unknown products yield an empty report."""
    by_version: dict[str, list[str]] = {}
    for config_id in graph.ids_of_kind(NodeKind.CONFIGURATION):
        got_vendor, got_product, version = _config_fields(config_id)
        if got_vendor == vendor and got_product == product:
            by_version.setdefault(version, []).append(config_id)
    rows = []
    for version in sorted(by_version, key=cpe.version_key):
        reach: dict[NodeKind, set[str]] = {kind: set() for kind in _UPPER_KINDS}
        for config_id in by_version[version]:
            for kind in _UPPER_KINDS:
                reach[kind] |= reachable_set(graph, config_id, kind)
        rows.append(ProductVersionRow(
            version,
            len(reach[NodeKind.TACTIC]), len(reach[NodeKind.TECHNIQUE]),
            len(reach[NodeKind.ATTACK_PATTERN]), len(reach[NodeKind.WEAKNESS]),
            len(reach[NodeKind.VULNERABILITY])))
    return rows


# canned queries: thin reachability wrappers with friendly endpoints

def configs_for_tactic(graph: ThreatGraph, tactic_id: str) -> frozenset[str]:
    return reachable_set(graph, tactic_id, NodeKind.CONFIGURATION)


def techniques_for_vulnerability(graph: ThreatGraph,
                                 cve_id: str) -> frozenset[str]:
    return reachable_set(graph, cve_id, NodeKind.TECHNIQUE)


def tactics_and_patterns_for_product(
        graph: ThreatGraph, vendor: str, product: str,
        version: str | None = None) -> tuple[frozenset[str], frozenset[str]]:
    """Tactics and attack patterns that can reach any matching
    configuration; raises :class:`UnknownProductError` if none match."""
    matching = []
    for config_id in graph.ids_of_kind(NodeKind.CONFIGURATION):
        got_vendor, got_product, got_version = _config_fields(config_id)
        if got_vendor != vendor or got_product != product:
            continue
        if version is not None and got_version != version:
            continue
        matching.append(config_id)
    if not matching:
        raise UnknownProductError(
            f"no configuration for vendor={vendor!r} product={product!r}"
            + (f" version={version!r}" if version is not None else ""))
    tactics: set[str] = set()
    patterns: set[str] = set()
    for config_id in matching:
        tactics |= reachable_set(graph, config_id, NodeKind.TACTIC)
        patterns |= reachable_set(graph, config_id, NodeKind.ATTACK_PATTERN)
    return frozenset(tactics), frozenset(patterns)
