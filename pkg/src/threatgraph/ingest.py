"""Source loading and graph assembly.

Four loaders normalize the public source formats into flat records:

* ``load_attack``   — attack-framework bundle (JSON object export) with
  tactics, techniques, sub-techniques, and attack-pattern cross-references
* ``load_capec``    — attack-pattern catalog (XML) with weakness links
* ``load_cwe``      — weakness catalog (XML)
* ``load_cve_feed`` — vulnerability feed (JSON) with severity scores and
  affected-configuration match criteria

``build_graph`` stitches any mix of records into a sealed graph plus a
:class:`BuildReport`; cross-references whose target is absent are reported
as dangling, never stubbed.  ``write_interchange``/``read_interchange``
persist a sealed graph as deterministic line-delimited JSON records.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

from . import cpe
from .errors import ConflictingRecordError, ParseError, SchemaError
from .graph import (
    GraphBuilder,
    NodeKind,
    ThreatGraph,
    ThreatNode,
    VersionRange,
)

_TACTIC_ID = re.compile(r"TA\d{4}$")
_TECHNIQUE_ID = re.compile(r"T\d{4}(\.\d{3})?$")
_PATTERN_ID = re.compile(r"CAPEC-\d+$")
_WEAKNESS_ID = re.compile(r"CWE-\d+$")
_CVE_ID = re.compile(r"CVE-\d{4}-\d{4,}$")


def _check_id(pattern: re.Pattern, value: str, what: str) -> None:
    if not pattern.match(value):
        raise SchemaError(f"{what} id {value!r} does not match the source pattern",
                          field="id")


@dataclass(frozen=True)
class TacticRecord:
    id: str
    name: str

    def __post_init__(self):
        _check_id(_TACTIC_ID, self.id, "tactic")


@dataclass(frozen=True)
class TechniqueRecord:
    id: str
    name: str
    tactic_ids: tuple[str, ...] = ()
    parent_id: str | None = None
    capec_ids: tuple[str, ...] = ()

    def __post_init__(self):
        _check_id(_TECHNIQUE_ID, self.id, "technique")


@dataclass(frozen=True)
class PatternRecord:
    id: str
    name: str
    cwe_ids: tuple[str, ...] = ()

    def __post_init__(self):
        _check_id(_PATTERN_ID, self.id, "attack pattern")


@dataclass(frozen=True)
class WeaknessRecord:
    id: str
    name: str

    def __post_init__(self):
        _check_id(_WEAKNESS_ID, self.id, "weakness")


@dataclass(frozen=True)
class CpeMatch:
    """One affected-configuration criterion: canonical CPE + optional bounds."""

    cpe_string: str
    version_range: VersionRange | None = None


@dataclass(frozen=True)
class VulnerabilityRecord:
    id: str
    description: str = ""
    cvss_score: float | None = None
    cvss_version: str = ""
    cwe_ids: tuple[str, ...] = ()
    cpe_matches: tuple[CpeMatch, ...] = ()
    dropped_cpes: tuple[str, ...] = ()  # malformed match strings, for the report

    def __post_init__(self):
        _check_id(_CVE_ID, self.id, "vulnerability")
        if self.cvss_score is not None and not 0.0 <= self.cvss_score <= 10.0:
            raise SchemaError(f"cvss score {self.cvss_score} outside 0..10",
                              field="cvss_score")


SourceRecord = Union[TacticRecord, TechniqueRecord, PatternRecord,
                     WeaknessRecord, VulnerabilityRecord]


def _read_text(source) -> str:
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    with open(source, "r", encoding="utf-8") as handle:
        return handle.read()


def _load_json(source):
    text = _read_text(source)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", offset=exc.pos) from exc


def _load_xml_root(source) -> ET.Element:
    text = _read_text(source)
    try:
        return ET.fromstring(text)
    except ET.ParseError as exc:
        line, _col = exc.position
        raise ParseError(f"invalid XML: {exc.msg}", line=line) from exc


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _iter_local(root: ET.Element, name: str):
    for element in root.iter():
        if _local(element.tag) == name:
            yield element


def _external_id(obj: dict, source_name: str) -> str | None:
    for ref in obj.get("external_references", ()):
        if ref.get("source_name") == source_name and ref.get("external_id"):
            return ref["external_id"]
    return None


def _is_retired(obj: dict) -> bool:
    return bool(obj.get("revoked")) or bool(obj.get("x_mitre_deprecated"))


def load_attack(source) -> list[SourceRecord]:
    """Load tactics and techniques from an attack-framework bundle.

    Techniques carry their tactic memberships (resolved from the bundle's
    tactic shortnames), a parent id when the technique id is dotted, and
    any attack-pattern catalog cross-references.  Revoked and deprecated
    entries are dropped.
    """
    bundle = _load_json(source)
    if not isinstance(bundle, dict) or "objects" not in bundle:
        raise SchemaError("bundle has no 'objects' array", field="objects")

    shortname_to_id: dict[str, str] = {}
    tactics: list[SourceRecord] = []
    for obj in bundle["objects"]:
        if obj.get("type") != "x-mitre-tactic" or _is_retired(obj):
            continue
        ext_id = _external_id(obj, "mitre-attack")
        if ext_id is None:
            raise SchemaError("tactic object lacks a framework external_id",
                              field="external_references")
        if "name" not in obj:
            raise SchemaError(f"tactic {ext_id} lacks a name", field="name")
        tactics.append(TacticRecord(ext_id, obj["name"]))
        shortname = obj.get("x_mitre_shortname")
        if shortname:
            shortname_to_id[shortname] = ext_id

    techniques: list[SourceRecord] = []
    for obj in bundle["objects"]:
        if obj.get("type") != "attack-pattern" or _is_retired(obj):
            continue
        ext_id = _external_id(obj, "mitre-attack")
        if ext_id is None:
            raise SchemaError("technique object lacks a framework external_id",
                              field="external_references")
        if "name" not in obj:
            raise SchemaError(f"technique {ext_id} lacks a name", field="name")
        tactic_ids = []
        for phase in obj.get("kill_chain_phases", ()):
            shortname = phase.get("phase_name", "")
            # unresolved shortnames are kept verbatim so the stitch
            # reports them as dangling instead of silently dropping them
            tactic_ids.append(shortname_to_id.get(shortname, shortname))
        capec_ids = tuple(
            ref["external_id"]
            for ref in obj.get("external_references", ())
            if ref.get("source_name") == "capec" and ref.get("external_id")
        )
        parent_id = ext_id.split(".")[0] if "." in ext_id else None
        techniques.append(TechniqueRecord(
            ext_id, obj["name"],
            tactic_ids=tuple(tactic_ids),
            parent_id=parent_id,
            capec_ids=capec_ids,
        ))
    return tactics + techniques


def load_capec(source) -> list[SourceRecord]:
    """Load attack patterns (with related-weakness ids) from the catalog XML."""
    root = _load_xml_root(source)
    records: list[SourceRecord] = []
    for pattern in _iter_local(root, "Attack_Pattern"):
        if pattern.get("Status") == "Deprecated":
            continue
        raw_id = pattern.get("ID")
        if raw_id is None:
            raise SchemaError("Attack_Pattern element lacks an ID attribute",
                              field="ID")
        name = pattern.get("Name")
        if name is None:
            raise SchemaError(f"Attack_Pattern {raw_id} lacks a Name", field="Name")
        cwe_ids = tuple(
            f"CWE-{related.get('CWE_ID')}"
            for related in _iter_local(pattern, "Related_Weakness")
            if related.get("CWE_ID")
        )
        records.append(PatternRecord(f"CAPEC-{raw_id}", name, cwe_ids))
    return records


def load_cwe(source) -> list[SourceRecord]:
    """Load weaknesses from the catalog XML; hierarchy relations are ignored."""
    root = _load_xml_root(source)
    records: list[SourceRecord] = []
    for weakness in _iter_local(root, "Weakness"):
        if weakness.get("Status") == "Deprecated":
            continue
        raw_id = weakness.get("ID")
        if raw_id is None:
            raise SchemaError("Weakness element lacks an ID attribute", field="ID")
        name = weakness.get("Name")
        if name is None:
            raise SchemaError(f"Weakness {raw_id} lacks a Name", field="Name")
        records.append(WeaknessRecord(f"CWE-{raw_id}", name))
    return records


def _merge_ranges(a: VersionRange | None,
                  b: VersionRange | None) -> VersionRange | None:
    """Widest span covering both ranges; None (no constraint) wins."""
    if a is None or b is None:
        return None
    if a == b:
        return a
    if a.start is None or b.start is None:
        start, start_inc = None, True
    else:
        order = cpe.compare_versions(a.start, b.start)
        if order == 0:
            start, start_inc = a.start, a.start_inclusive or b.start_inclusive
        else:
            lower = a if order < 0 else b
            start, start_inc = lower.start, lower.start_inclusive
    if a.end is None or b.end is None:
        end, end_inc = None, True
    else:
        order = cpe.compare_versions(a.end, b.end)
        if order == 0:
            end, end_inc = a.end, a.end_inclusive or b.end_inclusive
        else:
            upper = a if order > 0 else b
            end, end_inc = upper.end, upper.end_inclusive
    if start is None and end is None:
        return None
    return VersionRange(start, end, start_inc, end_inc)


def _match_range(match: dict) -> VersionRange | None:
    start = match.get("versionStartIncluding")
    start_inc = True
    if start is None and "versionStartExcluding" in match:
        start, start_inc = match["versionStartExcluding"], False
    end = match.get("versionEndIncluding")
    end_inc = True
    if end is None and "versionEndExcluding" in match:
        end, end_inc = match["versionEndExcluding"], False
    if start is None and end is None:
        return None
    return VersionRange(start, end, start_inc, end_inc)


def _flatten_config_nodes(nodes: list) -> Iterable[dict]:
    for node in nodes:
        yield from node.get("cpe_match", ())
        yield from _flatten_config_nodes(node.get("children", ()))


def _item_score(impact: dict) -> tuple[float | None, str]:
    v3 = impact.get("baseMetricV3", {}).get("cvssV3", {}).get("baseScore")
    if v3 is not None:
        return float(v3), "v3"
    v2 = impact.get("baseMetricV2", {}).get("cvssV2", {}).get("baseScore")
    if v2 is not None:
        return float(v2), "v2"
    return None, ""


def load_cve_feed(source) -> list[SourceRecord]:
    """Load vulnerability records from a feed document.

    Configuration trees are flattened to their leaf CPE match criteria
    (boolean operators dropped); only matches flagged vulnerable count as
    affected products.  Version bounds travel with each match.  Severity
    prefers the v3 base score over v2; weakness references that do not
    look like CWE ids (e.g. the feed's "no information" markers) are
    ignored.  Matches with unparseable CPE strings are dropped from the
    record but kept in ``dropped_cpes`` so the build can report them.
    """
    feed = _load_json(source)
    if not isinstance(feed, dict) or "CVE_Items" not in feed:
        raise SchemaError("feed has no 'CVE_Items' array", field="CVE_Items")
    records: list[SourceRecord] = []
    for item in feed["CVE_Items"]:
        meta = item.get("cve", {}).get("CVE_data_meta", {})
        cve_id = meta.get("ID")
        if cve_id is None:
            raise SchemaError("feed item lacks cve.CVE_data_meta.ID",
                              field="cve.CVE_data_meta.ID")
        description = ""
        for entry in item.get("cve", {}).get("description", {}) \
                         .get("description_data", ()):
            if entry.get("value"):
                description = entry["value"]
                if entry.get("lang") == "en":
                    break
        cwe_ids = []
        for ptype in item.get("cve", {}).get("problemtype", {}) \
                         .get("problemtype_data", ()):
            for desc in ptype.get("description", ()):
                ref = desc.get("value", "")
                if _WEAKNESS_ID.match(ref) and ref not in cwe_ids:
                    cwe_ids.append(ref)
        score, version_tag = _item_score(item.get("impact", {}))
        matches: dict[str, VersionRange | None] = {}
        dropped: list[str] = []
        raw_matches = _flatten_config_nodes(
            item.get("configurations", {}).get("nodes", ()))
        for match in raw_matches:
            if match.get("vulnerable") is False:
                continue
            uri = match.get("cpe23Uri")
            if uri is None:
                dropped.append("<missing cpe23Uri>")
                continue
            try:
                canonical = cpe.parse_cpe23(uri).to_string()
            except cpe.CpeError:
                dropped.append(uri)
                continue
            bounds = _match_range(match)
            if canonical in matches:
                matches[canonical] = _merge_ranges(matches[canonical], bounds)
            else:
                matches[canonical] = bounds
        records.append(VulnerabilityRecord(
            cve_id,
            description=description,
            cvss_score=score,
            cvss_version=version_tag,
            cwe_ids=tuple(cwe_ids),
            cpe_matches=tuple(CpeMatch(uri, rng)
                              for uri, rng in sorted(matches.items())),
            dropped_cpes=tuple(dropped),
        ))
    return records


@dataclass
class BuildReport:
    """What the stitch produced, and what it had to leave out."""

    node_counts: dict[NodeKind, int] = field(default_factory=dict)
    edge_counts: dict[tuple[NodeKind, NodeKind], int] = field(default_factory=dict)
    dangling_refs: tuple[tuple[str, str], ...] = ()
    duplicate_records: int = 0
    duplicate_edges: int = 0

    @property
    def total_nodes(self) -> int:
        return sum(self.node_counts.values())

    @property
    def total_edges(self) -> int:
        return sum(self.edge_counts.values())


def _config_node(canonical: str) -> ThreatNode:
    name = cpe.parse_cpe23(canonical)
    props = {
        "vendor": name.vendor.field_text(),
        "product": name.product.field_text(),
        "version": name.version.field_text(),
    }
    return ThreatNode(canonical, NodeKind.CONFIGURATION, canonical, props)


def _dedupe(records: Iterable[SourceRecord]) -> tuple[list[SourceRecord], int]:
    by_id: dict[str, SourceRecord] = {}
    duplicates = 0
    for record in records:
        existing = by_id.get(record.id)
        if existing is None:
            by_id[record.id] = record
        elif existing == record:
            duplicates += 1
        else:
            raise ConflictingRecordError(
                f"record {record.id!r} appears twice with different payloads")
    return [by_id[key] for key in sorted(by_id)], duplicates


def build_graph(records: Iterable[SourceRecord]) -> tuple[ThreatGraph, BuildReport]:
    """Stitch records into a sealed graph.

    Nodes are created for every record; configuration nodes exist only
    where a vulnerability claims them, so they are never floaters.  An
    edge is created only when both endpoints exist — anything else lands
    in ``dangling_refs``.  Output is deterministic regardless of record
    order.
    """
    ordered, duplicates = _dedupe(records)
    builder = GraphBuilder()
    dangling: list[tuple[str, str]] = []
    duplicate_edges = 0

    kind_for = {
        TacticRecord: NodeKind.TACTIC,
        TechniqueRecord: NodeKind.TECHNIQUE,
        PatternRecord: NodeKind.ATTACK_PATTERN,
        WeaknessRecord: NodeKind.WEAKNESS,
    }
    for record in ordered:
        if isinstance(record, VulnerabilityRecord):
            props = {"description": record.description,
                     "year": record.id.split("-")[1]}
            if record.cvss_score is not None:
                props["cvss_score"] = f"{record.cvss_score:.1f}"
                props["cvss_version"] = record.cvss_version
            builder.add_node(ThreatNode(record.id, NodeKind.VULNERABILITY,
                                        record.id, props))
            for match in record.cpe_matches:
                builder.add_node(_config_node(match.cpe_string))
        else:
            builder.add_node(ThreatNode(record.id, kind_for[type(record)],
                                        record.name))

    def add_edge(src, dst, direction, version_range=None):
        nonlocal duplicate_edges
        if builder.has_edge(src, dst):
            duplicate_edges += 1
            return
        builder.add_edge(src, dst, original_direction=direction,
                         version_range=version_range)

    for record in ordered:
        if isinstance(record, TechniqueRecord):
            for tactic_id in record.tactic_ids:
                if builder.has_node(tactic_id):
                    add_edge(tactic_id, record.id, "upward")
                else:
                    dangling.append((record.id, tactic_id))
            if record.parent_id is not None:
                if builder.has_node(record.parent_id):
                    add_edge(record.parent_id, record.id, "upward")
                else:
                    dangling.append((record.id, record.parent_id))
            for capec_id in record.capec_ids:
                if builder.has_node(capec_id):
                    add_edge(record.id, capec_id, "downward")
                else:
                    dangling.append((record.id, capec_id))
        elif isinstance(record, PatternRecord):
            for cwe_id in record.cwe_ids:
                if builder.has_node(cwe_id):
                    add_edge(record.id, cwe_id, "downward")
                else:
                    dangling.append((record.id, cwe_id))
        elif isinstance(record, VulnerabilityRecord):
            for cwe_id in record.cwe_ids:
                if builder.has_node(cwe_id):
                    add_edge(cwe_id, record.id, "upward")
                else:
                    dangling.append((record.id, cwe_id))
            for match in record.cpe_matches:
                add_edge(record.id, match.cpe_string, "downward",
                         match.version_range)
            for raw in record.dropped_cpes:
                dangling.append((record.id, raw))

    graph = builder.seal()
    report = BuildReport(
        node_counts={kind: len(graph.ids_of_kind(kind)) for kind in NodeKind},
        edge_counts=_edge_counts(graph),
        dangling_refs=tuple(sorted(dangling)),
        duplicate_records=duplicates,
        duplicate_edges=duplicate_edges,
    )
    return graph, report


def _edge_counts(graph: ThreatGraph) -> dict[tuple[NodeKind, NodeKind], int]:
    counts: dict[tuple[NodeKind, NodeKind], int] = {}
    for src, dst in graph.edges:
        pair = (graph.node(src).kind, graph.node(dst).kind)
        counts[pair] = counts.get(pair, 0) + 1
    return counts


# --- interchange format ----------------------------------------------------
#
# One JSON record per line, UTF-8, nodes sorted by id then edges sorted by
# (src, dst):
#   {"t":"node","id":...,"kind":...,"name":...,"props":{...}}
#   {"t":"edge","src":...,"dst":...,"range":{...}?,"dir":"upward"?}
# "dir" is omitted for the default downward original direction; "range"
# carries only the bounds that exist.

def dump_record(obj: dict) -> str:
    """Render one record in the interchange style (compact, sorted keys)."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))


_dump = dump_record


def _range_payload(rng: VersionRange) -> dict:
    payload: dict = {}
    if rng.start is not None:
        payload["start"] = rng.start
        payload["start_inclusive"] = rng.start_inclusive
    if rng.end is not None:
        payload["end"] = rng.end
        payload["end_inclusive"] = rng.end_inclusive
    return payload


def write_interchange(graph: ThreatGraph, stream: IO[str]) -> None:
    """Write a sealed graph as line-delimited records; deterministic."""
    for node in graph.nodes.values():
        stream.write(_dump({
            "t": "node", "id": node.id, "kind": node.kind.value,
            "name": node.name, "props": node.properties,
        }) + "\n")
    for edge in graph.edges.values():
        payload = {"t": "edge", "src": edge.src, "dst": edge.dst}
        if edge.version_range is not None:
            payload["range"] = _range_payload(edge.version_range)
        if edge.original_direction != "downward":
            payload["dir"] = edge.original_direction
        stream.write(_dump(payload) + "\n")


def dumps_interchange(graph: ThreatGraph) -> str:
    import io
    buffer = io.StringIO()
    write_interchange(graph, buffer)
    return buffer.getvalue()


def read_interchange(source) -> ThreatGraph:
    """Read a graph back from interchange lines; read∘write is identity."""
    text = _read_text(source)
    nodes: list[ThreatNode] = []
    edges: list[tuple[str, str, str, VersionRange | None]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid interchange record: {exc.msg}",
                             line=lineno) from exc
        tag = record.get("t")
        try:
            if tag == "node":
                nodes.append(ThreatNode(
                    record["id"], NodeKind.from_name(record["kind"]),
                    record["name"], dict(record.get("props", {}))))
            elif tag == "edge":
                rng = None
                if "range" in record:
                    r = record["range"]
                    rng = VersionRange(
                        r.get("start"), r.get("end"),
                        r.get("start_inclusive", True),
                        r.get("end_inclusive", True))
                edges.append((record["src"], record["dst"],
                              record.get("dir", "downward"), rng))
            else:
                raise ParseError(f"unknown record tag {tag!r}", line=lineno)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad interchange record: {exc}", line=lineno) from exc
    builder = GraphBuilder()
    for node in nodes:
        builder.add_node(node)
    for src, dst, direction, rng in edges:
        builder.add_edge(src, dst, original_direction=direction,
                         version_range=rng)
    return builder.seal()
