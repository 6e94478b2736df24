import io
import json
import random

import pytest

from threatgraph import ingest
from threatgraph.errors import (
    ConflictingRecordError,
    ParseError,
    SchemaError,
)
from threatgraph.graph import NodeKind, VersionRange
from threatgraph.ingest import (
    PatternRecord,
    TacticRecord,
    TechniqueRecord,
    VulnerabilityRecord,
    WeaknessRecord,
)


def test_load_attack_mini(mini_paths):
    records = ingest.load_attack(mini_paths["attack"])
    by_id = {r.id: r for r in records}
    assert isinstance(by_id["TA0003"], TacticRecord)
    assert by_id["TA0003"].name == "Persistence"
    tech = by_id["T1574"]
    assert tech.tactic_ids == ("TA0003", "TA0005")
    sub = by_id["T1574.010"]
    assert sub.parent_id == "T1574"
    assert sub.capec_ids == ("CAPEC-17",)
    assert "T0666" not in by_id  # revoked entries dropped
    tactics = [r for r in records if isinstance(r, TacticRecord)]
    techniques = [r for r in records if isinstance(r, TechniqueRecord)]
    assert len(tactics) == 2 and len(techniques) == 3


def test_load_attack_empty_bundle():
    assert ingest.load_attack(io.StringIO('{"objects": []}')) == []


def test_load_attack_bad_json_reports_offset():
    with pytest.raises(ParseError) as err:
        ingest.load_attack(io.StringIO('{"objects": [}'))
    assert err.value.offset is not None


def test_load_attack_missing_objects():
    with pytest.raises(SchemaError) as err:
        ingest.load_attack(io.StringIO("{}"))
    assert err.value.field == "objects"


def test_load_attack_unresolved_shortname_kept():
    bundle = {"objects": [
        {"type": "attack-pattern", "name": "X",
         "kill_chain_phases": [
             {"kill_chain_name": "mitre-attack", "phase_name": "no-such"}],
         "external_references": [
             {"source_name": "mitre-attack", "external_id": "T1001"}]},
    ]}
    (tech,) = ingest.load_attack(io.StringIO(json.dumps(bundle)))
    assert tech.tactic_ids == ("no-such",)


CAPEC_SIX = """<?xml version="1.0"?>
<Attack_Pattern_Catalog xmlns="http://capec.mitre.org/capec-3" Version="3.4">
  <Attack_Patterns>
    <Attack_Pattern ID="142" Name="DNS Cache Poisoning" Status="Stable">
      <Related_Weaknesses>
        <Related_Weakness CWE_ID="348"/>
        <Related_Weakness CWE_ID="345"/>
        <Related_Weakness CWE_ID="349"/>
        <Related_Weakness CWE_ID="346"/>
        <Related_Weakness CWE_ID="441"/>
        <Related_Weakness CWE_ID="350"/>
      </Related_Weaknesses>
    </Attack_Pattern>
  </Attack_Patterns>
</Attack_Pattern_Catalog>
"""


def test_load_capec_related_weaknesses():
    (pattern,) = ingest.load_capec(io.StringIO(CAPEC_SIX))
    assert pattern.id == "CAPEC-142"
    assert len(pattern.cwe_ids) == 6
    assert "CWE-348" in pattern.cwe_ids


def test_load_capec_mini_drops_deprecated(mini_paths):
    records = ingest.load_capec(mini_paths["capec"])
    assert {r.id for r in records} == {"CAPEC-17", "CAPEC-900"}


def test_load_capec_empty():
    doc = '<Attack_Pattern_Catalog xmlns="x"><Attack_Patterns/></Attack_Pattern_Catalog>'
    assert ingest.load_capec(io.StringIO(doc)) == []


def test_load_capec_bad_xml_reports_line():
    with pytest.raises(ParseError) as err:
        ingest.load_capec(io.StringIO("<a><b></a>"))
    assert err.value.line is not None


def test_load_cwe_mini(mini_paths):
    records = ingest.load_cwe(mini_paths["cwe"])
    by_id = {r.id: r.name for r in records}
    assert by_id == {
        "CWE-264": "Permissions, Privileges, and Access Controls",
        "CWE-200": "Exposure of Sensitive Information to an Unauthorized Actor",
    }


def test_load_cwe_entry():
    doc = """<Weakness_Catalog xmlns="x"><Weaknesses>
      <Weakness ID="269" Name="Improper Privilege Management" Status="Stable"/>
    </Weaknesses></Weakness_Catalog>"""
    (weakness,) = ingest.load_cwe(io.StringIO(doc))
    assert weakness == WeaknessRecord("CWE-269", "Improper Privilege Management")


def test_load_cwe_empty():
    doc = '<Weakness_Catalog xmlns="x"><Weaknesses/></Weakness_Catalog>'
    assert ingest.load_cwe(io.StringIO(doc)) == []


def _feed(items):
    return io.StringIO(json.dumps({"CVE_Items": items}))


def _item(cve_id, configs=None, impact=None, cwes=(), description="d"):
    return {
        "cve": {
            "CVE_data_meta": {"ID": cve_id},
            "problemtype": {"problemtype_data": [
                {"description": [{"lang": "en", "value": c} for c in cwes]}]},
            "description": {"description_data": [
                {"lang": "en", "value": description}]},
        },
        "configurations": {"nodes": configs or []},
        "impact": impact or {},
    }


def test_load_cve_version_range_end_exclusive():
    items = [_item("CVE-2011-1185", configs=[{
        "operator": "OR",
        "cpe_match": [{
            "vulnerable": True,
            "cpe23Uri": "cpe:2.3:a:google:chrome:*:*:*:*:*:*:*:*",
            "versionEndExcluding": "10.0.648.127",
        }],
    }])]
    (record,) = ingest.load_cve_feed(_feed(items))
    (match,) = record.cpe_matches
    assert match.version_range == VersionRange(end="10.0.648.127",
                                               end_inclusive=False)


def test_load_cve_no_configurations_unlinked():
    (record,) = ingest.load_cve_feed(_feed([_item("CVE-1999-0001")]))
    assert record.cpe_matches == ()


def test_load_cve_v2_score():
    impact = {"baseMetricV2": {"cvssV2": {"baseScore": 7.5}}}
    (record,) = ingest.load_cve_feed(_feed([_item("CVE-2019-12183",
                                                  impact=impact)]))
    assert record.cvss_score == 7.5
    assert record.cvss_version == "v2"


def test_load_cve_prefers_v3():
    impact = {"baseMetricV2": {"cvssV2": {"baseScore": 7.5}},
              "baseMetricV3": {"cvssV3": {"baseScore": 9.8}}}
    (record,) = ingest.load_cve_feed(_feed([_item("CVE-2020-0001",
                                                  impact=impact)]))
    assert (record.cvss_score, record.cvss_version) == (9.8, "v3")


def test_load_cve_missing_score_absent():
    (record,) = ingest.load_cve_feed(_feed([_item("CVE-2020-0002")]))
    assert record.cvss_score is None
    assert record.cvss_version == ""


def test_load_cve_malformed_cpe_kept_with_note():
    items = [_item("CVE-2020-0003", configs=[{
        "operator": "OR",
        "cpe_match": [
            {"vulnerable": True, "cpe23Uri": "cpe:/a:old:uri:binding"},
            {"vulnerable": True,
             "cpe23Uri": "cpe:2.3:a:good:tool:1.0:*:*:*:*:*:*:*"},
        ],
    }])]
    (record,) = ingest.load_cve_feed(_feed(items))
    assert [m.cpe_string for m in record.cpe_matches] == [
        "cpe:2.3:a:good:tool:1.0:*:*:*:*:*:*:*"]
    assert record.dropped_cpes == ("cpe:/a:old:uri:binding",)


def test_load_cve_nested_children_flattened():
    items = [_item("CVE-2020-0004", configs=[{
        "operator": "AND",
        "children": [
            {"operator": "OR", "cpe_match": [
                {"vulnerable": True,
                 "cpe23Uri": "cpe:2.3:a:v:p:1.0:*:*:*:*:*:*:*"}]},
            {"operator": "OR", "cpe_match": [
                {"vulnerable": False,
                 "cpe23Uri": "cpe:2.3:o:other:os:2.0:*:*:*:*:*:*:*"}]},
        ],
    }])]
    (record,) = ingest.load_cve_feed(_feed(items))
    # only the vulnerable leaf counts as an affected product
    assert [m.cpe_string for m in record.cpe_matches] == [
        "cpe:2.3:a:v:p:1.0:*:*:*:*:*:*:*"]


def test_load_cve_skips_non_cwe_problemtype():
    (record,) = ingest.load_cve_feed(
        _feed([_item("CVE-2020-0005", cwes=("NVD-CWE-noinfo", "CWE-79"))]))
    assert record.cwe_ids == ("CWE-79",)


def test_load_cve_missing_id():
    with pytest.raises(SchemaError) as err:
        ingest.load_cve_feed(_feed([{"cve": {}}]))
    assert "ID" in err.value.field


def test_build_graph_mini_counts(mini_records):
    graph, report = ingest.build_graph(mini_records)
    assert len(graph) == 13
    assert graph.edge_count() == 10
    assert report.dangling_refs == ()
    assert report.total_nodes == 13
    assert report.total_edges == 10


def test_build_graph_dangling_reference():
    records = [PatternRecord("CAPEC-1", "P", cwe_ids=("CWE-9999",))]
    graph, report = ingest.build_graph(records)
    assert graph.edge_count() == 0
    assert report.dangling_refs == (("CAPEC-1", "CWE-9999"),)


def test_build_graph_unlinked_technique_remains():
    records = [TacticRecord("TA0001", "A"),
               TechniqueRecord("T1001", "T", tactic_ids=("TA0001",))]
    graph, _ = ingest.build_graph(records)
    assert graph.degree("T1001") == 1  # only the tactic edge


def test_build_graph_conflicting_records():
    records = [TacticRecord("TA0001", "A"), TacticRecord("TA0001", "B")]
    with pytest.raises(ConflictingRecordError):
        ingest.build_graph(records)


def test_build_graph_duplicates_counted(mini_records):
    graph, report = ingest.build_graph(list(mini_records) + [mini_records[0]])
    assert report.duplicate_records == 1
    assert len(graph) == 13


def test_build_graph_order_insensitive(mini_records):
    base = ingest.dumps_interchange(ingest.build_graph(mini_records)[0])
    for seed in range(5):
        shuffled = list(mini_records)
        random.Random(seed).shuffle(shuffled)
        graph, _ = ingest.build_graph(shuffled)
        assert ingest.dumps_interchange(graph) == base


def test_build_graph_counts_match_scan(mini_records):
    graph, report = ingest.build_graph(mini_records)
    for kind in NodeKind:
        assert report.node_counts[kind] == len(graph.ids_of_kind(kind))
    assert sum(report.edge_counts.values()) == graph.edge_count()


def test_build_graph_fuzzed_missing_ids_never_dangle_edges():
    rng = random.Random(5)
    for _ in range(25):
        records = [TacticRecord("TA0001", "A"),
                   TechniqueRecord("T1001", "T",
                                   tactic_ids=("TA0001", "TA0002")[:rng.randint(0, 2)],
                                   capec_ids=("CAPEC-1",) if rng.random() < 0.5 else ()),
                   PatternRecord("CAPEC-1", "P",
                                 cwe_ids=tuple(f"CWE-{i}" for i in range(rng.randint(0, 3)))),
                   VulnerabilityRecord("CVE-2020-0001", cwe_ids=("CWE-0",))]
        graph, report = ingest.build_graph(records)
        for src, dst in graph.edges:
            assert src in graph.nodes and dst in graph.nodes
        for from_id, missing in report.dangling_refs:
            assert missing not in graph.nodes


def test_interchange_round_trip_bytes(mini_paths, mini_records):
    graph, _ = ingest.build_graph(mini_records)
    first = ingest.dumps_interchange(graph)
    again = ingest.dumps_interchange(ingest.read_interchange(io.StringIO(first)))
    assert first == again
    assert first == mini_paths["graph"].read_text(encoding="utf-8")


def test_interchange_truncated_line_reports_lineno(mini_paths):
    lines = mini_paths["graph"].read_text(encoding="utf-8").splitlines()
    lines[4] = lines[4][: len(lines[4]) // 2]
    with pytest.raises(ParseError) as err:
        ingest.read_interchange(io.StringIO("\n".join(lines)))
    assert err.value.line == 5


def test_interchange_hand_written_two_node_file():
    text = "\n".join([
        '{"t":"node","id":"CWE-1","kind":"Weakness","name":"w","props":{}}',
        '{"t":"node","id":"CVE-2020-0001","kind":"Vulnerability","name":"v",'
        '"props":{"year":"2020"}}',
        '{"t":"edge","src":"CWE-1","dst":"CVE-2020-0001","dir":"upward"}',
    ])
    graph = ingest.read_interchange(io.StringIO(text))
    assert graph.edge_count() == 1
    assert graph.edge("CWE-1", "CVE-2020-0001").original_direction == "upward"


def test_interchange_preserves_version_ranges():
    records = ingest.load_cve_feed(_feed([_item("CVE-2011-1185", configs=[{
        "operator": "OR",
        "cpe_match": [{
            "vulnerable": True,
            "cpe23Uri": "cpe:2.3:a:google:chrome:*:*:*:*:*:*:*:*",
            "versionStartIncluding": "8.0",
            "versionEndExcluding": "10.0.648.127",
        }],
    }])]))
    graph, _ = ingest.build_graph(records)
    text = ingest.dumps_interchange(graph)
    back = ingest.read_interchange(io.StringIO(text))
    edge = back.edge("CVE-2011-1185", "cpe:2.3:a:google:chrome:*:*:*:*:*:*:*:*")
    assert edge.version_range == VersionRange("8.0", "10.0.648.127", True, False)
    assert ingest.dumps_interchange(back) == text
