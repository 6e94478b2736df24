"""Build a layered threat graph from the bundled source fixtures.

The four public sources arrive in different formats: an attack-framework
bundle (JSON), two MITRE catalogs (XML), and a vulnerability feed (JSON).
Each loader normalizes its source into flat records; the stitch links
everything it can and reports what it could not.
"""

import pathlib

from threatgraph import build_graph, load_attack, load_capec, load_cve_feed, load_cwe
from threatgraph import write_interchange

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "mini"

records = []
records += load_attack(FIXTURES / "attack_bundle.json")
records += load_capec(FIXTURES / "capec_catalog.xml")
records += load_cwe(FIXTURES / "cwe_catalog.xml")
records += load_cve_feed(FIXTURES / "cve_feed.json")
print(f"loaded {len(records)} records")

graph, report = build_graph(records)
print(f"built {report.total_nodes} nodes, {report.total_edges} edges")
for kind, count in report.node_counts.items():
    print(f"  {kind.value}: {count}")
print(f"dangling cross-references: {len(report.dangling_refs)}")

# every edge is traversable both ways
print("\ndown from TA0003:", graph.down("TA0003"))
print("up from CVE-2011-1185:", graph.up("CVE-2011-1185"))
print("degree of CVE-2011-1185:", graph.degree("CVE-2011-1185"))

out = pathlib.Path("/tmp/threatgraph-demo.jsonl")
with out.open("w", encoding="utf-8") as handle:
    write_interchange(graph, handle)
print(f"\nwrote deterministic interchange file to {out}")
