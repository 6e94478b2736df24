"""Run every analytics report over the bundled fixture graph."""

import pathlib

from threatgraph import (
    NodeKind,
    configs_for_tactic,
    inventory_report,
    latest_version_view,
    product_version_report,
    read_interchange,
    severity_ledger,
    super_entries,
    tactics_and_patterns_for_product,
    vendor_severity_distribution,
    vendor_tactic_matrix,
    yearly_connectivity,
)

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "mini"
graph = read_interchange(FIXTURES / "graph.jsonl")

print("== inventory (degree statistics per layer, floaters split out) ==")
for row in inventory_report(graph):
    print(f"  {row.kind.value:<30} entries={row.total_entries} "
          f"median={row.median_links} range={row.min_links}-{row.max_links} "
          f"floaters={row.floater_count}")

print("\n== per-year connectivity trend ==")
for row in yearly_connectivity(graph):
    print(f"  {row.year}: {row.cve_count} reported, "
          f"{row.pct_with_tactic_path}% tactic-connected, "
          f"{row.pct_without_weakness}% without a weakness link")

print("\n== severity ledger ==")
ledger = severity_ledger(graph)
for year in ledger.years:
    print(f"  {year.year}: unlinked={year.unlinked_sum} "
          f"operational={year.operational_sum} total={year.total_sum}")
print(f"  totals: {ledger.unlinked_total} + {ledger.operational_total} "
      f"= {ledger.grand_total}")

print("\n== latest-version view shrinks the configuration layer ==")
view = latest_version_view(graph)
print(f"  configurations {len(graph.ids_of_kind(NodeKind.CONFIGURATION))} "
      f"-> {len(view.ids_of_kind(NodeKind.CONFIGURATION))}")

print("\n== vendor exposure ==")
for cell in vendor_tactic_matrix(graph, ["google"]):
    print(f"  {cell.vendor} x {cell.tactic_id}: {cell.count} products")
print("  severity per product:",
      vendor_severity_distribution(graph, ["google"]))

print("\n== product versions ==")
for row in product_version_report(graph, "google", "chrome"):
    print(f"  {row.version}: {row.tactic_count} tactics, "
          f"{row.technique_count} techniques, {row.vulnerability_count} CVEs")

print("\n== canned queries ==")
print("  configurations behind TA0003:",
      len(configs_for_tactic(graph, "TA0003")))
tactics, patterns = tactics_and_patterns_for_product(graph, "google", "chrome")
print("  chrome is exposed to tactics", sorted(tactics),
      "via patterns", sorted(patterns))
print("  highest-degree vulnerabilities:",
      super_entries(graph, NodeKind.VULNERABILITY, percentile=50))
