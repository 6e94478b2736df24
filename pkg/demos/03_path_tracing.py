"""Trace layered paths both ways: tactic down to products, product up to
tactics.  Filters prune by vulnerability year or keep only each product's
latest version."""

import pathlib

from threatgraph import (
    NodeKind,
    QueryFilter,
    count_paths,
    partition_floaters,
    reachable_set,
    read_interchange,
    trace_paths,
)

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "mini"
graph = read_interchange(FIXTURES / "graph.jsonl")

print("== top down: everything the Persistence tactic can reach ==")
result = trace_paths(graph, "TA0003", NodeKind.CONFIGURATION)
for path in result:
    print("  " + " -> ".join(path.nodes))

chrome = "cpe:2.3:a:google:chrome:10.0.648.126:*:*:*:*:*:*:*"
print("\n== bottom up: tactics that threaten one Chrome release ==")
print(" ", sorted(reachable_set(graph, chrome, NodeKind.TACTIC)))

print("\n== counting ==")
print("tactic->vulnerability sequences:",
      count_paths(graph, NodeKind.TACTIC, NodeKind.VULNERABILITY))
print("tactic->vulnerability endpoint pairs:",
      count_paths(graph, NodeKind.TACTIC, NodeKind.VULNERABILITY,
                  mode="distinct_endpoint_pairs"))

print("\n== filters ==")
recent = QueryFilter(year_range=(2011, 2011))
print("paths to 2011 vulnerabilities:",
      len(trace_paths(graph, "TA0003", NodeKind.VULNERABILITY, recent).paths))
latest = QueryFilter(latest_versions_only=True)
print("latest-version configurations reachable:",
      sorted(reachable_set(graph, "TA0003", NodeKind.CONFIGURATION, latest)))

print("\n== floaters (entries with no links at all) ==")
for kind in NodeKind:
    _, floaters = partition_floaters(graph, kind)
    if floaters:
        print(f"  {kind.value}: {sorted(floaters)}")
