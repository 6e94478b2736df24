"""Command-line front end: build graphs, run reports, query, serve.

Exit codes: 0 success, 2 input/parse error, 3 query-target error,
1 internal error.  Flags may also come from a JSON config file
(``--config``); explicit flags win.  ``THREATGRAPH_GRAPH`` provides the
default graph path.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import analytics, ingest, service
from .errors import (
    ConflictingRecordError,
    ParseError,
    SchemaError,
    ThreatGraphError,
    UnknownNodeError,
    UnknownProductError,
)
from .graph import NodeKind, ThreatGraph
from .paths import (
    DEFAULT_PATH_LIMIT,
    QueryFilter,
    count_paths,
    reachable_set,
    trace_paths,
)

GRAPH_ENV_VAR = "THREATGRAPH_GRAPH"


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _table(headers: list[str], rows: list[list]) -> str:
    cells = [[str(value) for value in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
             "  ".join("-" * w for w in widths)]
    for row in cells:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def _parse_years(text: str) -> tuple[int, int]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return int(lo), int(hi)
    return int(text), int(text)


def _filter_from(args) -> QueryFilter:
    return QueryFilter(
        year_range=_parse_years(args.years) if getattr(args, "years", None) else None,
        latest_versions_only=bool(getattr(args, "latest_only", False)),
        vendor=getattr(args, "vendor", None),
        product=getattr(args, "product", None),
    )


def _load_graph(args) -> ThreatGraph:
    path = args.graph or os.environ.get(GRAPH_ENV_VAR)
    if not path:
        raise FileNotFoundError(
            f"no graph file given (--graph or ${GRAPH_ENV_VAR})")
    return ingest.read_interchange(path)


def cmd_build(args) -> int:
    records = []
    if args.attack:
        records += ingest.load_attack(args.attack)
    if args.capec:
        records += ingest.load_capec(args.capec)
    if args.cwe:
        records += ingest.load_cwe(args.cwe)
    for feed in args.cve or []:
        records += ingest.load_cve_feed(feed)
    graph, report = ingest.build_graph(records)

    print(f"{report.total_nodes} nodes, {report.total_edges} edges")
    for kind in NodeKind:
        print(f"  {kind.value}: {report.node_counts.get(kind, 0)}")
    print("edges per layer pair:")
    for (src, dst), count in sorted(report.edge_counts.items(),
                                    key=lambda kv: (kv[0][0].layer, kv[0][1].layer)):
        print(f"  {src.value} -> {dst.value}: {count}")
    print(f"dangling references: {len(report.dangling_refs)}")
    for from_id, missing in report.dangling_refs:
        print(f"  {from_id} -> {missing} (missing)", file=sys.stderr)
    print(f"duplicate records: {report.duplicate_records}, "
          f"duplicate edges: {report.duplicate_edges}")

    with open(args.out, "w", encoding="utf-8") as out:
        ingest.write_interchange(graph, out)
    print(f"wrote {args.out}")
    return 0


def _print_report(table: str, records: list[dict]) -> None:
    print(table)
    print()
    for record in records:
        print(ingest.dump_record(record))


def cmd_report(args) -> int:
    graph = _load_graph(args)
    query = _filter_from(args)
    kind = args.kind
    if kind == "inventory":
        rows = analytics.inventory_report(graph, query)
        table = _table(
            ["kind", "entries", "median", "min", "max", "range", "floaters"],
            [[r.kind.value, r.total_entries, r.median_links, r.min_links,
              r.max_links, r.link_range, r.floater_count] for r in rows])
        _print_report(table, [r.to_record() for r in rows])
    elif kind == "trends":
        rows = analytics.yearly_connectivity(graph, query)
        table = _table(
            ["year", "cves", "pct_tactic", "pct_pattern", "pct_no_weakness"],
            [[r.year, r.cve_count, r.pct_with_tactic_path,
              r.pct_with_pattern_path, r.pct_without_weakness] for r in rows])
        _print_report(table, [r.to_record() for r in rows])
    elif kind == "severity":
        ledger = analytics.severity_ledger(graph, query)
        rows = [[y.year, y.unlinked_sum, y.operational_sum, y.total_sum,
                 y.zero_score_unlinked_fraction, y.missing_score_count]
                for y in ledger.years]
        rows.append(["total", ledger.unlinked_total, ledger.operational_total,
                     ledger.grand_total, "", ""])
        table = _table(["year", "unlinked", "operational", "total",
                        "zero_unlinked_frac", "missing"], rows)
        _print_report(table, [y.to_record() for y in ledger.years])
    elif kind == "vendor-tactics":
        if not args.vendors:
            return _fail("--vendors is required for vendor-tactics", 2)
        cells = analytics.vendor_tactic_matrix(graph, args.vendors, args.mode)
        table = _table(["vendor", "tactic", "count"],
                       [[c.vendor, c.tactic_id, c.count] for c in cells])
        _print_report(table, [c.to_record() for c in cells])
    elif kind == "vendor-severity":
        if not args.vendors:
            return _fail("--vendors is required for vendor-severity", 2)
        dist = analytics.vendor_severity_distribution(
            graph, args.vendors, args.scoring, args.tactic)
        table = _table(
            ["vendor", "scores", "min", "max"],
            [[vendor, len(scores), min(scores), max(scores)]
             for vendor, scores in sorted(dist.items())])
        _print_report(table, [{"t": "vendor_severity", "vendor": vendor,
                               "scores": scores}
                              for vendor, scores in sorted(dist.items())])
    elif kind == "product-versions":
        if not (args.vendor and args.product):
            return _fail("--vendor and --product are required", 2)
        rows = analytics.product_version_report(graph, args.vendor, args.product)
        table = _table(
            ["version", "tactics", "techniques", "patterns", "weaknesses",
             "vulnerabilities"],
            [[r.version, r.tactic_count, r.technique_count, r.pattern_count,
              r.weakness_count, r.vulnerability_count] for r in rows])
        _print_report(table, [r.to_record() for r in rows])
    else:  # pragma: no cover - argparse restricts choices
        return _fail(f"unknown report {kind!r}", 2)
    return 0


def cmd_query(args) -> int:
    graph = _load_graph(args)
    query = _filter_from(args)
    if args.query_op == "paths":
        result = trace_paths(graph, args.from_id,
                             NodeKind.from_name(args.to_kind), query,
                             limit=args.limit)
        for path in result.paths:
            print(" -> ".join(path.nodes))
        if result.truncated:
            print("(truncated)", file=sys.stderr)
        print(f"{len(result.paths)} paths", file=sys.stderr)
    elif args.query_op == "reachable":
        ids = reachable_set(graph, args.from_id,
                            NodeKind.from_name(args.to_kind), query)
        for node_id in sorted(ids):
            print(node_id)
        print(f"{len(ids)} reachable", file=sys.stderr)
    elif args.query_op == "count":
        count = count_paths(graph, NodeKind.from_name(args.from_kind),
                            NodeKind.from_name(args.to_kind), query, args.mode)
        print(count)
    elif args.query_op == "canned":
        return _cmd_canned(graph, args)
    return 0


def _cmd_canned(graph: ThreatGraph, args) -> int:
    if args.canned_op == "configs-for-tactic":
        for config_id in sorted(analytics.configs_for_tactic(graph, args.id)):
            print(config_id)
    elif args.canned_op == "techniques-for-vulnerability":
        for tech_id in sorted(
                analytics.techniques_for_vulnerability(graph, args.id)):
            print(tech_id)
    elif args.canned_op == "tactics-for-product":
        tactics, patterns = analytics.tactics_and_patterns_for_product(
            graph, args.vendor_name, args.product_name, args.version)
        print("tactics:")
        for tactic_id in sorted(tactics):
            print(tactic_id)
        print("attack patterns:")
        for pattern_id in sorted(patterns):
            print(pattern_id)
    return 0


def cmd_serve(args) -> int:
    graph = _load_graph(args)
    print(f"serving {len(graph)} nodes on {args.bind}", file=sys.stderr)
    service.serve(graph, args.bind, ui_dir=args.ui)
    return 0


def _add_graph_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--graph", default=None,
                        help=f"graph interchange file (default ${GRAPH_ENV_VAR})")


def _add_filter_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--years", default=None, metavar="A:B",
                        help="restrict vulnerabilities to a year range")
    parser.add_argument("--latest-only", action="store_true",
                        help="keep only each product's latest configuration")
    parser.add_argument("--vendor", default=None)
    parser.add_argument("--product", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threatgraph",
        description="Build and query layered threat-knowledge graphs.")
    parser.add_argument("--config", default=None,
                        help="JSON file with flag defaults; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="stitch source files into a graph")
    p_build.add_argument("--attack", help="attack-framework bundle (JSON)")
    p_build.add_argument("--capec", help="attack-pattern catalog (XML)")
    p_build.add_argument("--cwe", help="weakness catalog (XML)")
    p_build.add_argument("--cve", action="append",
                         help="vulnerability feed (JSON); repeatable")
    p_build.add_argument("--out", required=True, help="interchange output path")
    p_build.set_defaults(func=cmd_build)

    p_report = sub.add_parser("report", help="run an analytics report")
    p_report.add_argument("kind", choices=[
        "inventory", "trends", "severity", "vendor-tactics",
        "vendor-severity", "product-versions"])
    _add_graph_flag(p_report)
    _add_filter_flags(p_report)
    p_report.add_argument("--vendors", nargs="+", default=None)
    p_report.add_argument("--mode", default="unique_products",
                          choices=["unique_products", "product_versions"])
    p_report.add_argument("--scoring", default="max_per_product",
                          choices=["max_per_product", "all_scores"])
    p_report.add_argument("--tactic", default=None,
                          help="restrict vendor-severity to one tactic")
    p_report.set_defaults(func=cmd_report)

    p_query = sub.add_parser("query", help="trace paths and reachability")
    q_sub = p_query.add_subparsers(dest="query_op", required=True)

    q_paths = q_sub.add_parser("paths")
    q_paths.add_argument("--from", dest="from_id", required=True)
    q_paths.add_argument("--to-kind", required=True)
    q_paths.add_argument("--limit", type=int, default=DEFAULT_PATH_LIMIT)
    _add_graph_flag(q_paths)
    _add_filter_flags(q_paths)
    q_paths.set_defaults(func=cmd_query)

    q_reach = q_sub.add_parser("reachable")
    q_reach.add_argument("--from", dest="from_id", required=True)
    q_reach.add_argument("--to-kind", required=True)
    _add_graph_flag(q_reach)
    _add_filter_flags(q_reach)
    q_reach.set_defaults(func=cmd_query)

    q_count = q_sub.add_parser("count")
    q_count.add_argument("--from-kind", required=True)
    q_count.add_argument("--to-kind", required=True)
    q_count.add_argument("--mode", default="distinct_paths",
                         choices=["distinct_paths", "distinct_endpoint_pairs"])
    _add_graph_flag(q_count)
    _add_filter_flags(q_count)
    q_count.set_defaults(func=cmd_query)

    q_canned = q_sub.add_parser("canned")
    c_sub = q_canned.add_subparsers(dest="canned_op", required=True)
    c_tactic = c_sub.add_parser("configs-for-tactic")
    c_tactic.add_argument("id")
    _add_graph_flag(c_tactic)
    c_tactic.set_defaults(func=cmd_query)
    c_vuln = c_sub.add_parser("techniques-for-vulnerability")
    c_vuln.add_argument("id")
    _add_graph_flag(c_vuln)
    c_vuln.set_defaults(func=cmd_query)
    c_product = c_sub.add_parser("tactics-for-product")
    c_product.add_argument("vendor_name")
    c_product.add_argument("product_name")
    c_product.add_argument("--version", default=None)
    _add_graph_flag(c_product)
    c_product.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", help="run the HTTP query service")
    _add_graph_flag(p_serve)
    p_serve.add_argument("--bind", default="127.0.0.1:8332")
    p_serve.add_argument("--ui", default=None,
                         help="built explorer directory to mount at /ui")
    p_serve.set_defaults(func=cmd_serve)

    return parser


# built-in defaults per flag, used to tell "flag not given" apart from an
# explicit value when merging config-file settings (flags win)
_FLAG_DEFAULTS = {
    "graph": None, "years": None, "latest_only": False, "vendor": None,
    "product": None, "vendors": None, "mode": "unique_products",
    "scoring": "max_per_product", "tactic": None,
    "limit": DEFAULT_PATH_LIMIT, "bind": "127.0.0.1:8332", "ui": None,
    "attack": None, "capec": None, "cwe": None, "cve": None, "out": None,
    "version": None,
}


def _load_config(argv: list[str]) -> dict:
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return {}
    with open(known.config, "r", encoding="utf-8") as handle:
        defaults = json.load(handle)
    if not isinstance(defaults, dict):
        raise SchemaError("config file must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in defaults.items()}


def _merge_config(args: argparse.Namespace, config: dict) -> None:
    for dest, value in config.items():
        if hasattr(args, dest) and \
                getattr(args, dest) == _FLAG_DEFAULTS.get(dest):
            setattr(args, dest, value)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        config = _load_config(argv)
        args = parser.parse_args(argv)
        _merge_config(args, config)
        return args.func(args)
    except (ParseError, SchemaError, ConflictingRecordError) as exc:
        return _fail(str(exc), 2)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _fail(str(exc), 2)
    except json.JSONDecodeError as exc:
        return _fail(f"bad config file: {exc}", 2)
    except (UnknownNodeError, UnknownProductError) as exc:
        return _fail(str(exc), 3)
    except ValueError as exc:
        return _fail(str(exc), 2)
    except ThreatGraphError as exc:
        return _fail(str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
