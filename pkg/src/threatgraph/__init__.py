"""Layered threat-knowledge graphs over public cyber-threat sources.

Build a graph linking attack tactics, techniques, attack patterns,
weaknesses, vulnerabilities, and affected product configurations; trace
paths both ways; and run inventory, trend, severity, and vendor reports.
"""

from . import errors
from .analytics import (
    InventoryRow,
    ProductVersionRow,
    SeverityLedger,
    VendorTacticCell,
    YearlyConnectivity,
    YearSeverity,
    configs_for_tactic,
    filtered_view,
    inventory_report,
    latest_version_view,
    product_version_report,
    severity_ledger,
    super_entries,
    tactics_and_patterns_for_product,
    techniques_for_vulnerability,
    vendor_severity_distribution,
    vendor_tactic_matrix,
    yearly_connectivity,
)
from .cpe import (
    ANY,
    NA,
    CpeAttribute,
    CpeName,
    compare_versions,
    parse_cpe23,
    serialize_cpe23,
    vendor_product,
    version_key,
)
from .graph import (
    ALLOWED_EDGES,
    LAYER_ORDER,
    GraphBuilder,
    NodeKind,
    ThreatEdge,
    ThreatGraph,
    ThreatNode,
    VersionRange,
)
from .ingest import (
    BuildReport,
    CpeMatch,
    PatternRecord,
    TacticRecord,
    TechniqueRecord,
    VulnerabilityRecord,
    WeaknessRecord,
    build_graph,
    dumps_interchange,
    load_attack,
    load_capec,
    load_cve_feed,
    load_cwe,
    read_interchange,
    write_interchange,
)
from .paths import (
    DEFAULT_PATH_LIMIT,
    Path,
    PathSearchResult,
    QueryFilter,
    count_paths,
    is_legal_path,
    latest_config_ids,
    partition_floaters,
    reachable_set,
    trace_paths,
)

__version__ = "0.1.0"
