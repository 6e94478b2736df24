"""Record service envelopes for the explorer's snapshot tests.

Hits the query service in-process over the bundled fixture graph and
writes every envelope the UI tests replay, keyed by "path?sorted-query".
elapsed_ms is zeroed so recordings stay byte-stable.

Run from the repository root:  python frontend/scripts/record_payloads.py
"""

import json
import pathlib

from fastapi.testclient import TestClient

from threatgraph import read_interchange
from threatgraph.service import create_app

ROOT = pathlib.Path(__file__).resolve().parents[2]
OUT = ROOT / "frontend" / "tests" / "fixtures" / "payloads.json"

WALK = [
    "TA0003", "T1574", "T1574.010", "CAPEC-17", "CWE-264", "CVE-2011-1185",
    "cpe:2.3:a:google:chrome:10.0.648.126:*:*:*:*:*:*:*",
]

REQUESTS = []
for node_id in WALK:
    REQUESTS.append((f"/nodes/{node_id}", {}))
    for direction in ("up", "down", "both"):
        REQUESTS.append((f"/nodes/{node_id}/neighbors",
                         {"direction": direction}))
REQUESTS += [
    ("/nodes/NOPE", {}),
    ("/search", {"q": "chrome"}),
    ("/search", {"q": "zzz-no-hit"}),
    ("/paths", {"from": "TA0003", "to": "configuration"}),
    ("/reports/inventory", {}),
    ("/reports/trends", {}),
    ("/reports/severity", {}),
    ("/reports/vendor-tactics", {"vendors": "google"}),
    ("/reports/vendor-severity", {"vendors": "google"}),
    ("/reports/product-versions", {"vendor": "google", "product": "chrome"}),
]


def key_for(path: str, params: dict) -> str:
    if not params:
        return path
    query = "&".join(f"{k}={params[k]}" for k in sorted(params))
    return f"{path}?{query}"


def main() -> None:
    graph = read_interchange(ROOT / "fixtures" / "mini" / "graph.jsonl")
    client = TestClient(create_app(graph))
    recorded = {}
    for path, params in REQUESTS:
        response = client.get(path, params=params)
        body = response.json()
        body["elapsed_ms"] = 0
        recorded[key_for(path, params)] = {
            "http_status": response.status_code,
            "body": body,
        }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(recorded, indent=2, sort_keys=True,
                              ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"recorded {len(recorded)} envelopes to {OUT}")


if __name__ == "__main__":
    main()
