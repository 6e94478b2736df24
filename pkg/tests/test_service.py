import concurrent.futures

import pytest
from fastapi.testclient import TestClient

from threatgraph import analytics, service
from threatgraph.graph import GraphBuilder, NodeKind
from threatgraph.paths import QueryFilter, reachable_set, trace_paths
from threatgraph.service import GraphRef, create_app


@pytest.fixture(scope="module")
def client(mini_graph):
    return TestClient(create_app(mini_graph))


def _ok(response):
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert set(body) == {"status", "data", "truncated", "elapsed_ms"}
    return body


def _error(response, status, code):
    assert response.status_code == status
    body = response.json()
    assert body["status"] == "error"
    assert body["error"]["code"] == code
    assert body["error"]["message"]
    return body


def test_node_lookup(client):
    body = _ok(client.get("/nodes/TA0003"))
    assert body["data"] == {"id": "TA0003", "kind": "Tactic",
                            "name": "Persistence", "properties": {}}


def test_node_lookup_cpe_id(client, chrome_ids):
    body = _ok(client.get(f"/nodes/{chrome_ids[1]}"))
    assert body["data"]["kind"] == "AffectedProductConfiguration"
    assert body["data"]["properties"]["version"] == "10.0.648.126"


def test_node_lookup_404(client):
    _error(client.get("/nodes/NOPE"), 404, "unknown_node")


def test_neighbors_down(client):
    body = _ok(client.get("/nodes/TA0003/neighbors",
                          params={"direction": "down"}))
    assert body["data"] == ["T1574"]


def test_neighbors_matches_library(client, mini_graph):
    for node_id in ("T1574", "CVE-2011-1185", "CAPEC-17"):
        for direction in ("up", "down", "both"):
            body = _ok(client.get(f"/nodes/{node_id}/neighbors",
                                  params={"direction": direction}))
            assert body["data"] == list(mini_graph.neighbors(node_id, direction))


def test_neighbors_bad_direction(client):
    _error(client.get("/nodes/TA0003/neighbors",
                      params={"direction": "sideways"}), 400, "bad_request")


def test_paths_mini(client, mini_graph):
    body = _ok(client.get("/paths", params={"from": "TA0003",
                                            "to": "configuration"}))
    expected = trace_paths(mini_graph, "TA0003", NodeKind.CONFIGURATION)
    assert body["data"]["paths"] == [list(p.nodes) for p in expected.paths]
    assert body["data"]["count"] == 4
    assert body["truncated"] is False


def test_paths_unknown_from(client):
    _error(client.get("/paths", params={"from": "NOPE", "to": "weakness"}),
           404, "unknown_node")


def test_paths_bad_kind(client):
    _error(client.get("/paths", params={"from": "TA0003", "to": "gizmo"}),
           400, "bad_request")


def test_paths_missing_params(client):
    _error(client.get("/paths"), 400, "bad_request")


def test_paths_year_filter(client, mini_graph):
    body = _ok(client.get("/paths", params={
        "from": "TA0003", "to": "vulnerability", "year": "2011"}))
    expected = trace_paths(mini_graph, "TA0003", NodeKind.VULNERABILITY,
                           QueryFilter(year_range=(2011, 2011)))
    assert body["data"]["paths"] == [list(p.nodes) for p in expected.paths]
    assert body["data"]["count"] == 2


def test_paths_pagination(client):
    first = _ok(client.get("/paths", params={
        "from": "TA0003", "to": "configuration", "limit": "3"}))
    assert first["truncated"] is True
    assert first["data"]["next_cursor"] == 3
    rest = _ok(client.get("/paths", params={
        "from": "TA0003", "to": "configuration", "limit": "3", "cursor": "3"}))
    assert rest["truncated"] is False
    assert first["data"]["count"] + rest["data"]["count"] == 4


def test_reachable(client, mini_graph, chrome_ids):
    body = _ok(client.get("/reachable", params={"from": chrome_ids[1],
                                                "to": "tactic"}))
    expected = sorted(reachable_set(mini_graph, chrome_ids[1], NodeKind.TACTIC))
    assert body["data"]["ids"] == expected


def test_reports_match_library(client, mini_graph):
    checks = {
        "inventory": lambda g: [r.to_record()
                                for r in analytics.inventory_report(g)],
        "trends": lambda g: [r.to_record()
                             for r in analytics.yearly_connectivity(g)],
    }
    for kind, build in checks.items():
        body = _ok(client.get(f"/reports/{kind}"))
        assert body["data"] == build(mini_graph)


def test_report_severity(client, mini_graph):
    body = _ok(client.get("/reports/severity"))
    ledger = analytics.severity_ledger(mini_graph)
    assert body["data"]["years"] == [y.to_record() for y in ledger.years]
    assert body["data"]["totals"] == {"unlinked": 5.0, "operational": 6.8,
                                      "total": 11.8}


def test_report_severity_latest_filter(client, mini_graph):
    body = _ok(client.get("/reports/severity", params={"latest": "true"}))
    ledger = analytics.severity_ledger(mini_graph,
                                       QueryFilter(latest_versions_only=True))
    assert body["data"]["years"] == [y.to_record() for y in ledger.years]


def test_report_vendor_tactics(client, mini_graph):
    body = _ok(client.get("/reports/vendor-tactics",
                          params={"vendors": "google"}))
    cells = analytics.vendor_tactic_matrix(mini_graph, ["google"])
    assert body["data"] == [c.to_record() for c in cells]


def test_report_vendor_tactics_requires_vendors(client):
    _error(client.get("/reports/vendor-tactics"), 400, "bad_request")


def test_report_vendor_severity(client, mini_graph):
    body = _ok(client.get("/reports/vendor-severity",
                          params={"vendors": "google"}))
    assert body["data"] == analytics.vendor_severity_distribution(
        mini_graph, ["google"])


def test_report_product_versions(client, mini_graph):
    body = _ok(client.get("/reports/product-versions",
                          params={"vendor": "google", "product": "chrome"}))
    rows = analytics.product_version_report(mini_graph, "google", "chrome")
    assert body["data"] == [r.to_record() for r in rows]


def test_report_unknown_kind(client):
    _error(client.get("/reports/bogus"), 400, "bad_request")


def test_search(client):
    body = _ok(client.get("/search", params={"q": "chrome"}))
    assert body["data"]["total"] == 2
    assert all("chrome" in m["id"] for m in body["data"]["matches"])
    named = _ok(client.get("/search", params={"q": "persistence"}))
    assert [m["id"] for m in named["data"]["matches"]] == ["TA0003"]


def test_search_requires_query(client):
    _error(client.get("/search"), 400, "bad_request")


def test_search_pagination(client):
    body = _ok(client.get("/search", params={"q": "e", "limit": "2"}))
    assert body["data"]["count"] == 2
    assert body["truncated"] is True
    assert body["data"]["next_cursor"] == 2


def test_concurrent_requests_consistent(client, mini_graph):
    expected = trace_paths(mini_graph, "TA0003", NodeKind.CONFIGURATION)
    want = [list(p.nodes) for p in expected.paths]

    def hit(_):
        body = client.get("/paths", params={"from": "TA0003",
                                            "to": "configuration"}).json()
        return body["data"]["paths"]

    with concurrent.futures.ThreadPoolExecutor(max_workers=16) as pool:
        for got in pool.map(hit, range(64)):
            assert got == want


def test_ui_mount_serves_static_files(mini_graph, tmp_path):
    (tmp_path / "index.html").write_text("<!doctype html><title>x</title>",
                                         encoding="utf-8")
    client = TestClient(create_app(mini_graph, ui_dir=str(tmp_path)))
    assert client.get("/ui/").status_code == 200
    assert _ok(client.get("/nodes/TA0003"))  # API untouched by the mount


def test_serve_rejects_bad_bind_address(mini_graph):
    from threatgraph.errors import BindFailureError
    with pytest.raises(BindFailureError):
        service.serve(mini_graph, "not-an-address")
    with pytest.raises(BindFailureError):
        service.serve(mini_graph, "127.0.0.1:notaport")


def test_graph_ref_swap(mini_graph):
    ref = GraphRef(mini_graph)
    client = TestClient(create_app(ref))
    assert _ok(client.get("/nodes/TA0003"))["data"]["name"] == "Persistence"
    ref.swap(GraphBuilder().seal())
    _error(client.get("/nodes/TA0003"), 404, "unknown_node")
    ref.swap(mini_graph)
    assert _ok(client.get("/nodes/TA0003"))["data"]["name"] == "Persistence"
