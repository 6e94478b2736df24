import pathlib

import pytest

from threatgraph import ingest

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "mini"


@pytest.fixture(scope="session")
def mini_paths():
    return {
        "attack": FIXTURES / "attack_bundle.json",
        "capec": FIXTURES / "capec_catalog.xml",
        "cwe": FIXTURES / "cwe_catalog.xml",
        "cve": FIXTURES / "cve_feed.json",
        "graph": FIXTURES / "graph.jsonl",
    }


@pytest.fixture(scope="session")
def mini_records(mini_paths):
    records = []
    records += ingest.load_attack(mini_paths["attack"])
    records += ingest.load_capec(mini_paths["capec"])
    records += ingest.load_cwe(mini_paths["cwe"])
    records += ingest.load_cve_feed(mini_paths["cve"])
    return records


@pytest.fixture(scope="session")
def mini_graph(mini_paths):
    return ingest.read_interchange(mini_paths["graph"])


CHROME_120 = "cpe:2.3:a:google:chrome:10.0.648.120:*:*:*:*:*:*:*"
CHROME_126 = "cpe:2.3:a:google:chrome:10.0.648.126:*:*:*:*:*:*:*"


@pytest.fixture(scope="session")
def chrome_ids():
    return CHROME_120, CHROME_126
