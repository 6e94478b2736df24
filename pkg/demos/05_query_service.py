"""Drive the HTTP query service in-process.

For a real deployment run ``threatgraph serve --graph fixtures/mini/graph.jsonl``
(or ``serve()`` from code) and point the browser explorer at it; here the
app is exercised through an in-process client so the demo needs no open
port.
"""

import pathlib

from fastapi.testclient import TestClient

from threatgraph import read_interchange
from threatgraph.service import create_app

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "mini"
graph = read_interchange(FIXTURES / "graph.jsonl")
client = TestClient(create_app(graph))

print("GET /nodes/TA0003")
print(" ", client.get("/nodes/TA0003").json()["data"])

print("\nGET /nodes/TA0003/neighbors?direction=down")
print(" ", client.get("/nodes/TA0003/neighbors",
                      params={"direction": "down"}).json()["data"])

print("\nGET /paths?from=TA0003&to=configuration")
body = client.get("/paths", params={"from": "TA0003",
                                    "to": "configuration"}).json()
for path in body["data"]["paths"]:
    print("  " + " -> ".join(path))

print("\nGET /paths?from=TA0003&to=vulnerability&year=2011")
body = client.get("/paths", params={"from": "TA0003", "to": "vulnerability",
                                    "year": "2011"}).json()
print(f"  {body['data']['count']} paths")

print("\nGET /reports/severity")
print(" ", client.get("/reports/severity").json()["data"]["totals"])

print("\nGET /search?q=chrome")
for match in client.get("/search", params={"q": "chrome"}).json()["data"]["matches"]:
    print(f"  {match['id']} ({match['kind']})")

print("\nGET /nodes/NOPE  (error envelope)")
print(" ", client.get("/nodes/NOPE").json()["error"])
