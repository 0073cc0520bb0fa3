"""
The HTTP chat and manager service
=================================

One process, two surfaces: /chat answers questions, the /kg and /qa
prefixes inspect and mutate the data behind them. Mutations swap a whole
snapshot atomically, so concurrent chats never see half an update.

This demo drives the app in-process; `medqa serve` runs the same thing on
a real port.
"""

from fastapi.testclient import TestClient

from medqa.encoder import init_params
from medqa.fixtures import fixture_embedding_table, fixture_graph, fixture_qa_records
from medqa.service import ServiceState, create_app

table = fixture_embedding_table()
state = ServiceState(
    fixture_graph(),
    init_params(hidden=8, embedding_dim=table.dim, seed=5),
    table,
    fixture_qa_records(),
)
client = TestClient(create_app(state))

print(client.get("/healthz").json())

# A graph-answerable question.
body = client.post("/chat", json={"text": "What are the symptoms of cold?"}).json()
print(f"[{body['source']}] {body['text']}")

# Empty text is a client error, not a crash.
print("empty text ->", client.post("/chat", json={"text": ""}).status_code)

# Manager endpoints mutate; the next chat sees the new snapshot.
client.post("/kg/entities", json={"kind": "disease", "name": "measles"})
client.post("/kg/entities", json={"kind": "symptom", "name": "red rash"})
client.post("/kg/relationships",
            json={"kind": "have_symptom", "from": "measles", "to": "red rash"})
body = client.post("/chat", json={"text": "What are the symptoms of measles?"}).json()
print(f"[{body['source']}] {body['text']}")

# Invalid mutations are rejected with a cause.
bad = client.post("/kg/relationships",
                  json={"kind": "have_symptom", "from": "measles", "to": "nowhere"})
print("bad relationship ->", bad.status_code, bad.json()["detail"])

# The corpus listing backs the retrieval side.
records = client.get("/qa/records").json()
print(f"{records['count']} QA records; first: {records['records'][0]['question']!r}")
