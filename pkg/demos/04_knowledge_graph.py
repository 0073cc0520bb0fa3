"""
The typed knowledge graph
=========================

Entities come in three kinds (disease, symptom, department); relationships
are typed and checked at insert time. Answers merge a disease's stored
property with the targets of the matching relationship kind, so curated
prose and graph structure coexist.
"""

from medqa.entities import EntityMatch, Intent
from medqa.graph import Entity, KnowledgeGraph, export_graph, import_graph

graph = KnowledgeGraph()
graph.upsert_entity(Entity(kind="disease", name="gout", properties={
    "description": "a form of arthritis driven by uric acid crystals",
    "cause": "excess uric acid in the blood",
}))
graph.upsert_entity(Entity(kind="symptom", name="joint pain"))
graph.upsert_entity(Entity(kind="disease", name="kidney stones"))
graph.upsert_relationship("have_symptom", "gout", "joint pain")
graph.upsert_relationship("accompany_with", "gout", "kidney stones")
graph.upsert_relationship("disease_cause", "gout", "kidney stones")

print(f"{graph.entity_count} entities, {graph.relationship_count} relationships")


def ask(intent: Intent, term: str):
    match = EntityMatch(term=term, role="disease", start=0, end=len(term),
                        matched_via="exact")
    answer = graph.answer(intent, match)
    print(f"{intent.value:12} {term}: {answer.items if answer.found else 'not found'}")


ask(Intent.SYMPTOM, "gout")
ask(Intent.DESCRIPTION, "gout")
ask(Intent.CAUSE, "gout")          # property first, then relationship targets
ask(Intent.ACCOMPANY, "GOUT")      # names resolve case-insensitively
ask(Intent.PREVENTION, "gout")     # nothing stored: found=False

# The exchange format is JSON lines with deterministic export order, so
# export -> import -> export is byte-identical.
text = export_graph(graph)
print("\nexport:")
print(text, end="")
again = import_graph(text.splitlines())
print("round-trip identical:", export_graph(again) == text)

# Imports validate eagerly and point at the offending line.
try:
    import_graph(['{"t": "rel", "kind": "have_symptom", "from": "x", "to": "y"}'])
except ValueError as exc:
    print("import error:", exc)
