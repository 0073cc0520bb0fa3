"""
Hybrid answering: graph first, ranked retrieval on a miss
=========================================================

The router tries the knowledge graph whenever it recognizes both an entity
and an intent; anything else is scored against the QA corpus and the best
matches come back ranked. It never raises on user input.
"""

from medqa.fixtures import fixture_router
from medqa.router import RouterConfig

router = fixture_router()  # shipped graph + corpus + vectors, seeded weights


def show(question: str):
    answer = router.ask(question)
    print(f"\nQ: {question}")
    print(f"   [{answer.source}] {answer.text}")
    for alt in answer.alternatives:
        print(f"   {alt.similarity:.3f}  {alt.question}")
    diag = answer.diagnostics
    entities = [(m.term, m.matched_via) for m in diag.entities]
    print(f"   intent={diag.intent.value} entities={entities}")


# Entity "cold" + intent Symptom + a graph hit: answered directly,
# no corpus involved, no alternatives.
show("What are the symptoms of cold?")

# Same entity, different intent: the graph property answers.
show("How do I prevent flu?")

# No recognizable intent, so the graph is skipped and the corpus ranks.
# A verbatim corpus question scores exactly 1.0. The fuzzy entity
# candidates in the diagnostics are nearest-vector guesses; with this
# demo's random seed vectors they are arbitrary, with real vector files
# they become useful.
show("Does weed give you lung cancer?")

# Recognized intent and entity, but the graph stores no treatment for a
# symptom: falls through to retrieval.
show("How do you treat a sore throat?")

# Gibberish still gets a (low-similarity) retrieval answer by default...
show("zzz qqq")

# ...unless a similarity floor is set, in which case the router asks the
# user to rephrase instead of guessing. (The untrained demo encoder
# scores generously, hence the high floor; a trained model separates
# real matches from noise at far lower values.)
strict = fixture_router(config=RouterConfig(similarity_floor=0.99))
show_strict = strict.ask("zzz qqq")
print(f"\nwith a 0.99 floor: [{show_strict.source}] {show_strict.text}")
