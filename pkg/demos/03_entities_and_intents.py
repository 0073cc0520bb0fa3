"""
Entity extraction and intent recognition
========================================

Questions are understood with two cheap, transparent steps: a multi-term
substring scan (an automaton over the whole dictionary at once) picks out
disease/symptom names, and an ordered keyword table names the question
kind. No model involved; both are exact and auditable.
"""

from medqa.embeddings import random_table
from medqa.entities import (
    MedicalDictionary,
    build_automaton,
    classify_intent,
    extract_entities,
    fuzzy_entities,
)

dictionary = MedicalDictionary(
    diseases={"cold", "flu", "lung cancer"},
    symptoms={"fever", "sore throat"},
)
automaton = build_automaton(dictionary)

# Matching is case-insensitive, boundary-aware, and prefers longer terms.
for text in [
    "What are the symptoms of COLD?",
    "he scolded the patient",            # "cold" inside a word: no match
    "is lung cancer hereditary",         # "lung cancer" wins over "cancer"
    "fever and sore throat for two days",
]:
    matches = extract_entities(automaton, dictionary, text)
    found = [(m.term, m.role, text[m.start:m.end]) for m in matches]
    print(f"{text!r}: {found}")

# When nothing matches exactly, nearest-vector terms fill in. Spans point
# at the token that triggered each candidate.
table = random_table(list(dictionary.all_terms()) + ["chill", "against"], dim=16, seed=9)
fuzzy = fuzzy_entities(table, dictionary, "anything against a chill?", k=2)
print("fuzzy candidates:", [(m.term, m.matched_via) for m in fuzzy])

# Intent rules run in a fixed priority order; first hit wins.
for question in [
    "What are the symptoms of cold?",
    "how to heal a burn",
    "tell me about flu",
    "why does this happen",
    "good morning",
]:
    print(f"{question!r} ->", classify_intent(question).value)
