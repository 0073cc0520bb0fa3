"""Hybrid answering policy: typed graph lookup first, corpus ranking on a miss.

A question is answered from the knowledge graph when entity extraction and
intent recognition both succeed and the graph holds the requested fact.
Otherwise the question is scored against a QA corpus with the trained
encoder and the best matches come back as ranked alternatives. The router
never raises on user input; failures degrade to a re-ask response.
"""

from __future__ import annotations

from dataclasses import dataclass

from .embeddings import EmbeddingTable, tokenize
from .encoder import EncoderParams
from .entities import (
    EntityMatch,
    Intent,
    IntentRules,
    MedicalDictionary,
    build_automaton,
    classify_intent,
    extract_entities,
    fuzzy_entities,
)
from .graph import KgAnswer, KnowledgeGraph
from .similarity import rank_against_corpus

SOURCE_TAGS = ("ehealthforum", "questiondoctor", "webmd", "other")

ANSWER_SOURCES = ("kg", "qa", "none")

REASK_MESSAGE = (
    "I could not find an answer to that. Could you rephrase the question and "
    "name the condition or symptom you are asking about?"
)


@dataclass(frozen=True)
class QaRecord:
    """One retrievable question-answer pair from a harvested QA site."""

    question: str
    answer: str
    source_tag: str = "other"

    def __post_init__(self):
        if not self.question.strip():
            raise ValueError("question must be non-empty")
        if not self.answer.strip():
            raise ValueError("answer must be non-empty")
        if self.source_tag not in SOURCE_TAGS:
            raise ValueError(
                f"source_tag must be one of {SOURCE_TAGS}, got {self.source_tag!r}"
            )


@dataclass(frozen=True)
class RouterConfig:
    top_k: int = 3
    kg_enabled: bool = True
    similarity_floor: float = 0.0
    max_seq_length: int = 10
    fuzzy_top_k: int = 3

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not 0.0 <= self.similarity_floor <= 1.0:
            raise ValueError("similarity_floor must lie in [0, 1]")
        if self.max_seq_length < 1:
            raise ValueError("max_seq_length must be >= 1")
        if self.fuzzy_top_k < 1:
            raise ValueError("fuzzy_top_k must be >= 1")


@dataclass(frozen=True)
class RankedAlternative:
    question: str
    answer: str
    similarity: float


@dataclass(frozen=True)
class Diagnostics:
    """What the router saw: extracted entities and the recognized intent."""

    entities: tuple[EntityMatch, ...]
    intent: Intent
    note: str = ""


@dataclass(frozen=True)
class ChatAnswer:
    source: str
    text: str
    alternatives: tuple[RankedAlternative, ...]
    diagnostics: Diagnostics

    def __post_init__(self):
        if self.source not in ANSWER_SOURCES:
            raise ValueError(f"source must be one of {ANSWER_SOURCES}")
        if self.source != "qa" and self.alternatives:
            raise ValueError(f"source={self.source} answers carry no alternatives")

    def to_dict(self) -> dict:
        """JSON-ready shape used by the HTTP layer and the CLI."""
        return {
            "source": self.source,
            "text": self.text,
            "alternatives": [
                {"question": a.question, "answer": a.answer, "similarity": a.similarity}
                for a in self.alternatives
            ],
            "diagnostics": {
                "entities": [
                    {
                        "term": m.term,
                        "role": m.role,
                        "start": m.start,
                        "end": m.end,
                        "matched_via": m.matched_via,
                    }
                    for m in self.diagnostics.entities
                ],
                "intent": self.diagnostics.intent.value,
                "note": self.diagnostics.note,
            },
        }


def dictionary_from_graph(graph: KnowledgeGraph) -> MedicalDictionary:
    """The graph's own disease and symptom names, as the extraction lexicon."""
    diseases: set[str] = set()
    symptoms: set[str] = set()
    for entity in graph.entities():
        if entity.kind == "disease":
            diseases.add(entity.name)
        elif entity.kind == "symptom":
            symptoms.add(entity.name)
    return MedicalDictionary(diseases=diseases, symptoms=symptoms)


_ANSWER_LEADS = {
    Intent.SYMPTOM: "Common signs of {}",
    Intent.DESCRIPTION: "{}",
    Intent.CAUSE: "Possible causes of {}",
    Intent.PREVENTION: "Ways to help prevent {}",
    Intent.ACCOMPANY: "Conditions that often occur alongside {}",
    Intent.CUREWAY: "Treatment options for {}",
}


def format_graph_answer(intent: Intent, answer: KgAnswer) -> str:
    lead = _ANSWER_LEADS[intent].format(answer.subject)
    return f"{lead}: {'; '.join(answer.items)}"


class Router:
    """One graph snapshot with its extraction automaton precomputed.

    The corpus sequence is held by reference, not copied; callers that
    mutate it concurrently must swap in a fresh Router instead (the service
    layer does exactly that).
    """

    def __init__(
        self,
        graph: KnowledgeGraph,
        params: EncoderParams,
        table: EmbeddingTable,
        corpus: list[QaRecord],
        config: RouterConfig | None = None,
        rules: IntentRules | None = None,
    ):
        self.graph = graph
        self.params = params
        self.table = table
        self.corpus = corpus
        self.config = config if config is not None else RouterConfig()
        self.rules = rules
        self.dictionary = dictionary_from_graph(graph)
        self.automaton = (
            build_automaton(self.dictionary) if len(self.dictionary) else None
        )

    def ask(self, question: str) -> ChatAnswer:
        try:
            return self._ask(question)
        except Exception as exc:  # noqa: BLE001  policy: degrade, never propagate
            diag = Diagnostics(
                entities=(),
                intent=Intent.UNKNOWN,
                note=f"internal error: {type(exc).__name__}: {exc}",
            )
            return ChatAnswer(
                source="none", text=REASK_MESSAGE, alternatives=(), diagnostics=diag
            )

    def _ask(self, question: str) -> ChatAnswer:
        cfg = self.config
        notes: list[str] = []
        if not tokenize(question).tokens:
            diag = Diagnostics((), Intent.UNKNOWN, "question has no recognizable words")
            return ChatAnswer("none", REASK_MESSAGE, (), diag)

        entities: list[EntityMatch] = []
        if self.automaton is not None:
            entities = extract_entities(self.automaton, self.dictionary, question)
            if not entities:
                entities = fuzzy_entities(
                    self.table, self.dictionary, question, cfg.fuzzy_top_k
                )
                if entities:
                    notes.append("no exact entity; fuzzy candidates substituted")
        intent = classify_intent(question, self.rules)

        if cfg.kg_enabled and intent is not Intent.UNKNOWN:
            for match in entities:
                answer = self.graph.answer(intent, match)
                if answer.found:
                    diag = Diagnostics(tuple(entities), intent, "; ".join(notes))
                    return ChatAnswer(
                        "kg", format_graph_answer(intent, answer), (), diag
                    )

        if self.corpus:
            ranked = rank_against_corpus(
                self.params,
                self.table,
                question,
                [record.question for record in self.corpus],
                cfg.top_k,
                cfg.max_seq_length,
            )
            alternatives = tuple(
                RankedAlternative(
                    question=self.corpus[i].question,
                    answer=self.corpus[i].answer,
                    similarity=sim,
                )
                for i, sim in ranked
                if sim >= cfg.similarity_floor
            )
            if alternatives:
                diag = Diagnostics(tuple(entities), intent, "; ".join(notes))
                return ChatAnswer("qa", alternatives[0].answer, alternatives, diag)
            notes.append("no corpus match at or above the similarity floor")
        else:
            notes.append("corpus is empty")

        diag = Diagnostics(tuple(entities), intent, "; ".join(notes))
        return ChatAnswer("none", REASK_MESSAGE, (), diag)


def route(
    question: str,
    graph: KnowledgeGraph,
    params: EncoderParams,
    table: EmbeddingTable,
    corpus: list[QaRecord],
    config: RouterConfig | None = None,
) -> ChatAnswer:
    """One-shot answering; builds a throwaway Router for the call."""
    return Router(graph, params, table, corpus, config).ask(question)
