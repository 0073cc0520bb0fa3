"""HTTP chat and manager endpoints over atomically swapped snapshots.

One process serves both roles: /chat answers questions, the /kg and /qa
prefixes manage the data behind them. Mutations never edit shared state in
place. A manager request copies the graph, applies the change, builds a
complete replacement Router (fresh extraction automaton included) and swaps
one reference. In-flight chat requests keep the snapshot they started with.
"""

from __future__ import annotations

import threading
from typing import Callable

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .embeddings import EmbeddingTable
from .encoder import EncoderParams
from .entities import IntentRules
from .graph import ENTITY_KINDS, Entity, KnowledgeGraph
from .router import QaRecord, Router, RouterConfig


class ChatRequest(BaseModel):
    text: str


class EntityPayload(BaseModel):
    kind: str
    name: str
    properties: dict[str, str] = Field(default_factory=dict)


class RelationshipPayload(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    kind: str
    source: str = Field(alias="from")
    target: str = Field(alias="to")


class ServiceState:
    """Single writer, many readers, one reference swap per mutation.

    Chat handlers read `state.router` once and use that object for the
    whole request; reference assignment is atomic, so a request sees the
    state before a concurrent mutation or after it, never a blend.
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
        self._write_lock = threading.Lock()
        self._router = Router(graph, params, table, list(corpus), config, rules)

    @property
    def router(self) -> Router:
        return self._router

    def mutate_graph(self, apply: Callable[[KnowledgeGraph], None]) -> Router:
        """Copy the graph, apply the change, swap in a rebuilt Router."""
        with self._write_lock:
            current = self._router
            graph = current.graph.copy()
            apply(graph)
            replacement = Router(
                graph,
                current.params,
                current.table,
                current.corpus,
                current.config,
                current.rules,
            )
            self._router = replacement
            return replacement


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="medqa", version=__version__)
    # The browser client is served from its own origin and configures this
    # service's base URL; there is no authentication to protect, so open CORS.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/chat")
    def chat(request: ChatRequest) -> dict:
        if not request.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        return state.router.ask(request.text).to_dict()

    @app.get("/kg/entities")
    def list_entities(kind: str | None = None) -> dict:
        if kind is not None and kind not in ENTITY_KINDS:
            raise HTTPException(
                status_code=400, detail=f"kind must be one of {ENTITY_KINDS}"
            )
        entities = [
            {"kind": e.kind, "name": e.name, "properties": dict(e.properties)}
            for e in state.router.graph.entities()
            if kind is None or e.kind == kind
        ]
        return {"entities": entities, "count": len(entities)}

    @app.post("/kg/entities")
    def add_entity(payload: EntityPayload) -> dict:
        try:
            entity = Entity(
                kind=payload.kind, name=payload.name, properties=dict(payload.properties)
            )
            router = state.mutate_graph(lambda g: g.upsert_entity(entity))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"status": "ok", "entity_count": router.graph.entity_count}

    @app.post("/kg/relationships")
    def add_relationship(payload: RelationshipPayload) -> dict:
        try:
            router = state.mutate_graph(
                lambda g: g.upsert_relationship(
                    payload.kind, payload.source, payload.target
                )
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"status": "ok", "relationship_count": router.graph.relationship_count}

    @app.get("/qa/records")
    def qa_records() -> dict:
        records = [
            {"question": r.question, "answer": r.answer, "source_tag": r.source_tag}
            for r in state.router.corpus
        ]
        return {"records": records, "count": len(records)}

    return app
