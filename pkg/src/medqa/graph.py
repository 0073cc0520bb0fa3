"""In-memory medical knowledge graph with typed queries per intent.

Three entity kinds (department, disease, symptom) and five relationship
kinds. Diseases may carry string properties (description, cause, prevent,
cure_way); three relationship kinds express the same facts as edges, so
queries merge both representations into one answer list.

Exchange format is JSON lines with entity NAMES as keys:
    {"t": "entity", "kind": "disease", "name": "cold", "properties": {...}}
    {"t": "rel", "kind": "have_symptom", "from": "cold", "to": "fever"}
Export ordering is deterministic: entities by (kind, name), relationships
by (kind, from, to).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .entities import EntityMatch, Intent

ENTITY_KINDS = ("department", "disease", "symptom")

PROPERTY_KEYS = ("description", "cause", "prevent", "cure_way")

# rel kind -> (required source kind, allowed target kinds; None = any)
REL_KINDS: dict[str, tuple[str, tuple[str, ...] | None]] = {
    "have_symptom": ("disease", ("symptom",)),
    "accompany_with": ("disease", ("disease",)),
    "disease_prevent": ("disease", None),
    "disease_cause": ("disease", None),
    "disease_cureway": ("disease", None),
}

# Which property and relationship kind answer each intent.
_INTENT_PLAN: dict[Intent, tuple[str | None, str | None]] = {
    Intent.SYMPTOM: (None, "have_symptom"),
    Intent.ACCOMPANY: (None, "accompany_with"),
    Intent.DESCRIPTION: ("description", None),
    Intent.CAUSE: ("cause", "disease_cause"),
    Intent.PREVENTION: ("prevent", "disease_prevent"),
    Intent.CUREWAY: ("cure_way", "disease_cureway"),
}

# When a bare name must be resolved without a kind, prefer diseases: every
# relationship starts at one and most questions are about them.
_RESOLUTION_ORDER = ("disease", "symptom", "department")


@dataclass
class Entity:
    kind: str
    name: str
    properties: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ENTITY_KINDS:
            raise ValueError(f"unknown entity kind {self.kind!r}")
        if not self.name or not self.name.strip():
            raise ValueError("entity name must be non-empty")
        self.name = self.name.strip()
        bad = set(self.properties) - set(PROPERTY_KEYS)
        if bad:
            raise ValueError(f"unknown property keys {sorted(bad)}")
        if self.properties and self.kind != "disease":
            raise ValueError(f"only diseases carry properties, not {self.kind}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.kind, self.name.lower())


@dataclass(frozen=True)
class Relationship:
    kind: str
    source: tuple[str, str]
    target: tuple[str, str]


@dataclass
class KgAnswer:
    found: bool
    intent: Intent
    subject: str
    items: list[str]


class KnowledgeGraph:
    """Entities plus typed relationships, indexed for per-intent lookups."""

    def __init__(self):
        self._entities: dict[tuple[str, str], Entity] = {}
        self._relationships: set[Relationship] = set()
        self._outgoing: dict[tuple[str, str], dict[str, set[tuple[str, str]]]] = {}

    @property
    def entity_count(self) -> int:
        return len(self._entities)

    @property
    def relationship_count(self) -> int:
        return len(self._relationships)

    def entities(self) -> list[Entity]:
        return sorted(self._entities.values(), key=lambda e: (e.kind, e.name.lower()))

    def relationships(self) -> list[Relationship]:
        return sorted(self._relationships, key=lambda r: (r.kind, r.source, r.target))

    def get_entity(self, kind: str, name: str) -> Entity | None:
        return self._entities.get((kind, name.strip().lower()))

    def resolve_name(self, name: str, prefer_kind: str | None = None) -> Entity | None:
        """Case-insensitive name lookup, preferring a kind when given."""
        lowered = name.strip().lower()
        order = list(_RESOLUTION_ORDER)
        if prefer_kind in order:
            order.remove(prefer_kind)
            order.insert(0, prefer_kind)
        for kind in order:
            entity = self._entities.get((kind, lowered))
            if entity is not None:
                return entity
        return None

    # -- mutations ----------------------------------------------------------

    def upsert_entity(self, entity: Entity) -> "KnowledgeGraph":
        """Insert or replace by (kind, lowercased name)."""
        self._entities[entity.key] = entity
        return self

    def upsert_relationship(self, kind: str, from_name: str, to_name: str) -> "KnowledgeGraph":
        """Insert an edge between existing entities; duplicates collapse."""
        if kind not in REL_KINDS:
            raise ValueError(f"unknown relationship kind {kind!r}")
        source_kind, target_kinds = REL_KINDS[kind]
        source = self.resolve_name(from_name, prefer_kind=source_kind)
        if source is None or source.kind != source_kind:
            raise ValueError(
                f"{kind} must start at an existing {source_kind}, {from_name!r} is not one"
            )
        target = None
        if target_kinds is not None:
            for tk in target_kinds:
                target = self.resolve_name(to_name, prefer_kind=tk)
                if target is not None and target.kind in target_kinds:
                    break
            if target is None or target.kind not in target_kinds:
                raise ValueError(
                    f"{kind} must point at {' or '.join(target_kinds)}, {to_name!r} is not one"
                )
        else:
            target = self.resolve_name(to_name)
            if target is None:
                raise ValueError(f"{kind} points at unknown entity {to_name!r}")
        rel = Relationship(kind=kind, source=source.key, target=target.key)
        self._relationships.add(rel)
        self._outgoing.setdefault(source.key, {}).setdefault(kind, set()).add(target.key)
        return self

    # -- queries ------------------------------------------------------------

    def _targets(self, source_key: tuple[str, str], rel_kind: str) -> list[str]:
        keys = self._outgoing.get(source_key, {}).get(rel_kind, set())
        names = [self._entities[k].name for k in keys]
        return sorted(names, key=str.lower)

    def answer(self, intent: Intent, entity: EntityMatch) -> KgAnswer:
        """Answer one intent about one matched entity.

        Items merge the subject's property value (if the intent has one)
        with the names of its relationship targets, property first.
        """
        if intent is Intent.UNKNOWN:
            raise ValueError("cannot answer an Unknown intent")
        subject = self.resolve_name(entity.term, prefer_kind=entity.role)
        if subject is None:
            return KgAnswer(found=False, intent=intent, subject=entity.term, items=[])
        prop_key, rel_kind = _INTENT_PLAN[intent]
        items: list[str] = []
        if prop_key is not None:
            value = subject.properties.get(prop_key, "").strip()
            if value:
                items.append(value)
        if rel_kind is not None:
            items.extend(self._targets(subject.key, rel_kind))
        return KgAnswer(found=bool(items), intent=intent, subject=subject.name, items=items)

    def copy(self) -> "KnowledgeGraph":
        """Independent copy; mutations on either side stay invisible to the other."""
        dup = type(self)()
        for key, entity in self._entities.items():
            dup._entities[key] = Entity(
                kind=entity.kind, name=entity.name, properties=dict(entity.properties)
            )
        dup._relationships = set(self._relationships)
        dup._outgoing = {
            src: {kind: set(targets) for kind, targets in by_kind.items()}
            for src, by_kind in self._outgoing.items()
        }
        return dup

    def check_integrity(self) -> None:
        """Assert indexes and endpoints are consistent; used by tests."""
        for rel in self._relationships:
            assert rel.source in self._entities, f"dangling source {rel.source}"
            assert rel.target in self._entities, f"dangling target {rel.target}"
            assert rel.target in self._outgoing[rel.source][rel.kind]
        indexed = {
            Relationship(kind=kind, source=src, target=tgt)
            for src, by_kind in self._outgoing.items()
            for kind, targets in by_kind.items()
            for tgt in targets
        }
        assert indexed == self._relationships, "adjacency index out of sync"


# ---------------------------------------------------------------------------
# Exchange format


def import_graph(lines) -> KnowledgeGraph:
    """Build a graph from JSON lines (an iterable of strings or a stream).

    Entities load before relationships regardless of line order, so a
    relationship may reference an entity defined later in the file. Errors
    carry the 1-based line number they were found on.
    """
    entity_rows: list[tuple[int, dict]] = []
    rel_rows: list[tuple[int, dict]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(record, dict):
            raise ValueError(f"line {lineno}: expected a JSON object")
        tag = record.get("t")
        if tag == "entity":
            entity_rows.append((lineno, record))
        elif tag == "rel":
            rel_rows.append((lineno, record))
        else:
            raise ValueError(f"line {lineno}: unknown record type {tag!r}")

    graph = KnowledgeGraph()
    for lineno, record in entity_rows:
        extra = set(record) - {"t", "kind", "name", "properties"}
        if extra:
            raise ValueError(f"line {lineno}: unexpected keys {sorted(extra)}")
        try:
            entity = Entity(
                kind=record.get("kind", ""),
                name=record.get("name", ""),
                properties=record.get("properties", {}) or {},
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if entity.key in graph._entities:
            raise ValueError(
                f"line {lineno}: duplicate {entity.kind} named {entity.name!r}"
            )
        graph.upsert_entity(entity)
    for lineno, record in rel_rows:
        extra = set(record) - {"t", "kind", "from", "to"}
        if extra:
            raise ValueError(f"line {lineno}: unexpected keys {sorted(extra)}")
        try:
            graph.upsert_relationship(
                record.get("kind", ""), record.get("from", ""), record.get("to", "")
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return graph


def export_graph(graph: KnowledgeGraph) -> str:
    """Serialize to the JSON-lines exchange format, deterministically ordered."""
    out = []
    for entity in graph.entities():
        record: dict = {"t": "entity", "kind": entity.kind, "name": entity.name}
        if entity.properties:
            record["properties"] = {
                k: entity.properties[k] for k in PROPERTY_KEYS if k in entity.properties
            }
        out.append(json.dumps(record, ensure_ascii=False))
    by_name = {key: e.name for key, e in graph._entities.items()}
    for rel in graph.relationships():
        out.append(
            json.dumps(
                {
                    "t": "rel",
                    "kind": rel.kind,
                    "from": by_name[rel.source],
                    "to": by_name[rel.target],
                },
                ensure_ascii=False,
            )
        )
    return "\n".join(out) + ("\n" if out else "")
