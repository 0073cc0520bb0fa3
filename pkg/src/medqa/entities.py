"""Entity extraction and intent recognition for incoming questions.

Entity terms come from a two-role dictionary (diseases, symptoms) compiled
into an Aho-Corasick automaton so one pass over the text finds every term.
Raw automaton hits are substring hits; a token-boundary filter then drops
hits embedded in larger words ("cold" inside "scolded"), and overlapping
survivors resolve longest-first, then leftmost.

When nothing matches exactly, a fuzzy fallback ranks dictionary terms by
cosine similarity between averaged word vectors.

Intent classification is an ordered keyword-rule table over the question
text; the rules ship as an editable data file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .embeddings import EmbeddingTable, tokenize

_TOKEN_RE = re.compile(r"(?:[^\W_]|')+", re.UNICODE)


def lower_preserving(text: str) -> str:
    """Lowercase without changing string length.

    A handful of characters lowercase to a different number of characters
    (e.g. 'İ'); those are kept as-is so every index into the result is
    also a valid index into the original text.
    """
    out = []
    for ch in text:
        low = ch.lower()
        out.append(low if len(low) == 1 else ch)
    return "".join(out)


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """(token, start, end) character spans over the lowered text."""
    lowered = lower_preserving(text)
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(lowered)]


# ---------------------------------------------------------------------------
# Dictionary


@dataclass
class MedicalDictionary:
    """Disease and symptom term sets; a term may carry both roles."""

    diseases: set[str] = field(default_factory=set)
    symptoms: set[str] = field(default_factory=set)

    def __post_init__(self):
        self.diseases = {t.strip().lower() for t in self.diseases if t.strip()}
        self.symptoms = {t.strip().lower() for t in self.symptoms if t.strip()}

    def all_terms(self) -> set[str]:
        return self.diseases | self.symptoms

    def roles_of(self, term: str) -> list[str]:
        roles = []
        if term in self.diseases:
            roles.append("disease")
        if term in self.symptoms:
            roles.append("symptom")
        return roles

    def __len__(self) -> int:
        return len(self.all_terms())


def load_dictionary(path) -> MedicalDictionary:
    """Read a sectioned term file: `[diseases]` / `[symptoms]`, one term per line."""
    diseases: set[str] = set()
    symptoms: set[str] = set()
    current: set[str] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip().lower()
                if section == "diseases":
                    current = diseases
                elif section == "symptoms":
                    current = symptoms
                else:
                    raise ValueError(f"line {lineno}: unknown section {section!r}")
                continue
            if current is None:
                raise ValueError(f"line {lineno}: term before any section header")
            current.add(line.lower())
    return MedicalDictionary(diseases=diseases, symptoms=symptoms)


# ---------------------------------------------------------------------------
# Aho-Corasick automaton


@dataclass
class _TrieNode:
    children: dict[str, "_TrieNode"] = field(default_factory=dict)
    fail: "_TrieNode | None" = None
    outputs: list[str] = field(default_factory=list)


class KeywordAutomaton:
    """Multi-pattern matcher: trie plus breadth-first failure links.

    Scanning is a single pass over the text; at each position the output
    set of the current node lists every pattern ending there, including
    those merged in from failure targets.
    """

    def __init__(self, root: _TrieNode, terms: frozenset[str]):
        self._root = root
        self.terms = terms

    @classmethod
    def from_terms(cls, terms) -> "KeywordAutomaton":
        term_set = frozenset(t for t in terms if t)
        if not term_set:
            raise ValueError("cannot build an automaton over zero terms")
        root = _TrieNode()
        for term in sorted(term_set):
            node = root
            for ch in term:
                node = node.children.setdefault(ch, _TrieNode())
            node.outputs.append(term)
        # Failure links, breadth-first: a node's failure target is the
        # longest proper suffix of its path that is also a trie path.
        root.fail = root
        queue = []
        for child in root.children.values():
            child.fail = root
            queue.append(child)
        while queue:
            node = queue.pop(0)
            for ch, child in node.children.items():
                fail = node.fail
                while fail is not root and ch not in fail.children:
                    fail = fail.fail
                child.fail = fail.children.get(ch, root)
                child.outputs.extend(child.fail.outputs)
                queue.append(child)
        return cls(root=root, terms=term_set)

    def scan(self, text: str) -> list[tuple[str, int, int]]:
        """All raw substring hits as (term, start, end), in scan order."""
        hits: list[tuple[str, int, int]] = []
        node = self._root
        for i, ch in enumerate(text):
            while node is not self._root and ch not in node.children:
                node = node.fail
            node = node.children.get(ch, self._root)
            for term in node.outputs:
                hits.append((term, i - len(term) + 1, i + 1))
        return hits


def build_automaton(dictionary: MedicalDictionary) -> KeywordAutomaton:
    if not len(dictionary):
        raise ValueError("dictionary has no terms")
    return KeywordAutomaton.from_terms(dictionary.all_terms())


# ---------------------------------------------------------------------------
# Entity extraction


@dataclass(frozen=True)
class EntityMatch:
    """One recognized dictionary term, with its character span in the text."""

    term: str
    role: str
    start: int
    end: int
    matched_via: str


def _boundary_ok(text: str, start: int, end: int) -> bool:
    # A hit flanked by a letter or digit is part of a larger word.
    if start > 0 and text[start - 1].isalnum():
        return False
    if end < len(text) and text[end].isalnum():
        return False
    return True


def extract_entities(
    automaton: KeywordAutomaton, dictionary: MedicalDictionary, text: str
) -> list[EntityMatch]:
    """Exact dictionary matches in the text, longest-then-leftmost.

    The scan runs over a length-preserving lowercase of the text, so spans
    index into the original string. A term in both dictionary roles yields
    one match per role over the same span.
    """
    lowered = lower_preserving(text)
    raw = automaton.scan(lowered)
    survivors = [
        (term, start, end)
        for term, start, end in raw
        if _boundary_ok(lowered, start, end)
    ]
    survivors.sort(key=lambda hit: (-(hit[2] - hit[1]), hit[1], hit[0]))
    chosen: list[tuple[str, int, int]] = []
    for term, start, end in survivors:
        if all(end <= s or start >= e for _, s, e in chosen):
            chosen.append((term, start, end))
    chosen.sort(key=lambda hit: hit[1])
    matches = []
    for term, start, end in chosen:
        for role in dictionary.roles_of(term):
            matches.append(
                EntityMatch(term=term, role=role, start=start, end=end, matched_via="exact")
            )
    return matches


# Function words carry no entity signal; the fuzzy fallback skips them.
STOPWORDS = frozenset(
    """a an and are about at be been by can could did do does for from get had has
    have how i in is it its me my no not of on or shall should that the this to
    was were what when where which who why will with would you your""".split()
)


def _mean_vector(table: EmbeddingTable, words: list[str]) -> np.ndarray:
    return np.mean([table.lookup(w) for w in words], axis=0)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return -1.0
    return float(a @ b / (na * nb))


def fuzzy_entities(
    table: EmbeddingTable, dictionary: MedicalDictionary, text: str, k: int
) -> list[EntityMatch]:
    """Nearest dictionary terms when nothing matched exactly.

    Every term embeds as the mean of its word vectors; every content token
    of the text likewise (single word). A term's score is its best cosine
    against any content token, and the match's span is that token's. Ties
    break by term lexicographic order; k is clamped to the dictionary size.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    content = [
        (tok, start, end)
        for tok, start, end in token_spans(text)
        if tok not in STOPWORDS
    ]
    if not content:
        return []
    token_vecs = [(tok, start, end, table.lookup(tok)) for tok, start, end in content]
    scored: list[tuple[float, str, tuple[int, int]]] = []
    for term in sorted(dictionary.all_terms()):
        term_vec = _mean_vector(table, tokenize(term).tokens)
        best = -np.inf
        best_span = (content[0][1], content[0][2])
        for tok, start, end, vec in token_vecs:
            cos = _cosine(term_vec, vec)
            if cos > best:
                best = cos
                best_span = (start, end)
        scored.append((best, term, best_span))
    scored.sort(key=lambda item: (-item[0], item[1]))
    matches = []
    for score, term, (start, end) in scored[:k]:
        for role in dictionary.roles_of(term):
            matches.append(
                EntityMatch(term=term, role=role, start=start, end=end, matched_via="fuzzy")
            )
    return matches


# ---------------------------------------------------------------------------
# Intent recognition


class Intent(Enum):
    SYMPTOM = "Symptom"
    DESCRIPTION = "Description"
    CAUSE = "Cause"
    PREVENTION = "Prevention"
    ACCOMPANY = "Accompany"
    CUREWAY = "CureWay"
    UNKNOWN = "Unknown"


IntentRules = list[tuple[Intent, list[list[str]]]]


def parse_intent_rules(text: str) -> IntentRules:
    """Parse `Kind: phrase | phrase | …` lines; line order is priority."""
    by_value = {intent.value: intent for intent in Intent}
    rules: IntentRules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind_text, sep, phrase_text = line.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected `Kind: phrase | phrase`")
        kind = by_value.get(kind_text.strip())
        if kind is None:
            raise ValueError(f"line {lineno}: unknown intent kind {kind_text.strip()!r}")
        phrases = []
        for chunk in phrase_text.split("|"):
            words = tokenize(chunk).tokens
            if not words:
                raise ValueError(f"line {lineno}: empty phrase in rule for {kind.value}")
            phrases.append(words)
        rules.append((kind, phrases))
    if not rules:
        raise ValueError("intent rule file contains no rules")
    return rules


def load_intent_rules(path) -> IntentRules:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_intent_rules(fh.read())


_DEFAULT_RULES: IntentRules | None = None


def default_intent_rules() -> IntentRules:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        from .fixtures import data_path

        _DEFAULT_RULES = load_intent_rules(data_path("intent_rules.txt"))
    return _DEFAULT_RULES


def _contains_phrase(tokens: list[str], phrase: list[str]) -> bool:
    n = len(phrase)
    return any(tokens[i:i + n] == phrase for i in range(len(tokens) - n + 1))


def classify_intent(text: str, rules: IntentRules | None = None) -> Intent:
    """First matching rule wins; phrases match whole tokens only.

    Matching on token boundaries (not raw substrings) is what makes the
    rule table's separate singular/plural entries meaningful: "cause" must
    not fire inside "causes", nor "treat" inside "treatment".
    """
    if rules is None:
        rules = default_intent_rules()
    tokens = tokenize(text).tokens
    for kind, phrases in rules:
        for phrase in phrases:
            if _contains_phrase(tokens, phrase):
                return kind
    return Intent.UNKNOWN
