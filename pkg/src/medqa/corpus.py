"""Duplicate-question data pipeline and retrieval-corpus loading.

Three inputs feed the system: a tab-separated file of labeled question
pairs (training data), a term dictionary (the medical filter), and a
JSON-lines file of question/answer records (the retrieval corpus). The
parsers here are deliberately forgiving: malformed rows are collected and
reported, never fatal, because public dumps of this kind are dirty.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

import numpy as np

from .entities import KeywordAutomaton, MedicalDictionary, extract_entities
from .router import SOURCE_TAGS, QaRecord

PAIR_COLUMNS = ("id", "qid1", "qid2", "question1", "question2", "is_duplicate")


@dataclass(frozen=True)
class QuoraRow:
    """One labeled question pair from the duplicate-questions dump."""

    id: int
    qid1: int
    qid2: int
    question1: str
    question2: str
    is_duplicate: int

    def __post_init__(self):
        if self.is_duplicate not in (0, 1):
            raise ValueError(f"is_duplicate must be 0 or 1, got {self.is_duplicate!r}")


def _as_stream(source: str | TextIO | Iterable[str]) -> Iterator[str]:
    if isinstance(source, str):
        return iter(io.StringIO(source))
    return iter(source)


def parse_pairs(source: str | TextIO | Iterable[str]) -> tuple[list[QuoraRow], list[str]]:
    """Parse the six-column TSV; returns (rows, error descriptions).

    Quoted fields may contain embedded tabs and newlines. The header row is
    mandatory and must name the six columns exactly; after that, bad rows
    land in the error list and parsing continues.
    """
    reader = csv.reader(_as_stream(source), delimiter="\t", quotechar='"')
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"missing header row; expected columns {PAIR_COLUMNS}")
    if tuple(header) != PAIR_COLUMNS:
        raise ValueError(f"bad header {tuple(header)!r}; expected {PAIR_COLUMNS}")
    rows: list[QuoraRow] = []
    errors: list[str] = []
    for ordinal, record in enumerate(reader, start=1):
        if len(record) != len(PAIR_COLUMNS):
            errors.append(f"row {ordinal}: expected 6 fields, got {len(record)}")
            continue
        try:
            rows.append(
                QuoraRow(
                    id=int(record[0]),
                    qid1=int(record[1]),
                    qid2=int(record[2]),
                    question1=record[3],
                    question2=record[4],
                    is_duplicate=int(record[5]),
                )
            )
        except ValueError as exc:
            errors.append(f"row {ordinal}: {exc}")
    return rows, errors


def write_pairs(rows: Iterable[QuoraRow]) -> str:
    """Serialize rows back to the TSV format parse_pairs accepts."""
    out = io.StringIO()
    writer = csv.writer(out, delimiter="\t", quotechar='"', lineterminator="\n")
    writer.writerow(PAIR_COLUMNS)
    for row in rows:
        writer.writerow(
            [row.id, row.qid1, row.qid2, row.question1, row.question2, row.is_duplicate]
        )
    return out.getvalue()


@dataclass
class FilterReport:
    rows_read: int
    rows_kept: int
    keyword_hits: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_kept": self.rows_kept,
            "keyword_hits": dict(sorted(self.keyword_hits.items())),
        }


def filter_medical(
    rows: Iterable[QuoraRow],
    dictionary: MedicalDictionary,
    automaton: KeywordAutomaton,
) -> tuple[list[QuoraRow], FilterReport]:
    """Keep rows where either question mentions a dictionary term.

    keyword_hits counts, per term, how many questions it was found in.
    """
    kept: list[QuoraRow] = []
    hits: Counter[str] = Counter()
    read = 0
    for row in rows:
        read += 1
        matched = False
        for question in (row.question1, row.question2):
            terms = {m.term for m in extract_entities(automaton, dictionary, question)}
            for term in terms:
                hits[term] += 1
            matched = matched or bool(terms)
        if matched:
            kept.append(row)
    return kept, FilterReport(rows_read=read, rows_kept=len(kept), keyword_hits=dict(hits))


def sample_balanced(rows: list[QuoraRow], n: int, seed: int) -> list[QuoraRow]:
    """A seeded, shuffled sample of n/2 duplicates and n/2 non-duplicates."""
    if n < 2 or n % 2 != 0:
        raise ValueError(f"n must be a positive even number, got {n}")
    half = n // 2
    positives = [r for r in rows if r.is_duplicate == 1]
    negatives = [r for r in rows if r.is_duplicate == 0]
    if len(positives) < half or len(negatives) < half:
        raise ValueError(
            f"need {half} of each label, have {len(positives)} duplicates "
            f"and {len(negatives)} non-duplicates"
        )
    rng = np.random.default_rng(seed)
    chosen = [positives[i] for i in rng.permutation(len(positives))[:half]]
    chosen += [negatives[i] for i in rng.permutation(len(negatives))[:half]]
    order = rng.permutation(n)
    return [chosen[i] for i in order]


@dataclass
class QaLoadResult:
    records: list[QaRecord]
    errors: list[str]
    tags: set[str] = field(default_factory=set)


def _source_tag(value: object) -> str:
    tag = str(value).strip().lower()
    return tag if tag in SOURCE_TAGS else "other"


def load_qa_records(source: str | TextIO | Iterable[str]) -> QaLoadResult:
    """Read the retrieval corpus: one JSON object per line.

    Expected keys: question, answer, tags (list), source. Records with an
    empty question or answer are reported, not kept; unrecognized source
    values map to "other". Tags are pooled (lowercased) into the result for
    dictionary-intersection filtering.
    """
    result = QaLoadResult(records=[], errors=[])
    for lineno, raw in enumerate(_as_stream(source), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            result.errors.append(f"line {lineno}: invalid JSON: {exc.msg}")
            continue
        if not isinstance(payload, dict):
            result.errors.append(f"line {lineno}: expected an object")
            continue
        question = str(payload.get("question", "") or "")
        answer = str(payload.get("answer", "") or "")
        if not question.strip() or not answer.strip():
            result.errors.append(f"line {lineno}: empty question or answer")
            continue
        tags = payload.get("tags", [])
        if isinstance(tags, list):
            result.tags.update(str(t).strip().lower() for t in tags if str(t).strip())
        result.records.append(
            QaRecord(
                question=question,
                answer=answer,
                source_tag=_source_tag(payload.get("source", "other")),
            )
        )
    return result


def restrict_to_tags(dictionary: MedicalDictionary, tags: set[str]) -> MedicalDictionary:
    """The sub-dictionary of terms that also appear as corpus tags.

    Feeding this into filter_medical reuses one code path for the
    tag-driven variant of the pair filter.
    """
    lowered = {t.strip().lower() for t in tags}
    return MedicalDictionary(
        diseases=dictionary.diseases & lowered,
        symptoms=dictionary.symptoms & lowered,
    )
