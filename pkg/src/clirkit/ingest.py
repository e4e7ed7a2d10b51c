"""Readers and writers for corpora, topics, qrels, runs and vector files.

All record files are JSONL. Qrels and runs use the usual whitespace separated
TREC layouts:

    qrels:  topic iteration docid grade
    run:    topic Q0 docid rank score tag
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

VARIANTS = ("original", "human", "machine")
FIELDS = ("title", "description", "both")


class FormatError(ValueError):
    """Malformed input file. ``line`` is 1-based, or None when not tied to a line."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    title: str = ""


@dataclass(frozen=True)
class QueryText:
    title: str
    description: str = ""


@dataclass(frozen=True)
class Topic:
    topic_id: str
    variants: Mapping[str, QueryText]


@dataclass
class RankedList:
    """One topic's ranked (doc_id, score) pairs, best first."""

    topic_id: str
    hits: list[tuple[str, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.hits)

    def __iter__(self):
        return iter(self.hits)

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.hits]


class Run:
    """Per-topic ranked lists plus a run tag.

    Ranks are implicit in list order and are recomputed whenever the run is
    written out.
    """

    def __init__(self, topics: Mapping[str, Sequence[tuple[str, float]]] | None = None, tag: str = "clirkit"):
        self.tag = tag
        self.topics: dict[str, list[tuple[str, float]]] = {}
        for topic_id, hits in (topics or {}).items():
            self[topic_id] = hits

    def __setitem__(self, topic_id: str, hits: Iterable[tuple[str, float]]) -> None:
        hits = [(str(d), float(s)) for d, s in hits]
        seen = set()
        prev = math.inf
        for doc_id, score in hits:
            if doc_id in seen:
                raise ValueError(f"topic {topic_id}: duplicate doc_id {doc_id!r}")
            if score > prev:
                raise ValueError(f"topic {topic_id}: scores increase at doc_id {doc_id!r}")
            seen.add(doc_id)
            prev = score
        self.topics[str(topic_id)] = hits

    def __getitem__(self, topic_id: str) -> list[tuple[str, float]]:
        return self.topics[topic_id]

    def __contains__(self, topic_id: object) -> bool:
        return topic_id in self.topics

    def __iter__(self) -> Iterator[str]:
        return iter(self.topics)

    def __len__(self) -> int:
        return len(self.topics)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Run):
            return NotImplemented
        return self.tag == other.tag and self.topics == other.topics

    def __repr__(self) -> str:
        n = sum(len(h) for h in self.topics.values())
        return f"Run(tag={self.tag!r}, topics={len(self.topics)}, entries={n})"

    def items(self):
        return self.topics.items()

    def get(self, topic_id: str, default=None):
        return self.topics.get(topic_id, default)

    @classmethod
    def from_ranked_lists(cls, lists: Iterable[RankedList], tag: str = "clirkit") -> "Run":
        return cls({rl.topic_id: rl.hits for rl in lists}, tag=tag)


Qrels = dict[str, dict[str, int]]


def _iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"invalid JSON ({e.msg})", path, lineno) from None
            if not isinstance(record, dict):
                raise FormatError("expected a JSON object", path, lineno)
            yield lineno, record


def load_corpus(path: str | Path, format: str = "jsonl") -> Iterator[Document]:
    """Stream documents in file order.

    Records carry ``id`` (or ``doc_id``/``docid``) and either ``contents`` or
    ``title`` + ``text``. Other schemas can be adapted by mapping onto
    :class:`Document` before indexing.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported corpus format {format!r}")
    seen: set[str] = set()
    for lineno, rec in _iter_jsonl(path):
        doc_id = rec.get("id", rec.get("doc_id", rec.get("docid")))
        if doc_id is None or str(doc_id) == "":
            raise FormatError("missing document id", path, lineno)
        doc_id = str(doc_id)
        if "contents" in rec:
            text, title = rec["contents"], rec.get("title", "")
        elif "text" in rec:
            text, title = rec["text"], rec.get("title", "")
        else:
            raise FormatError(f"document {doc_id!r} has neither 'contents' nor 'text'", path, lineno)
        if not isinstance(text, str) or not isinstance(title, str):
            raise FormatError(f"document {doc_id!r}: text fields must be strings", path, lineno)
        if doc_id in seen:
            raise FormatError(f"duplicate doc_id {doc_id!r}", path, lineno)
        seen.add(doc_id)
        yield Document(doc_id, text, title)


def document_text(doc: Document) -> str:
    """Title and body joined for indexing."""
    if doc.title:
        return f"{doc.title} {doc.text}" if doc.text else doc.title
    return doc.text


def load_topics(path: str | Path, format: str = "jsonl") -> list[Topic]:
    """Load topics.

    Each record is ``{"topic_id": ..., "<variant>": {"title": ..., "description": ...}}``
    for variants among original/human/machine, or the same variant map nested
    under a ``"variants"`` key.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported topic format {format!r}")
    topics = []
    seen: set[str] = set()
    for lineno, rec in _iter_jsonl(path):
        topic_id = rec.get("topic_id", rec.get("id"))
        if topic_id is None or str(topic_id) == "":
            raise FormatError("missing topic_id", path, lineno)
        topic_id = str(topic_id)
        if topic_id in seen:
            raise FormatError(f"duplicate topic_id {topic_id!r}", path, lineno)
        seen.add(topic_id)
        source = rec.get("variants", rec)
        variants = {}
        for label, value in source.items():
            if label not in VARIANTS:
                continue
            if not isinstance(value, dict):
                raise FormatError(f"topic {topic_id}: variant {label!r} must be an object", path, lineno)
            title = value.get("title")
            if not isinstance(title, str) or not title.strip():
                raise FormatError(f"topic {topic_id}: variant {label!r} has no title", path, lineno)
            variants[label] = QueryText(title, value.get("description") or "")
        if not variants:
            raise FormatError(f"topic {topic_id} has no translation variants", path, lineno)
        topics.append(Topic(topic_id, variants))
    return topics


def build_query_text(topic: Topic, variant: str, fields: str) -> str:
    if variant not in topic.variants:
        raise KeyError(f"topic {topic.topic_id} has no {variant!r} variant")
    q = topic.variants[variant]
    if fields == "title":
        return q.title
    if fields == "description":
        return q.description
    if fields == "both":
        return q.title + " " + q.description
    raise ValueError(f"unknown query fields {fields!r}")


def load_qrels(path: str | Path) -> Qrels:
    qrels: Qrels = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise FormatError(f"expected 4 columns, got {len(parts)}", path, lineno)
            topic, _, doc_id, grade = parts
            try:
                g = int(grade)
            except ValueError:
                raise FormatError(f"non-integer grade {grade!r}", path, lineno) from None
            if g < 0:
                raise FormatError(f"negative grade {g}", path, lineno)
            judged = qrels.setdefault(topic, {})
            if doc_id in judged:
                raise FormatError(f"duplicate judgment for ({topic}, {doc_id})", path, lineno)
            judged[doc_id] = g
    return qrels


def load_run(path: str | Path) -> Run:
    """Parse a TREC run, enforcing consecutive 1-based ranks and non-increasing scores."""
    entries: dict[str, list[tuple[int, str, float, int]]] = {}
    tag = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise FormatError(f"expected 6 columns, got {len(parts)}", path, lineno)
            topic, _, doc_id, rank, score, line_tag = parts
            try:
                r = int(rank)
            except ValueError:
                raise FormatError(f"non-integer rank {rank!r}", path, lineno) from None
            try:
                s = float(score)
            except ValueError:
                raise FormatError(f"non-numeric score {score!r}", path, lineno) from None
            if not math.isfinite(s):
                raise FormatError(f"non-finite score {score!r}", path, lineno)
            if tag is None:
                tag = line_tag
            elif line_tag != tag:
                raise FormatError(f"mixed run tags {tag!r} and {line_tag!r}", path, lineno)
            entries.setdefault(topic, []).append((r, doc_id, s, lineno))

    run = Run(tag=tag or "clirkit")
    for topic, rows in entries.items():
        rows.sort(key=lambda row: row[0])
        seen: set[str] = set()
        prev = math.inf
        for expected, (r, doc_id, s, lineno) in enumerate(rows, 1):
            if r != expected:
                raise FormatError(f"topic {topic}: rank {r} where {expected} expected", path, lineno)
            if doc_id in seen:
                raise FormatError(f"topic {topic}: duplicate doc_id {doc_id!r}", path, lineno)
            if s > prev:
                raise FormatError(f"topic {topic}: score increases at rank {r}", path, lineno)
            seen.add(doc_id)
            prev = s
        run.topics[topic] = [(doc_id, s) for _, doc_id, s, _ in rows]
    return run


def write_run(run: Run, path: str | Path, tag: str | None = None) -> None:
    tag = tag or run.tag
    with open(path, "w", encoding="utf-8") as f:
        for topic, hits in run.items():
            f.writelines(f"{topic} Q0 {doc_id} {rank} {score:.6f} {tag}\n"
                         for rank, (doc_id, score) in enumerate(hits, 1))


def _check_weights(vector: dict, path, lineno) -> dict[str, float]:
    out = {}
    for token, w in vector.items():
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise FormatError(f"weight of {token!r} is not a number", path, lineno)
        w = float(w)
        if not math.isfinite(w):
            raise FormatError(f"non-finite weight for {token!r}", path, lineno)
        if w < 0:
            raise FormatError(f"negative weight {w} for {token!r}", path, lineno)
        if w > 0:
            out[str(token)] = w
    return out


def load_sparse_vectors(path: str | Path) -> Iterator[tuple[str, dict[str, float]]]:
    """Stream ``(id, {token: weight})`` from ``{"id": ..., "vector": {...}}`` records."""
    from .sparse import SparseVector

    for lineno, rec in _iter_jsonl(path):
        if "id" not in rec or not isinstance(rec.get("vector"), dict):
            raise FormatError("expected 'id' and an object-valued 'vector'", path, lineno)
        yield str(rec["id"]), SparseVector(_check_weights(rec["vector"], path, lineno))


def load_dense_vectors(path: str | Path) -> Iterator[tuple[str, np.ndarray]]:
    """Stream ``(id, float64 array)``; every vector in a file must share one dimension."""
    dim = None
    for lineno, rec in _iter_jsonl(path):
        vec = rec.get("vector")
        if "id" not in rec or not isinstance(vec, list):
            raise FormatError("expected 'id' and a list-valued 'vector'", path, lineno)
        try:
            arr = np.asarray(vec, dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError("vector entries must be numbers", path, lineno) from None
        if arr.ndim != 1 or arr.size == 0:
            raise FormatError("vector must be a non-empty flat list", path, lineno)
        if not np.isfinite(arr).all():
            raise FormatError("non-finite vector entry", path, lineno)
        if dim is None:
            dim = arr.size
        elif arr.size != dim:
            raise FormatError(f"dimension {arr.size} differs from {dim}", path, lineno)
        yield str(rec["id"]), arr
