"""Inverted index with BM25 and impact (quantized learned weight) scoring.

Postings are stored column-compressed by term: the postings of term ``t`` are
``post_docs[term_ptr[t]:term_ptr[t+1]]`` with matching ``post_tf``, sorted by
internal doc id. A doc-major copy of the same triples backs feedback lookups.

In impact mode the "term frequency" slot holds the quantized weight, so the
sum-of-tf score of a query with integer weights is exactly the inner product of
the two quantized vectors.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .analysis import AnalyzerConfig, analyze
from .ingest import Document, RankedList, document_text

TEXT_MODE = "text-bm25"
IMPACT_MODE = "impact"
DEFAULT_SCALE = 100
DEFAULT_K1 = 0.9
DEFAULT_B = 0.4

SNAPSHOT_FORMAT = "clirkit-index"
SNAPSHOT_VERSION = 1


class SparseVector(dict):
    """token -> weight map holding only finite, strictly positive weights."""

    def __init__(self, weights: Mapping[str, float] | Iterable[tuple[str, float]] = ()):
        super().__init__()
        items = weights.items() if isinstance(weights, Mapping) else weights
        for token, w in items:
            w = float(w)
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight for {token!r}")
            if w < 0:
                raise ValueError(f"negative weight {w} for {token!r}")
            if w > 0:
                dict.__setitem__(self, str(token), w)

    def __setitem__(self, token, w):
        raise TypeError("SparseVector is read-only; build a new one")

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "SparseVector":
        """Bag of words: each token weighted by its multiplicity."""
        return cls(Counter(tokens))


def quantize(weight: float, scale: int = DEFAULT_SCALE) -> int:
    """Round ``weight * scale`` half-up to a non-negative integer."""
    if not math.isfinite(weight):
        raise ValueError(f"cannot quantize non-finite weight {weight}")
    if weight < 0:
        raise ValueError(f"cannot quantize negative weight {weight}")
    if scale < 1 or int(scale) != scale:
        raise ValueError(f"scale must be a positive integer, got {scale}")
    return int(math.floor(weight * scale + 0.5))


class InvertedIndex:
    def __init__(self, mode: str, vocab: list[str], term_ptr: np.ndarray, post_docs: np.ndarray,
                 post_tf: np.ndarray, doc_ids: list[str], doc_ptr: np.ndarray,
                 fwd_terms: np.ndarray, fwd_tf: np.ndarray,
                 analyzer: AnalyzerConfig | None = None, scale: int | None = None):
        if mode not in (TEXT_MODE, IMPACT_MODE):
            raise ValueError(f"unknown index mode {mode!r}")
        self.mode = mode
        self.vocab = vocab
        self.term_index = {t: i for i, t in enumerate(vocab)}
        self.term_ptr = term_ptr
        self.post_docs = post_docs
        self.post_tf = post_tf
        self.doc_ids = doc_ids
        self.doc_index = {d: i for i, d in enumerate(doc_ids)}
        self.doc_ptr = doc_ptr
        self.fwd_terms = fwd_terms
        self.fwd_tf = fwd_tf
        self.analyzer = analyzer
        self.scale = scale
        self.doc_lengths = np.zeros(len(doc_ids), dtype=np.int64)
        np.add.at(self.doc_lengths, np.repeat(np.arange(len(doc_ids)), np.diff(doc_ptr)), fwd_tf)
        self.avg_doc_length = float(self.doc_lengths.mean()) if doc_ids else 0.0
        self.doc_rank = np.empty(len(doc_ids), dtype=np.int64)
        self.doc_rank[np.argsort(np.asarray(doc_ids, dtype=object), kind="stable")] = np.arange(len(doc_ids))

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    def __len__(self) -> int:
        return len(self.doc_ids)

    def df(self, token: str) -> int:
        t = self.term_index.get(token)
        return 0 if t is None else int(self.term_ptr[t + 1] - self.term_ptr[t])

    def postings(self, token: str) -> list[tuple[int, int]]:
        t = self.term_index.get(token)
        if t is None:
            return []
        lo, hi = self.term_ptr[t], self.term_ptr[t + 1]
        return [(int(d), int(f)) for d, f in zip(self.post_docs[lo:hi], self.post_tf[lo:hi])]

    def document_vector(self, doc_id: str) -> SparseVector:
        """Stored representation of a document: tf counts, or dequantized impacts."""
        i = self.doc_index[doc_id]
        lo, hi = self.doc_ptr[i], self.doc_ptr[i + 1]
        div = float(self.scale) if self.mode == IMPACT_MODE else 1.0
        return SparseVector((self.vocab[t], f / div) for t, f in zip(self.fwd_terms[lo:hi], self.fwd_tf[lo:hi]))

    def search(self, query, k: int, topic_id: str = "", **params) -> RankedList:
        if self.mode == TEXT_MODE:
            return search_bm25(self, query, k, topic_id=topic_id, **params)
        return search_impact(self, query, k, topic_id=topic_id, **params)

    def save(self, path: str | Path) -> None:
        header = {"format": SNAPSHOT_FORMAT, "version": SNAPSHOT_VERSION, "kind": "inverted",
                  "mode": self.mode, "scale": self.scale,
                  "analyzer": self.analyzer.to_dict() if self.analyzer else None}
        with open(path, "wb") as f:
            np.savez_compressed(
                f, header=np.array(json.dumps(header)),
                vocab=np.array(self.vocab, dtype=str), doc_ids=np.array(self.doc_ids, dtype=str),
                term_ptr=self.term_ptr, post_docs=self.post_docs, post_tf=self.post_tf,
                doc_ptr=self.doc_ptr, fwd_terms=self.fwd_terms, fwd_tf=self.fwd_tf)

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        with np.load(path, allow_pickle=False) as z:
            header = read_snapshot_header(z, "inverted")
            analyzer = AnalyzerConfig.from_dict(header["analyzer"]) if header["analyzer"] else None
            return cls(header["mode"], z["vocab"].tolist(), z["term_ptr"], z["post_docs"], z["post_tf"],
                       z["doc_ids"].tolist(), z["doc_ptr"], z["fwd_terms"], z["fwd_tf"],
                       analyzer=analyzer, scale=header["scale"])


def read_snapshot_header(z, kind: str) -> dict:
    if "header" not in z:
        raise ValueError("not a clirkit snapshot (no header)")
    header = json.loads(str(z["header"]))
    if header.get("format") != SNAPSHOT_FORMAT:
        raise ValueError(f"not a clirkit snapshot: format {header.get('format')!r}")
    if header.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {header.get('version')!r}")
    if header.get("kind") != kind:
        raise ValueError(f"snapshot holds a {header.get('kind')!r} index, expected {kind!r}")
    return header


def _build(mode: str, rows: Iterable[tuple[str, Mapping[str, int]]], **kwargs) -> InvertedIndex:
    vocab: list[str] = []
    term_index: dict[str, int] = {}
    doc_ids: list[str] = []
    seen: set[str] = set()
    doc_ptr = [0]
    fwd_terms: list[int] = []
    fwd_tf: list[int] = []
    for doc_id, counts in rows:
        if doc_id in seen:
            raise ValueError(f"duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        doc_ids.append(doc_id)
        for token, tf in counts.items():
            t = term_index.get(token)
            if t is None:
                t = term_index[token] = len(vocab)
                vocab.append(token)
            fwd_terms.append(t)
            fwd_tf.append(tf)
        doc_ptr.append(len(fwd_terms))

    doc_ptr_a = np.asarray(doc_ptr, dtype=np.int64)
    fwd_terms_a = np.asarray(fwd_terms, dtype=np.int32)
    fwd_tf_a = np.asarray(fwd_tf, dtype=np.int64)
    fwd_docs = np.repeat(np.arange(len(doc_ids), dtype=np.int32), np.diff(doc_ptr_a))
    # stable sort by term keeps each posting list in doc order
    order = np.argsort(fwd_terms_a, kind="stable")
    term_ptr = np.zeros(len(vocab) + 1, dtype=np.int64)
    np.cumsum(np.bincount(fwd_terms_a, minlength=len(vocab)), out=term_ptr[1:])
    return InvertedIndex(mode, vocab, term_ptr, fwd_docs[order], fwd_tf_a[order], doc_ids,
                         doc_ptr_a, fwd_terms_a, fwd_tf_a, **kwargs)


def index_text(docs: Iterable[Document], config: AnalyzerConfig) -> InvertedIndex:
    rows = ((doc.doc_id, Counter(analyze(document_text(doc), config))) for doc in docs)
    return _build(TEXT_MODE, rows, analyzer=config)


def index_impact(vectors: Iterable[tuple[str, Mapping[str, float]]], scale: int = DEFAULT_SCALE) -> InvertedIndex:
    """Index learned sparse vectors as quantized impacts; entries quantizing to 0 are dropped."""
    quantize(0.0, scale)  # validates scale

    def rows():
        for doc_id, vec in vectors:
            counts = {}
            for token, w in vec.items():
                q = quantize(w, scale)
                if q > 0:
                    counts[token] = q
            yield str(doc_id), counts

    return _build(IMPACT_MODE, rows(), scale=scale)


def _collect(index: InvertedIndex, query: Mapping[str, float]) -> tuple[np.ndarray, np.ndarray]:
    term_ids, weights = [], []
    for token, w in query.items():
        t = index.term_index.get(token)
        if t is not None and w > 0:
            term_ids.append(t)
            weights.append(w)
    return np.asarray(term_ids, dtype=np.int64), np.asarray(weights)


def _ranked(index: InvertedIndex, scores: np.ndarray, matched: np.ndarray, k: int, topic_id: str) -> RankedList:
    best = kernels.top_k(scores, np.flatnonzero(matched), index.doc_rank, k)
    return RankedList(topic_id, [(index.doc_ids[i], float(scores[i])) for i in best])


def bm25_term_weights(index: InvertedIndex, query: Mapping[str, float]) -> dict[str, float]:
    """Query-side BM25 weights ``qtf * idf`` for the indexed query terms."""
    n = index.doc_count
    out = {}
    for token, qtf in query.items():
        df = index.df(token)
        if df:
            out[token] = qtf * math.log(1.0 + (n - df + 0.5) / (df + 0.5))
    return out


def search_bm25(index: InvertedIndex, query: Sequence[str] | Mapping[str, float], k: int,
                k1: float = DEFAULT_K1, b: float = DEFAULT_B, topic_id: str = "") -> RankedList:
    """Top-k by Lucene-style BM25 (no ``k1 + 1`` factor in the numerator).

    ``query`` is a token list (each distinct term weighted by its multiplicity)
    or a token -> weight map whose weights replace the multiplicities.
    """
    if index.mode != TEXT_MODE:
        raise ValueError("BM25 search needs a text-mode index; this one holds impacts")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not isinstance(query, Mapping):
        query = Counter(query)
    weights = bm25_term_weights(index, query)
    term_ids, term_weights = _collect(index, weights)
    scores = np.zeros(index.doc_count, dtype=np.float64)
    matched = np.zeros(index.doc_count, dtype=np.bool_)
    if term_ids.size:
        avg = index.avg_doc_length or 1.0
        doc_norm = k1 * (1.0 - b + b * index.doc_lengths / avg)
        kernels.accumulate_weighted(index.term_ptr, index.post_docs, index.post_tf, term_ids,
                                    term_weights.astype(np.float64), doc_norm, scores, matched)
    return _ranked(index, scores, matched, k, topic_id)


def search_impact(index: InvertedIndex, query: Mapping[str, float], k: int, scale: int | None = None,
                  topic_id: str = "") -> RankedList:
    """Top-k by sum of quantized query weight times stored impact."""
    if index.mode != IMPACT_MODE:
        raise ValueError("impact search needs an impact-mode index; this one holds text")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scale = index.scale if scale is None else scale
    quantized = {t: quantize(w, scale) for t, w in query.items()}
    term_ids, term_weights = _collect(index, quantized)
    scores = np.zeros(index.doc_count, dtype=np.int64)
    matched = np.zeros(index.doc_count, dtype=np.bool_)
    if term_ids.size:
        kernels.accumulate_impact(index.term_ptr, index.post_docs, index.post_tf, term_ids,
                                  term_weights.astype(np.int64), scores, matched)
    return _ranked(index, scores, matched, k, topic_id)
