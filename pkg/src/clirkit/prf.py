"""Rocchio pseudo-relevance feedback for sparse and dense queries.

Feedback documents are taken from the index's stored representation of the
first-pass hits, so lexical and dense feedback follow the same recipe:
retrieve, blend the query with the centroid of the top documents, retrieve again.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .ingest import RankedList
from .sparse import SparseVector


@dataclass(frozen=True)
class RocchioParams:
    depth: int = 10
    alpha: float = 1.0
    beta: float = 0.75
    gamma: float = 0.0
    top_terms: int = 128

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.top_terms < 1:
            raise ValueError("top_terms must be >= 1")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("alpha, beta and gamma must be non-negative")


def rocchio_sparse(query: Mapping[str, float], feedback_docs: Sequence[Mapping[str, float]],
                   params: RocchioParams) -> SparseVector:
    """``alpha * q + beta * centroid``, pruned to the ``top_terms`` heaviest terms.

    Terms of the original query are always kept. There is no non-relevant set,
    so ``gamma`` has nothing to act on.
    """
    if not feedback_docs:
        return SparseVector(query)
    blended: dict[str, float] = {t: params.alpha * w for t, w in query.items()}
    coef = params.beta / len(feedback_docs)
    for doc in feedback_docs:
        for t, w in doc.items():
            blended[t] = blended.get(t, 0.0) + coef * w
    ranked = sorted(blended, key=lambda t: (-blended[t], t))
    keep = set(ranked[:params.top_terms]) | set(query)
    # original terms first, in query order: scoring sums terms in this order
    return SparseVector((t, max(w, 0.0)) for t, w in blended.items() if t in keep)


def rocchio_dense(query, feedback_vectors: Sequence, params: RocchioParams) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if not len(feedback_vectors):
        return q.copy()
    fb = [np.asarray(v, dtype=np.float64) for v in feedback_vectors]
    if any(v.shape != q.shape for v in fb):
        raise ValueError(f"feedback vectors must all have dim {q.size}")
    return params.alpha * q + params.beta * np.mean(fb, axis=0)


def prf_search(engine, query, k: int, params: RocchioParams, topic_id: str = "", **search_params) -> RankedList:
    """Two-pass retrieval with Rocchio expansion between the passes.

    ``engine`` is an :class:`~clirkit.sparse.InvertedIndex` or a
    :class:`~clirkit.dense.FlatIndex`. For a BM25 index ``query`` may be a token
    list; the expanded query then carries real-valued weights in place of term
    multiplicities.
    """
    first = engine.search(query, params.depth, topic_id=topic_id, **search_params)
    if not first.hits:
        return first
    feedback = [engine.document_vector(doc_id) for doc_id, _ in first.hits]
    if isinstance(feedback[0], np.ndarray):
        expanded = rocchio_dense(query, feedback, params)
    else:
        if not isinstance(query, Mapping):
            query = SparseVector.from_tokens(query)
        expanded = rocchio_sparse(query, feedback, params)
    return engine.search(expanded, k, topic_id=topic_id, **search_params)
