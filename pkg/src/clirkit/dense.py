"""Exact inner-product search over a flat matrix of embeddings.

Vectors are stored in float32; scores accumulate in float64.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .ingest import RankedList
from .sparse import SNAPSHOT_FORMAT, SNAPSHOT_VERSION, read_snapshot_header


class FlatIndex:
    def __init__(self, doc_ids: list[str], matrix: np.ndarray):
        matrix = np.ascontiguousarray(matrix, dtype=np.float32)
        if matrix.ndim != 2 or matrix.shape[0] != len(doc_ids):
            raise ValueError("matrix must have one row per doc_id")
        self.doc_ids = doc_ids
        self.doc_index = {d: i for i, d in enumerate(doc_ids)}
        if len(self.doc_index) != len(doc_ids):
            raise ValueError("duplicate doc_id in flat index")
        self.matrix = matrix
        self.doc_rank = np.empty(len(doc_ids), dtype=np.int64)
        self.doc_rank[np.argsort(np.asarray(doc_ids, dtype=object), kind="stable")] = np.arange(len(doc_ids))

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.doc_ids)

    def document_vector(self, doc_id: str) -> np.ndarray:
        return self.matrix[self.doc_index[doc_id]].astype(np.float64)

    def search(self, query, k: int, topic_id: str = "", **params) -> RankedList:
        return search_dense(self, query, k, topic_id=topic_id)

    def save(self, path: str | Path) -> None:
        header = {"format": SNAPSHOT_FORMAT, "version": SNAPSHOT_VERSION, "kind": "flat", "dim": self.dim}
        with open(path, "wb") as f:
            np.savez(f, header=np.array(json.dumps(header)),
                     doc_ids=np.array(self.doc_ids, dtype=str), matrix=self.matrix)

    @classmethod
    def load(cls, path: str | Path) -> "FlatIndex":
        with np.load(path, allow_pickle=False) as z:
            header = read_snapshot_header(z, "flat")
            matrix = z["matrix"].reshape(-1, header["dim"])
            return cls(z["doc_ids"].tolist(), matrix)


def build_flat(vectors: Iterable[tuple[str, np.ndarray]]) -> FlatIndex:
    doc_ids: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim = None
    for doc_id, vec in vectors:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise ValueError(f"vector for {doc_id!r} must be a non-empty 1-d array")
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ValueError(f"vector for {doc_id!r} has dim {vec.size}, expected {dim}")
        if not np.isfinite(vec).all():
            raise ValueError(f"vector for {doc_id!r} has non-finite entries")
        if doc_id in seen:
            raise ValueError(f"duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        doc_ids.append(str(doc_id))
        rows.append(vec)
    matrix = np.vstack(rows).astype(np.float32) if rows else np.zeros((0, 0), dtype=np.float32)
    return FlatIndex(doc_ids, matrix)


def search_dense(index: FlatIndex, query, k: int, topic_id: str = "") -> RankedList:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(index) == 0:
        return RankedList(topic_id, [])
    q = np.ascontiguousarray(query, dtype=np.float64)
    if q.ndim != 1 or q.size != index.dim:
        raise ValueError(f"query dim {q.size} does not match index dim {index.dim}")
    scores = np.empty(len(index), dtype=np.float64)
    kernels.dense_scores(index.matrix, q, scores)
    best = kernels.top_k(scores, np.arange(len(index)), index.doc_rank, k)
    return RankedList(topic_id, [(index.doc_ids[i], float(scores[i])) for i in best])
