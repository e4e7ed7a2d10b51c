"""Scoring kernels shared by the sparse and dense engines.

Every kernel has a loop form (compiled with numba when available) and a
vectorized numpy form. Both produce the same floating point results because
they accumulate in the same order: posting list by posting list for sparse
scoring, row by row for dense scoring. ``USE_NUMBA`` picks the active one.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, jit

_DENSE_CHUNK = 4096


def _accumulate_weighted_loop(term_ptr, post_docs, post_tf, term_ids, term_weights,
                              doc_norm, scores, matched):
    for j in range(term_ids.shape[0]):
        t = term_ids[j]
        w = term_weights[j]
        for p in range(term_ptr[t], term_ptr[t + 1]):
            d = post_docs[p]
            tf = np.float64(post_tf[p])
            scores[d] += w * tf / (tf + doc_norm[d])
            matched[d] = True


def _accumulate_weighted_numpy(term_ptr, post_docs, post_tf, term_ids, term_weights,
                               doc_norm, scores, matched):
    for t, w in zip(term_ids, term_weights):
        lo, hi = term_ptr[t], term_ptr[t + 1]
        docs = post_docs[lo:hi]
        tf = post_tf[lo:hi].astype(np.float64)
        # doc ids are unique within one posting list, so fancy += is safe
        scores[docs] += w * tf / (tf + doc_norm[docs])
        matched[docs] = True


def _accumulate_impact_loop(term_ptr, post_docs, post_tf, term_ids, term_weights,
                            scores, matched):
    for j in range(term_ids.shape[0]):
        t = term_ids[j]
        w = term_weights[j]
        for p in range(term_ptr[t], term_ptr[t + 1]):
            d = post_docs[p]
            scores[d] += w * np.int64(post_tf[p])
            matched[d] = True


def _accumulate_impact_numpy(term_ptr, post_docs, post_tf, term_ids, term_weights,
                             scores, matched):
    for t, w in zip(term_ids, term_weights):
        lo, hi = term_ptr[t], term_ptr[t + 1]
        docs = post_docs[lo:hi]
        scores[docs] += w * post_tf[lo:hi].astype(np.int64)
        matched[docs] = True


def _dense_scores_loop(matrix, query, out):
    n, dim = matrix.shape
    for i in range(n):
        acc = 0.0
        for j in range(dim):
            acc += np.float64(matrix[i, j]) * query[j]
        out[i] = acc


def _dense_scores_numpy(matrix, query, out):
    for lo in range(0, matrix.shape[0], _DENSE_CHUNK):
        block = matrix[lo:lo + _DENSE_CHUNK].astype(np.float64)
        out[lo:lo + _DENSE_CHUNK] = block @ query


accumulate_weighted_numba = jit(_accumulate_weighted_loop)
accumulate_impact_numba = jit(_accumulate_impact_loop)
dense_scores_numba = jit(_dense_scores_loop)

if USE_NUMBA:
    accumulate_weighted = accumulate_weighted_numba
    accumulate_impact = accumulate_impact_numba
    dense_scores = dense_scores_numba
else:
    accumulate_weighted = _accumulate_weighted_numpy
    accumulate_impact = _accumulate_impact_numpy
    dense_scores = _dense_scores_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"


def top_k(scores: np.ndarray, candidates: np.ndarray, doc_rank: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k best candidates, by descending score then ascending doc rank.

    ``doc_rank[i]`` is the position of document ``i`` in lexicographic doc_id order,
    so ties resolve by ascending doc_id.
    """
    if candidates.size == 0 or k <= 0:
        return candidates[:0]
    cand_scores = scores[candidates]
    if candidates.size > k:
        # everything scoring at least the k-th best survives, ties included
        kth = np.partition(cand_scores, candidates.size - k)[candidates.size - k]
        keep = cand_scores >= kth
        candidates = candidates[keep]
        cand_scores = cand_scores[keep]
    order = np.lexsort((doc_rank[candidates], -cand_scores))
    return candidates[order[:k]]
