"""Reciprocal rank fusion and the two fuse/rerank orderings built on it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .ingest import Run
from .rerank import DEFAULT_DEPTH, rerank


@dataclass(frozen=True)
class RrfParams:
    k_rrf: float = 60.0
    input_depth: int = 1000
    output_depth: int = 1000

    def __post_init__(self):
        if not self.k_rrf > 0:
            raise ValueError("k_rrf must be positive")
        if self.input_depth < 1 or self.output_depth < 1:
            raise ValueError("fusion depths must be >= 1")


def rrf(runs: Sequence[Run], params: RrfParams = RrfParams(), tag: str = "rrf") -> Run:
    """Fuse runs by summing ``1 / (k_rrf + rank)`` over the runs that retrieve each doc.

    Topics missing from some runs are fused from the runs that have them.
    """
    if not runs:
        raise ValueError("rrf needs at least one run")
    topics = dict.fromkeys(t for run in runs for t in run)
    fused = Run(tag=tag)
    for topic_id in topics:
        parts: dict[str, list[float]] = {}
        for run in runs:
            for rank, (doc_id, _) in enumerate(run.get(topic_id, [])[:params.input_depth], 1):
                parts.setdefault(doc_id, []).append(1.0 / (params.k_rrf + rank))
        # fsum is exactly rounded, so the fused score cannot depend on run order
        ranked = sorted(((d, math.fsum(c)) for d, c in parts.items()), key=lambda h: (-h[1], h[0]))
        fused.topics[topic_id] = ranked[:params.output_depth]
    return fused


def early_fusion(first_stage_runs: Sequence[Run], oracle, rrf_params: RrfParams = RrfParams(),
                 rerank_depth: int = DEFAULT_DEPTH) -> Run:
    """Fuse the first-stage runs, then rerank the single fused list."""
    return rerank(rrf(first_stage_runs, rrf_params, tag="early-fusion"), oracle, rerank_depth)


def late_fusion(first_stage_runs: Sequence[Run], oracle, rrf_params: RrfParams = RrfParams(),
                rerank_depth: int = DEFAULT_DEPTH) -> Run:
    """Rerank each first-stage run, then fuse the reranked lists."""
    reranked = [rerank(run, oracle, rerank_depth) for run in first_stage_runs]
    return rrf(reranked, rrf_params, tag="late-fusion")
