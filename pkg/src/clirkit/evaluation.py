"""Ranking metrics and paired significance testing.

Metrics follow trec_eval conventions: gain is the raw relevance grade,
unjudged documents count as non-relevant, and a document is relevant for
recall and AP when its grade is above zero. Only topics present in the qrels
are scored; a judged topic missing from the run scores 0 on every metric.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import special

from .ingest import Qrels, Run

NDCG_K = 20
RECALL_K = 1000
GAINS = ("linear", "exponential")


def _gain(grade: int, gain: str) -> float:
    return float(grade) if gain == "linear" else float(2 ** grade - 1)


def _topic_ndcg(hits, judged: Mapping[str, int], k: int, gain: str) -> float:
    ideal = sorted((g for g in judged.values() if g > 0), reverse=True)[:k]
    idcg = sum(_gain(g, gain) / math.log2(i + 2) for i, g in enumerate(ideal))
    if idcg == 0:
        return 0.0
    dcg = sum(_gain(judged.get(doc_id, 0), gain) / math.log2(i + 2)
              for i, (doc_id, _) in enumerate(hits[:k]))
    return dcg / idcg


def ndcg_at_k(run: Run, qrels: Qrels, k: int = NDCG_K, gain: str = "linear") -> dict[str, float]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if gain not in GAINS:
        raise ValueError(f"gain must be one of {GAINS}")
    return {t: _topic_ndcg(run.get(t, []), judged, k, gain) for t, judged in qrels.items()}


def recall_at_k(run: Run, qrels: Qrels, k: int = RECALL_K) -> dict[str, float]:
    out = {}
    for t, judged in qrels.items():
        relevant = {d for d, g in judged.items() if g > 0}
        if not relevant:
            out[t] = 0.0
            continue
        found = sum(1 for doc_id, _ in run.get(t, [])[:k] if doc_id in relevant)
        out[t] = found / len(relevant)
    return out


def average_precision(run: Run, qrels: Qrels) -> dict[str, float]:
    """Per-topic AP over the full run depth (MAP is the mean of these)."""
    out = {}
    for t, judged in qrels.items():
        n_rel = sum(1 for g in judged.values() if g > 0)
        if n_rel == 0:
            out[t] = 0.0
            continue
        hits = 0
        total = 0.0
        for rank, (doc_id, _) in enumerate(run.get(t, []), 1):
            if judged.get(doc_id, 0) > 0:
                hits += 1
                total += hits / rank
        out[t] = total / n_rel
    return out


map = average_precision  # noqa: A001 - matches the metric's usual name


@dataclass
class TopicScores:
    ndcg: dict[str, float]
    recall: dict[str, float]
    ap: dict[str, float]
    ndcg_k: int = NDCG_K
    recall_k: int = RECALL_K

    def metrics(self) -> dict[str, dict[str, float]]:
        return {f"ndcg_cut_{self.ndcg_k}": self.ndcg, f"recall_{self.recall_k}": self.recall, "map": self.ap}

    def means(self) -> dict[str, float]:
        return {name: mean(values) for name, values in self.metrics().items()}


def mean(values: Mapping[str, float]) -> float:
    return sum(values.values()) / len(values) if values else 0.0


def evaluate(run: Run, qrels: Qrels, ndcg_k: int = NDCG_K, recall_k: int = RECALL_K,
             gain: str = "linear") -> TopicScores:
    return TopicScores(ndcg_at_k(run, qrels, ndcg_k, gain), recall_at_k(run, qrels, recall_k),
                       average_precision(run, qrels), ndcg_k, recall_k)


def format_report(scores: TopicScores, per_topic: bool = True) -> str:
    """TSV lines ``metric<TAB>topic<TAB>value`` with a closing ``all`` row per metric."""
    lines = []
    for name, values in scores.metrics().items():
        if per_topic:
            lines.extend(f"{name}\t{t}\t{v:.4f}" for t, v in sorted(values.items()))
        lines.append(f"{name}\tall\t{mean(values):.4f}")
    return "\n".join(lines) + "\n"


def paired_t_test(a: Mapping[str, float], b: Mapping[str, float]) -> tuple[float, float]:
    """Two-sided paired t-test over topics. Returns (t, p).

    When every paired difference is identical the statistic is degenerate:
    zero differences give (0, 1); a constant non-zero shift gives (+-inf, 0).
    """
    if set(a) != set(b):
        raise ValueError("paired t-test needs both score sets over the same topics")
    n = len(a)
    if n < 2:
        raise ValueError("paired t-test needs at least 2 topics")
    topics = sorted(a)
    d = np.array([a[t] - b[t] for t in topics], dtype=np.float64)
    mean_d = d.mean()
    sd = math.sqrt(((d - mean_d) ** 2).sum() / (n - 1))
    if sd == 0.0:
        if mean_d == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean_d), 0.0
    t = mean_d / (sd / math.sqrt(n))
    df = n - 1
    # two-sided tail of Student's t via the regularized incomplete beta function
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))
    return float(t), min(1.0, p)


def bonferroni(p_values: Sequence[float], m: int | None = None) -> list[float]:
    m = len(p_values) if m is None else m
    if m < 1:
        raise ValueError("m must be >= 1")
    return [min(1.0, m * p) for p in p_values]


@dataclass
class Comparison:
    name_a: str
    name_b: str
    mean_a: float
    mean_b: float
    t: float
    p: float
    p_adjusted: float


def pairwise_significance(per_topic: Mapping[str, Mapping[str, float]]) -> list[Comparison]:
    """All pairwise paired t-tests between systems, Bonferroni-adjusted over the pairs."""
    names = list(per_topic)
    pairs = list(itertools.combinations(names, 2))
    raw = [paired_t_test(per_topic[x], per_topic[y]) for x, y in pairs]
    adjusted = bonferroni([p for _, p in raw]) if raw else []
    return [Comparison(x, y, mean(per_topic[x]), mean(per_topic[y]), t, p, pa)
            for (x, y), (t, p), pa in zip(pairs, raw, adjusted)]
