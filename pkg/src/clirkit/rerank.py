"""Second-stage reranking against externally computed relevance scores.

A reranker here is anything with ``score(topic_id, doc_id, first_stage_score)``
returning a float or None (no opinion). :class:`ScoreOracle` serves scores read
from a TSV file produced by an outside model; the other scorers exist for
testing and for building pipelines without a model.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .analysis import AnalyzerConfig, analyze
from .ingest import FormatError, Run

DEFAULT_DEPTH = 1000


class ScoreOracle:
    """Scores keyed by (topic_id, doc_id); missing pairs are allowed."""

    def __init__(self, scores: Mapping[tuple[str, str], float] | None = None, duplicates: int = 0):
        self.scores: dict[tuple[str, str], float] = {}
        for key, s in (scores or {}).items():
            s = float(s)
            if not math.isfinite(s):
                raise ValueError(f"non-finite score for {key}")
            self.scores[(str(key[0]), str(key[1]))] = s
        self.duplicates = duplicates

    def __len__(self) -> int:
        return len(self.scores)

    def __contains__(self, key) -> bool:
        return key in self.scores

    def score(self, topic_id: str, doc_id: str, first_stage_score: float | None = None) -> float | None:
        return self.scores.get((topic_id, doc_id))


class IdentityOracle:
    """Echoes the first-stage score; reranking with it leaves any run's order unchanged."""

    def score(self, topic_id: str, doc_id: str, first_stage_score: float | None = None) -> float | None:
        return first_stage_score


class CountingOracle:
    """Wraps another scorer and counts how many pairs it was asked about."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def score(self, topic_id, doc_id, first_stage_score=None):
        self.calls += 1
        return self.inner.score(topic_id, doc_id, first_stage_score)


class LexicalOverlapScorer:
    """Reference scorer: fraction of distinct query terms that occur in the document."""

    def __init__(self, queries: Mapping[str, str], docs: Mapping[str, str], config: AnalyzerConfig):
        self.queries = {t: set(analyze(q, config)) for t, q in queries.items()}
        self.docs = docs
        self.config = config
        self._doc_terms: dict[str, set[str]] = {}

    def score(self, topic_id, doc_id, first_stage_score=None):
        q = self.queries.get(topic_id)
        text = self.docs.get(doc_id)
        if not q or text is None:
            return None
        terms = self._doc_terms.get(doc_id)
        if terms is None:
            terms = self._doc_terms[doc_id] = set(analyze(text, self.config))
        return len(q & terms) / len(q)


def load_score_oracle(path: str | Path) -> ScoreOracle:
    """Read ``topic_id doc_id score`` lines. Later duplicates win; ``.duplicates`` counts them."""
    scores: dict[tuple[str, str], float] = {}
    duplicates = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise FormatError(f"expected 3 columns, got {len(parts)}", path, lineno)
            topic, doc_id, score = parts
            try:
                s = float(score)
            except ValueError:
                raise FormatError(f"non-numeric score {score!r}", path, lineno) from None
            if not math.isfinite(s):
                raise FormatError(f"non-finite score {score!r}", path, lineno)
            if (topic, doc_id) in scores:
                duplicates += 1
            scores[(topic, doc_id)] = s
    return ScoreOracle(scores, duplicates=duplicates)


def rerank_hits(topic_id: str, hits: list[tuple[str, float]], oracle, depth: int) -> list[tuple[str, float]]:
    head, tail = hits[:depth], hits[depth:]
    scored, unscored = [], []
    for doc_id, first in head:
        s = oracle.score(topic_id, doc_id, first)
        if s is None:
            unscored.append((doc_id, first))
        else:
            scored.append((doc_id, float(s)))
    if not scored:
        return list(hits)
    # stable sort: equal oracle scores keep their first-stage order
    scored.sort(key=lambda h: -h[1])
    floor = scored[-1][1]
    rest = unscored + tail
    return scored + [(doc_id, floor - i) for i, (doc_id, _) in enumerate(rest, 1)]


def rerank(run: Run, oracle, depth: int = DEFAULT_DEPTH) -> Run:
    """Reorder the top ``depth`` entries of every topic by oracle score.

    Unscored entries follow the scored ones in their original relative order,
    then everything past ``depth``. Those trailing entries get synthetic scores
    counting down from the lowest oracle score so the run stays monotone.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    out = Run(tag=run.tag)
    for topic_id, hits in run.items():
        out.topics[topic_id] = rerank_hits(topic_id, hits, oracle, depth)
    return out


def candidate_pairs(run: Run, depth: int, doc_text: Callable[[str], str]) -> Iterable[tuple[str, str, str]]:
    """(topic_id, doc_id, text) for the top ``depth`` entries of every topic."""
    for topic_id, hits in run.items():
        for doc_id, _ in hits[:depth]:
            yield topic_id, doc_id, doc_text(doc_id)


def write_candidates(pairs: Iterable[tuple[str, str, str]], path: str | Path) -> int:
    """Write candidate pairs as TSV for an external scorer. Tabs/newlines in text become spaces."""
    n = 0
    with open(path, "w", encoding="utf-8") as f:
        for topic_id, doc_id, text in pairs:
            clean = " ".join(text.split())
            f.write(f"{topic_id}\t{doc_id}\t{clean}\n")
            n += 1
    return n
