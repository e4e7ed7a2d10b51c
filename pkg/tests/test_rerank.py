import random

import pytest

from clirkit.analysis import AnalyzerConfig
from clirkit.ingest import FormatError, Run
from clirkit.rerank import (CountingOracle, IdentityOracle, LexicalOverlapScorer, ScoreOracle, load_score_oracle,
                            rerank)


def random_run(rng, topics=3, n=30, prefix="d"):
    run = Run(tag="r")
    for t in range(topics):
        docs = rng.sample(range(200), n)
        scores = sorted((rng.uniform(0, 10) for _ in range(n)), reverse=True)
        run[str(t)] = [(f"{prefix}{d}", s) for d, s in zip(docs, scores)]
    return run


def order(run):
    return {t: [d for d, _ in hits] for t, hits in run.items()}


def assert_monotone(run):
    for hits in run.topics.values():
        scores = [s for _, s in hits]
        assert all(a >= b for a, b in zip(scores, scores[1:]))


def test_load_oracle(write_lines):
    assert load_score_oracle(write_lines("s", ["1 d1 0.9"])).scores == {("1", "d1"): 0.9}


def test_load_oracle_duplicates(write_lines):
    oracle = load_score_oracle(write_lines("s", ["1 d1 0.9", "1 d1 0.2"]))
    assert oracle.scores == {("1", "d1"): 0.2}
    assert oracle.duplicates == 1


def test_load_oracle_bad_score(write_lines):
    with pytest.raises(FormatError) as e:
        load_score_oracle(write_lines("s", ["1 d1 0.9", "1 d2 nope"]))
    assert e.value.line == 2


def test_load_oracle_count(write_lines):
    lines = [f"{i % 7}\td{i}\t{i / 1000}" for i in range(1000)]
    assert len(load_score_oracle(write_lines("s", lines))) == 1000


def test_first_stage_scores_are_a_fixed_point():
    run = random_run(random.Random(0))
    oracle = ScoreOracle({(t, d): s for t, hits in run.items() for d, s in hits})
    assert order(rerank(run, oracle, 1000)) == order(run)


def test_empty_oracle_is_a_fixed_point():
    run = random_run(random.Random(1))
    assert order(rerank(run, ScoreOracle(), 10)) == order(run)


def test_reversal():
    run = Run({"q": [("a", 3.0), ("b", 2.0), ("c", 1.0)]})
    oracle = ScoreOracle({("q", "a"): 0.1, ("q", "b"): 0.2, ("q", "c"): 0.3})
    out = rerank(run, oracle, 3)
    assert out["q"] == [("c", 0.3), ("b", 0.2), ("a", 0.1)]


def test_unscored_and_tail_placement():
    run = Run({"q": [("a", 5.0), ("b", 4.0), ("c", 3.0), ("d", 2.0), ("e", 1.0)]})
    oracle = ScoreOracle({("q", "c"): 0.9, ("q", "a"): 0.5, ("q", "e"): 10.0})
    out = rerank(run, oracle, 3)
    # e is past the depth, so its oracle score is ignored
    assert [d for d, _ in out["q"]] == ["c", "a", "b", "d", "e"]
    assert out["q"][0][1] == 0.9 and out["q"][1][1] == 0.5
    assert_monotone(out)
    tail = [s for _, s in out["q"][2:]]
    assert all(x > y for x, y in zip(tail, tail[1:])) and tail[0] < 0.5


def test_rerank_invariants_random():
    rng = random.Random(7)
    for trial in range(30):
        run = random_run(rng)
        oracle = ScoreOracle({(t, d): rng.random() for t, hits in run.items() for d, _ in hits if rng.random() < 0.7})
        depth = rng.randint(1, 40)
        once = rerank(run, oracle, depth)
        assert_monotone(once)
        for t, hits in run.items():
            assert sorted(once[t]) != [] and {d for d, _ in once[t]} == {d for d, _ in hits}
            beyond = [d for d, _ in hits[depth:]]
            assert [d for d, _ in once[t] if d in set(beyond)] == beyond
        assert order(rerank(once, oracle, depth)) == order(once)


def test_identity_and_counting_oracles():
    run = random_run(random.Random(2), topics=2, n=10)
    counter = CountingOracle(IdentityOracle())
    assert order(rerank(run, counter, 4)) == order(run)
    assert counter.calls == 2 * 4


def test_lexical_overlap_scorer():
    scorer = LexicalOverlapScorer({"1": "solar panels"}, {"a": "solar panels on roofs", "b": "wind"},
                                  AnalyzerConfig.default("en"))
    assert scorer.score("1", "a") == 1.0
    assert scorer.score("1", "b") == 0.0
    assert scorer.score("1", "missing") is None


def test_depth_validation():
    with pytest.raises(ValueError):
        rerank(Run(), ScoreOracle(), 0)
