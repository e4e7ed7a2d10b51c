import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clirkit.ingest import (Document, FormatError, QueryText, Run, Topic, build_query_text, load_corpus,
                            load_dense_vectors, load_qrels, load_run, load_sparse_vectors, load_topics,
                            write_run)


def test_corpus_single_record(write_lines):
    p = write_lines("c.jsonl", ['{"id":"d1","contents":"hello"}'])
    assert list(load_corpus(p)) == [Document("d1", "hello")]


def test_corpus_empty(write_lines):
    assert list(load_corpus(write_lines("c.jsonl", []))) == []


def test_corpus_order_and_count(write_lines):
    lines = [json.dumps({"id": f"d{i}", "title": f"t{i}", "text": f"body {i}"}) for i in (3, 1, 2)]
    docs = list(load_corpus(write_lines("c.jsonl", lines)))
    assert len(docs) == len(lines)
    assert [d.doc_id for d in docs] == ["d3", "d1", "d2"]
    assert docs[0].title == "t3"


def test_corpus_malformed_line_number(write_lines):
    p = write_lines("c.jsonl", ['{"id":"d1","contents":"a"}', "{not json"])
    with pytest.raises(FormatError) as e:
        list(load_corpus(p))
    assert e.value.line == 2


def test_corpus_duplicate_id(write_lines):
    p = write_lines("c.jsonl", ['{"id":"d1","contents":"a"}', '{"id":"d1","contents":"b"}'])
    with pytest.raises(FormatError, match="duplicate"):
        list(load_corpus(p))


def test_topics_variants(write_lines):
    rec = {"topic_id": "7", "original": {"title": "a", "description": "b"}, "machine": {"title": "c"}}
    [topic] = load_topics(write_lines("t.jsonl", [json.dumps(rec)]))
    assert set(topic.variants) == {"original", "machine"}
    assert topic.variants["machine"].description == ""
    assert topic.variants["original"] == QueryText("a", "b")


def test_topics_missing_title_names_topic_and_variant(write_lines):
    rec = {"topic_id": "7", "human": {"description": "b"}}
    with pytest.raises(FormatError, match="7.*human"):
        load_topics(write_lines("t.jsonl", [json.dumps(rec)]))


def test_topics_count(write_lines):
    recs = [json.dumps({"topic_id": str(i), "original": {"title": f"q{i}"}}) for i in range(114)]
    assert len(load_topics(write_lines("t.jsonl", recs))) == 114


def test_build_query_text():
    topic = Topic("1", {"original": QueryText("a", "b")})
    assert build_query_text(topic, "original", "both") == "a b"
    assert build_query_text(topic, "original", "title") == "a"
    assert build_query_text(topic, "original", "description") == "b"
    with pytest.raises(KeyError):
        build_query_text(topic, "human", "title")


@given(st.text(min_size=1), st.text())
def test_build_query_text_both_is_concatenation(title, desc):
    topic = Topic("1", {"human": QueryText(title, desc)})
    assert build_query_text(topic, "human", "both") == title + " " + desc


def test_qrels_parse(write_lines):
    assert load_qrels(write_lines("q", ["1 0 d1 3"])) == {"1": {"d1": 3}}


@pytest.mark.parametrize("line", ["1 0 d1 x", "1 0 d1 1.5", "1 0 d1", "1 0 d1 -1"])
def test_qrels_rejects_malformed(write_lines, line):
    with pytest.raises(FormatError) as e:
        load_qrels(write_lines("q", ["1 0 d0 1", line]))
    assert e.value.line == 2


def test_qrels_preserves_triples(write_lines):
    rng = random.Random(3)
    triples = {(str(rng.randint(1, 5)), f"d{rng.randint(0, 50)}", rng.randint(0, 3)) for _ in range(200)}
    uniq = {}
    for t, d, g in triples:
        uniq.setdefault((t, d), g)
    p = write_lines("q", [f"{t} 0 {d} {g}" for (t, d), g in uniq.items()])
    qrels = load_qrels(p)
    got = {(t, d, g) for t, j in qrels.items() for d, g in j.items()}
    assert got == {(t, d, g) for (t, d), g in uniq.items()}


def test_run_rank_gap_rejected(write_lines):
    p = write_lines("r", ["1 Q0 a 1 2.0 x", "1 Q0 b 3 1.0 x"])
    with pytest.raises(FormatError, match="rank 3") as e:
        load_run(p)
    assert e.value.line == 2


def test_run_non_numeric_score(write_lines):
    with pytest.raises(FormatError) as e:
        load_run(write_lines("r", ["1 Q0 a 1 high x"]))
    assert e.value.line == 1


def test_run_increasing_score_rejected(write_lines):
    with pytest.raises(FormatError):
        load_run(write_lines("r", ["1 Q0 a 1 1.0 x", "1 Q0 b 2 2.0 x"]))


def test_run_round_trip_100(tmp_path):
    rng = random.Random(0)
    lines = []
    for topic in range(5):
        scores = sorted((round(rng.uniform(-5, 50), 6) for _ in range(20)), reverse=True)
        lines += [f"{topic} Q0 doc{topic}_{i} {i + 1} {s:.6f} tagA" for i, s in enumerate(scores)]
    src = tmp_path / "a.run"
    src.write_text("\n".join(lines) + "\n")
    dst = tmp_path / "b.run"
    write_run(load_run(src), dst)
    assert dst.read_bytes() == src.read_bytes()


def test_write_recomputes_ranks(tmp_path):
    run = Run({"1": [("b", 2.0), ("a", 1.0)]}, tag="t")
    write_run(run, tmp_path / "r")
    assert (tmp_path / "r").read_text() == "1 Q0 b 1 2.000000 t\n1 Q0 a 2 1.000000 t\n"


def test_run_rejects_duplicates_and_increasing_scores():
    with pytest.raises(ValueError):
        Run({"1": [("a", 1.0), ("a", 0.5)]})
    with pytest.raises(ValueError):
        Run({"1": [("a", 1.0), ("b", 1.5)]})


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.text("0123456789", min_size=1, max_size=3),
                       st.lists(st.integers(-10**8, 10**8), max_size=15), max_size=4))
def test_run_round_trip_property(tmp_path_factory, topics):
    run = Run(tag="prop")
    for t, scores in topics.items():
        run[t] = [(f"d{i}", s / 1e6) for i, s in enumerate(sorted(scores, reverse=True))]
    path = tmp_path_factory.mktemp("rt") / "run"
    write_run(run, path)
    back = load_run(path)
    # the TREC format cannot represent a topic with no hits
    assert set(back) == {t for t, hits in run.items() if hits}
    if len(back):
        assert back.tag == run.tag
    for t, hits in run.items():
        assert [d for d, _ in back.get(t, [])] == [d for d, _ in hits]
        assert np.allclose([s for _, s in back.get(t, [])], [s for _, s in hits], atol=5e-7)


def test_sparse_vectors(write_lines):
    p = write_lines("v", ['{"id":"d1","vector":{"car":10}}', '{"id":"d2","vector":{"bus":0.5,"x":0}}'])
    vecs = list(load_sparse_vectors(p))
    assert vecs == [("d1", {"car": 10.0}), ("d2", {"bus": 0.5})]


def test_sparse_negative_weight(write_lines):
    with pytest.raises(FormatError, match="negative"):
        list(load_sparse_vectors(write_lines("v", ['{"id":"d1","vector":{"car":-1}}'])))


def test_dense_dimension_mismatch(write_lines):
    p = write_lines("v", ['{"id":"a","vector":[1,2,3,4]}', '{"id":"b","vector":[1,2,3,4,5]}'])
    with pytest.raises(FormatError) as e:
        list(load_dense_vectors(p))
    assert e.value.line == 2


def test_dense_two_records(write_lines):
    p = write_lines("v", ['{"id":"a","vector":[1,2]}', '{"id":"b","vector":[3,4]}'])
    vecs = list(load_dense_vectors(p))
    assert [v[0] for v in vecs] == ["a", "b"]
    assert np.array_equal(vecs[1][1], [3.0, 4.0])
