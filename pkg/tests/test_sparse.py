import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clirkit.analysis import AnalyzerConfig
from clirkit.ingest import Document
from clirkit.sparse import (InvertedIndex, SparseVector, index_impact, index_text, quantize, search_bm25,
                            search_impact)
from oracles import bm25_exhaustive, impact_exhaustive, quantize_ref, random_corpus

BARE = AnalyzerConfig(language="en")


def tokens_index(docs):
    return index_text((Document(d, " ".join(toks)) for d, toks in docs), BARE)


def test_small_index_postings():
    idx = index_text([Document("0", "a b"), Document("1", "b")], BARE)
    assert idx.postings("a") == [(0, 1)]
    assert idx.postings("b") == [(0, 1), (1, 1)]
    assert idx.avg_doc_length == 1.5
    assert idx.doc_count == 2


def test_empty_index():
    idx = index_text([], BARE)
    assert idx.doc_count == 0
    assert search_bm25(idx, ["a"], 10).hits == []


def test_duplicate_doc_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        index_text([Document("x", "a"), Document("x", "b")], BARE)


def test_postings_complete_and_lengths_consistent():
    rng = random.Random(5)
    _, docs = random_corpus(rng, 100, vocab_size=50)
    idx = tokens_index(docs)
    total_tf = sum(tf for t in idx.vocab for _, tf in idx.postings(t))
    assert idx.doc_lengths.sum() == total_tf == sum(len(t) for _, t in docs)
    for i, (doc_id, toks) in enumerate(docs):
        counts = {}
        for t in toks:
            counts[t] = counts.get(t, 0) + 1
        for t, c in counts.items():
            assert (i, c) in idx.postings(t)
    for t in idx.vocab:
        docs_of_t = [d for d, _ in idx.postings(t)]
        assert docs_of_t == sorted(docs_of_t)


@pytest.mark.parametrize("w,scale,expected", [(10.0, 1, 10), (0.0, 100, 0), (0.126, 100, 13)])
def test_quantize(w, scale, expected):
    assert quantize(w, scale) == expected


def test_quantize_negative():
    with pytest.raises(ValueError):
        quantize(-0.1, 100)


@given(st.floats(0, 1e4), st.floats(0, 1e4), st.integers(1, 1000))
def test_quantize_monotone(a, b, scale):
    lo, hi = sorted((a, b))
    assert quantize(lo, scale) <= quantize(hi, scale)


def test_impact_ten_repetitions():
    idx = index_impact([("d1", {"car": 10.0})], scale=1)
    assert idx.postings("car") == [(0, 10)]
    assert idx.mode == "impact"


def test_impact_drops_zero_quantized():
    idx = index_impact([("d1", {"car": 0.004, "bus": 1.0})], scale=100)
    assert idx.postings("car") == []
    assert idx.postings("bus") == [(0, 100)]


def test_impact_tf_matches_quantization_oracle():
    rng = random.Random(2)
    vecs = [(f"d{i}", {f"t{rng.randint(0, 30)}": rng.uniform(0, 3) for _ in range(8)}) for i in range(50)]
    idx = index_impact(vecs, scale=100)
    for i, (doc_id, vec) in enumerate(vecs):
        for t, w in vec.items():
            q = quantize_ref(w, 100)
            assert ((i, q) in idx.postings(t)) == (q > 0)


def test_bm25_no_match():
    idx = index_text([Document("d", "a")], BARE)
    assert search_bm25(idx, ["zzz"], 5).hits == []


def test_bm25_single_doc_hand_value():
    idx = index_text([Document("d", "a")], BARE)
    [(doc, score)] = search_bm25(idx, ["a"], 5).hits
    assert doc == "d"
    # N = df = 1: idf = ln(1 + 0.5 / 1.5) = ln(4/3); len == avg so the tf part is 1 / 1.9
    assert score == pytest.approx(math.log(4 / 3) / 1.9, abs=1e-12)
    assert score == pytest.approx(0.15141161707988465, abs=1e-12)


def test_bm25_matches_exhaustive_small():
    rng = random.Random(1)
    vocab, docs = random_corpus(rng, 200, vocab_size=80)
    idx = tokens_index(docs)
    for _ in range(20):
        q = rng.choices(vocab[:60], k=rng.randint(1, 5))
        got = search_bm25(idx, q, 15).hits
        want = bm25_exhaustive(docs, q)[:15]
        assert [d for d, _ in got] == [d for d, _ in want]
        assert np.allclose([s for _, s in got], [s for _, s in want], rtol=0, atol=1e-9)


def test_bm25_fewer_than_k():
    idx = index_text([Document("a", "x"), Document("b", "y"), Document("c", "x y")], BARE)
    assert sorted(d for d, _ in search_bm25(idx, ["x"], 10).hits) == ["a", "c"]


def test_bm25_tie_break_by_doc_id():
    idx = index_text([Document("z", "a"), Document("m", "a"), Document("b", "a")], BARE)
    assert [d for d, _ in search_bm25(idx, ["a"], 3).hits] == ["b", "m", "z"]


def test_bm25_query_multiplicity():
    idx = index_text([Document("d1", "a b"), Document("d2", "b c"), Document("d3", "c")], BARE)
    once = dict(search_bm25(idx, ["a"], 5).hits)
    twice = dict(search_bm25(idx, ["a", "a"], 5).hits)
    assert twice["d1"] == pytest.approx(2 * once["d1"])


def test_bm25_rejects_impact_index():
    idx = index_impact([("d", {"a": 1.0})])
    with pytest.raises(ValueError):
        search_bm25(idx, ["a"], 1)


def test_impact_rejects_text_index():
    idx = index_text([Document("d", "a")], BARE)
    with pytest.raises(ValueError):
        search_impact(idx, {"a": 1.0}, 1)


def test_impact_example_score():
    idx = index_impact([("d", {"car": 10.0})], scale=1)
    assert search_impact(idx, {"car": 1.0}, 5, scale=1).hits == [("d", 10.0)]


def test_impact_disjoint():
    idx = index_impact([("d", {"car": 1.0})])
    assert search_impact(idx, {"bus": 1.0}, 5).hits == []


def _random_vectors(rng, n, vocab=40, terms=10):
    return [(f"d{i:04d}", {f"t{rng.randint(0, vocab - 1)}": round(rng.uniform(0, 2), 3) for _ in range(terms)})
            for i in range(n)]


def test_impact_equals_brute_force_inner_product():
    rng = random.Random(9)
    vecs = _random_vectors(rng, 100)
    idx = index_impact(vecs, scale=100)
    for _ in range(10):
        q = {f"t{rng.randint(0, 39)}": rng.uniform(0, 2) for _ in range(5)}
        assert search_impact(idx, q, 100).hits == [(d, float(s)) for d, s in impact_exhaustive(vecs, q, 100)]


def test_impact_unaffected_by_disjoint_document():
    rng = random.Random(4)
    vecs = _random_vectors(rng, 60)
    q = {"t1": 0.7, "t2": 1.3}
    before = search_impact(index_impact(vecs), q, 50).hits
    after = search_impact(index_impact(vecs + [("extra", {"zz": 5.0})]), q, 50).hits
    assert before == after


def test_search_is_deterministic():
    rng = random.Random(8)
    vocab, docs = random_corpus(rng, 300)
    idx = tokens_index(docs)
    q = vocab[:4]
    assert search_bm25(idx, q, 50).hits == search_bm25(idx, q, 50).hits


def test_snapshot_round_trip(tmp_path):
    rng = random.Random(6)
    vocab, docs = random_corpus(rng, 120)
    idx = index_text((Document(d, " ".join(t)) for d, t in docs), AnalyzerConfig.default("en"))
    idx.save(tmp_path / "i.npz")
    back = InvertedIndex.load(tmp_path / "i.npz")
    assert back.analyzer == idx.analyzer
    for q in (vocab[:3], vocab[10:12]):
        assert search_bm25(back, q, 30).hits == search_bm25(idx, q, 30).hits

    imp = index_impact(_random_vectors(rng, 30), scale=50)
    imp.save(tmp_path / "m.npz")
    back = InvertedIndex.load(tmp_path / "m.npz")
    assert back.scale == 50
    assert search_impact(back, {"t3": 1.0}, 10).hits == search_impact(imp, {"t3": 1.0}, 10).hits


def test_snapshot_rejects_foreign_file(tmp_path):
    np.savez(tmp_path / "x.npz", a=np.zeros(3))
    with pytest.raises(ValueError):
        InvertedIndex.load(tmp_path / "x.npz")


def test_sparse_vector_invariants():
    v = SparseVector({"a": 1.0, "b": 0.0})
    assert v == {"a": 1.0}
    with pytest.raises(ValueError):
        SparseVector({"a": -1.0})
    with pytest.raises(ValueError):
        SparseVector({"a": float("nan")})


def test_document_vector_views():
    idx = index_text([Document("d", "a a b")], BARE)
    assert idx.document_vector("d") == {"a": 2.0, "b": 1.0}
    imp = index_impact([("d", {"a": 0.5})], scale=100)
    assert imp.document_vector("d") == {"a": 0.5}
