"""Compare the numba and numpy scoring kernels.

    python benchmarks/bench_kernels.py --docs 200000 --queries 50

Each kernel is timed on identical inputs after one warm-up call, which also
triggers numba compilation. Backend agreement is covered by tests/test_kernels.py.
"""
import argparse
import time

import numpy as np

from clirkit import kernels


def synthetic_postings(rng, n_docs, n_terms, avg_df):
    dfs = np.clip(rng.zipf(1.3, size=n_terms) * avg_df // 4, 1, n_docs)
    ptr = np.zeros(n_terms + 1, dtype=np.int64)
    np.cumsum(dfs, out=ptr[1:])
    docs = np.concatenate([np.sort(rng.choice(n_docs, size=df, replace=False)) for df in dfs]).astype(np.int32)
    tfs = rng.integers(1, 10, size=docs.size).astype(np.int64)
    return ptr, docs, tfs


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=100_000)
    ap.add_argument("--terms", type=int, default=5_000)
    ap.add_argument("--avg-df", type=int, default=2_000)
    ap.add_argument("--queries", type=int, default=50)
    ap.add_argument("--dim", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if kernels.accumulate_weighted_numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    ptr, docs, tfs = synthetic_postings(rng, args.docs, args.terms, args.avg_df)
    norm = rng.uniform(0.3, 2.0, size=args.docs)
    queries = [(rng.choice(args.terms, size=5, replace=False).astype(np.int64), rng.uniform(0.1, 3, size=5))
               for _ in range(args.queries)]
    print(f"{docs.size:,} postings over {args.docs:,} docs, {args.queries} queries")

    def bm25(fn):
        def go():
            for terms, weights in queries:
                s, m = np.zeros(args.docs), np.zeros(args.docs, np.bool_)
                fn(ptr, docs, tfs, terms, weights, norm, s, m)
        return go

    def impact(fn):
        def go():
            for terms, weights in queries:
                s, m = np.zeros(args.docs, np.int64), np.zeros(args.docs, np.bool_)
                fn(ptr, docs, tfs, terms, (weights * 100).astype(np.int64), s, m)
        return go

    matrix = rng.normal(size=(args.docs, args.dim)).astype(np.float32)
    dense_q = rng.normal(size=(args.queries, args.dim))

    def dense(fn):
        def go():
            out = np.empty(args.docs)
            for q in dense_q:
                fn(matrix, q, out)
        return go

    cases = [
        ("bm25 accumulate", bm25, kernels.accumulate_weighted_numba, kernels._accumulate_weighted_numpy),
        ("impact accumulate", impact, kernels.accumulate_impact_numba, kernels._accumulate_impact_numpy),
        ("dense scan", dense, kernels.dense_scores_numba, kernels._dense_scores_numpy),
    ]
    print(f"{'kernel':<20}{'numba (s)':>12}{'numpy (s)':>12}{'speedup':>10}")
    for name, make, fast, slow in cases:
        make(fast)()  # compile
        t_fast = best_of(make(fast), args.repeat)
        t_slow = best_of(make(slow), args.repeat)
        print(f"{name:<20}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
