"""Multi-stage cross-lingual retrieval: sparse, impact and dense first stages,
Rocchio feedback, external-score reranking, reciprocal rank fusion and
TREC-style evaluation."""

__version__ = "0.1.0"

from .analysis import AnalyzerConfig, analyze
from .dense import FlatIndex, build_flat, search_dense
from .evaluation import average_precision, bonferroni, evaluate, ndcg_at_k, paired_t_test, recall_at_k
from .fusion import RrfParams, early_fusion, late_fusion, rrf
from .ingest import (Document, FormatError, RankedList, Run, Topic, build_query_text, load_corpus,
                     load_dense_vectors, load_qrels, load_run, load_sparse_vectors, load_topics, write_run)
from .prf import RocchioParams, prf_search, rocchio_dense, rocchio_sparse
from .rerank import ScoreOracle, load_score_oracle, rerank
from .sparse import InvertedIndex, SparseVector, index_impact, index_text, quantize, search_bm25, search_impact

__all__ = [
    "AnalyzerConfig", "analyze",
    "FlatIndex", "build_flat", "search_dense",
    "average_precision", "bonferroni", "evaluate", "ndcg_at_k", "paired_t_test", "recall_at_k",
    "RrfParams", "early_fusion", "late_fusion", "rrf",
    "Document", "FormatError", "RankedList", "Run", "Topic", "build_query_text", "load_corpus",
    "load_dense_vectors", "load_qrels", "load_run", "load_sparse_vectors", "load_topics", "write_run",
    "RocchioParams", "prf_search", "rocchio_dense", "rocchio_sparse",
    "ScoreOracle", "load_score_oracle", "rerank",
    "InvertedIndex", "SparseVector", "index_impact", "index_text", "quantize", "search_bm25", "search_impact",
]
