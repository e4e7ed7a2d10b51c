"""Command line interface.

    clirkit index         build an index snapshot from a corpus or vector file
    clirkit search        run topics against a snapshot and write a TREC run
    clirkit fuse          reciprocal rank fusion of run files
    clirkit candidates    dump (topic, doc, text) pairs for an external reranker
    clirkit rerank        reorder a run with an external score file
    clirkit eval          nDCG / recall / MAP report
    clirkit significance  pairwise paired t-tests with Bonferroni correction

Any flag can also come from an INI file passed with ``--config``: a
``[clirkit]`` section holding ``version = 1`` plus one section per command,
e.g. ``[search]`` with ``k = 100``.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import LANGUAGES, STEMMERS, AnalyzerConfig, read_stopwords
from .dense import FlatIndex, build_flat
from .evaluation import GAINS, evaluate, format_report, pairwise_significance
from .fusion import RrfParams, rrf
from .ingest import (FIELDS, VARIANTS, FormatError, build_query_text, document_text, load_corpus,
                     load_dense_vectors, load_qrels, load_run, load_sparse_vectors, load_topics,
                     write_run, Run)
from .prf import RocchioParams, prf_search
from .rerank import candidate_pairs, load_score_oracle, rerank, write_candidates
from .sparse import (DEFAULT_B, DEFAULT_K1, DEFAULT_SCALE, IMPACT_MODE, TEXT_MODE, InvertedIndex,
                     index_impact, index_text)

log = logging.getLogger("clirkit")

CONFIG_VERSION = "1"
MODES = ("dt-bm25", "dt-impact", "qt-bm25", "qt-impact", "dense")
# which topic variants each pipeline mode accepts
MODE_VARIANTS = {
    "dt-bm25": ("original",),
    "dt-impact": ("original",),
    "qt-bm25": ("human", "machine"),
    "qt-impact": ("human", "machine"),
    "dense": VARIANTS,
}


class UsageError(Exception):
    pass


def condition_tag(mode: str, variant: str, fields: str, prf: bool) -> str:
    return ".".join([mode, variant, fields] + (["prf"] if prf else []))


def load_index(path: str | Path):
    import numpy as np

    with np.load(path, allow_pickle=False) as z:
        kind = InvertedIndex if "post_docs" in z else FlatIndex
    return kind.load(path)


def cmd_index(args) -> None:
    _require(args, "input", "output")
    if args.kind == "text":
        config = AnalyzerConfig.default(args.language)
        overrides = {}
        if args.stemmer:
            overrides["stemmer"] = args.stemmer
        if args.stopwords:
            overrides["stopwords"] = read_stopwords(args.stopwords)
        if args.no_stopwords:
            overrides["stopwords"] = frozenset()
        if overrides:
            config = AnalyzerConfig(**{**config.to_dict(), **overrides})
        index = index_text(load_corpus(args.input), config)
    elif args.kind == "impact":
        index = index_impact(load_sparse_vectors(args.input), args.scale)
    else:
        index = build_flat(load_dense_vectors(args.input))
    index.save(args.output)
    log.info("indexed %d documents into %s", len(index), args.output)


def _check_condition(args, index) -> None:
    if args.variant not in MODE_VARIANTS[args.mode]:
        raise UsageError(f"mode {args.mode} takes variant(s) {', '.join(MODE_VARIANTS[args.mode])}, "
                         f"not {args.variant!r}")
    expected = {"bm25": TEXT_MODE, "impact": IMPACT_MODE}
    kind = args.mode.split("-")[-1]
    if kind == "dense":
        if not isinstance(index, FlatIndex):
            raise UsageError("dense mode needs a flat (dense) index")
        return
    if not isinstance(index, InvertedIndex) or index.mode != expected[kind]:
        raise UsageError(f"mode {args.mode} needs a {expected[kind]} index")
    if args.mode == "dt-bm25" and index.analyzer.language != "en":
        raise UsageError("dt-bm25 searches a translated (English) index; this one is "
                         f"{index.analyzer.language!r}")


def _queries(args, index):
    """(topic_id, query) pairs in the representation the index expects."""
    from .analysis import analyze

    if args.mode.endswith("bm25"):
        _require(args, "topics")
        for topic in load_topics(args.topics):
            if args.variant not in topic.variants:
                log.warning("topic %s has no %s variant; skipped", topic.topic_id, args.variant)
                continue
            yield topic.topic_id, analyze(build_query_text(topic, args.variant, args.fields), index.analyzer)
    else:
        _require(args, "query_vectors")
        loader = load_dense_vectors if args.mode == "dense" else load_sparse_vectors
        yield from loader(args.query_vectors)


def cmd_search(args) -> None:
    _require(args, "index", "output")
    index = load_index(args.index)
    _check_condition(args, index)
    params = {}
    if args.mode.endswith("bm25"):
        params = {"k1": args.k1, "b": args.b}
    elif args.mode.endswith("impact") and args.scale is not None:
        params = {"scale": args.scale}
    rocchio = None
    if args.prf:
        rocchio = RocchioParams(args.prf_depth, args.prf_alpha, args.prf_beta, args.prf_gamma, args.prf_top_terms)
    tag = args.tag or condition_tag(args.mode, args.variant, args.fields, args.prf)
    run = Run(tag=tag)
    for topic_id, query in _queries(args, index):
        if rocchio is None:
            ranked = index.search(query, args.k, topic_id=topic_id, **params)
        else:
            ranked = prf_search(index, query, args.k, rocchio, topic_id=topic_id, **params)
        run.topics[topic_id] = ranked.hits
    write_run(run, args.output)
    log.info("wrote %d topics to %s", len(run), args.output)


def cmd_fuse(args) -> None:
    _require(args, "runs", "output")
    runs = [load_run(p) for p in args.runs]
    params = RrfParams(args.k_rrf, args.input_depth, args.output_depth)
    write_run(rrf(runs, params, tag=args.tag), args.output)


def cmd_candidates(args) -> None:
    _require(args, "run", "corpus", "output")
    run = load_run(args.run)
    wanted = {d for hits in run.topics.values() for d, _ in hits[:args.depth]}
    texts = {doc.doc_id: document_text(doc) for doc in load_corpus(args.corpus) if doc.doc_id in wanted}
    missing = wanted - texts.keys()
    if missing:
        raise UsageError(f"{len(missing)} run documents are not in the corpus, e.g. {sorted(missing)[0]!r}")
    n = write_candidates(candidate_pairs(run, args.depth, texts.__getitem__), args.output)
    log.info("wrote %d candidate pairs to %s", n, args.output)


def cmd_rerank(args) -> None:
    _require(args, "run", "scores", "output")
    run = load_run(args.run)
    oracle = load_score_oracle(args.scores)
    if oracle.duplicates:
        log.warning("%d duplicate (topic, doc) pairs in %s; later lines kept", oracle.duplicates, args.scores)
    out = rerank(run, oracle, args.depth)
    write_run(out, args.output, tag=args.tag or f"{run.tag}.rerank")


def cmd_eval(args) -> None:
    _require(args, "run", "qrels")
    scores = evaluate(load_run(args.run), load_qrels(args.qrels), args.ndcg_k, args.recall_k, args.gain)
    _emit(format_report(scores, per_topic=not args.summary), args.output)


def cmd_significance(args) -> None:
    _require(args, "runs", "qrels")
    if len(args.runs) < 2:
        raise UsageError("significance testing needs at least two runs")
    qrels = load_qrels(args.qrels)
    per_run = {}
    metric_name = None
    for path in args.runs:
        metrics = evaluate(load_run(path), qrels, args.ndcg_k, args.recall_k, args.gain).metrics()
        metric_name = next(name for name in metrics if name.startswith(args.metric))
        per_run[str(path)] = metrics[metric_name]
    lines = ["run_a\trun_b\tmetric\tmean_a\tmean_b\tt\tp\tp_bonferroni\tsignificant"]
    for c in pairwise_significance(per_run):
        lines.append(f"{c.name_a}\t{c.name_b}\t{metric_name}\t{c.mean_a:.4f}\t{c.mean_b:.4f}\t"
                     f"{c.t:.4f}\t{c.p:.6g}\t{c.p_adjusted:.6g}\t{'yes' if c.p_adjusted <= args.alpha else 'no'}")
    _emit("\n".join(lines) + "\n", args.output)


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _require(args, *names) -> None:
    missing = [n for n in names if getattr(args, n, None) in (None, [], "")]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clirkit", description="Multi-stage cross-lingual retrieval toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="INI file supplying defaults for any flag")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build an index snapshot")
    p.add_argument("--input", help="corpus JSONL (text) or vector JSONL (impact, dense)")
    p.add_argument("--kind", choices=("text", "impact", "dense"), default="text")
    p.add_argument("--language", choices=LANGUAGES, default="en")
    p.add_argument("--stemmer", choices=STEMMERS, help="override the language's default stemmer")
    p.add_argument("--stopwords", help="stopword file replacing the bundled list")
    p.add_argument("--no-stopwords", action="store_true")
    p.add_argument("--scale", type=int, default=DEFAULT_SCALE, help="impact quantization scale")
    p.add_argument("--output", help="snapshot path (.npz)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="retrieve for every topic and write a run")
    p.add_argument("--index")
    p.add_argument("--mode", choices=MODES, default="qt-bm25")
    p.add_argument("--topics", help="topics JSONL (bm25 modes)")
    p.add_argument("--query-vectors", help="query vector JSONL keyed by topic id (impact, dense modes)")
    p.add_argument("--variant", choices=VARIANTS, default="machine")
    p.add_argument("--fields", choices=FIELDS, default="title")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--k1", type=float, default=DEFAULT_K1)
    p.add_argument("--b", type=float, default=DEFAULT_B)
    p.add_argument("--scale", type=int, help="query quantization scale (default: the index's)")
    p.add_argument("--prf", action="store_true", help="apply Rocchio feedback")
    p.add_argument("--prf-depth", type=int, default=RocchioParams.depth)
    p.add_argument("--prf-alpha", type=float, default=RocchioParams.alpha)
    p.add_argument("--prf-beta", type=float, default=RocchioParams.beta)
    p.add_argument("--prf-gamma", type=float, default=RocchioParams.gamma)
    p.add_argument("--prf-top-terms", type=int, default=RocchioParams.top_terms)
    p.add_argument("--tag", help="run tag (default: mode.variant.fields[.prf])")
    p.add_argument("--output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("fuse", help="reciprocal rank fusion")
    p.add_argument("--runs", nargs="+")
    p.add_argument("--k-rrf", type=float, default=RrfParams.k_rrf)
    p.add_argument("--input-depth", type=int, default=RrfParams.input_depth)
    p.add_argument("--output-depth", type=int, default=RrfParams.output_depth)
    p.add_argument("--tag", default="rrf")
    p.add_argument("--output")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("candidates", help="write topic/doc/text TSV for an external scorer")
    p.add_argument("--run")
    p.add_argument("--corpus")
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--output")
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("rerank", help="reorder a run by external scores")
    p.add_argument("--run")
    p.add_argument("--scores", help="TSV of topic_id doc_id score")
    p.add_argument("--depth", type=int, default=1000)
    p.add_argument("--tag")
    p.add_argument("--output")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="nDCG@k, recall@k and MAP")
    p.add_argument("--run")
    p.add_argument("--qrels")
    p.add_argument("--ndcg-k", type=int, default=20)
    p.add_argument("--recall-k", type=int, default=1000)
    p.add_argument("--gain", choices=GAINS, default="linear")
    p.add_argument("--summary", action="store_true", help="print only the 'all' rows")
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("significance", help="pairwise paired t-tests, Bonferroni corrected")
    p.add_argument("--runs", nargs="+")
    p.add_argument("--qrels")
    p.add_argument("--metric", choices=("ndcg", "recall", "map"), default="ndcg")
    p.add_argument("--ndcg-k", type=int, default=20)
    p.add_argument("--recall-k", type=int, default=1000)
    p.add_argument("--gain", choices=GAINS, default="linear")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output")
    p.set_defaults(func=cmd_significance)
    return parser


def _apply_config(parser: argparse.ArgumentParser, path: str, command: str) -> None:
    cfg = configparser.ConfigParser()
    if not cfg.read(path, encoding="utf-8"):
        raise UsageError(f"cannot read config file {path}")
    version = cfg.get("clirkit", "version", fallback=None)
    if version != CONFIG_VERSION:
        raise UsageError(f"config {path}: expected [clirkit] version = {CONFIG_VERSION}, got {version!r}")
    if not cfg.has_section(command):
        return
    subparser = parser._subparsers._group_actions[0].choices[command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in cfg.items(command):
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            raise UsageError(f"config {path}: unknown option {key!r} for {command}")
        if isinstance(action, argparse._StoreTrueAction):
            value = cfg.getboolean(command, key)
        elif action.nargs == "+":
            value = [action.type(v) if action.type else v for v in raw.split()]
        else:
            value = action.type(raw) if action.type else raw
            if action.choices and value not in action.choices:
                raise UsageError(f"config {path}: {key} must be one of {', '.join(map(str, action.choices))}")
        defaults[dest] = value
    subparser.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            _apply_config(parser, args.config, args.command)
            args = parser.parse_args(argv)
        args.func(args)
    except (UsageError, FormatError, ValueError, KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"clirkit {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
