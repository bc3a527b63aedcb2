"""Command-line entry point: fit, analyze, crosscheck, gen-synthetic."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import analysis, corpus, exports, synthetic, weighting
from .model import EmptyCorpusError, ModelArchive, RunConfig, fit

log = logging.getLogger("labeltopics")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _columns(p: argparse.ArgumentParser) -> None:
    p.add_argument("--id-col", default="id")
    p.add_argument("--label-col", default="label")
    p.add_argument("--text-col", default="text")
    p.add_argument("--delimiter", help="field separator (default: tab for .tsv, else comma)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="labeltopics", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = RunConfig()
    p = sub.add_parser("fit", help="preprocess records and fit a hierarchical topic model")
    p.add_argument("input", help="CSV/TSV with id, label and text columns")
    p.add_argument("-o", "--output", default=d.output, help="output directory")
    _columns(p)
    p.add_argument("--stopwords", help="replace the built-in stop-word list (one word per line)")
    p.add_argument("--extra-stopwords", action="append", default=[], metavar="PATH",
                   help="add words from this file to the stop-word list (repeatable)")
    p.add_argument("--no-stem", dest="stem", action="store_false", help="disable Porter stemming")
    p.add_argument("--min-term-count", type=int, default=d.min_term_count)
    p.add_argument("--min-doc-len", type=int, default=d.min_doc_len)
    p.add_argument("--max-leaves", type=int, default=d.max_leaves)
    p.add_argument("--min-leaf-docs", type=int, default=d.min_leaf_docs)
    p.add_argument("--score-threshold", type=float, default=d.score_threshold,
                   help="only commit splits scoring above this (0 disables)")
    p.add_argument("--top-k", type=int, default=d.top_k, help="keywords per topic")
    p.add_argument("--top-labels", type=int, default=d.top_labels, help="labels kept for clustering")
    p.add_argument("--confusion-labels", type=int, default=d.confusion_labels,
                   help="labels shown in confusion.csv")
    p.add_argument("--clusters", type=int, default=d.clusters, help="default C for analyze")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--label", dest="label_filter", action="append", metavar="LABEL",
                   help="fit only records with this label (repeatable)")
    p.add_argument("--dump-matrix", action="store_true", help="also write the weighted matrix as coordinates")

    p = sub.add_parser("analyze", help="label similarity and average-linkage clusters from a model")
    p.add_argument("model", help="model.json written by fit")
    p.add_argument("-C", "--clusters", type=int, help="number of clusters (default: value stored in the model)")
    p.add_argument("--top-labels", type=int, help="most frequent labels to include (default: from the model)")
    p.add_argument("-o", "--output", help="output directory (default: the model's directory)")

    p = sub.add_parser("crosscheck", help="flag records whose label disagrees with their topic")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="output CSV (default: crosscheck.csv next to the model)")
    _columns(p)

    p = sub.add_parser("gen-synthetic", help="write a planted-topic corpus")
    p.add_argument("output", help="CSV path; parameters go to <output>.json")
    s = synthetic.SyntheticSpec()
    p.add_argument("--topics", type=int, default=s.topics)
    p.add_argument("--docs-per-topic", type=int, default=s.docs_per_topic)
    p.add_argument("--vocab-per-topic", type=int, default=s.vocab_per_topic)
    p.add_argument("--noise", type=float, default=s.noise)
    p.add_argument("--min-len", type=int, default=s.min_len)
    p.add_argument("--max-len", type=int, default=s.max_len)
    p.add_argument("--labels-per-topic", type=int, default=s.labels_per_topic)
    p.add_argument("--label-noise", type=float, default=s.label_noise)
    p.add_argument("--filler-rate", type=float, default=s.filler_rate)
    p.add_argument("--seed", type=int, default=s.seed)
    return parser


def _read(path, args) -> list[corpus.Document]:
    try:
        return corpus.read_records(path, args.id_col, args.label_col, args.text_col, args.delimiter)
    except OSError as exc:
        raise DataError(str(exc)) from None
    except KeyError as exc:
        raise DataError(exc.args[0]) from None


def cmd_fit(args) -> int:
    config = RunConfig(
        input=args.input, id_col=args.id_col, label_col=args.label_col, text_col=args.text_col,
        delimiter=args.delimiter, stopwords=args.stopwords, extra_stopwords=args.extra_stopwords,
        stem=args.stem, min_term_count=args.min_term_count, min_doc_len=args.min_doc_len,
        max_leaves=args.max_leaves, min_leaf_docs=args.min_leaf_docs, score_threshold=args.score_threshold,
        top_k=args.top_k, top_labels=args.top_labels, confusion_labels=args.confusion_labels,
        clusters=args.clusters, seed=args.seed, tol=args.tol, max_iters=args.max_iters,
        label_filter=sorted(set(args.label_filter)) if args.label_filter else None, output=args.output)
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    records = _read(args.input, args)
    try:
        result = fit(records, config)
    except EmptyCorpusError as exc:
        raise DataError(str(exc)) from None
    except OSError as exc:
        raise DataError(str(exc)) from None

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    arc = result.archive
    arc.save(out / "model.json")
    exports.write_tree_json(arc.tree, out / "tree.json", seed=config.seed)
    exports.write_tree_dot(arc.tree, out / "tree.dot", seed=config.seed)
    exports.write_summary(arc.tree, out / "summary.txt", seed=config.seed)
    exports.write_assignments(arc.tree, result.documents, out / "assignments.csv")
    exports.write_confusion(arc.table.restrict(config.confusion_labels), out / "confusion.csv")
    if args.dump_matrix:
        weighting.dump_coordinates(result.matrix, out / "matrix.coo")
    print(f"{len(result.documents)} documents, {len(arc.vocabulary)} terms, "
          f"{arc.tree.n_topics} topics -> {out}")
    return 0


def _load(path) -> ModelArchive:
    try:
        return ModelArchive.load(path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read model {path}: {exc}") from None


def cmd_analyze(args) -> int:
    arc = _load(args.model)
    n_clusters = args.clusters if args.clusters is not None else arc.config.clusters
    top = args.top_labels if args.top_labels is not None else arc.config.top_labels
    if top < 1:
        raise UsageError("--top-labels must be >= 1")
    table = arc.table.restrict(top)
    if not 1 <= n_clusters <= len(table.labels):
        raise UsageError(f"--clusters must be between 1 and {len(table.labels)} (number of labels)")
    sim = analysis.similarity_matrix(table)
    dendro = analysis.average_linkage(sim, n_clusters)
    out = Path(args.output) if args.output else Path(args.model).parent
    out.mkdir(parents=True, exist_ok=True)
    exports.write_similarity(sim, out / "similarity.csv")
    exports.write_merges(dendro, out / "merges.csv")
    exports.write_flat_cut(dendro, out / "clusters.csv")
    print(f"{len(table.labels)} labels in {n_clusters} clusters -> {out}")
    return 0


def cmd_crosscheck(args) -> int:
    arc = _load(args.model)
    records = _read(args.input, args)
    rows = []
    flagged = unclassifiable = 0
    for rec in records:
        try:
            res = arc.crosscheck(rec)
        except analysis.UnclassifiableError:
            rows.append((rec.id, rec.label, None, None, None))
            unclassifiable += 1
            continue
        flagged += res.mismatch
        rows.append((rec.id, rec.label, res.assigned_topic, res.dominant_label, res.mismatch))
    out = Path(args.output) if args.output else Path(args.model).parent / "crosscheck.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    exports.write_crosscheck(rows, out)
    print(f"{len(rows)} records, {flagged} mismatches, {unclassifiable} unclassifiable -> {out}")
    return 0


def cmd_gen_synthetic(args) -> int:
    spec = synthetic.SyntheticSpec(
        topics=args.topics, docs_per_topic=args.docs_per_topic, vocab_per_topic=args.vocab_per_topic,
        noise=args.noise, min_len=args.min_len, max_len=args.max_len, labels_per_topic=args.labels_per_topic,
        label_noise=args.label_noise, filler_rate=args.filler_rate, seed=args.seed)
    if min(spec.topics, spec.docs_per_topic, spec.vocab_per_topic, spec.labels_per_topic, spec.min_len) < 1 \
            or spec.max_len < spec.min_len:
        raise UsageError("sizes must be >= 1 and --max-len >= --min-len")
    docs, _ = synthetic.generate(spec)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    synthetic.write_corpus(docs, args.output, spec)
    print(f"{len(docs)} documents -> {args.output}")
    return 0


COMMANDS = {"fit": cmd_fit, "analyze": cmd_analyze, "crosscheck": cmd_crosscheck,
            "gen-synthetic": cmd_gen_synthetic}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"labeltopics {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"labeltopics {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
