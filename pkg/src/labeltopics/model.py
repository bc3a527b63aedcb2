"""End-to-end fitting and the persisted model archive."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis, corpus, factorization, hierarchy, weighting
from .analysis import LabelTopicTable
from .corpus import Document, StopRules, Vocabulary
from .exports import tree_from_json, tree_to_json
from .hierarchy import TopicTree

log = logging.getLogger(__name__)

FORMAT = "labeltopics-model"
VERSION = 1


class EmptyCorpusError(ValueError):
    """Nothing survived preprocessing."""


@dataclass
class RunConfig:
    input: str = ""
    id_col: str = "id"
    label_col: str = "label"
    text_col: str = "text"
    delimiter: str | None = None
    stopwords: str | None = None
    extra_stopwords: list[str] = field(default_factory=list)
    stem: bool = True
    min_term_count: int = 5
    min_doc_len: int = 3
    max_leaves: int = 20
    min_leaf_docs: int = hierarchy.MIN_LEAF_DOCS
    score_threshold: float = 0.0
    top_k: int = 10
    top_labels: int = 40
    confusion_labels: int = 30
    clusters: int = 6
    seed: int = 0
    tol: float = factorization.TOL
    max_iters: int = factorization.MAX_ITERS
    label_filter: list[str] | None = None
    output: str = "out"

    def validate(self) -> None:
        for name in ("min_term_count", "min_doc_len", "max_leaves", "min_leaf_docs", "top_k",
                     "top_labels", "confusion_labels", "clusters", "max_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.tol < 0 or self.score_threshold < 0:
            raise ValueError("tol and score_threshold must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def stop_rules(self) -> StopRules:
        words = corpus.read_word_list(self.stopwords) if self.stopwords else corpus.default_stop_words()
        for path in self.extra_stopwords:
            words = words | corpus.read_word_list(path)
        return StopRules(frozenset(words))


@dataclass
class ModelArchive:
    config: RunConfig
    stop_words: frozenset[str]
    vocabulary: Vocabulary
    tree: TopicTree
    table: LabelTopicTable
    doc_ids: tuple[str, ...] = ()
    version: int = VERSION

    @property
    def rules(self) -> StopRules:
        return StopRules(self.stop_words)

    def tokenize(self, doc: Document) -> Document:
        return doc.with_tokens(corpus.tokenize(doc.raw_text, self.rules, self.config.stem))

    def crosscheck(self, doc: Document) -> analysis.CrossCheck:
        """Cross-check a raw (untokenized) record against the fitted model."""
        return analysis.crosscheck(self.tree, self.table, self.tokenize(doc))

    def to_json(self) -> dict:
        voc = self.vocabulary
        return {
            "format": FORMAT,
            "version": self.version,
            "seed": self.config.seed,
            "config": asdict(self.config),
            "tokenizer": {"stem": self.config.stem, "stop_words": sorted(self.stop_words)},
            "vocabulary": {
                "terms": list(voc.terms),
                "corpus_count": [voc.corpus_count[t] for t in voc.terms],
                "doc_freq": [voc.doc_freq[t] for t in voc.terms],
            },
            "idf": [float(x) for x in self.tree.idf],
            "doc_ids": list(self.doc_ids),
            "tree": tree_to_json(self.tree, with_vectors=True),
            "table": {
                "labels": list(self.table.labels),
                "counts": self.table.counts.tolist(),
                "col_totals": self.table.col_totals.tolist(),
            },
        }

    @classmethod
    def from_json(cls, d: dict) -> "ModelArchive":
        if d.get("format") != FORMAT:
            raise ValueError("not a labeltopics model archive")
        if d.get("version") != VERSION:
            raise ValueError(f"unsupported archive version {d.get('version')}")
        v = d["vocabulary"]
        vocab = Vocabulary(tuple(v["terms"]), dict(zip(v["terms"], v["corpus_count"])),
                           dict(zip(v["terms"], v["doc_freq"])))
        tree = tree_from_json(d["tree"], vocab.terms, np.array(d["idf"], dtype=np.float64))
        t = d["table"]
        table = LabelTopicTable(tuple(t["labels"]), np.array(t["counts"], dtype=np.int64).reshape(len(t["labels"]), -1),
                                np.array(t["col_totals"], dtype=np.int64))
        return cls(RunConfig.from_dict(d["config"]), frozenset(d["tokenizer"]["stop_words"]), vocab, tree,
                   table, tuple(d.get("doc_ids", ())), d["version"])

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "ModelArchive":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


@dataclass
class FitResult:
    archive: ModelArchive
    documents: list[Document]
    matrix: weighting.SparseTermDocMatrix


def filter_labels(docs: Sequence[Document], wanted: Sequence[str] | None) -> list[Document]:
    if not wanted:
        return list(docs)
    present = {d.label for d in docs}
    for lab in sorted(set(wanted) - present):
        log.warning("label %r in the filter does not occur in the input", lab)
    keep = set(wanted)
    return [d for d in docs if d.label in keep]


def fit(records: Sequence[Document], config: RunConfig) -> FitResult:
    """Tokenize, prune, weight and grow the topic tree for raw records."""
    config.validate()
    rules = config.stop_rules()
    docs = filter_labels(records, config.label_filter)
    docs = corpus.tokenize_documents(docs, rules, config.stem)
    docs, vocab = corpus.prune_corpus(docs, config.min_term_count, config.min_doc_len)
    if not docs:
        raise EmptyCorpusError("no documents left after preprocessing")
    log.info("%d documents, %d terms after pruning", len(docs), len(vocab))
    A = weighting.tfidf(weighting.count_matrix(docs, vocab))
    labels = [d.label for d in docs]
    tree = hierarchy.build_tree(A, max_leaves=config.max_leaves, seed=config.seed, labels=labels,
                                min_leaf_docs=config.min_leaf_docs, score_threshold=config.score_threshold,
                                top_k=config.top_k, max_iters=config.max_iters, tol=config.tol)
    log.info("tree with %d leaves", tree.n_topics)
    table = analysis.confusion(tree, docs)
    archive = ModelArchive(config, rules.stop_words, vocab, tree, table, tuple(d.id for d in docs))
    return FitResult(archive, docs, A)
