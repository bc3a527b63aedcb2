"""Label x topic tables, label similarity, average-linkage clustering and label cross-checks."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import Document
from .hierarchy import TopicTree
from .weighting import project


class UnclassifiableError(ValueError):
    """The document has no in-vocabulary tokens, so it cannot be placed in a topic."""


@dataclass(frozen=True)
class LabelTopicTable:
    """Document counts per (label, topic); topics are numbered 1..k.

    ``col_totals`` are the full leaf sizes even when the rows are restricted
    to the most frequent labels.
    """

    labels: tuple[str, ...]
    counts: np.ndarray  # len(labels) x k, int
    col_totals: np.ndarray

    @property
    def n_topics(self) -> int:
        return self.counts.shape[1]

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def row(self, label: str) -> np.ndarray:
        return self.counts[self.labels.index(label)]

    def dominant_labels(self) -> list[str | None]:
        """Most frequent label in each topic (first in label order on ties)."""
        out = []
        for t in range(self.n_topics):
            col = self.counts[:, t]
            out.append(self.labels[int(np.argmax(col))] if col.size and col.max() > 0 else None)
        return out

    def off_dominant_mass(self) -> int:
        """Documents whose label is not their topic's dominant label."""
        if not self.labels:
            return 0
        return int(self.counts.sum() - self.counts.max(axis=0).sum())

    def restrict(self, top_labels: int | None) -> "LabelTopicTable":
        if top_labels is None or top_labels >= len(self.labels):
            return self
        return LabelTopicTable(self.labels[:top_labels], self.counts[:top_labels], self.col_totals)


def _labels_of(docs: Sequence[Document] | Sequence[str]) -> list[str]:
    return [d.label if isinstance(d, Document) else str(d) for d in docs]


def confusion(tree: TopicTree, docs: Sequence[Document] | Sequence[str],
              top_labels: int | None = None) -> LabelTopicTable:
    """Count documents per label and leaf topic.

    ``docs`` are the training documents (or their labels) in matrix column
    order. Rows are ordered by label frequency, then name, and cut to the
    ``top_labels`` most frequent labels when given.
    """
    labels = _labels_of(docs)
    if len(labels) != tree.n_docs:
        raise ValueError(f"{len(labels)} documents for a tree over {tree.n_docs}")
    freq = Counter(labels)
    order = tuple(sorted(freq, key=lambda lab: (-freq[lab], lab)))
    row_of = {lab: i for i, lab in enumerate(order)}
    counts = np.zeros((len(order), tree.n_topics), dtype=np.int64)
    topics = tree.assignments()
    for lab, t in zip(labels, topics):
        counts[row_of[lab], t - 1] += 1
    col_totals = np.array([tree.nodes[leaf].doc_count for leaf in tree.leaves], dtype=np.int64)
    return LabelTopicTable(order, counts, col_totals).restrict(top_labels)


def mixture(table: LabelTopicTable, label: str) -> np.ndarray:
    """Share of the label's documents falling in each topic."""
    row = table.row(label)
    total = row.sum()
    if total == 0:
        raise ValueError(f"label {label!r} has no documents")
    return row / total


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sa, sb = np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)
    if sa == 0 or sb == 0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    a, b = a / sa, b / sb  # scale-free, and keeps the products below clear of underflow
    aa, bb = float(a @ a), float(b @ b)
    # one square root of the product: exactly 1 for a == b, exactly symmetric
    return float(min(1.0, (a @ b) / np.sqrt(aa * bb)))


@dataclass(frozen=True)
class SimilarityMatrix:
    labels: tuple[str, ...]
    values: np.ndarray
    order: tuple[str, ...]  # labels by total off-diagonal similarity, descending

    def ordered(self) -> "SimilarityMatrix":
        idx = [self.labels.index(lab) for lab in self.order]
        return SimilarityMatrix(self.order, self.values[np.ix_(idx, idx)], self.order)


def similarity_ordering(labels: Sequence[str], values: np.ndarray) -> tuple[str, ...]:
    breadth = values.sum(axis=1) - np.diag(values)
    ranked = sorted(range(len(labels)), key=lambda i: (-breadth[i], i))
    return tuple(labels[i] for i in ranked)


def similarity_matrix(table: LabelTopicTable) -> SimilarityMatrix:
    """Pairwise cosine similarity of label topic mixtures."""
    mix = [mixture(table, lab) for lab in table.labels]
    L = len(mix)
    values = np.eye(L)
    for i in range(L):
        for j in range(i + 1, L):
            values[i, j] = values[j, i] = cosine(mix[i], mix[j])
    return SimilarityMatrix(table.labels, values, similarity_ordering(table.labels, values))


class Merge(NamedTuple):
    a: int
    b: int
    similarity: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Average-linkage merge history.

    Leaves are clusters ``0..L-1`` in label order; merge ``s`` creates
    cluster ``L + s``.
    """

    labels: tuple[str, ...]
    merges: tuple[Merge, ...]
    n_clusters: int
    flat_cut: dict[str, int]

    def cut(self, n_clusters: int) -> dict[str, int]:
        """Label -> cluster number (1..C, numbered by first label in label order)."""
        L = len(self.labels)
        if not 1 <= n_clusters <= max(L, 1):
            raise ValueError(f"number of clusters must be in 1..{L}, got {n_clusters}")
        members = {i: [i] for i in range(L)}
        for s, mg in enumerate(self.merges[:L - n_clusters]):
            members[L + s] = members.pop(mg.a) + members.pop(mg.b)
        groups = sorted((sorted(v) for v in members.values()), key=lambda g: g[0])
        return {self.labels[i]: c for c, g in enumerate(groups, start=1) for i in g}


def average_linkage(sim: SimilarityMatrix, n_clusters: int) -> Dendrogram:
    """UPGMA on similarities, run to completion; the flat cut keeps ``n_clusters`` clusters.

    Each step merges the two clusters with the highest mean pairwise
    similarity between their members. Ties go to the pair whose first
    members (in label order) are smallest, i.e. the lexicographically
    smallest pair of sorted member lists.
    """
    labels = tuple(sim.labels)
    L = len(labels)
    if not 1 <= n_clusters <= max(L, 1):
        raise ValueError(f"number of clusters must be in 1..{L}, got {n_clusters}")
    size = {i: 1 for i in range(L)}
    first = {i: i for i in range(L)}  # smallest member label index of each cluster
    # Sum of member-pair similarities between active clusters, keyed by (low id, high id).
    between = {(i, j): float(sim.values[i, j]) for i in range(L) for j in range(i + 1, L)}
    merges = []
    for step in range(L - 1):
        best, best_key = None, None
        for pair, total in between.items():
            x, y = sorted((first[pair[0]], first[pair[1]]))
            key = (-total / (size[pair[0]] * size[pair[1]]), x, y)
            if best_key is None or key < best_key:
                best, best_key = pair, key
        best_val = -best_key[0]
        a, b = best
        new = L + step
        size[new] = size.pop(a) + size.pop(b)
        first[new] = min(first.pop(a), first.pop(b))
        merges.append(Merge(a, b, best_val, size[new]))
        for other in list(size):
            if other == new:
                continue
            total = sum(between.pop((min(x, other), max(x, other))) for x in (a, b))
            between[(other, new)] = total
        del between[(a, b)]
    dendro = Dendrogram(labels, tuple(merges), n_clusters, {})
    return Dendrogram(labels, tuple(merges), n_clusters, dendro.cut(n_clusters))


class CrossCheck(NamedTuple):
    assigned_topic: int
    dominant_label: str | None
    mismatch: bool


def crosscheck(tree: TopicTree, table: LabelTopicTable, doc: Document) -> CrossCheck:
    """Place a tokenized document in the tree and compare its label to the topic's dominant label.

    Raises UnclassifiableError when none of its tokens is in the model vocabulary.
    """
    if tree.idf is None:
        raise ValueError("tree has no idf weights; fit it on a TF-IDF matrix")
    column = project(doc.tokens, tree.term_index, tree.idf)
    if column is None:
        raise UnclassifiableError(f"document {doc.id!r} has no in-vocabulary tokens")
    topic = tree.descend(column)
    dominant = table.dominant_labels()[topic - 1]
    return CrossCheck(topic, dominant, doc.label != dominant)
