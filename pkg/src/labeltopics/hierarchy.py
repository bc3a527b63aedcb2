"""Binary topic trees grown by recursive rank-2 NMF splits.

Split scoring is a proxy for the NDCG-based score of the original
hierarchical rank-2 algorithm: ``|docs| * (1 - cos(w_left, w_right))``,
large for big nodes whose two halves have dissimilar term profiles.
"""

from __future__ import annotations

import itertools
import string
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .factorization import MAX_ITERS, TOL, DegenerateProblemError, nmf_rank2, solve_rank2_gram

MIN_LEAF_DOCS = 5
ROOT_ID = "root"


class SplitRejected(Exception):
    """A node cannot be split into two well-populated, distinct children."""


@dataclass
class TopicNode:
    node_id: str | None
    parent: str | None
    doc_cols: np.ndarray
    term_vector: np.ndarray
    children: tuple[str, ...] = ()
    split_score: float | None = None
    top_terms: list[tuple[str, float]] = field(default_factory=list)
    label_shares: dict[str, float] = field(default_factory=dict)

    @property
    def doc_count(self) -> int:
        return int(self.doc_cols.size)

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class TopicTree:
    nodes: dict[str, TopicNode]
    root: str
    leaves: list[str]
    terms: tuple[str, ...]
    idf: np.ndarray | None = None
    n_docs: int = 0

    @cached_property
    def term_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    @property
    def topic_index(self) -> dict[str, int]:
        return {leaf: i for i, leaf in enumerate(self.leaves, start=1)}

    @property
    def n_topics(self) -> int:
        return len(self.leaves)

    def leaf_of_topic(self, topic: int) -> TopicNode:
        return self.nodes[self.leaves[topic - 1]]

    def assignments(self) -> np.ndarray:
        """Topic number (1-based) of every training document column."""
        out = np.zeros(self.n_docs, dtype=np.int64)
        for t, leaf in enumerate(self.leaves, start=1):
            out[self.nodes[leaf].doc_cols] = t
        return out

    def children_basis(self, node_id: str) -> np.ndarray:
        left, right = self.nodes[node_id].children
        return np.column_stack([self.nodes[left].term_vector, self.nodes[right].term_vector])

    def descend(self, column) -> int:
        """Topic number reached by a weighted m x 1 column, going left on ties."""
        node = self.nodes[self.root]
        while node.children:
            coef = child_coefficients(self.children_basis(node.node_id), column)[:, 0]
            node = self.nodes[node.children[0] if coef[0] >= coef[1] else node.children[1]]
        return self.topic_index[node.node_id]

    def walk(self):
        """Nodes in pre-order, left child first."""
        stack = [self.root]
        while stack:
            node = self.nodes[stack.pop()]
            yield node
            stack.extend(reversed(node.children))


def child_coefficients(basis: np.ndarray, cols) -> np.ndarray:
    """Exact NNLS coefficients (2 x n) of sparse columns ``cols`` on an m x 2 basis."""
    cross = cols.T @ basis
    cross = np.asarray(cross.toarray() if sp.issparse(cross) else cross).T
    return solve_rank2_gram(basis.T @ basis, cross)


def top_terms(term_vector: np.ndarray, terms: Sequence[str], top_k: int = 10) -> list[tuple[str, float]]:
    nz = np.flatnonzero(term_vector > 0)
    ranked = sorted(nz, key=lambda i: (-term_vector[i], terms[i]))
    return [(terms[i], float(term_vector[i])) for i in ranked[:top_k]]


def label_shares(doc_cols: np.ndarray, labels: Sequence[str] | None) -> dict[str, float]:
    if labels is None or doc_cols.size == 0:
        return {}
    counts = Counter(labels[j] for j in doc_cols)
    total = doc_cols.size
    return {lab: c / total for lab, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))}


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def node_ids():
    """A, B, ..., Z, AA, AB, ..."""
    for size in itertools.count(1):
        for letters in itertools.product(string.ascii_uppercase, repeat=size):
            yield "".join(letters)


def _matrix(A):
    return A.matrix if hasattr(A, "matrix") else sp.csc_matrix(A)


def split_node(node: TopicNode, A, seed: int, min_leaf_docs: int = MIN_LEAF_DOCS,
               max_iters: int = MAX_ITERS, tol: float = TOL) -> tuple[TopicNode, TopicNode, float]:
    """Split a node's documents in two with rank-2 NMF.

    Each document goes to the child with the larger NNLS coefficient
    against the two (unit) term vectors, left on ties. Children come back
    without ids. Raises SplitRejected if either child gets fewer than
    ``min_leaf_docs`` documents or the factorization degenerates.
    """
    if node.doc_count < 2 * min_leaf_docs:
        raise SplitRejected(f"{node.doc_count} documents, need {2 * min_leaf_docs}")
    mat = _matrix(A)
    sub = mat[:, node.doc_cols]
    if np.count_nonzero(np.diff(sub.tocsr().indptr)) < 2:
        raise SplitRejected("fewer than two active terms")
    try:
        fp = nmf_rank2(sub, seed=seed, max_iters=max_iters, tol=tol)
    except DegenerateProblemError as exc:
        raise SplitRejected(str(exc)) from None
    basis = fp.W
    if not np.all(np.any(basis > 0, axis=0)):
        raise SplitRejected("a topic collapsed to zero")
    coef = child_coefficients(basis, sub)
    go_left = coef[0] >= coef[1]
    left_cols, right_cols = node.doc_cols[go_left], node.doc_cols[~go_left]
    if min(left_cols.size, right_cols.size) < min_leaf_docs:
        raise SplitRejected(f"unbalanced split {left_cols.size}/{right_cols.size}")
    cos = float(np.clip(basis[:, 0] @ basis[:, 1], 0.0, 1.0))
    score = node.doc_count * (1.0 - cos)
    left = TopicNode(None, node.node_id, left_cols, basis[:, 0].copy())
    right = TopicNode(None, node.node_id, right_cols, basis[:, 1].copy())
    return left, right, score


def build_tree(A, max_leaves: int = 20, seed: int = 0, labels: Sequence[str] | None = None,
               min_leaf_docs: int = MIN_LEAF_DOCS, score_threshold: float = 0.0, top_k: int = 10,
               max_iters: int = MAX_ITERS, tol: float = TOL) -> TopicTree:
    """Grow a topic tree greedily until ``max_leaves`` leaves or nothing splits.

    Every leaf gets a trial split; the best-scoring pending split (earlier
    node on ties) is committed and its two children are trial-split in turn.
    Splits scoring at or below ``score_threshold`` are ignored when the
    threshold is positive. Split ``i`` (0 = root) uses seed ``(seed, i)``.
    """
    if max_leaves < 1:
        raise ValueError("max_leaves must be >= 1")
    mat = _matrix(A)
    terms = tuple(A.terms) if hasattr(A, "terms") else tuple(str(i) for i in range(mat.shape[0]))
    idf = getattr(A, "idf", None)
    m, n = mat.shape
    if labels is not None and len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} documents")

    ids = node_ids()
    all_cols = np.arange(n)
    centroid = _unit(np.asarray(mat.sum(axis=1)).ravel())
    root = TopicNode(ROOT_ID, None, all_cols, centroid)
    nodes = {ROOT_ID: root}
    serial = {ROOT_ID: 0}
    leaves = [ROOT_ID]
    pending: dict[str, tuple[TopicNode, TopicNode, float]] = {}

    def finish(node: TopicNode) -> None:
        node.top_terms = top_terms(node.term_vector, terms, top_k)
        node.label_shares = label_shares(node.doc_cols, labels)

    def trial(node: TopicNode) -> None:
        try:
            split = split_node(node, mat, seed=_split_seed(seed, serial[node.node_id]),
                               min_leaf_docs=min_leaf_docs, max_iters=max_iters, tol=tol)
        except SplitRejected:
            return
        if score_threshold > 0 and split[2] <= score_threshold:
            return
        pending[node.node_id] = split
        node.split_score = split[2]

    finish(root)
    trial(root)
    while len(leaves) < max_leaves and pending:
        best = max(pending, key=lambda nid: (pending[nid][2], -serial[nid]))
        left, right, score = pending.pop(best)
        parent = nodes[best]
        left = replace(left, node_id=next(ids))
        right = replace(right, node_id=next(ids))
        for child in (left, right):
            serial[child.node_id] = len(serial)
            nodes[child.node_id] = child
            finish(child)
        parent.children = (left.node_id, right.node_id)
        parent.split_score = score
        pos = leaves.index(best)
        leaves[pos:pos + 1] = [left.node_id, right.node_id]
        trial(left)
        trial(right)

    return TopicTree(nodes, ROOT_ID, leaves, terms, idf, n)


def _split_seed(seed: int, serial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, serial])


@dataclass(frozen=True)
class LeafTopic:
    topic: int
    node_id: str
    top_terms: list[tuple[str, float]]
    doc_count: int
    label_shares: dict[str, float]


def leaf_topics(tree: TopicTree, top_k: int = 10, labels: Sequence[str] | None = None) -> list[LeafTopic]:
    """Flat topic model from the tree's leaves, numbered left to right."""
    out = []
    for t, leaf in enumerate(tree.leaves, start=1):
        node = tree.nodes[leaf]
        shares = label_shares(node.doc_cols, labels) if labels is not None else node.label_shares
        out.append(LeafTopic(t, leaf, top_terms(node.term_vector, tree.terms, top_k), node.doc_count, shares))
    return out
