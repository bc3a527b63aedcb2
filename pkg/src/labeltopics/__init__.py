"""Hierarchical rank-2 NMF topics for labeled short texts, and label/topic comparisons."""

from .analysis import (CrossCheck, Dendrogram, LabelTopicTable, SimilarityMatrix, UnclassifiableError,
                       average_linkage, confusion, cosine, crosscheck, mixture, similarity_matrix)
from .corpus import Document, StopRules, Vocabulary, prune_corpus, read_records, tokenize
from .factorization import FactorPair, nmf_rank2, nnls_rank2
from .hierarchy import TopicNode, TopicTree, build_tree, leaf_topics, split_node
from .model import ModelArchive, RunConfig, fit
from .weighting import SparseTermDocMatrix, count_matrix, tfidf

__version__ = "0.1.0"

__all__ = [
    "CrossCheck", "Dendrogram", "LabelTopicTable", "SimilarityMatrix", "UnclassifiableError", "average_linkage",
    "confusion", "cosine", "crosscheck", "mixture", "similarity_matrix",
    "Document", "StopRules", "Vocabulary", "prune_corpus", "read_records", "tokenize",
    "FactorPair", "nmf_rank2", "nnls_rank2",
    "TopicNode", "TopicTree", "build_tree", "leaf_topics", "split_node",
    "ModelArchive", "RunConfig", "fit",
    "SparseTermDocMatrix", "count_matrix", "tfidf",
]
