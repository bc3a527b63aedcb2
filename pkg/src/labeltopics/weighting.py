"""Sparse term-document matrices and TF-IDF weighting."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Document, Vocabulary


@dataclass(frozen=True)
class SparseTermDocMatrix:
    """Terms x documents matrix in CSC layout (one column per document)."""

    matrix: sp.csc_matrix
    terms: tuple[str, ...]
    doc_ids: tuple[str, ...]
    weighted: bool = False
    idf: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def doc_freq(self) -> np.ndarray:
        return np.diff(self.matrix.tocsr().indptr)


def _canonical(mat: sp.spmatrix) -> sp.csc_matrix:
    mat = sp.csc_matrix(mat, dtype=np.float64, copy=True)
    mat.sum_duplicates()
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def count_matrix(docs: Sequence[Document], vocab: Vocabulary) -> SparseTermDocMatrix:
    rows, cols = [], []
    for j, doc in enumerate(docs):
        for tok in doc.tokens:
            try:
                rows.append(vocab.index[tok])
            except KeyError:
                raise ValueError(f"token {tok!r} of document {doc.id!r} is not in the vocabulary") from None
            cols.append(j)
    data = np.ones(len(rows))
    mat = sp.coo_matrix((data, (rows, cols)), shape=(len(vocab), len(docs)))
    return SparseTermDocMatrix(_canonical(mat), tuple(vocab.terms), tuple(d.id for d in docs))


def inverse_document_frequency(counts: SparseTermDocMatrix) -> np.ndarray:
    n = counts.n
    df = counts.doc_freq().astype(np.float64)
    idf = np.zeros(counts.m)
    present = df > 0
    idf[present] = np.log(n / df[present])
    return idf


def weight_columns(mat: sp.csc_matrix, idf: np.ndarray) -> sp.csc_matrix:
    """Scale rows by ``idf`` and every nonzero column to unit Euclidean norm.

    Works column by column on the canonical CSC data, so a single column run
    through here gets bit-identical values to the same column inside a corpus.
    """
    mat = _canonical(mat)
    data = mat.data * idf[mat.indices]
    col_of = np.repeat(np.arange(mat.shape[1]), np.diff(mat.indptr))
    norms = np.sqrt(np.bincount(col_of, weights=data * data, minlength=mat.shape[1]))
    nz = norms > 0
    scale = np.zeros_like(norms)
    scale[nz] = 1.0 / norms[nz]
    out = sp.csc_matrix((data * scale[col_of], mat.indices.copy(), mat.indptr.copy()), shape=mat.shape)
    out.eliminate_zeros()
    return out


def tfidf(counts: SparseTermDocMatrix) -> SparseTermDocMatrix:
    """tf * ln(n / df), then unit-L2 columns; terms in every document get weight 0."""
    if counts.weighted:
        raise ValueError("matrix is already TF-IDF weighted")
    if counts.n < 1:
        raise ValueError("tfidf needs at least one document")
    idf = inverse_document_frequency(counts)
    return SparseTermDocMatrix(weight_columns(counts.matrix, idf), counts.terms, counts.doc_ids,
                               weighted=True, idf=idf)


def project(tokens: Sequence[str], vocab_index: dict[str, int], idf: np.ndarray) -> sp.csc_matrix | None:
    """Weighted m x 1 column for a new document; out-of-vocabulary tokens are dropped.

    Returns None when no token is in the vocabulary.
    """
    rows = [vocab_index[t] for t in tokens if t in vocab_index]
    if not rows:
        return None
    col = sp.coo_matrix((np.ones(len(rows)), (rows, np.zeros(len(rows), dtype=int))),
                        shape=(len(idf), 1))
    return weight_columns(col, idf)


def dump_coordinates(A: SparseTermDocMatrix, path: str | Path) -> Path:
    """Write ``row col value`` lines plus a ``<path>.terms`` sidecar (one term per line)."""
    path = Path(path)
    coo = A.matrix.tocoo()
    order = np.lexsort((coo.row, coo.col))
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"% {A.m} {A.n} {coo.nnz} weighted={int(A.weighted)}\n")
        for k in order:
            f.write(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}\n")
    sidecar = path.with_name(path.name + ".terms")
    sidecar.write_text("".join(t + "\n" for t in A.terms), encoding="utf-8")
    return path


def load_coordinates(path: str | Path) -> tuple[sp.csc_matrix, tuple[str, ...], bool]:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        head = f.readline().split()
        m, n, weighted = int(head[1]), int(head[2]), head[4] == "weighted=1"
        rows, cols, vals = [], [], []
        for line in f:
            r, c, v = line.split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    terms = tuple(path.with_name(path.name + ".terms").read_text(encoding="utf-8").splitlines())
    mat = sp.csc_matrix((vals, (rows, cols)), shape=(m, n))
    return _canonical(mat), terms, weighted
