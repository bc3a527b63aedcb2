"""CSV / JSON / DOT writers for fitted models, and readers for the same files."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import Dendrogram, LabelTopicTable, Merge, SimilarityMatrix
from .corpus import Document
from .hierarchy import TopicNode, TopicTree

TOTAL = "(total)"


def _writer(f):
    return csv.writer(f, lineterminator="\n")


def _open_w(path: str | Path):
    return open(path, "w", encoding="utf-8", newline="")


def _rows(path: str | Path) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


# --- tree -------------------------------------------------------------------

def _num(x):
    return None if x is None else float(x)


def tree_to_json(tree: TopicTree, with_vectors: bool = False) -> dict:
    topic = tree.topic_index
    nodes = []
    for node in tree.walk():
        entry = {
            "id": node.node_id,
            "parent": node.parent,
            "children": list(node.children),
            "terminal": node.is_leaf,
            "topic": topic.get(node.node_id),
            "doc_count": node.doc_count,
            "split_score": _num(node.split_score),
            "top_terms": [[t, float(w)] for t, w in node.top_terms],
            "label_shares": {k: float(v) for k, v in node.label_shares.items()},
        }
        if with_vectors:
            nz = np.flatnonzero(node.term_vector)
            entry["term_vector"] = {"index": nz.tolist(), "value": [float(x) for x in node.term_vector[nz]]}
            entry["doc_cols"] = node.doc_cols.tolist()
        nodes.append(entry)
    return {"root": tree.root, "leaves": list(tree.leaves), "n_docs": tree.n_docs, "nodes": nodes}


def tree_from_json(d: dict, terms: Sequence[str], idf: np.ndarray) -> TopicTree:
    m = len(terms)
    nodes = {}
    for e in d["nodes"]:
        vec = np.zeros(m)
        vec[np.array(e["term_vector"]["index"], dtype=np.int64)] = e["term_vector"]["value"]
        nodes[e["id"]] = TopicNode(
            e["id"], e["parent"], np.array(e["doc_cols"], dtype=np.int64), vec, tuple(e["children"]),
            e["split_score"], [(t, w) for t, w in e["top_terms"]], dict(e["label_shares"]))
    return TopicTree(nodes, d["root"], list(d["leaves"]), tuple(terms), idf, d["n_docs"])


def write_tree_json(tree: TopicTree, path: str | Path, seed: int | None = None) -> Path:
    doc = {"seed": seed, **tree_to_json(tree)}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return Path(path)


def read_tree_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _dot_quote(*lines: str) -> str:
    return '"' + "\\n".join(s.replace("\\", "\\\\").replace('"', '\\"') for s in lines) + '"'

def write_tree_dot(tree: TopicTree, path: str | Path, seed: int | None = None, words: int = 5) -> Path:
    """Graphviz digraph; terminal nodes are boxes labelled with their topic number."""
    topic = tree.topic_index
    lines = ["digraph topics {"]
    if seed is not None:
        lines.append(f"  // seed={seed}")
    lines.append("  node [fontname=Helvetica];")
    for node in tree.walk():
        text = [node.node_id, f"{node.doc_count} docs"]
        if node.label_shares:
            lab, share = next(iter(node.label_shares.items()))
            text.append(f"{lab} {100 * share:.1f}%")
        text.append(" ".join(t for t, _ in node.top_terms[:words]))
        if node.is_leaf:
            text.insert(0, f"topic {topic[node.node_id]}")
            attrs = "shape=box, style=bold"
        else:
            attrs = "shape=ellipse"
        lines.append(f"  {_dot_quote(node.node_id)} [label={_dot_quote(*text)}, {attrs}];")
    for node in tree.walk():
        for child in node.children:
            lines.append(f"  {_dot_quote(node.node_id)} -> {_dot_quote(child)};")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def write_summary(tree: TopicTree, path: str | Path, seed: int | None = None, shares: int = 3) -> Path:
    """Plain-text per-node table: documents, leading label shares and top words."""
    topic = tree.topic_index
    out = []
    if seed is not None:
        out.append(f"seed: {seed}")
    out.append(f"documents: {tree.n_docs}  topics: {tree.n_topics}")
    for node in tree.walk():
        head = f"{node.node_id}"
        if node.is_leaf:
            head += f" [topic {topic[node.node_id]}]"
        if node.parent:
            head += f" <- {node.parent}"
        score = "" if node.split_score is None else f"  score={node.split_score:.3f}"
        out.append("")
        out.append(f"{head}  n={node.doc_count}{score}")
        top = list(node.label_shares.items())[:shares]
        if top:
            out.append("  labels: " + ", ".join(f"{lab} {100 * s:.1f}%" for lab, s in top))
        out.append("  words:  " + " ".join(t for t, _ in node.top_terms))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
    return Path(path)


# --- assignments ------------------------------------------------------------

def write_assignments(tree: TopicTree, docs: Sequence[Document], path: str | Path) -> Path:
    topics = tree.assignments()
    with _open_w(path) as f:
        w = _writer(f)
        w.writerow(["id", "label", "topic", "node"])
        for doc, t in zip(docs, topics):
            w.writerow([doc.id, doc.label, int(t), tree.leaves[t - 1]])
    return Path(path)


def read_assignments(path: str | Path) -> list[tuple[str, str, int, str]]:
    rows = _rows(path)
    return [(r[0], r[1], int(r[2]), r[3]) for r in rows[1:]]


# --- confusion --------------------------------------------------------------

def write_confusion(table: LabelTopicTable, path: str | Path) -> Path:
    k = table.n_topics
    with _open_w(path) as f:
        w = _writer(f)
        w.writerow(["label", *range(1, k + 1), "total"])
        for lab, row in zip(table.labels, table.counts):
            w.writerow([lab, *row.tolist(), int(row.sum())])
        w.writerow([TOTAL, *table.col_totals.tolist(), int(table.col_totals.sum())])
    return Path(path)


def read_confusion(path: str | Path) -> LabelTopicTable:
    rows = _rows(path)
    k = len(rows[0]) - 2
    body, total = rows[1:-1], rows[-1]
    if total[0] != TOTAL:
        raise ValueError(f"{path}: missing totals row")
    counts = np.array([[int(x) for x in r[1:k + 1]] for r in body], dtype=np.int64).reshape(len(body), k)
    return LabelTopicTable(tuple(r[0] for r in body), counts, np.array([int(x) for x in total[1:k + 1]], dtype=np.int64))


# --- similarity & clustering -------------------------------------------------

def write_similarity(sim: SimilarityMatrix, path: str | Path) -> Path:
    """Matrix in the similarity ordering (broadest-similarity labels first)."""
    s = sim.ordered()
    with _open_w(path) as f:
        w = _writer(f)
        w.writerow(["label", *s.labels])
        for lab, row in zip(s.labels, s.values):
            w.writerow([lab, *(repr(float(x)) for x in row)])
    return Path(path)


def read_similarity(path: str | Path) -> SimilarityMatrix:
    rows = _rows(path)
    labels = tuple(rows[0][1:])
    values = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=np.float64).reshape(len(labels), len(labels))
    return SimilarityMatrix(labels, values, labels)


def write_merges(dendro: Dendrogram, path: str | Path) -> Path:
    """One row per merge. Ids below the label count refer to rows of the flat-cut file."""
    with _open_w(path) as f:
        w = _writer(f)
        w.writerow(["step", "a", "b", "similarity"])
        for s, mg in enumerate(dendro.merges, start=1):
            w.writerow([s, mg.a, mg.b, repr(float(mg.similarity))])
    return Path(path)


def read_merges(path: str | Path) -> list[Merge]:
    out = []
    sizes: dict[int, int] = {}
    rows = _rows(path)[1:]
    n_labels = len(rows) + 1
    for step, a, b, s in rows:
        a, b = int(a), int(b)
        size = sizes.get(a, 1) + sizes.get(b, 1)
        sizes[n_labels + int(step) - 1] = size
        out.append(Merge(a, b, float(s), size))
    return out


def write_flat_cut(dendro: Dendrogram, path: str | Path) -> Path:
    """Rows in label order, so row i is leaf cluster i of the merge file."""
    with _open_w(path) as f:
        w = _writer(f)
        w.writerow(["label", "cluster"])
        for lab in dendro.labels:
            w.writerow([lab, dendro.flat_cut[lab]])
    return Path(path)


def read_flat_cut(path: str | Path) -> dict[str, int]:
    return {r[0]: int(r[1]) for r in _rows(path)[1:]}


def read_dendrogram(merges_path: str | Path, cut_path: str | Path) -> Dendrogram:
    cut = read_flat_cut(cut_path)
    return Dendrogram(tuple(cut), tuple(read_merges(merges_path)), len(set(cut.values())), cut)


# --- cross-check ------------------------------------------------------------

UNCLASSIFIABLE = "unclassifiable"


def write_crosscheck(rows: Iterable[tuple], path: str | Path) -> Path:
    """Rows are (id, label, topic or None, dominant label or None, mismatch or None)."""
    with _open_w(path) as f:
        w = _writer(f)
        w.writerow(["id", "label", "assigned_topic", "dominant_label", "mismatch"])
        for doc_id, label, topic, dominant, mismatch in rows:
            if topic is None:
                w.writerow([doc_id, label, "", "", UNCLASSIFIABLE])
            else:
                w.writerow([doc_id, label, topic, dominant or "", "true" if mismatch else "false"])
    return Path(path)


def read_crosscheck(path: str | Path) -> list[tuple]:
    out = []
    for doc_id, label, topic, dominant, flag in _rows(path)[1:]:
        if flag == UNCLASSIFIABLE:
            out.append((doc_id, label, None, None, None))
        else:
            out.append((doc_id, label, int(topic), dominant or None, flag == "true"))
    return out
