"""Acceptance criteria, one test each; outcomes are also listed at the end of the run."""

import csv
import json
import time

import numpy as np
import pytest

from labeltopics import synthetic
from labeltopics.analysis import SimilarityMatrix, average_linkage, confusion, cosine, similarity_ordering
from labeltopics.cli import main
from labeltopics.corpus import Document, Vocabulary, prune_corpus
from labeltopics.factorization import nmf_rank2, nnls_rank2, relative_residual
from labeltopics.hierarchy import build_tree
from labeltopics.model import ModelArchive, RunConfig, fit
from labeltopics.weighting import count_matrix, tfidf

from helpers import planted
from oracles import nnls_rank2_bruteforce, upgma_bruteforce


def test_01_nnls_oracle_equivalence(acceptance):
    rng = np.random.default_rng(2024)
    max_err = worst_excess = elapsed = 0.0
    for _ in range(1000):
        m = int(rng.integers(2, 51))
        W = rng.random((m, 2))
        a = rng.random(m)
        t0 = time.perf_counter()
        h = nnls_rank2(W, a)
        elapsed += time.perf_counter() - t0
        want, oracle_res = nnls_rank2_bruteforce(W, a)
        max_err = max(max_err, float(np.abs(h - want).max()))
        worst_excess = max(worst_excess, float(np.linalg.norm(W @ h - a)) - oracle_res)
    # "never above" up to rounding in evaluating the two residuals
    ok = max_err <= 1e-9 and worst_excess <= 1e-12 and elapsed < 5.0
    acceptance(1, "rank-2 NNLS matches brute-force oracle", ok,
               f"max coef err {max_err:.1e}, worst residual excess {worst_excess:.1e}, {elapsed:.2f}s")
    assert ok


def random_weighted(rng):
    m, n = int(rng.integers(2, 201)), int(rng.integers(2, 201))
    lists = []
    for _ in range(n):
        k = int(rng.integers(1, 15))
        lists.append(tuple(f"t{i}" for i in rng.integers(0, m, size=k)))
    docs = [Document(str(j), "x", "", t) for j, t in enumerate(lists)]
    return tfidf(count_matrix(docs, Vocabulary.from_documents(docs)))


def test_02_monotone_descent(acceptance):
    rng = np.random.default_rng(7)
    worst_rise, negative, runs = -np.inf, 0, 0
    for i in range(100):
        A = random_weighted(rng)
        if A.matrix.nnz == 0:  # every term in every document: nothing to factor
            A = random_weighted(rng)

        def check(_, W, H):
            nonlocal negative
            negative += int(np.any(W < 0) or np.any(H < 0))

        fp = nmf_rank2(A, seed=i, callback=check)
        runs += 1
        worst_rise = max(worst_rise, float(np.max(np.diff(fp.residual_history), initial=-np.inf)))
        negative += int(np.any(fp.W < 0) or np.any(fp.H < 0))
    ok = runs == 100 and worst_rise <= 1e-10 and negative == 0
    acceptance(2, "monotone residual descent, nonnegative factors", ok,
               f"{runs} matrices, largest step {worst_rise:.1e}, negative snapshots {negative}")
    assert ok


def test_03_exact_factorization_recovery(acceptance):
    residuals = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        m, n = int(rng.integers(10, 101)), int(rng.integers(10, 101))
        A = rng.random((m, 2)) @ rng.random((2, n))
        residuals.append(relative_residual(A, nmf_rank2(A, seed=seed)))
    hits = sum(r <= 1e-4 for r in residuals)
    ok = hits >= 95
    acceptance(3, "exact rank-2 products recovered (default settings)", ok,
               f"{hits}/100 at <= 1e-4, median {np.median(residuals):.1e}")
    assert ok


CASCADE = [["r", "x", "y"], ["x", "x", "y"], ["x", "x", "y", "y", "y"], ["y", "y", "z", "z", "z"],
           ["y", "z", "z", "z", "y"]]


def test_04_preprocessing_fixed_point(acceptance):
    docs = [Document(f"d{i}", "x", " ".join(t), tuple(t)) for i, t in enumerate(CASCADE)]
    kept, vocab = prune_corpus(docs, min_term_count=5, min_doc_len=3)
    expected = [("d2", ("y", "y", "y")), ("d3", ("y", "y", "z", "z", "z")), ("d4", ("y", "z", "z", "z", "y"))]
    again, vocab2 = prune_corpus(kept, min_term_count=5, min_doc_len=3)
    ok = ([(d.id, d.tokens) for d in kept] == expected and vocab.corpus_count == {"y": 7, "z": 6}
          and again == kept and vocab2 == vocab)
    acceptance(4, "cascade corpus reaches the hand-derived fixed point", ok)
    assert ok


def test_05_tfidf(acceptance):
    rng = np.random.default_rng(5)
    zero_ok, worst = True, 0.0
    for _ in range(50):
        n = int(rng.integers(2, 40))
        lists = [["common"] + [f"w{i}" for i in rng.integers(0, 30, size=int(rng.integers(0, 10)))]
                 for _ in range(n)]
        docs = [Document(str(j), "x", "", tuple(t)) for j, t in enumerate(lists)]
        counts = count_matrix(docs, Vocabulary.from_documents(docs))
        A = tfidf(counts)
        df = counts.doc_freq()
        everywhere = np.flatnonzero(df == counts.n)
        zero_ok &= "common" in [A.terms[i] for i in everywhere]
        zero_ok &= not A.matrix[everywhere].count_nonzero()
        norms = np.sqrt(np.asarray(A.matrix.multiply(A.matrix).sum(axis=0)).ravel())
        worst = max(worst, float(np.abs(norms[norms > 0] - 1).max(initial=0.0)))
    ok = bool(zero_ok) and worst <= 1e-9
    acceptance(5, "TF-IDF zero weight at df = n, unit-norm columns", ok, f"max norm error {worst:.1e}")
    assert ok


def test_06_planted_topic_recovery(acceptance):
    purities, dominant_ok = [], 0
    for seed in range(10):
        spec = synthetic.SyntheticSpec(topics=4, docs_per_topic=250, vocab_per_topic=50, noise=0.10, seed=seed)
        docs, _, A, topics = planted(spec)
        tree = build_tree(A, max_leaves=4, seed=seed, labels=[d.label for d in docs])
        assigned = tree.assignments()
        purity = sum(np.bincount(topics[assigned == t]).max() for t in range(1, tree.n_topics + 1)) / A.n
        purities.append(purity)
        table = confusion(tree, docs).counts
        # each label's largest count lies in a distinct topic, and each topic's largest count in a distinct label
        rows, cols = np.argmax(table, axis=1), np.argmax(table, axis=0)
        dominant_ok += table.shape == (4, 4) and len(set(rows)) == 4 and len(set(cols)) == 4 and \
            all(cols[rows[i]] == i for i in range(4))
    hits = sum(p >= 0.95 for p in purities)
    ok = hits >= 9 and dominant_ok >= 9
    acceptance(6, "planted 4-topic corpus recovered", ok,
               f"purity >= 0.95 on {hits}/10 seeds (min {min(purities):.3f}), diagonal-dominant {dominant_ok}/10")
    assert ok


def test_07_cosine_properties(acceptance):
    rng = np.random.default_rng(3)
    ok = True
    for _ in range(2000):
        k = int(rng.integers(1, 25))
        a, b = rng.random(k) * (rng.random(k) < 0.6), rng.random(k) * (rng.random(k) < 0.6)
        a[rng.integers(k)] += 0.1
        b[rng.integers(k)] += 0.1
        a, b = a / a.sum(), b / b.sum()
        c = cosine(a, b)
        ok &= 0.0 <= c <= 1.0 and c == cosine(b, a) and cosine(a, a) == 1.0
    hand = cosine([3, 4], [4, 3])
    ok &= abs(hand - 0.96) <= 1e-12
    acceptance(7, "cosine bounds, symmetry, self-similarity, (3,4)/(4,3) = 0.96", ok, f"hand case {hand!r}")
    assert ok


def _members(d, c, L):
    if c < L:
        return frozenset([c])
    mg = d.merges[c - L]
    return _members(d, mg.a, L) | _members(d, mg.b, L)


def test_08_upgma_oracle(acceptance):
    rng = np.random.default_rng(8)
    matched = 0
    for case in range(50):
        L = int(rng.integers(2, 11))
        # every other case uses quarter steps, which produce exact ties
        x = rng.random((L, L)) if case % 2 else rng.integers(0, 5, (L, L)) / 4
        S = np.triu(x, 1)
        S = S + S.T + np.eye(L)
        labels = tuple(f"l{i}" for i in range(L))
        C = int(rng.integers(1, L + 1))
        d = average_linkage(SimilarityMatrix(labels, S, similarity_ordering(labels, S)), C)
        want, partition = upgma_bruteforce(S, C)
        same = len(d.merges) == len(want)
        for mg, (a, b, s) in zip(d.merges, want):
            same &= {_members(d, mg.a, L), _members(d, mg.b, L)} == {a, b}
            same &= mg.similarity == s if case % 2 == 0 else abs(mg.similarity - s) <= 1e-12
        groups = {}
        for lab, c in d.flat_cut.items():
            groups.setdefault(c, set()).add(labels.index(lab))
        same &= sorted(map(sorted, groups.values())) == sorted(map(sorted, partition))
        matched += bool(same)
    ok = matched == 50
    acceptance(8, "average linkage matches brute-force oracle", ok, f"{matched}/50 matrices")
    assert ok


def test_09_crosscheck_self_consistency(acceptance):
    spec = synthetic.SyntheticSpec(topics=4, docs_per_topic=120, labels_per_topic=2, label_noise=0.15, seed=9)
    records, _ = synthetic.generate(spec)
    result = fit(records, RunConfig(max_leaves=6, seed=9))
    arc = result.archive
    trained = arc.tree.assignments()
    replay = [arc.crosscheck(r) for r in result.documents]
    same = sum(int(c.assigned_topic == t) for c, t in zip(replay, trained))
    mismatches = sum(c.mismatch for c in replay)
    expected = arc.table.off_dominant_mass()
    ok = same == len(trained) and mismatches == expected
    acceptance(9, "replayed training documents keep their topics; mismatches = off-dominant mass", ok,
               f"{same}/{len(trained)} reproduced, {mismatches} mismatches vs {expected}")
    assert ok


def test_10_determinism_and_round_trip(acceptance, tmp_path):
    corpus = tmp_path / "c.csv"
    assert main(["gen-synthetic", str(corpus), "--topics", "3", "--docs-per-topic", "80",
                 "--labels-per-topic", "2", "--label-noise", "0.1", "--seed", "7"]) == 0
    outs = [tmp_path / "a" / "out", tmp_path / "b" / "out"]
    for out in outs:
        assert main(["fit", str(corpus), "-o", str(out), "--seed", "7", "--max-leaves", "6",
                     "--dump-matrix"]) == 0
    names = sorted(p.name for p in outs[0].iterdir())
    differing = []
    for name in names:
        a, b = (outs[0] / name).read_bytes(), (outs[1] / name).read_bytes()
        if name == "model.json":  # records its own output directory
            a, b = json.loads(a), json.loads(b)
            a["config"].pop("output"), b["config"].pop("output")
        if a != b:
            differing.append(name)
    arc = ModelArchive.load(outs[0] / "model.json")
    arc.save(tmp_path / "resaved.json")
    back = ModelArchive.load(tmp_path / "resaved.json")
    with open(corpus, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    recs = [Document(r["id"], r["label"], r["text"]) for r in rows]
    same_cc = all(arc.crosscheck(r) == back.crosscheck(r) for r in recs)
    ok = not differing and same_cc and (tmp_path / "resaved.json").read_bytes() == (outs[0] / "model.json").read_bytes()
    acceptance(10, "identical fits are byte-identical; archive round-trip keeps crosscheck", ok,
               f"{len(names)} files compared, differing: {differing or 'none'}")
    assert ok


@pytest.mark.slow
def test_11_performance_envelope(acceptance):
    spec = synthetic.SyntheticSpec(topics=20, docs_per_topic=500, vocab_per_topic=250, seed=11)
    records, _ = synthetic.generate(spec)
    t0 = time.perf_counter()
    result = fit(records, RunConfig(max_leaves=20, seed=11))
    elapsed = time.perf_counter() - t0
    shape = result.matrix.matrix.shape
    ok = shape == (5000, 10_000) and result.archive.tree.n_topics == 20 and elapsed < 30.0
    acceptance(11, "10,000 documents x 5,000 terms, 20 leaves in under 30 s", ok,
               f"{shape[1]} docs, {shape[0]} terms, {elapsed:.1f}s")
    assert ok
