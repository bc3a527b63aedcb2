import numpy as np
import pytest
import scipy.optimize
import scipy.sparse as sp

from labeltopics.factorization import (DegenerateProblemError, FactorPair, nmf_rank2, nnls_rank2,
                                       relative_residual, solve_rank2_gram)

from oracles import nnls_rank2_bruteforce

I2 = np.eye(2)


def test_identity_basis_nonnegative_target():
    np.testing.assert_array_equal(nnls_rank2(I2, [3.0, -0.0]), [3.0, 0.0])


def test_identity_basis_clips_negative_coordinate():
    a = np.array([3.0, -1.0])  # unconstrained solution is (3, -1)
    h = nnls_rank2(I2, a)
    np.testing.assert_array_equal(h, [3.0, 0.0])
    assert np.linalg.norm(I2 @ h - a) == pytest.approx(1.0)


def test_tie_goes_to_first_column():
    # both single-column fits leave the same residual
    W = np.array([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(nnls_rank2(W, [-1.0, -1.0]), [0.0, 0.0])
    W = np.array([[1.0, 1.0], [1.0, 1.0]])  # parallel columns: singular Gram matrix
    np.testing.assert_array_equal(nnls_rank2(W, [2.0, 2.0]), [2.0, 0.0])


def test_zero_column_is_ignored():
    W = np.array([[0.0, 2.0], [0.0, 0.0]])
    np.testing.assert_allclose(nnls_rank2(W, [4.0, 1.0]), [0.0, 2.0])


def test_both_columns_zero_is_degenerate():
    with pytest.raises(DegenerateProblemError):
        nnls_rank2(np.zeros((3, 2)), np.ones(3))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        nnls_rank2(np.ones((3, 2)), np.ones(4))


def test_matches_bruteforce_and_scipy():
    rng = np.random.default_rng(11)
    for _ in range(300):
        m = int(rng.integers(2, 20))
        W = rng.random((m, 2))
        a = rng.random(m) - 0.3 * rng.random() * rng.random(m)
        h = nnls_rank2(W, a)
        want, res = nnls_rank2_bruteforce(W, a)
        np.testing.assert_allclose(h, want, atol=1e-9)
        ref, _ = scipy.optimize.nnls(W, a)  # its reported rnorm is unreliable in some versions
        assert np.linalg.norm(W @ h - a) <= np.linalg.norm(W @ ref - a) + 1e-12
        assert res <= np.linalg.norm(W @ ref - a) + 1e-12
        assert np.all(h >= 0)


def test_gram_solver_handles_many_right_hand_sides():
    rng = np.random.default_rng(2)
    W = rng.random((6, 2))
    B = rng.random((6, 40)) - 0.2
    H = solve_rank2_gram(W.T @ W, W.T @ B)
    for j in range(B.shape[1]):
        np.testing.assert_allclose(H[:, j], nnls_rank2(W, B[:, j]), atol=1e-12)


def test_outer_product_is_fit_exactly():
    rng = np.random.default_rng(0)
    for seed in range(20):
        u, v = rng.random(30), rng.random(25)
        fp = nmf_rank2(np.outer(u, v), seed=seed)
        assert relative_residual(np.outer(u, v), fp) <= 1e-6


def test_constructed_rank_2_product_is_recovered():
    rng = np.random.default_rng(4)
    A = rng.random((40, 2)) @ rng.random((2, 60))
    fp = nmf_rank2(A, seed=1, max_iters=2000, tol=1e-12)
    assert relative_residual(A, fp) <= 1e-4


def block_diagonal(rng, terms=(20, 15), docs=(30, 25)):
    A = np.zeros((sum(terms), sum(docs)))
    A[:terms[0], :docs[0]] = rng.random((terms[0], docs[0]))
    A[terms[0]:, docs[0]:] = rng.random((terms[1], docs[1]))
    return A, docs[0]


def test_block_diagonal_documents_split_by_topic():
    rng = np.random.default_rng(5)
    A, cut = block_diagonal(rng)
    for seed in range(10):
        fp = nmf_rank2(sp.csc_matrix(A), seed=seed)
        first = np.argmax(fp.H, axis=0)
        assert len(set(first[:cut])) == 1 and len(set(first[cut:])) == 1
        assert first[0] != first[cut]
        # each document puts (almost) no weight on the other topic
        H = fp.H / fp.H.sum(axis=0)
        assert np.all(H.max(axis=0) > 0.99)


def test_residual_history_monotone_and_factors_nonnegative():
    seen = []

    def check(it, W, H):
        seen.append(it)
        assert np.all(W >= 0) and np.all(H >= 0)

    A = sp.random(80, 60, density=0.1, random_state=3, format="csc")
    fp = nmf_rank2(A, seed=7, max_iters=100, tol=0, callback=check)
    hist = np.array(fp.residual_history)
    assert np.all(np.diff(hist) <= 1e-10)
    assert seen == list(range(1, fp.n_iter + 2))
    np.testing.assert_allclose(np.linalg.norm(fp.W, axis=0), 1.0)
    assert fp.residual == pytest.approx(relative_residual(A, fp) * np.linalg.norm(A.toarray()), rel=1e-9)


def test_deterministic_given_seed():
    A = sp.random(50, 40, density=0.2, random_state=1, format="csc")
    a, b = nmf_rank2(A, seed=3), nmf_rank2(A, seed=3)
    assert a.W.tobytes() == b.W.tobytes() and a.H.tobytes() == b.H.tobytes()
    assert a.residual_history == b.residual_history


def test_sparse_and_dense_agree():
    A = sp.random(30, 20, density=0.3, random_state=2, format="csc")
    s, d = nmf_rank2(A, seed=0), nmf_rank2(A.toarray(), seed=0)
    np.testing.assert_allclose(s.W, d.W, atol=1e-12)
    np.testing.assert_allclose(s.H, d.H, atol=1e-12)


def test_zero_rows_get_zero_weight():
    A = np.zeros((6, 8))
    A[[0, 2, 5]] = np.random.default_rng(0).random((3, 8))
    fp = nmf_rank2(A, seed=0)
    assert not fp.W[[1, 3, 4]].any()


def test_all_zero_matrix_is_degenerate():
    with pytest.raises(DegenerateProblemError):
        nmf_rank2(sp.csc_matrix((4, 5)))


def test_empty_matrix_rejected():
    with pytest.raises(ValueError):
        nmf_rank2(np.zeros((0, 3)))


def test_collapsed_column_is_rescued_once():
    # a single-row matrix leaves one W column with nothing to explain
    fp = nmf_rank2(np.array([[1.0, 2.0, 3.0]]), seed=0)
    assert isinstance(fp, FactorPair)
    assert fp.rescued
    assert np.linalg.norm(fp.W @ fp.H - [[1.0, 2.0, 3.0]]) <= 1e-9
    assert np.all(np.diff(fp.residual_history) <= 1e-10)


def test_rescue_on_rank_one_data_keeps_descent():
    rng = np.random.default_rng(9)
    rescued = 0
    for seed in range(60):
        A = np.outer(rng.random(8), rng.random(12))
        fp = nmf_rank2(A, seed=seed)
        rescued += fp.rescued
        assert np.all(np.diff(fp.residual_history) <= 1e-10)
        assert relative_residual(A, fp) <= 1e-6
    assert rescued > 0
