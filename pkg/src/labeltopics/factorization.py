"""Rank-2 nonnegative matrix factorization by alternating exact NNLS.

With only two columns, ``min_{h >= 0} ||W h - a||`` has three possible
supports ({0, 1}, {0}, {1}; the empty support never beats a single column),
so every NNLS subproblem is solved exactly and in closed form. Solving all
right-hand sides at once only needs the 2x2 Gram matrix ``W^T W`` and the
cross products ``W^T A``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp


class DegenerateProblemError(ValueError):
    """Raised when a rank-2 subproblem has no usable column."""


@dataclass(frozen=True)
class FactorPair:
    W: np.ndarray  # m x 2, unit-norm columns
    H: np.ndarray  # 2 x n
    residual_history: tuple[float, ...]
    n_iter: int
    rescued: bool = False

    @property
    def residual(self) -> float:
        return self.residual_history[-1]


def solve_rank2_gram(G: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Exact NNLS for many right-hand sides from ``G = W^T W`` (2x2) and ``C = W^T B`` (2 x n)."""
    g00, g01, g11 = float(G[0, 0]), float(G[0, 1]), float(G[1, 1])
    if g00 <= 0.0 and g11 <= 0.0:
        raise DegenerateProblemError("both columns of the rank-2 basis are zero")
    C = np.asarray(C, dtype=np.float64).reshape(2, -1)
    c0, c1 = C[0], C[1]
    out = np.zeros_like(C)

    # Best single-column fits; a column with zero norm contributes nothing.
    h0 = np.maximum(c0 / g00, 0.0) if g00 > 0 else np.zeros_like(c0)
    h1 = np.maximum(c1 / g11, 0.0) if g11 > 0 else np.zeros_like(c1)
    # Residual reduction of each single-column fit is h_c * c_c (= c_c^2 / g_cc when positive).
    use0 = h0 * c0 >= h1 * c1
    out[0] = np.where(use0, h0, 0.0)
    out[1] = np.where(use0, 0.0, h1)

    det = g00 * g11 - g01 * g01
    if g00 > 0 and g11 > 0 and det > 1e-12 * g00 * g11:
        u0 = (g11 * c0 - g01 * c1) / det
        u1 = (g00 * c1 - g01 * c0) / det
        feasible = (u0 >= 0) & (u1 >= 0)
        out[0] = np.where(feasible, u0, out[0])
        out[1] = np.where(feasible, u1, out[1])
    return out


def nnls_rank2(W: np.ndarray, a: np.ndarray) -> np.ndarray:
    """argmin_{h >= 0} ||W h - a||_2 for an m x 2 matrix ``W``.

    Ties between the two single-column solutions go to column 0.
    """
    W = np.asarray(W, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64).ravel()
    if W.ndim != 2 or W.shape[1] != 2 or W.shape[0] != a.shape[0]:
        raise ValueError(f"shape mismatch: W {W.shape}, a {a.shape}")
    return solve_rank2_gram(W.T @ W, W.T @ a)[:, 0]


def _as_matrix(A) -> sp.csr_matrix | np.ndarray:
    if hasattr(A, "matrix") and hasattr(A, "weighted"):
        A = A.matrix
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=np.float64)
    return np.asarray(A, dtype=np.float64)


def _squared_norm(A) -> float:
    data = A.data if sp.issparse(A) else A
    return float(np.sum(data * data))


def _column_squared_norms(A) -> np.ndarray:
    if sp.issparse(A):
        return np.asarray(A.multiply(A).sum(axis=0)).ravel()
    return np.sum(A * A, axis=0)


def _h_step(A, W):
    return solve_rank2_gram(W.T @ W, np.asarray(A.T @ W).T)


MAX_ITERS = 50
# Relative projected-gradient tolerance. Exact rank-2 products need about 1e-6
# to come out at 1e-4 relative residual; looser values stop too early.
TOL = 1e-6
# Extrapolation weight: starting value, growth after an accepted step, cap.
BETA_START, BETA_GROWTH, BETA_MAX = 0.5, 1.2, 1.0


def nmf_rank2(A, seed: int = 0, max_iters: int = MAX_ITERS, tol: float = TOL,
              callback: Callable[[int, np.ndarray, np.ndarray], None] | None = None) -> FactorPair:
    """Fit ``A ~ W H`` with ``W`` m x 2 and ``H`` 2 x n, both nonnegative.

    Each iteration is one sweep of exact NNLS solves: H for fixed W, then the
    rows of W for fixed H, starting from a seeded uniform W. Sweeps start
    from the extrapolated point ``max(0, W + beta (W - W_prev))`` when that
    lowers the residual; otherwise ``beta`` is halved and the sweep is redone
    from W itself, so the residual never increases. Stops once the projected
    gradient norm drops below ``tol`` times its value after the first H
    solve, or after ``max_iters`` iterations. A W column that collapses to
    zero is re-seeded once from the worst-fit document column. On return W
    has unit-norm columns and H is re-solved exactly for it.

    ``A`` may be a scipy sparse matrix, a dense array or a
    :class:`~labeltopics.weighting.SparseTermDocMatrix`; it is never densified.
    ``callback(iteration, W, H)`` sees the factors after every iteration.
    """
    A = _as_matrix(A)
    m, n = A.shape
    if m < 1 or n < 1:
        raise ValueError(f"cannot factor an empty {m}x{n} matrix")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if _squared_norm(A) == 0.0:
        raise DegenerateProblemError("matrix is all zero")

    # All-zero rows of A always get zero rows in W; leave them out of the solve.
    if sp.issparse(A):
        active = np.flatnonzero(np.diff(A.indptr))
    else:
        active = np.flatnonzero(np.any(A != 0, axis=1))
    A_act = A[active]
    residual = _ResidualEvaluator(A_act)

    def sweep(Y):
        H = solve_rank2_gram(Y.T @ Y, np.asarray(A_act.T @ Y).T)
        HHt, AHt = H @ H.T, np.asarray(A_act @ H.T)
        W = solve_rank2_gram(HHt, AHt.T).T
        return W, H, residual(W, H), Y @ HHt - AHt

    rng = np.random.default_rng(seed)
    W = rng.random((active.size, 2))
    W_prev = None
    r = np.inf
    beta = BETA_START
    history: list[float] = []
    rescued = False
    pg0 = None
    it = 0
    for it in range(1, max_iters + 1):
        step = None
        if W_prev is not None:
            Y = np.maximum(W + beta * (W - W_prev), 0.0)
            try:
                step = sweep(Y)
            except DegenerateProblemError:
                step = None
            if step is not None and step[2] <= r:
                beta = min(BETA_MAX, beta * BETA_GROWTH)
            else:
                step = None
                beta /= 2
        if step is None:
            step = sweep(W)
        if pg0 is None:
            pg0 = _projected_norm(step[3], W)
        W_prev = W
        W, H, r, _ = step
        history.append(r)
        if callback is not None:
            callback(it, _scatter(W, active, m), H)

        dead = np.flatnonzero(~np.any(W > 0, axis=0))
        if dead.size and not rescued:
            _rescue(A_act, W, H, dead[0])
            rescued = True
            W_prev = None  # no extrapolation across the jump
            continue
        # W is optimal for H after its exact solve, so only H's gradient can be nonzero.
        AtW = np.asarray(A_act.T @ W)
        if _projected_norm((W.T @ W) @ H - AtW.T, H) <= tol * pg0:
            break

    norms = np.linalg.norm(W, axis=0)
    W = W / np.where(norms > 0, norms, 1.0)
    H = _h_step(A_act, W)
    history.append(residual(W, H))
    W_full = _scatter(W, active, m)
    if callback is not None:
        callback(it + 1, W_full, H)
    return FactorPair(W_full, H, tuple(history), it, rescued)


class _ResidualEvaluator:
    """Frobenius residual ``||A - W H||`` without densifying A.

    Splits the sum into the stored entries of A, evaluated directly, and the
    entries where A is zero, ``sum_j h_j^T G h_j - sum_{stored} (W H)_ij^2``
    per column. Columns with no zero entries skip the second part, so exact
    fits of dense data report residuals near machine precision instead of
    the ``sqrt(eps) * ||A||`` floor of the expanded identity.
    """

    def __init__(self, A):
        if sp.issparse(A):
            coo = A.tocoo()
            self.rows, self.cols, self.vals = coo.row, coo.col, coo.data
        else:
            self.rows, self.cols = np.nonzero(A)
            self.vals = A[self.rows, self.cols]
        m, n = A.shape
        self.n = n
        self.sparse_cols = np.bincount(self.cols, minlength=n) < m

    def __call__(self, W: np.ndarray, H: np.ndarray) -> float:
        fitted = np.einsum("ek,ke->e", W[self.rows], H[:, self.cols])
        stored = float(np.sum((self.vals - fitted) ** 2))
        full = np.einsum("kj,kl,lj->j", H, W.T @ W, H)
        on_stored = np.bincount(self.cols, weights=fitted * fitted, minlength=self.n)
        off = np.maximum(full - on_stored, 0.0)[self.sparse_cols]
        return float(np.sqrt(stored + float(np.sum(off))))


def _projected_norm(grad: np.ndarray, X: np.ndarray) -> float:
    """Norm of the gradient restricted to entries that can still move (X > 0 or grad < 0)."""
    return float(np.linalg.norm(grad[(X > 0) | (grad < 0)]))


def _scatter(W: np.ndarray, rows: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros((m, 2))
    out[rows] = W
    return out


def _rescue(A, W: np.ndarray, H: np.ndarray, col: int) -> None:
    """Replace W[:, col] in place by the unit-norm document column with the largest residual."""
    AtW = np.asarray(A.T @ W)
    G = W.T @ W
    per_doc = (_column_squared_norms(A) - 2.0 * np.sum(H.T * AtW, axis=1)
               + np.einsum("kj,kl,lj->j", H, G, H))
    j = int(np.argmax(per_doc))
    a = A[:, j]
    a = a.toarray().ravel() if sp.issparse(a) else np.asarray(a, dtype=np.float64).ravel()
    W[:, col] = a / np.linalg.norm(a)


def relative_residual(A, fp: FactorPair) -> float:
    """||A - W H||_F / ||A||_F evaluated directly (dense), for checks on small matrices."""
    A = _as_matrix(A)
    dense = A.toarray() if sp.issparse(A) else A
    return float(np.linalg.norm(dense - fp.W @ fp.H) / np.linalg.norm(dense))
