"""Partial eigensolver for symmetric operators given by matrix-vector products.

The solver is a Lanczos iteration with full reorthogonalization (two passes
of classical Gram-Schmidt against the whole basis per step, which removes
ghost eigenvalues at the desk scales this package targets). On breakdown the
iteration restarts with a fresh random vector orthogonal to the basis built
so far, so invariant subspaces — disconnected graphs, repeated eigenvalues —
are deflated and the search continues in the orthogonal complement. The
smallest end reuses the largest-end code path on the negated operator.

``dense_oracle`` provides the full spectrum of an explicit matrix for
validation at small sizes.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["SymmetricOperator", "EigenPairs", "extremal_eigs", "dense_oracle"]

DENSE_GUARD = 2000


@dataclass(frozen=True)
class SymmetricOperator:
    """A symmetric linear map given by its action on vectors."""

    dim: int
    apply: Callable[[np.ndarray], np.ndarray]


@dataclass
class EigenPairs:
    """Eigenvalue/eigenvector bundle.

    values are sorted most-extreme-first for extremal_eigs (ascending for the
    smallest end, descending for the largest) and ascending for dense_oracle.
    vectors[:, i] matches values[i]; residuals[i] = ||M x_i - values[i] x_i||.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray

    def __len__(self):
        return self.values.shape[0]

    @property
    def all_converged(self):
        return bool(self.converged.all())


def _fix_signs(vectors):
    # reproducible orientation: the largest-magnitude entry is positive
    if vectors.shape[1] == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def default_max_iter(count, dim):
    return 10 * count * math.ceil(math.sqrt(dim))


def extremal_eigs(op, count, end="smallest", tol=1e-8, max_iter=None, seed=0):
    """Compute the `count` algebraically smallest or largest eigenpairs.

    Args:
        op: object with `dim` and `apply(x) -> y`; must be symmetric.
        count: number of eigenpairs, 1 <= count <= op.dim.
        end: "smallest" or "largest".
        tol: residual tolerance ||M x - lambda x||.
        max_iter: Lanczos step budget; default 10 * count * ceil(sqrt(dim)).
        seed: seed for the start vector (and any restart vectors).

    Returns:
        EigenPairs with per-pair residuals and converged flags. Pairs that
        fail to reach `tol` within the budget are flagged, never dropped.
    """
    n = op.dim
    if not 1 <= count <= n:
        raise ValueError(f"count must be in [1, {n}], got {count}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if end not in ("smallest", "largest"):
        raise ValueError("end must be 'smallest' or 'largest'")
    if max_iter is None:
        max_iter = default_max_iter(count, n)
    max_iter = max(max_iter, count + 2)

    if end == "smallest":
        apply = lambda x: -op.apply(x)
    else:
        apply = op.apply

    values, vectors, residuals, converged = _lanczos_largest(
        apply, n, count, tol, max_iter, np.random.default_rng(np.random.SeedSequence(seed))
    )
    if end == "smallest":
        # largest of -M in descending order == smallest of M in ascending order
        values = -values
    return EigenPairs(
        values=values,
        vectors=_fix_signs(np.ascontiguousarray(vectors)),
        residuals=np.ascontiguousarray(residuals),
        converged=np.ascontiguousarray(converged),
    )


def _orthogonalize(w, Q, m):
    for _ in range(2):
        w -= Q[:, :m] @ (Q[:, :m].T @ w)
    return w


def _lanczos_largest(apply, n, count, tol, max_iter, rng):
    max_dim = min(n, max_iter)
    cap = min(max_dim, max(2 * count + 16, 48))
    Q = np.empty((n, cap), order="F")
    alphas = []
    betas = []  # off-diagonals of T; a zero marks a restart boundary

    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    anorm = 1.0
    m = 0
    beta_next = 0.0
    next_check = min(max(count + 1, 8), max_dim)
    exhausted = False

    while m < max_dim:
        if m == Q.shape[1]:
            grow = min(max_dim, 2 * Q.shape[1])
            Qn = np.empty((n, grow), order="F")
            Qn[:, :m] = Q
            Q = Qn
        Q[:, m] = q
        m += 1
        w = apply(q)
        alpha = float(q @ w)
        alphas.append(alpha)
        w = _orthogonalize(w, Q, m)
        beta_next = float(np.linalg.norm(w))
        anorm = max(anorm, abs(alpha) + beta_next)

        broke = beta_next <= 1e-10 * anorm
        if broke:
            beta_next = 0.0
            q = _orthogonalize(rng.standard_normal(n), Q, m)
            qnorm = np.linalg.norm(q)
            if qnorm <= 1e-8 * math.sqrt(n):
                exhausted = True  # no directions left
            else:
                q /= qnorm
        else:
            q = w / beta_next

        if m >= next_check or broke or exhausted or m == max_dim:
            next_check = m + max(8, m // 8)
            if m < count:
                if exhausted:
                    break
                continue
            T = np.diag(np.array(alphas))
            if m > 1:
                off = np.array(betas[: m - 1])
                T += np.diag(off, 1) + np.diag(off, -1)
            tvals, tvecs = np.linalg.eigh(T)
            top = np.argsort(tvals)[::-1][:count]
            est = beta_next * np.abs(tvecs[m - 1, top])
            if np.all(est <= 0.5 * tol) or exhausted or m == max_dim:
                vals = tvals[top]
                vecs = Q[:, :m] @ tvecs[:, top]
                res = np.empty(count)
                for i in range(count):
                    res[i] = np.linalg.norm(apply(vecs[:, i]) - vals[i] * vecs[:, i])
                if np.all(res <= tol) or exhausted or m == max_dim:
                    return vals, vecs, res, res <= tol
        if not exhausted:
            betas.append(beta_next)

    # basis exhausted before `count` directions existed (tiny subspaces)
    T = np.diag(np.array(alphas))
    if m > 1:
        off = np.array(betas[: m - 1])
        T += np.diag(off, 1) + np.diag(off, -1)
    tvals, tvecs = np.linalg.eigh(T)
    take = min(count, m)
    top = np.argsort(tvals)[::-1][:take]
    vals = tvals[top]
    vecs = Q[:, :m] @ tvecs[:, top]
    res = np.array([
        np.linalg.norm(apply(vecs[:, i]) - vals[i] * vecs[:, i]) for i in range(take)
    ])
    return vals, vecs, res, res <= tol


def dense_oracle(matrix):
    """Full spectrum of an explicit symmetric matrix, values ascending.

    Guarded to n <= 2000 to catch accidental huge allocations.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    n = matrix.shape[0]
    if n > DENSE_GUARD:
        raise ValueError(f"dense_oracle refuses n={n} > {DENSE_GUARD}")
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    values, vectors = np.linalg.eigh(matrix)
    vectors = _fix_signs(vectors)
    res = np.linalg.norm(matrix @ vectors - vectors * values[None, :], axis=0)
    return EigenPairs(
        values=values,
        vectors=vectors,
        residuals=res,
        converged=np.ones(n, dtype=bool),
    )
