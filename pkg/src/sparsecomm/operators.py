"""Graph operators and spectral procedures for community detection.

Implements the Bethe-Hessian family H_r = (r^2 - 1) I + D - r A, the
regularized Laplacians L_tau^sym = D_tau^(-1/2) A D_tau^(-1/2) and
L_tau^rw = D_tau^(-1) A (D_tau = D + tau I), the bisection search for the
difficulty-adapted parameter zeta_p where the p-th smallest Bethe-Hessian
eigenvalue crosses zero, extraction of the informative eigenvectors, and
the spectral estimator of the class count.

All eigen-computations route through the symmetric forms; random-walk
eigenvectors are recovered exactly by the diagonal similarity transform
x_rw = D_tau^(-1/2) x_sym.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .eigen import EigenPairs, extremal_eigs
from .errors import BeyondDetectableRankError, SolverError
from .graph import estimate_c_phi

__all__ = [
    "BetheHessianOp",
    "RegLaplacianOp",
    "ZetaResult",
    "InformativeVector",
    "bethe_hessian_smallest",
    "find_zeta",
    "informative_eigenvector",
    "reg_laplacian_eigs",
    "estimate_k",
    "spectrum_report",
    "dense_bethe_hessian",
    "dense_reg_laplacian",
]


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

class BetheHessianOp:
    """apply(x) = (r^2 - 1) x + D x - r A x. Requires r > 1."""

    def __init__(self, graph, r):
        if r <= 1.0:
            raise ValueError("Bethe-Hessian parameter r must exceed 1")
        self.graph = graph
        self.r = float(r)
        self.dim = graph.n
        self._deg = graph.degrees.astype(float)

    def apply(self, x):
        return _kernels.bethe_hessian_matvec(
            self.graph.row_offsets, self.graph.col_indices, self._deg, self.r, x
        )


class RegLaplacianOp:
    """Regularized Laplacian in the symmetric or random-walk view.

    Both views share eigenvalues; a random-walk eigenvector is the
    D_tau^(-1/2)-image of the symmetric one.
    """

    def __init__(self, graph, tau, view="sym"):
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        if view not in ("sym", "rw"):
            raise ValueError("view must be 'sym' or 'rw'")
        dtau = graph.degrees.astype(float) + tau
        if np.any(dtau <= 0):
            raise ValueError(
                "tau = 0 with zero-degree nodes makes D_tau singular; "
                "use a positive regularization"
            )
        self.graph = graph
        self.tau = float(tau)
        self.view = view
        self.dim = graph.n
        self._inv_sqrt = 1.0 / np.sqrt(dtau)
        self._inv = 1.0 / dtau

    def apply(self, x):
        if self.view == "sym":
            return _kernels.sym_lap_matvec(
                self.graph.row_offsets, self.graph.col_indices, self._inv_sqrt, x
            )
        return _kernels.rw_lap_matvec(
            self.graph.row_offsets, self.graph.col_indices, self._inv, x
        )

    def to_rw_vector(self, x):
        """Map a sym-view eigenvector to the unit-norm rw-view eigenvector."""
        v = self._inv_sqrt * x
        return v / np.linalg.norm(v)


def _dense_adjacency(graph):
    A = np.zeros((graph.n, graph.n))
    rows = np.repeat(np.arange(graph.n), graph.degrees)
    A[rows, graph.col_indices] = 1.0
    return A


def dense_bethe_hessian(graph, r):
    """Explicit dense H_r, for validation at small n."""
    A = _dense_adjacency(graph)
    return (r * r - 1.0) * np.eye(graph.n) + np.diag(graph.degrees.astype(float)) - r * A


def dense_reg_laplacian(graph, tau, view="sym"):
    """Explicit dense regularized Laplacian, for validation at small n."""
    A = _dense_adjacency(graph)
    dtau = graph.degrees.astype(float) + tau
    if np.any(dtau <= 0):
        raise ValueError("singular D_tau")
    if view == "sym":
        s = 1.0 / np.sqrt(dtau)
        return s[:, None] * A * s[None, :]
    if view == "rw":
        return A / dtau[:, None]
    raise ValueError("view must be 'sym' or 'rw'")


# ---------------------------------------------------------------------------
# Bethe-Hessian spectrum and the zeta search
# ---------------------------------------------------------------------------

def bethe_hessian_smallest(graph, r, count, tol=1e-8, max_iter=None, seed=0):
    """The `count` smallest eigenpairs of H_r (values ascending)."""
    op = BetheHessianOp(graph, r)
    return extremal_eigs(op, count, end="smallest", tol=tol, max_iter=max_iter, seed=seed)


@dataclass(frozen=True)
class ZetaResult:
    """Outcome of the zeta_p bisection.

    zeta lies in (1, sqrt(c_phi_hat)]; achieved_residual is |s_p(H_zeta)| at
    the returned point and bracket_evals counts eigensolver invocations.
    """

    p: int
    zeta: float
    bracket_evals: int
    achieved_residual: float


_R_LOWER_MARGIN = 1e-6


def find_zeta(graph, p, c_phi_hat, r_tol=1e-3, eig_tol=1e-6, max_iter=None, seed=0):
    """Locate zeta_p: the r where the p-th smallest eigenvalue of H_r crosses zero.

    Bisection on the sign of s_p(H_r) over r in [1 + 1e-6, sqrt(c_phi_hat)].
    The eigenvalue decreases through zero as r grows; if it is still positive
    at the upper end, rank p carries no information and
    BeyondDetectableRankError is raised. If it is already nonpositive at the
    lower end (nearly disconnected clusters) the lower edge is returned.

    r_tol is relative bracket width.

    Returns:
        ZetaResult
    """
    if p < 2:
        raise ValueError("p must be at least 2 (the leading rank is always at r=1)")
    if c_phi_hat <= 1.0:
        raise ValueError("c_phi_hat must exceed 1")
    lo = 1.0 + _R_LOWER_MARGIN
    hi = math.sqrt(c_phi_hat)
    if hi <= lo:
        raise ValueError("search bracket is empty; c_phi_hat too small")

    evals = 0

    def s_p(r):
        nonlocal evals
        evals += 1
        pairs = bethe_hessian_smallest(
            graph, r, p, tol=eig_tol, max_iter=max_iter, seed=seed
        )
        if not pairs.converged[p - 1]:
            raise SolverError(
                f"eigenvalue {p} of H_r at r={r:.6g} did not converge "
                f"(residual {pairs.residuals[p - 1]:.3e})"
            )
        return float(pairs.values[p - 1])

    f_hi = s_p(hi)
    if f_hi > 0:
        raise BeyondDetectableRankError(p, hi, f_hi)
    f_lo = s_p(lo)
    if f_lo <= 0:
        # crossing at or below the lower edge: nearly disconnected clusters
        return ZetaResult(p=p, zeta=lo, bracket_evals=evals, achieved_residual=abs(f_lo))

    while hi - lo > r_tol * 0.5 * (hi + lo):
        assert f_lo > 0 >= f_hi, "bracket lost the sign change"
        mid = 0.5 * (lo + hi)
        f_mid = s_p(mid)
        if f_mid > 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    zeta = 0.5 * (lo + hi)
    return ZetaResult(
        p=p, zeta=zeta, bracket_evals=evals + 1, achieved_residual=abs(s_p(zeta))
    )


class InformativeVector(NamedTuple):
    """Eigenpair of H_zeta whose vector also solves the random-walk relation
    L_{zeta^2-1}^rw x = x / zeta up to rw_residual."""

    value: float
    vector: np.ndarray
    rw_residual: float


def informative_eigenvector(graph, p, zeta, tol=1e-8, max_iter=None, seed=0):
    """The p-th smallest eigenpair of H_zeta; reports the random-walk residual.

    The returned vector is the community-informative one: by the operator
    identity, it satisfies zeta * D_{zeta^2-1}^(-1) A x = x up to the
    achieved eigenvalue magnitude.
    """
    pairs = bethe_hessian_smallest(graph, zeta, p, tol=tol, max_iter=max_iter, seed=seed)
    if not pairs.converged[p - 1]:
        raise SolverError(f"eigenvalue {p} of H_zeta did not converge")
    value = float(pairs.values[p - 1])
    vector = pairs.vectors[:, p - 1].copy()
    inv_dtau = 1.0 / (graph.degrees.astype(float) + (zeta * zeta - 1.0))
    rw_image = zeta * _kernels.rw_lap_matvec(
        graph.row_offsets, graph.col_indices, inv_dtau, vector
    )
    rw_residual = float(np.linalg.norm(rw_image - vector))
    return InformativeVector(value=value, vector=vector, rw_residual=rw_residual)


# ---------------------------------------------------------------------------
# Regularized Laplacian spectra
# ---------------------------------------------------------------------------

def reg_laplacian_eigs(graph, tau, count, tol=1e-8, max_iter=None, seed=0):
    """The `count` largest eigenpairs of L_tau^rw (values descending).

    Solved on the symmetric view, then mapped to random-walk eigenvectors by
    the D_tau^(-1/2) transform and renormalized. Residuals and convergence
    flags refer to the random-walk relation.
    """
    op = RegLaplacianOp(graph, tau, view="sym")
    # the similarity transform inflates residuals by at most sqrt(cond(D_tau))
    dtau = graph.degrees.astype(float) + tau
    cond_half = math.sqrt(dtau.max() / dtau.min())
    sym = extremal_eigs(
        op, count, end="largest", tol=tol / cond_half, max_iter=max_iter, seed=seed
    )
    rw_op = RegLaplacianOp(graph, tau, view="rw")
    vectors = np.empty_like(sym.vectors)
    residuals = np.empty(count)
    for i in range(count):
        v = op.to_rw_vector(sym.vectors[:, i])
        vectors[:, i] = v
        residuals[i] = np.linalg.norm(rw_op.apply(v) - sym.values[i] * v)
    converged = sym.converged & (residuals <= tol)
    from .eigen import _fix_signs

    return EigenPairs(
        values=sym.values.copy(),
        vectors=_fix_signs(vectors),
        residuals=residuals,
        converged=converged,
    )


_K_BATCH = 4
_K_CAP = 64


def estimate_k(graph, c_phi_hat=None, tol=1e-8, max_iter=None, seed=0):
    """Estimate the class count: eigenvalues of L^rw_{cPhi-1} above 1/sqrt(cPhi).

    Largest eigenvalues are requested in growing batches until one falls to
    the threshold or below; the count of strictly larger ones is returned.
    """
    if c_phi_hat is None:
        c_phi_hat = estimate_c_phi(graph)
    if c_phi_hat <= 1.0:
        raise SolverError(f"c_phi estimate {c_phi_hat:.3g} <= 1; spectrum has no bulk scale")
    tau = c_phi_hat - 1.0
    threshold = 1.0 / math.sqrt(c_phi_hat)
    op = RegLaplacianOp(graph, tau, view="sym")
    count = min(_K_BATCH, graph.n)
    while True:
        pairs = extremal_eigs(op, count, end="largest", tol=tol, max_iter=max_iter, seed=seed)
        if not pairs.converged.all():
            raise SolverError(
                f"class-count estimation: {int((~pairs.converged).sum())} of "
                f"{count} eigenvalues unconverged"
            )
        below = np.flatnonzero(pairs.values <= threshold)
        if below.size:
            return int(below[0])
        if count >= min(graph.n, _K_CAP):
            raise SolverError(
                f"more than {count} eigenvalues above the bulk threshold; "
                "graph is outside the sparse regime this estimator supports"
            )
        count = min(count + _K_BATCH, graph.n, _K_CAP)


def spectrum_report(graph, tau, count, scale_by_r=False, tol=1e-6, max_iter=None, seed=0):
    """Largest `count` eigenvalues of L_tau^rw, descending, values only.

    With scale_by_r, reports the spectrum of r * L^rw_{r^2-1} for
    r = sqrt(tau + 1) (the form in which the informative eigenvalue sits at 1).
    """
    op = RegLaplacianOp(graph, tau, view="sym")
    pairs = extremal_eigs(op, count, end="largest", tol=tol, max_iter=max_iter, seed=seed)
    values = pairs.values
    if scale_by_r:
        values = math.sqrt(tau + 1.0) * values
    return values
