"""Feature-matrix assembly from informative eigenvectors and k-means labeling.

The end-to-end pipeline: estimate the class count from the spectrum of the
safely-regularized Laplacian, locate zeta_p for each rank p = 2..k_hat,
extract one informative eigenvector per rank, stack them as columns, and
run k-means on the rows.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import BeyondDetectableRankError
from .graph import estimate_c_phi
from .metrics import gap_profile
from .operators import (
    bethe_hessian_smallest,
    find_zeta,
    informative_eigenvector,
    reg_laplacian_eigs,
    estimate_k,
)

__all__ = [
    "Embedding",
    "ClusterOptions",
    "ClusterResult",
    "build_embedding",
    "embedding_from_fixed_tau",
    "kmeans",
    "cluster",
]


@dataclass(frozen=True)
class Embedding:
    """n x (k_used - 1) matrix whose column p-2 is the rank-p informative
    eigenvector, p = 2..k_used. Columns have unit norm."""

    data: np.ndarray
    zeta_used: tuple
    k_requested: int
    k_used: int

    @property
    def shrunk(self):
        return self.k_used < self.k_requested

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]


def build_embedding(
    graph,
    k_hat,
    c_phi_hat,
    route="bethe_hessian",
    zeta_rtol=1e-3,
    zeta_eig_tol=1e-6,
    eig_tol=1e-8,
    max_iter=None,
    seed=0,
):
    """Stack informative eigenvectors for ranks 2..k_hat as columns.

    route "bethe_hessian" takes each vector as the p-th smallest eigenvector
    of H_{zeta_p}; route "laplacian" takes the p-th largest random-walk
    eigenvector of L^rw at tau = zeta_p^2 - 1. The two coincide up to the
    bisection tolerance.

    If the zeta search finds no crossing for some rank, k_hat shrinks to the
    last workable rank (reported via Embedding.k_used < k_requested).
    """
    if k_hat < 2:
        raise ValueError("build_embedding needs k_hat >= 2")
    if route not in ("bethe_hessian", "laplacian"):
        raise ValueError(f"unknown route {route!r}")
    cols = []
    zetas = []
    for p in range(2, k_hat + 1):
        try:
            zres = find_zeta(
                graph, p, c_phi_hat,
                r_tol=zeta_rtol, eig_tol=zeta_eig_tol, max_iter=max_iter, seed=seed,
            )
        except BeyondDetectableRankError:
            break
        zetas.append(zres.zeta)
        if route == "bethe_hessian":
            info = informative_eigenvector(
                graph, p, zres.zeta, tol=eig_tol, max_iter=max_iter, seed=seed
            )
            cols.append(info.vector)
        else:
            tau = zres.zeta**2 - 1.0
            pairs = reg_laplacian_eigs(
                graph, tau, p, tol=eig_tol, max_iter=max_iter, seed=seed
            )
            cols.append(pairs.vectors[:, p - 1])
    k_used = len(cols) + 1
    data = np.column_stack(cols) if cols else np.zeros((graph.n, 0))
    return Embedding(
        data=data, zeta_used=tuple(zetas), k_requested=k_hat, k_used=k_used
    )


def embedding_from_fixed_tau(graph, k_hat, tau, eig_tol=1e-8, max_iter=None, seed=0):
    """Columns 2..k_hat of the random-walk eigenvectors of L^rw_tau.

    Returns (Embedding, descending eigenvalues of the solve). The eigenvalue
    list has k_hat + 4 entries so callers can also read off the spectral gap.
    """
    if k_hat < 2:
        raise ValueError("embedding_from_fixed_tau needs k_hat >= 2")
    count = min(graph.n, k_hat + 4)
    pairs = reg_laplacian_eigs(graph, tau, count, tol=eig_tol, max_iter=max_iter, seed=seed)
    data = np.ascontiguousarray(pairs.vectors[:, 1:k_hat])
    emb = Embedding(data=data, zeta_used=(), k_requested=k_hat, k_used=k_hat)
    return emb, pairs.values


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

def _kmeanspp_init(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    best = np.full(n, np.inf)
    best = _kernels.min_sq_dist_update(X, centers[0], best)
    for c in range(1, k):
        total = best.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))  # all remaining points coincide
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(best), r))
            idx = min(idx, n - 1)
        centers[c] = X[idx]
        best = _kernels.min_sq_dist_update(X, centers[c], best)
    return centers


def _lloyd(X, centers, max_rounds=300):
    n, k = X.shape[0], centers.shape[0]
    prev_labels = None
    prev_wcss = np.inf
    labels, d2 = _kernels.kmeans_assign(X, centers)
    for _ in range(max_rounds):
        wcss = float(d2.sum())
        assert wcss <= prev_wcss * (1.0 + 1e-12) + 1e-12, "Lloyd iteration increased WCSS"
        prev_wcss = wcss
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels
        sums, counts = _kernels.kmeans_update(X, labels, k)
        empty = np.flatnonzero(counts == 0)
        nonempty = counts > 0
        centers = centers.copy()
        centers[nonempty] = sums[nonempty] / counts[nonempty, None]
        for c in empty:
            far = int(np.argmax(d2))  # re-seed dead centroid at the farthest point
            centers[c] = X[far]
            d2 = d2.copy()
            d2[far] = 0.0
        labels, d2 = _kernels.kmeans_assign(X, centers)
    return labels, float(d2.sum())


def kmeans(embedding, k, restarts=16, seed=0, canonical=True):
    """Lloyd iterations with k-means++ seeding, best of `restarts` by WCSS.

    Accepts an Embedding or a plain (n, d) / (n,) array. With `canonical`,
    rows are processed in lexicographic order of their values, which makes
    the outcome invariant to input row permutations (the seeding RNG then
    draws over a permutation-independent ordering).
    """
    X = embedding.data if isinstance(embedding, Embedding) else np.asarray(embedding, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if k == 1 or n == 0:
        return np.zeros(n, dtype=np.int64)
    k = min(k, n)
    if canonical:
        order = np.lexsort(tuple(X[:, j] for j in range(X.shape[1] - 1, -1, -1)))
        Xs = np.ascontiguousarray(X[order])
    else:
        order = None
        Xs = np.ascontiguousarray(X)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    best_labels, best_wcss = None, np.inf
    for _ in range(restarts):
        centers = _kmeanspp_init(Xs, k, rng)
        labels, wcss = _lloyd(Xs, centers)
        if best_labels is None or wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    if order is not None:
        out = np.empty(n, dtype=np.int64)
        out[order] = best_labels
        return out
    return best_labels


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterOptions:
    seed: int = 0
    restarts: int = 16
    route: str = "bethe_hessian"
    zeta_rtol: float = 1e-3
    zeta_eig_tol: float = 1e-6
    eig_tol: float = 1e-8
    max_iter: int = None
    canonical_kmeans: bool = True


@dataclass
class ClusterResult:
    k_hat: int
    labels: np.ndarray
    diagnostics: dict

    @property
    def no_detectable_structure(self):
        return self.diagnostics.get("no_detectable_structure", False)


def cluster(graph, opts=None):
    """Full pipeline: estimate k, build the embedding, k-means the rows.

    Returns ClusterResult; when no informative rank exists (k_hat == 1) the
    labels are all zero and diagnostics carry no_detectable_structure=True.
    """
    opts = opts or ClusterOptions()
    if graph.n == 0 or graph.num_edges == 0:
        raise ValueError("cluster needs a non-empty graph")
    c_phi_hat = estimate_c_phi(graph)
    k_hat = estimate_k(graph, c_phi_hat, max_iter=opts.max_iter, seed=opts.seed)
    diagnostics = {
        "c_phi_hat": c_phi_hat,
        "k_hat_initial": k_hat,
        "no_detectable_structure": False,
        "zeta": [],
        "zeta_residuals": [],
        "rw_residuals": [],
        "eigenvalues": [],
        "gap": None,
        "bulk_spacing": None,
        "shrunk": False,
    }
    if k_hat < 2:
        diagnostics["no_detectable_structure"] = True
        return ClusterResult(k_hat=1, labels=np.zeros(graph.n, dtype=np.int64), diagnostics=diagnostics)

    emb = build_embedding(
        graph, k_hat, c_phi_hat,
        route=opts.route,
        zeta_rtol=opts.zeta_rtol,
        zeta_eig_tol=opts.zeta_eig_tol,
        eig_tol=opts.eig_tol,
        max_iter=opts.max_iter,
        seed=opts.seed,
    )
    diagnostics["zeta"] = list(emb.zeta_used)
    diagnostics["shrunk"] = emb.shrunk
    if emb.k_used < 2:
        diagnostics["no_detectable_structure"] = True
        return ClusterResult(k_hat=1, labels=np.zeros(graph.n, dtype=np.int64), diagnostics=diagnostics)

    k_used = emb.k_used
    # spectral context at the last adaptive regularization, for gap reporting
    tau_ref = emb.zeta_used[-1] ** 2 - 1.0
    count = min(graph.n, k_used + 4)
    pairs = reg_laplacian_eigs(
        graph, tau_ref, count, tol=opts.eig_tol, max_iter=opts.max_iter, seed=opts.seed
    )
    diagnostics["eigenvalues"] = pairs.values.tolist()
    diagnostics["rw_residuals"] = pairs.residuals.tolist()
    if count >= k_used + 4:
        prof = gap_profile(pairs.values, k_used)
        diagnostics["gap"] = prof.gap
        diagnostics["bulk_spacing"] = prof.bulk_spacing

    labels = kmeans(
        emb, k_used,
        restarts=opts.restarts, seed=opts.seed, canonical=opts.canonical_kmeans,
    )
    return ClusterResult(k_hat=k_used, labels=labels, diagnostics=diagnostics)
