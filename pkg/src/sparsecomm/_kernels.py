"""Hot numeric kernels: CSR operator applications and k-means inner steps.

Every kernel exists in two interchangeable flavours: a pure-numpy
implementation (``*_numpy``) and, when numba is importable, an ``@njit``
compiled one (``*_numba``). The public names are bound to one flavour at
import time; set the environment variable ``SPARSECOMM_NUMBA=0`` to force
the numpy path. The flavours compute the same quantities and differ only
in floating-point summation order (numpy reductions block internally), so
they agree to ~1e-12 relative; the test suite and
``benchmarks/bench_kernels.py`` compare them directly.
"""

import os

import numpy as np


def _numba_enabled():
    flag = os.environ.get("SPARSECOMM_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def adjacency_matvec_numpy(indptr, indices, x):
    """y = A x for an unweighted CSR adjacency (all stored entries are 1)."""
    y = np.zeros(indptr.shape[0] - 1, dtype=x.dtype)
    if indices.shape[0] == 0:
        return y
    counts = np.diff(indptr)
    nonempty = counts > 0
    # reduceat mishandles empty segments, so reduce only non-empty rows
    y[nonempty] = np.add.reduceat(x[indices], indptr[:-1][nonempty])
    return y


def bethe_hessian_matvec_numpy(indptr, indices, degrees, r, x):
    """y = ((r^2 - 1) I + D - r A) x."""
    s = adjacency_matvec_numpy(indptr, indices, x)
    return (r * r - 1.0 + degrees) * x - r * s


def sym_lap_matvec_numpy(indptr, indices, scale, x):
    """y = S A S x with S = diag(scale); scale = (d + tau)^(-1/2)."""
    t = scale * x
    s = adjacency_matvec_numpy(indptr, indices, t)
    return scale * s


def rw_lap_matvec_numpy(indptr, indices, inv_dtau, x):
    """y = diag(inv_dtau) A x, the random-walk view (d + tau)^(-1) A x."""
    s = adjacency_matvec_numpy(indptr, indices, x)
    return inv_dtau * s


def kmeans_assign_numpy(points, centers):
    """Nearest-center assignment. Returns (labels, squared distance)."""
    diff = points[:, None, :] - centers[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    labels = np.argmin(d2, axis=1)
    return labels.astype(np.int64), d2[np.arange(points.shape[0]), labels]


def kmeans_update_numpy(points, labels, k):
    """Per-cluster coordinate sums and counts for the Lloyd update."""
    n, d = points.shape
    sums = np.empty((k, d), dtype=points.dtype)
    for j in range(d):
        sums[:, j] = np.bincount(labels, weights=points[:, j], minlength=k)
    counts = np.bincount(labels, minlength=k)
    return sums, counts.astype(np.int64)


def min_sq_dist_update_numpy(points, center, best):
    """Elementwise min of current best squared distances and d2(points, center)."""
    diff = points - center[None, :]
    d2 = np.einsum("ij,ij->i", diff, diff)
    return np.minimum(best, d2)


# ---------------------------------------------------------------------------
# numba implementations (same accumulation order as above)
# ---------------------------------------------------------------------------

_HAVE_NUMBA = False
if _numba_enabled():
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False

if _HAVE_NUMBA:

    @njit(cache=True)
    def adjacency_matvec_numba(indptr, indices, x):
        n = indptr.shape[0] - 1
        y = np.zeros(n, dtype=x.dtype)
        for i in range(n):
            acc = 0.0
            for idx in range(indptr[i], indptr[i + 1]):
                acc += x[indices[idx]]
            y[i] = acc
        return y

    @njit(cache=True)
    def bethe_hessian_matvec_numba(indptr, indices, degrees, r, x):
        n = indptr.shape[0] - 1
        y = np.empty(n, dtype=x.dtype)
        r2m1 = r * r - 1.0
        for i in range(n):
            acc = 0.0
            for idx in range(indptr[i], indptr[i + 1]):
                acc += x[indices[idx]]
            y[i] = (r2m1 + degrees[i]) * x[i] - r * acc
        return y

    @njit(cache=True)
    def sym_lap_matvec_numba(indptr, indices, scale, x):
        n = indptr.shape[0] - 1
        t = scale * x
        y = np.empty(n, dtype=x.dtype)
        for i in range(n):
            acc = 0.0
            for idx in range(indptr[i], indptr[i + 1]):
                acc += t[indices[idx]]
            y[i] = scale[i] * acc
        return y

    @njit(cache=True)
    def rw_lap_matvec_numba(indptr, indices, inv_dtau, x):
        n = indptr.shape[0] - 1
        y = np.empty(n, dtype=x.dtype)
        for i in range(n):
            acc = 0.0
            for idx in range(indptr[i], indptr[i + 1]):
                acc += x[indices[idx]]
            y[i] = inv_dtau[i] * acc
        return y

    @njit(cache=True)
    def kmeans_assign_numba(points, centers):
        n, d = points.shape
        k = centers.shape[0]
        labels = np.empty(n, dtype=np.int64)
        dists = np.empty(n, dtype=points.dtype)
        for i in range(n):
            best = np.inf
            arg = 0
            for c in range(k):
                acc = 0.0
                for j in range(d):
                    diff = points[i, j] - centers[c, j]
                    acc += diff * diff
                if acc < best:
                    best = acc
                    arg = c
            labels[i] = arg
            dists[i] = best
        return labels, dists

    @njit(cache=True)
    def kmeans_update_numba(points, labels, k):
        n, d = points.shape
        sums = np.zeros((k, d), dtype=points.dtype)
        counts = np.zeros(k, dtype=np.int64)
        for i in range(n):
            lab = labels[i]
            for j in range(d):
                sums[lab, j] += points[i, j]
            counts[lab] += 1
        return sums, counts

    @njit(cache=True)
    def min_sq_dist_update_numba(points, center, best):
        n, d = points.shape
        out = np.empty(n, dtype=best.dtype)
        for i in range(n):
            acc = 0.0
            for j in range(d):
                diff = points[i, j] - center[j]
                acc += diff * diff
            out[i] = acc if acc < best[i] else best[i]
        return out


if _HAVE_NUMBA:
    BACKEND = "numba"
    adjacency_matvec = adjacency_matvec_numba
    bethe_hessian_matvec = bethe_hessian_matvec_numba
    sym_lap_matvec = sym_lap_matvec_numba
    rw_lap_matvec = rw_lap_matvec_numba
    kmeans_assign = kmeans_assign_numba
    kmeans_update = kmeans_update_numba
    min_sq_dist_update = min_sq_dist_update_numba
else:
    BACKEND = "numpy"
    adjacency_matvec = adjacency_matvec_numpy
    bethe_hessian_matvec = bethe_hessian_matvec_numpy
    sym_lap_matvec = sym_lap_matvec_numpy
    rw_lap_matvec = rw_lap_matvec_numpy
    kmeans_assign = kmeans_assign_numpy
    kmeans_update = kmeans_update_numpy
    min_sq_dist_update = min_sq_dist_update_numpy
