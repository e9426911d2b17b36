"""The numba and numpy kernel flavours must agree on every input."""

import numpy as np
import pytest

import sparsecomm as sc
from sparsecomm import _kernels as K

needs_numba = pytest.mark.skipif(not K._HAVE_NUMBA, reason="numba unavailable or disabled")


def _graph_with_isolated_nodes():
    # node 4 is isolated: empty CSR rows must not break the numpy reduceat path
    return sc.SparseGraph.from_pairs(6, [(0, 1), (1, 2), (0, 2), (3, 5)])


def test_backend_flag_exposed():
    assert K.BACKEND in ("numba", "numpy")
    assert sc.BACKEND == K.BACKEND


def test_adjacency_matvec_numpy_handles_empty_rows():
    g = _graph_with_isolated_nodes()
    x = np.arange(1.0, 7.0)
    y = K.adjacency_matvec_numpy(g.row_offsets, g.col_indices, x)
    expected = np.array([2 + 3, 1 + 3, 1 + 2, 6, 0, 4], dtype=float)
    np.testing.assert_array_equal(y, expected)


def test_adjacency_matvec_numpy_empty_graph():
    g = sc.SparseGraph.from_pairs(4, np.empty((0, 2), dtype=np.int64))
    y = K.adjacency_matvec_numpy(g.row_offsets, g.col_indices, np.ones(4))
    np.testing.assert_array_equal(y, np.zeros(4))


@needs_numba
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_operator_kernels_match_across_backends(seed):
    cfg = sc.DcsbmConfig.two_class(400, 12, 3, sc.ThetaSpec.parse("uniform(3,7)^3"))
    g, _ = sc.generate_dcsbm(cfg, seed=seed)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(g.n)
    deg = g.degrees.astype(float)
    scale = 1.0 / np.sqrt(deg + 2.5)
    inv = 1.0 / (deg + 2.5)

    pairs = [
        (K.adjacency_matvec_numba(g.row_offsets, g.col_indices, x),
         K.adjacency_matvec_numpy(g.row_offsets, g.col_indices, x)),
        (K.bethe_hessian_matvec_numba(g.row_offsets, g.col_indices, deg, 1.7, x),
         K.bethe_hessian_matvec_numpy(g.row_offsets, g.col_indices, deg, 1.7, x)),
        (K.sym_lap_matvec_numba(g.row_offsets, g.col_indices, scale, x),
         K.sym_lap_matvec_numpy(g.row_offsets, g.col_indices, scale, x)),
        (K.rw_lap_matvec_numba(g.row_offsets, g.col_indices, inv, x),
         K.rw_lap_matvec_numpy(g.row_offsets, g.col_indices, inv, x)),
    ]
    for got, want in pairs:
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


@needs_numba
def test_kmeans_kernels_match_across_backends():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((500, 3))
    C = rng.standard_normal((4, 3))
    lab_nb, d_nb = K.kmeans_assign_numba(X, C)
    lab_np, d_np = K.kmeans_assign_numpy(X, C)
    np.testing.assert_array_equal(lab_nb, lab_np)
    np.testing.assert_allclose(d_nb, d_np, rtol=1e-12)

    s_nb, n_nb = K.kmeans_update_numba(X, lab_nb, 4)
    s_np, n_np = K.kmeans_update_numpy(X, lab_np, 4)
    np.testing.assert_allclose(s_nb, s_np, rtol=1e-12)
    np.testing.assert_array_equal(n_nb, n_np)

    best = np.full(500, np.inf)
    m_nb = K.min_sq_dist_update_numba(X, C[0], best)
    m_np = K.min_sq_dist_update_numpy(X, C[0], best)
    np.testing.assert_allclose(m_nb, m_np, rtol=1e-12)
