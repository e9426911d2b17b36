import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sparsecomm as sc
from sparsecomm.errors import ConfigError, EdgeListFormatError, EmptyGraphError


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------

def test_config_rejects_tiny_n():
    with pytest.raises(ConfigError):
        sc.DcsbmConfig.two_class(1, 5, 1)


def test_config_rejects_unbalanced_row_sums():
    C = np.array([[10.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ConfigError, match="constant"):
        sc.DcsbmConfig(n=10, k=2, C=C, pi=np.array([0.5, 0.5]))


def test_config_rejects_bad_pi():
    with pytest.raises(ConfigError):
        sc.DcsbmConfig(n=10, k=2, C=np.eye(2), pi=np.array([0.7, 0.4]))


def test_theta_spec_rejects_nonpositive_support():
    with pytest.raises(ConfigError, match="positive"):
        sc.ThetaSpec("uniform", (-1.0, 2.0), 3.0)


def test_theta_spec_parse_roundtrip():
    spec = sc.ThetaSpec.parse("uniform(3,15)^5")
    assert spec.dist == "uniform" and spec.params == (3.0, 15.0) and spec.power == 5.0
    assert str(spec) == "uniform(3,15)^5"
    assert sc.ThetaSpec.parse("constant").dist == "constant"
    with pytest.raises(ConfigError):
        sc.ThetaSpec.parse("pareto(2)")


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def test_zero_affinity_gives_empty_graph():
    cfg = sc.DcsbmConfig(n=50, k=2, C=np.zeros((2, 2)), pi=np.array([0.5, 0.5]))
    graph, _ = sc.generate_dcsbm(cfg, seed=0)
    assert graph.num_edges == 0
    graph.validate()


def test_generation_deterministic():
    cfg = sc.DcsbmConfig.two_class(200, 9, 3, sc.ThetaSpec.parse("uniform(3,7)^3"))
    g1, t1 = sc.generate_dcsbm(cfg, seed=123)
    g2, t2 = sc.generate_dcsbm(cfg, seed=123)
    np.testing.assert_array_equal(g1.col_indices, g2.col_indices)
    np.testing.assert_array_equal(t1.labels, t2.labels)
    np.testing.assert_array_equal(t1.theta, t2.theta)


def test_ground_truth_normalizations():
    cfg = sc.DcsbmConfig.two_class(500, 8, 2, sc.ThetaSpec.parse("uniform(3,15)^5"))
    _, truth = sc.generate_dcsbm(cfg, seed=5)
    assert abs(truth.theta.mean() - 1.0) < 1e-12
    assert truth.model_eigs[0] == pytest.approx(truth.c, rel=1e-6)
    assert truth.c == pytest.approx(5.0)
    # leading model eigenvector is the all-ones direction
    v0 = truth.model_vecs[:, 0]
    assert np.allclose(v0 / v0[0], np.ones(2))


def test_mean_degree_matches_expected_level():
    # 5000 nodes, within-class 8 / across-class 2: expected average degree 5
    cfg = sc.DcsbmConfig.two_class(5000, 8, 2, sc.ThetaSpec.parse("uniform(3,7)^3"))
    graph, truth = sc.generate_dcsbm(cfg, seed=11)
    assert graph.degrees.mean() == pytest.approx(5.0, rel=0.05)


def test_block_edge_frequencies_match_probabilities():
    # Monte-Carlo oracle: with labels and theta held fixed, the per-block
    # edge count over 500 regenerations matches the summed pair
    # probabilities within 3 standard errors.
    n, runs = 200, 500
    cfg = sc.DcsbmConfig.two_class(n, 12, 3, sc.ThetaSpec.parse("uniform(3,7)^3"))
    master = np.random.default_rng(99)
    labels = (master.random(n) < 0.5).astype(np.int64)
    theta = cfg.theta_spec.sample(n, master)

    prob = np.minimum(theta[:, None] * theta[None, :] * cfg.C[labels[:, None], labels[None, :]] / n, 1.0)
    iu = np.triu_indices(n, k=1)
    block_of_pair = labels[iu[0]] + labels[iu[1]]  # 0: both class0, 1: cross, 2: both class1
    p = prob[iu]

    counts = np.zeros(3)
    for run in range(runs):
        g = sc.sample_adjacency(labels, theta, cfg.C, seed=1000 + run)
        rows = np.repeat(np.arange(n), g.degrees)
        mask = rows < g.col_indices
        bl = labels[rows[mask]] + labels[g.col_indices[mask]]
        counts += np.bincount(bl, minlength=3)
    for b in range(3):
        expected = p[block_of_pair == b].sum()
        var = (p[block_of_pair == b] * (1 - p[block_of_pair == b])).sum()
        se = np.sqrt(var / runs)
        assert abs(counts[b] / runs - expected) <= 3 * se + 1e-9


def test_node_degrees_converge_to_c_theta():
    # empirical mean degree per node over 200 regenerations tracks c * theta_i
    n, runs = 500, 200
    cfg = sc.DcsbmConfig.two_class(n, 16, 4, sc.ThetaSpec.parse("uniform(3,7)^3"))
    master = np.random.default_rng(17)
    labels = (master.random(n) < 0.5).astype(np.int64)
    theta = cfg.theta_spec.sample(n, master)
    acc = np.zeros(n)
    for run in range(runs):
        g = sc.sample_adjacency(labels, theta, cfg.C, seed=run)
        acc += g.degrees
    mean_deg = acc / runs
    target = 10.0 * theta  # c = (16 + 4) / 2
    rel_dev = np.abs(mean_deg - target) / target
    assert rel_dev.max() < 0.15


@st.composite
def valid_configs(draw):
    n = draw(st.integers(min_value=2, max_value=80))
    k = draw(st.integers(min_value=1, max_value=3))
    pi_raw = np.array(draw(st.lists(
        st.floats(min_value=0.2, max_value=1.0), min_size=k, max_size=k)))
    pi = pi_raw / pi_raw.sum()
    B = np.array(draw(st.lists(
        st.lists(st.floats(min_value=0.0, max_value=8.0), min_size=k, max_size=k),
        min_size=k, max_size=k)))
    B = 0.5 * (B + B.T)
    # lift the diagonal so every class has the same expected degree
    r = B @ pi
    c = r.max() + draw(st.floats(min_value=0.5, max_value=4.0))
    C = B + np.diag((c - r) / pi)
    theta = draw(st.sampled_from([
        sc.ThetaSpec(), sc.ThetaSpec.parse("uniform(3,7)^3")]))
    return sc.DcsbmConfig(n=n, k=k, C=C, pi=pi, theta_spec=theta)


@given(cfg=valid_configs(), seed=st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=40)
def test_generated_graphs_satisfy_invariants(cfg, seed):
    graph, truth = sc.generate_dcsbm(cfg, seed)
    graph.validate()
    assert graph.n == cfg.n
    assert truth.labels.min() >= 0 and truth.labels.max() < cfg.k
    assert abs(truth.theta.mean() - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# degree statistics
# ---------------------------------------------------------------------------

def test_estimate_c_phi_regular_graph():
    # 3-regular prism graph: all degrees 4 after adding diagonals
    pairs = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3),
             (0, 3), (1, 4), (2, 5), (0, 4), (1, 5), (2, 3)]
    g = sc.SparseGraph.from_pairs(6, pairs)
    assert set(g.degrees.tolist()) == {4}
    assert sc.estimate_c_phi(g) == pytest.approx(3.0)


def test_estimate_c_phi_star():
    g = sc.SparseGraph.from_pairs(6, [(0, j) for j in range(1, 6)])
    assert sc.estimate_c_phi(g) == pytest.approx(2.0)


def test_estimate_c_phi_tracks_model():
    theta = sc.ThetaSpec.parse("uniform(3,15)^5")
    cfg = sc.DcsbmConfig.two_class(5000, 14, 6, theta)
    graph, truth = sc.generate_dcsbm(cfg, seed=21)
    assert sc.estimate_c_phi(graph) == pytest.approx(truth.c * truth.phi, rel=0.10)


def test_estimate_c_phi_rejects_empty():
    g = sc.SparseGraph.from_pairs(4, np.empty((0, 2), dtype=np.int64))
    with pytest.raises(EmptyGraphError):
        sc.estimate_c_phi(g)


@given(seed=st.integers(min_value=0, max_value=1000))
@settings(max_examples=15)
def test_estimate_c_phi_permutation_invariant(seed):
    cfg = sc.DcsbmConfig.two_class(120, 10, 2)
    graph, _ = sc.generate_dcsbm(cfg, seed=seed)
    perm = np.random.default_rng(seed).permutation(graph.n)
    rows = np.repeat(np.arange(graph.n), graph.degrees)
    mask = rows < graph.col_indices
    pairs = np.stack([perm[rows[mask]], perm[graph.col_indices[mask]]], axis=1)
    pairs = np.stack([pairs.min(axis=1), pairs.max(axis=1)], axis=1)
    permuted = sc.SparseGraph.from_pairs(graph.n, pairs)
    if graph.num_edges:
        assert sc.estimate_c_phi(permuted) == pytest.approx(sc.estimate_c_phi(graph))


# ---------------------------------------------------------------------------
# edge-list I/O
# ---------------------------------------------------------------------------

def test_triangle_file(tmp_path):
    path = tmp_path / "tri.edges"
    path.write_text("0 1\n1 2\n0 2\n")
    g = sc.load_edge_list(path)
    assert g.n == 3
    np.testing.assert_array_equal(g.degrees, [2, 2, 2])


def test_duplicate_and_reversed_edges_collapse(tmp_path):
    path = tmp_path / "dup.edges"
    path.write_text("0 1\n1 0\n0 1\n")
    g = sc.load_edge_list(path)
    assert g.num_edges == 1
    np.testing.assert_array_equal(g.degrees, [1, 1])


def test_roundtrip_identity(tmp_path):
    cfg = sc.DcsbmConfig.two_class(100, 9, 3)
    graph, _ = sc.generate_dcsbm(cfg, seed=3)
    path = tmp_path / "g.edges"
    sc.save_edge_list(graph, path)
    back = sc.load_edge_list(path)
    assert back.n == graph.n
    np.testing.assert_array_equal(back.row_offsets, graph.row_offsets)
    np.testing.assert_array_equal(back.col_indices, graph.col_indices)


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 1\n2\n")
    with pytest.raises(EdgeListFormatError, match=":2"):
        sc.load_edge_list(path)


def test_index_beyond_declared_n(tmp_path):
    path = tmp_path / "oob.edges"
    path.write_text("0 7\n")
    with pytest.raises(EdgeListFormatError, match="exceeds"):
        sc.load_edge_list(path, n=5)


def test_header_preserves_isolated_trailing_nodes(tmp_path):
    g = sc.SparseGraph.from_pairs(5, [(0, 1)])
    path = tmp_path / "iso.edges"
    sc.save_edge_list(g, path)
    assert sc.load_edge_list(path).n == 5


def test_labels_roundtrip(tmp_path):
    labels = np.array([0, 1, 1, 0, 2])
    path = tmp_path / "l.labels"
    sc.save_labels(labels, path)
    np.testing.assert_array_equal(sc.load_labels(path), labels)


def test_positive_degree_core():
    g = sc.SparseGraph.from_pairs(6, [(0, 2), (2, 4)])
    core, ids = sc.graph.positive_degree_core(g)
    assert core.n == 3
    np.testing.assert_array_equal(ids, [0, 2, 4])
    np.testing.assert_array_equal(core.degrees, [1, 2, 1])
