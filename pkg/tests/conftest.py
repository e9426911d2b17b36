import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import sparsecomm as sc

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def small_sbm():
    """A modest assortative graph, comfortably above threshold."""
    cfg = sc.DcsbmConfig.two_class(300, 12, 2)
    graph, truth = sc.generate_dcsbm(cfg, seed=42)
    return graph, truth


@pytest.fixture(scope="session")
def hetero_sbm():
    """Degree-heterogeneous graph for operator tests."""
    cfg = sc.DcsbmConfig.two_class(180, 14, 4, sc.ThetaSpec.parse("uniform(3,7)^3"))
    graph, truth = sc.generate_dcsbm(cfg, seed=7)
    return graph, truth


@pytest.fixture
def triangle():
    return sc.SparseGraph.from_pairs(3, [(0, 1), (1, 2), (0, 2)])


def random_symmetric_operator(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    M = 0.5 * (M + M.T)
    return M, sc.SymmetricOperator(dim=n, apply=lambda x: M @ x)
