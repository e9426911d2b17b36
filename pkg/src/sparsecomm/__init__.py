"""Spectral community detection on sparse graphs with difficulty-adapted
Laplacian regularization."""

from ._kernels import BACKEND
from .clustering import (
    ClusterOptions,
    ClusterResult,
    Embedding,
    build_embedding,
    cluster,
    embedding_from_fixed_tau,
    kmeans,
)
from .eigen import EigenPairs, SymmetricOperator, dense_oracle, extremal_eigs
from .errors import (
    BeyondDetectableRankError,
    ConfigError,
    EdgeListFormatError,
    EmptyGraphError,
    SolverError,
    SparsecommError,
)
from .graph import (
    DcsbmConfig,
    ModelGroundTruth,
    SparseGraph,
    ThetaSpec,
    estimate_c_phi,
    generate_dcsbm,
    load_edge_list,
    load_labels,
    sample_adjacency,
    save_edge_list,
    save_labels,
)
from .metrics import (
    DetectabilityInfo,
    GapProfile,
    OverlapReport,
    detectability,
    gap_profile,
    overlap,
)
from .operators import (
    BetheHessianOp,
    InformativeVector,
    RegLaplacianOp,
    ZetaResult,
    bethe_hessian_smallest,
    dense_bethe_hessian,
    dense_reg_laplacian,
    estimate_k,
    find_zeta,
    informative_eigenvector,
    reg_laplacian_eigs,
    spectrum_report,
)

__version__ = "0.1.0"
