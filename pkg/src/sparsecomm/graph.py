"""Sparse graph container, degree-corrected block-model generator, and edge I/O.

Graphs are immutable, undirected, unweighted, without self-loops, stored in
CSR form with a cached degree vector. The generator samples every unordered
pair (i, j) independently with probability min(1, theta_i theta_j C[l_i, l_j] / n),
using per-block geometric skipping so the cost is O(|E| + n) rather than O(n^2).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, EdgeListFormatError, EmptyGraphError

__all__ = [
    "SparseGraph",
    "ThetaSpec",
    "DcsbmConfig",
    "ModelGroundTruth",
    "generate_dcsbm",
    "sample_adjacency",
    "estimate_c_phi",
    "save_edge_list",
    "load_edge_list",
    "save_labels",
    "load_labels",
]


# ---------------------------------------------------------------------------
# Graph container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseGraph:
    """Undirected unweighted graph in CSR form.

    Attributes:
        n: node count.
        row_offsets: int64 array of length n + 1.
        col_indices: int64 array of neighbor lists, concatenated row by row.
        degrees: int64 array, degrees[i] == row_offsets[i+1] - row_offsets[i].
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    degrees: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.degrees is None:
            object.__setattr__(self, "degrees", np.diff(self.row_offsets))
        for name in ("row_offsets", "col_indices", "degrees"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)

    @property
    def num_edges(self):
        """Number of undirected edges."""
        return int(self.col_indices.shape[0]) // 2

    def neighbors(self, i):
        return self.col_indices[self.row_offsets[i]:self.row_offsets[i + 1]]

    def validate(self):
        """Check CSR structure, symmetry, absence of self-loops."""
        if self.n < 0 or self.row_offsets.shape[0] != self.n + 1:
            raise ValueError("row_offsets length must be n + 1")
        if self.row_offsets[0] != 0 or self.row_offsets[-1] != self.col_indices.shape[0]:
            raise ValueError("row_offsets must span col_indices")
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if not np.array_equal(self.degrees, np.diff(self.row_offsets)):
            raise ValueError("degrees inconsistent with row_offsets")
        if self.col_indices.shape[0]:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.n:
                raise ValueError("column index out of range")
        rows = np.repeat(np.arange(self.n), self.degrees)
        if np.any(rows == self.col_indices):
            raise ValueError("self-loop present")
        # symmetry: the sorted set of (i, j) pairs equals the set of (j, i)
        fwd = rows * self.n + self.col_indices
        bwd = self.col_indices * self.n + rows
        if not np.array_equal(np.sort(fwd), np.sort(bwd)):
            raise ValueError("adjacency not symmetric")
        return self

    @staticmethod
    def from_pairs(n, pairs):
        """Build from unique undirected pairs (i < j), shape (m, 2)."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if pairs.shape[0]:
            if pairs.min() < 0 or pairs.max() >= n:
                raise ValueError("pair index out of range")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ValueError("self-loop in pair list")
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
        return SparseGraph(n=n, row_offsets=offsets, col_indices=cols)


# ---------------------------------------------------------------------------
# Model configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaSpec:
    """Degree-propensity sampler: draw from `dist`, raise to `power`,
    then rescale to empirical mean one.

    Supported dists: "constant" (all ones) and "uniform" with params (low, high).
    """

    dist: str = "constant"
    params: tuple = ()
    power: float = 1.0

    def __post_init__(self):
        if self.dist not in ("constant", "uniform"):
            raise ConfigError(f"unknown theta distribution {self.dist!r}")
        if self.dist == "uniform":
            if len(self.params) != 2:
                raise ConfigError("uniform theta needs (low, high) params")
            low, high = self.params
            if not (0 < low < high):
                raise ConfigError(
                    "uniform theta requires 0 < low < high to keep propensities positive"
                )

    def sample(self, n, rng):
        if self.dist == "constant":
            return np.ones(n)
        low, high = self.params
        theta = rng.uniform(low, high, size=n) ** self.power
        if np.any(theta <= 0) or not np.all(np.isfinite(theta)):
            raise ConfigError("theta sampler produced non-positive or non-finite values")
        return theta / theta.mean()

    @staticmethod
    def parse(text):
        """Parse "constant", "uniform(3,15)" or "uniform(3,15)^5"."""
        text = text.strip()
        if text == "constant":
            return ThetaSpec()
        power = 1.0
        if "^" in text:
            text, _, ptxt = text.partition("^")
            try:
                power = float(ptxt)
            except ValueError:
                raise ConfigError(f"bad theta power {ptxt!r}") from None
        if not (text.startswith("uniform(") and text.endswith(")")):
            raise ConfigError(f"cannot parse theta spec {text!r}")
        body = text[len("uniform("):-1]
        try:
            low, high = (float(v) for v in body.split(","))
        except ValueError:
            raise ConfigError(f"bad uniform parameters {body!r}") from None
        return ThetaSpec("uniform", (low, high), power)

    def __str__(self):
        if self.dist == "constant":
            return "constant"
        low, high = self.params
        out = f"uniform({low:g},{high:g})"
        if self.power != 1.0:
            out += f"^{self.power:g}"
        return out


_ROWSUM_RTOL = 1e-6


@dataclass(frozen=True)
class DcsbmConfig:
    """Generative parameters: n nodes, k classes, affinity C, proportions pi,
    and a degree-propensity sampler.

    The affinity must satisfy C diag(pi) 1 = c 1 (constant expected degree
    across classes); the constructor rejects violations.
    """

    n: int
    k: int
    C: np.ndarray
    pi: np.ndarray
    theta_spec: ThetaSpec = ThetaSpec()

    def __post_init__(self):
        object.__setattr__(self, "C", np.array(self.C, dtype=float))
        object.__setattr__(self, "pi", np.array(self.pi, dtype=float))
        if self.n < 2:
            raise ConfigError("need at least 2 nodes")
        if self.k < 1:
            raise ConfigError("need at least 1 class")
        if self.C.shape != (self.k, self.k):
            raise ConfigError(f"affinity must be {self.k}x{self.k}")
        if self.pi.shape != (self.k,):
            raise ConfigError(f"pi must have length {self.k}")
        if np.any(self.pi <= 0) or abs(self.pi.sum() - 1.0) > 1e-9:
            raise ConfigError("pi entries must be positive and sum to 1")
        if np.any(self.C < 0):
            raise ConfigError("affinity entries must be nonnegative")
        if not np.allclose(self.C, self.C.T, rtol=1e-12, atol=1e-12):
            raise ConfigError("affinity must be symmetric")
        rowsums = self.C @ self.pi
        c = rowsums.mean()
        if c <= 0:
            if np.any(rowsums != 0):
                raise ConfigError("expected degree must be positive")
        elif np.max(np.abs(rowsums - c)) > _ROWSUM_RTOL * c:
            raise ConfigError(
                "C diag(pi) 1 must be constant (equal expected degree per class); "
                f"row sums {rowsums}"
            )
        self.C.setflags(write=False)
        self.pi.setflags(write=False)

    @property
    def expected_degree(self):
        return float((self.C @ self.pi).mean())

    @staticmethod
    def two_class(n, c_in, c_out, theta_spec=ThetaSpec()):
        """Balanced two-class shorthand."""
        return DcsbmConfig(
            n=n,
            k=2,
            C=np.array([[c_in, c_out], [c_out, c_in]], dtype=float),
            pi=np.array([0.5, 0.5]),
            theta_spec=theta_spec,
        )

    @staticmethod
    def planted(n, k, c_in, c_out, theta_spec=ThetaSpec()):
        """Balanced k-class model with diagonal c_in and off-diagonal c_out."""
        C = np.full((k, k), float(c_out))
        np.fill_diagonal(C, float(c_in))
        return DcsbmConfig(n=n, k=k, C=C, pi=np.full(k, 1.0 / k), theta_spec=theta_spec)


@dataclass(frozen=True)
class ModelGroundTruth:
    """Planted structure attached to a generated graph.

    Attributes:
        labels: length-n class assignment in [0, k).
        theta: length-n positive propensities with empirical mean 1.
        c: expected average degree of the model.
        phi: empirical second moment of theta.
        model_eigs: eigenvalues of C diag(pi), descending.
        model_vecs: matching eigenvectors (columns), in class space.
    """

    labels: np.ndarray
    theta: np.ndarray
    c: float
    phi: float
    model_eigs: np.ndarray
    model_vecs: np.ndarray


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _triu_decode(t, m):
    """Map flat indices of the strict upper triangle of an m x m grid,
    enumerated row-major, back to (i, j) with i < j."""
    t = np.asarray(t, dtype=np.int64)
    # row i starts at flat position i*m - i*(i+1)/2
    mf = float(m)
    i = np.floor(mf - 0.5 - np.sqrt((mf - 0.5) ** 2 - 2.0 * t)).astype(np.int64)
    i = np.clip(i, 0, m - 2)
    # float sqrt can be off by one row either way
    for _ in range(2):
        start = i * m - (i * (i + 1)) // 2
        i = np.where(start > t, i - 1, i)
        nxt = (i + 1) * m - ((i + 1) * (i + 2)) // 2
        i = np.where(nxt <= t, i + 1, i)
    start = i * m - (i * (i + 1)) // 2
    j = t - start + i + 1
    return i, j


def _skip_sample(total, p_max, rng):
    """Flat indices of Bernoulli(p_max) successes over `total` slots,
    via geometric gaps, plus one uniform per success for later thinning."""
    if total <= 0 or p_max <= 0.0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    if p_max >= 1.0:
        return np.arange(total, dtype=np.int64), rng.random(total)
    hits = []
    thins = []
    pos = np.int64(-1)
    while True:
        expect = (total - int(pos) - 1) * p_max
        chunk = max(64, int(1.2 * expect) + 16)
        gaps = rng.geometric(p_max, size=chunk).astype(np.int64)
        t = pos + np.cumsum(gaps)
        inside = t < total
        kept = t[inside]
        hits.append(kept)
        thins.append(rng.random(kept.shape[0]))
        if not inside.all():
            break
        pos = t[-1]
    return np.concatenate(hits), np.concatenate(thins)


def _sample_block(idx_a, idx_b, theta, coef, rng, same):
    """Sample edges of one class-pair block. Returns (i, j) node arrays.

    coef is C[a, b] / n; pair (u, v) is kept with probability
    min(1, theta_u theta_v coef).
    """
    if same:
        m = idx_a.shape[0]
        total = m * (m - 1) // 2
    else:
        total = idx_a.shape[0] * idx_b.shape[0]
    if total == 0 or coef <= 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    th_a = theta[idx_a]
    th_b = th_a if same else theta[idx_b]
    p_max = min(1.0, float(th_a.max() * th_b.max() * coef))
    t, u = _skip_sample(total, p_max, rng)
    if t.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if same:
        ii, jj = _triu_decode(t, idx_a.shape[0])
        cand_i, cand_j = idx_a[ii], idx_a[jj]
    else:
        cand_i = idx_a[t // idx_b.shape[0]]
        cand_j = idx_b[t % idx_b.shape[0]]
    p_pair = np.minimum(theta[cand_i] * theta[cand_j] * coef, 1.0)
    keep = u < p_pair / p_max
    return cand_i[keep], cand_j[keep]


def sample_adjacency(labels, theta, C, seed):
    """Sample a graph given fixed labels and propensities.

    Every unordered pair (i, j) holds an edge independently with probability
    min(1, theta_i theta_j C[labels_i, labels_j] / n). Deterministic per seed.
    """
    labels = np.asarray(labels, dtype=np.int64)
    theta = np.asarray(theta, dtype=float)
    C = np.asarray(C, dtype=float)
    n = labels.shape[0]
    k = C.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    class_idx = [np.flatnonzero(labels == a) for a in range(k)]
    src, dst = [], []
    for a in range(k):
        for b in range(a, k):
            i, j = _sample_block(
                class_idx[a], class_idx[b], theta, C[a, b] / n, rng, same=(a == b)
            )
            src.append(i)
            dst.append(j)
    src = np.concatenate(src) if src else np.empty(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.empty(0, dtype=np.int64)
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    order = np.lexsort((hi, lo))
    pairs = np.stack([lo[order], hi[order]], axis=1)
    return SparseGraph.from_pairs(n, pairs)


def generate_dcsbm(config, seed):
    """Draw one graph from the model.

    Labels are i.i.d. from pi; theta is sampled from the spec and rescaled to
    empirical mean 1; edges follow the block probabilities. Deterministic for
    a fixed seed.

    Returns:
        (SparseGraph, ModelGroundTruth)
    """
    if config.n < 2:
        raise ConfigError("need at least 2 nodes")
    master = np.random.default_rng(np.random.SeedSequence(seed))
    cum = np.cumsum(config.pi)
    cum[-1] = 1.0
    labels = np.searchsorted(cum, master.random(config.n), side="right")
    labels = np.minimum(labels, config.k - 1).astype(np.int64)
    theta = config.theta_spec.sample(config.n, master)
    edge_seed = int(master.integers(0, 2**63 - 1))
    graph = sample_adjacency(labels, theta, config.C, edge_seed)

    c = config.expected_degree
    # C diag(pi) is, by similarity, diag(pi)^(1/2) C diag(pi)^(1/2)
    sq = np.sqrt(config.pi)
    sym = sq[:, None] * config.C * sq[None, :]
    vals, vecs = np.linalg.eigh(sym)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order] / sq[:, None]
    truth = ModelGroundTruth(
        labels=labels,
        theta=theta,
        c=c,
        phi=float(np.mean(theta**2)),
        model_eigs=vals,
        model_vecs=vecs,
    )
    return graph, truth


# ---------------------------------------------------------------------------
# Degree statistics
# ---------------------------------------------------------------------------

def positive_degree_core(graph):
    """Subgraph induced on nodes with positive degree.

    Returns (core_graph, node_ids) where node_ids[i] is the original index
    of core node i. The degree-zero rows contribute nothing to any of the
    operators here, but removing them makes the unregularized Laplacian
    well-defined.
    """
    keep = np.flatnonzero(graph.degrees > 0)
    remap = -np.ones(graph.n, dtype=np.int64)
    remap[keep] = np.arange(keep.shape[0])
    rows = np.repeat(np.arange(graph.n), graph.degrees)
    mask = rows < graph.col_indices
    pairs = np.stack([remap[rows[mask]], remap[graph.col_indices[mask]]], axis=1)
    return SparseGraph.from_pairs(keep.shape[0], pairs), keep


def estimate_c_phi(graph):
    """Data-driven estimate of c * Phi: sum(d^2)/sum(d) - 1.

    Under the model E[d_i] = c theta_i, so E[d^2]/E[d] = c Phi + 1.
    """
    total = graph.degrees.sum()
    if total == 0:
        raise EmptyGraphError("graph has no edges; cannot estimate c*Phi")
    return float((graph.degrees.astype(float) ** 2).sum() / total - 1.0)


# ---------------------------------------------------------------------------
# Edge-list and label I/O
# ---------------------------------------------------------------------------

def save_edge_list(graph, path):
    """Write "# n=<n>" then one "i j" line per undirected edge (i < j)."""
    rows = np.repeat(np.arange(graph.n), graph.degrees)
    mask = rows < graph.col_indices
    with open(path, "w") as fh:
        fh.write(f"# n={graph.n}\n")
        for i, j in zip(rows[mask], graph.col_indices[mask]):
            fh.write(f"{i} {j}\n")


def load_edge_list(path, n=None):
    """Read whitespace-separated 0-indexed pairs; symmetrize and deduplicate.

    A "# n=<count>" header (as written by save_edge_list) fixes the node
    count; otherwise it defaults to max index + 1. Explicit `n` overrides
    both, and any index >= n is a bounds error.
    """
    pairs = []
    header_n = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n=") and header_n is None:
                    try:
                        header_n = int(body[2:])
                    except ValueError:
                        raise EdgeListFormatError(
                            f"bad header {line!r}", path=path, line=lineno
                        ) from None
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListFormatError(
                    f"expected two fields, got {len(parts)}", path=path, line=lineno
                )
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListFormatError(
                    f"non-integer endpoint in {line!r}", path=path, line=lineno
                ) from None
            if i < 0 or j < 0:
                raise EdgeListFormatError("negative node index", path=path, line=lineno)
            if i != j:  # silently drop self-loops
                pairs.append((min(i, j), max(i, j)))
    size = n if n is not None else header_n
    if pairs:
        arr = np.array(pairs, dtype=np.int64)
        top = int(arr.max())
        if size is None:
            size = top + 1
        elif top >= size:
            raise EdgeListFormatError(
                f"node index {top} exceeds declared n={size}", path=path
            )
        key = arr[:, 0] * size + arr[:, 1]
        arr = arr[np.unique(key, return_index=True)[1]]
    else:
        arr = np.empty((0, 2), dtype=np.int64)
        if size is None:
            size = 0
    return SparseGraph.from_pairs(size, arr)


def save_labels(labels, path):
    with open(path, "w") as fh:
        fh.write(f"# n={len(labels)}\n")
        for lab in labels:
            fh.write(f"{int(lab)}\n")


def load_labels(path):
    vals = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals.append(int(line))
            except ValueError:
                raise EdgeListFormatError(
                    f"non-integer label {line!r}", path=path, line=lineno
                ) from None
    return np.array(vals, dtype=np.int64)
