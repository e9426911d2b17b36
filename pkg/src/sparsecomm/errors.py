"""Exception types shared across the package."""


class SparsecommError(Exception):
    """Base class for package errors."""


class ConfigError(SparsecommError):
    """Invalid model, sweep, or CLI configuration."""


class EdgeListFormatError(SparsecommError):
    """Malformed edge-list or label file."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" ({loc})"
        super().__init__(message + loc)


class EmptyGraphError(SparsecommError):
    """Operation requires at least one edge."""


class SolverError(SparsecommError):
    """Eigensolver failed to converge where a converged result is required."""


class BeyondDetectableRankError(SparsecommError):
    """No zero crossing of the p-th Bethe-Hessian eigenvalue in the search
    bracket: component p carries no usable spectral information."""

    def __init__(self, p, upper, value_at_upper):
        self.p = p
        self.upper = upper
        self.value_at_upper = value_at_upper
        super().__init__(
            f"eigenvalue {p} stays positive up to r={upper:.6g} "
            f"(value {value_at_upper:.3e}); rank {p} is beyond the detectable range"
        )
