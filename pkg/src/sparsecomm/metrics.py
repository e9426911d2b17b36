"""Evaluation metrics: chance-corrected overlap, detectability threshold,
and spectral-gap diagnostics.

The overlap of an estimated labeling against the truth is
(max_sigma (1/n) sum_i delta(sigma(est_i), truth_i) - 1/k) / (1 - 1/k),
maximized over label permutations sigma (raw agreement is meaningless under
label switching). The identity-permutation value is reported alongside for
transparency, as is the value restricted to nodes of positive degree.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "OverlapReport",
    "DetectabilityInfo",
    "GapProfile",
    "overlap",
    "detectability",
    "gap_profile",
    "best_permutation",
]

_BRUTE_FORCE_MAX_K = 8


def _confusion(estimated, truth, k):
    m = np.zeros((k, k), dtype=np.int64)
    np.add.at(m, (estimated, truth), 1)
    return m


def best_permutation(confusion, method="auto"):
    """Permutation sigma (est label -> truth label) maximizing agreement.

    method: "auto" uses exhaustive search for k <= 8 and Hungarian assignment
    above; "brute" and "hungarian" force one path (used to cross-check them).

    Returns:
        (sigma as an int array of length k, total agreement count)
    """
    confusion = np.asarray(confusion)
    k = confusion.shape[0]
    if method == "auto":
        method = "brute" if k <= _BRUTE_FORCE_MAX_K else "hungarian"
    if method == "brute":
        best_sigma, best_hits = None, -1
        for perm in itertools.permutations(range(k)):
            hits = int(confusion[np.arange(k), perm].sum())
            if hits > best_hits:
                best_sigma, best_hits = perm, hits
        return np.array(best_sigma, dtype=np.int64), best_hits
    if method == "hungarian":
        rows, cols = linear_sum_assignment(-confusion)
        sigma = np.empty(k, dtype=np.int64)
        sigma[rows] = cols
        hits = int(confusion[rows, cols].sum())
        return sigma, hits
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class OverlapReport:
    """Chance-corrected agreement: 0 for random guessing, 1 for perfect."""

    overlap: float
    best_permutation: tuple
    overlap_identity: float
    overlap_positive_degree: float = None


def _chance_corrected(hits, n, k):
    if n == 0:
        return 0.0
    return (hits / n - 1.0 / k) / (1.0 - 1.0 / k)


def overlap(estimated, truth, k, degrees=None):
    """Overlap of an estimated labeling against the ground truth.

    Args:
        estimated, truth: integer label vectors of equal length, values in [0, k).
        k: number of classes (>= 2); sets the chance-correction level.
        degrees: optional node degrees; when given, the report also carries
            the overlap restricted to nodes with positive degree.

    Returns:
        OverlapReport
    """
    estimated = np.asarray(estimated, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if estimated.shape != truth.shape or estimated.ndim != 1:
        raise ValueError("label vectors must be 1-D and of equal length")
    if k < 2:
        raise ValueError("k must be at least 2")
    for name, arr in (("estimated", estimated), ("truth", truth)):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValueError(f"{name} labels must lie in [0, {k})")
    n = estimated.shape[0]
    conf = _confusion(estimated, truth, k)
    sigma, hits = best_permutation(conf)
    identity_hits = int(np.trace(conf))
    report_kwargs = dict(
        overlap=_chance_corrected(hits, n, k),
        best_permutation=tuple(int(s) for s in sigma),
        overlap_identity=_chance_corrected(identity_hits, n, k),
    )
    if degrees is not None:
        degrees = np.asarray(degrees)
        if degrees.shape != estimated.shape:
            raise ValueError("degrees must match the label vectors")
        mask = degrees > 0
        sub_conf = _confusion(estimated[mask], truth[mask], k)
        _, sub_hits = best_permutation(sub_conf)
        report_kwargs["overlap_positive_degree"] = _chance_corrected(
            sub_hits, int(mask.sum()), k
        )
    return OverlapReport(**report_kwargs)


@dataclass(frozen=True)
class DetectabilityInfo:
    """Position of a two-class problem relative to the detectability threshold."""

    alpha: float
    alpha_c: float
    detectable: bool


def detectability(c_in, c_out, c, phi):
    """alpha = (c_in - c_out)/sqrt(c) against alpha_c = 2/sqrt(phi)."""
    if c <= 0:
        raise ValueError("c must be positive")
    if phi <= 0:
        raise ValueError("phi must be positive")
    alpha = (c_in - c_out) / math.sqrt(c)
    alpha_c = 2.0 / math.sqrt(phi)
    return DetectabilityInfo(alpha=alpha, alpha_c=alpha_c, detectable=alpha > alpha_c)


@dataclass(frozen=True)
class GapProfile:
    gap: float
    bulk_spacing: float


def gap_profile(values, p):
    """Size of the p-th spectral gap against the local bulk spacing.

    Args:
        values: eigenvalues sorted descending.
        p: gap position; gap = values[p-1] - values[p].

    Returns:
        GapProfile(gap, bulk_spacing) where bulk_spacing is the median
        spacing of the values below position p. Requires at least p + 4
        values so the median covers three spacings.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("values must be a 1-D list of eigenvalues")
    if p < 1:
        raise ValueError("p must be at least 1")
    if values.shape[0] < p + 4:
        raise ValueError(f"need at least {p + 4} values for gap_profile at p={p}")
    scale = max(1.0, float(np.abs(values).max()))
    if np.any(np.diff(values) > 1e-9 * scale):
        raise ValueError("values must be sorted in descending order")
    gap = float(values[p - 1] - values[p])
    spacings = -np.diff(values[p:])
    return GapProfile(gap=gap, bulk_spacing=float(np.median(spacings)))
