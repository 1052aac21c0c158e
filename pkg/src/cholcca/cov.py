"""Data ingestion helpers, sample covariance and threshold graph selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalFailure
from .graph import Graph

__all__ = [
    "DataMatrix",
    "as_symmetric",
    "sample_covariance",
    "to_correlation",
    "generalized_inverse",
    "threshold_graph",
    "sparsity_threshold",
]

PINV_RTOL = 1e-10


@dataclass(frozen=True)
class DataMatrix:
    """n observations (rows) of p variables (columns)."""

    values: np.ndarray
    variable_names: tuple = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InputError(f"data must be a non-empty n x p matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("data contains non-finite entries")
        if self.variable_names is not None and len(self.variable_names) != v.shape[1]:
            raise InputError("number of variable names does not match column count")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


def as_symmetric(a, name="matrix", rtol=1e-12):
    """Validate a square finite matrix and return an exactly symmetric copy.

    Asymmetry beyond ``rtol`` relative to the largest entry is an input error;
    smaller discrepancies (round-off from files) are averaged away.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    scale = max(np.abs(a).max(initial=0.0), 1e-300)
    if np.abs(a - a.T).max(initial=0.0) > rtol * scale:
        raise InputError(f"{name} is not symmetric")
    return (a + a.T) / 2.0


def sample_covariance(data, center=True):
    """Sample covariance with divisor n (the maximum-likelihood convention)."""
    y = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    n = y.shape[0]
    if center:
        if n < 2:
            raise InputError("centred covariance needs at least two observations")
        y = y - y.mean(axis=0)
    s = y.T @ y / n
    return (s + s.T) / 2.0


def to_correlation(s):
    s = np.asarray(s, dtype=float)
    d = np.diag(s)
    bad = np.flatnonzero(~(d > 0))
    if bad.size:
        raise NumericalFailure(f"non-positive variance at index {bad[0] + 1}", column=int(bad[0]) + 1)
    r = s / np.sqrt(np.outer(d, d))
    r = (r + r.T) / 2.0
    np.fill_diagonal(r, 1.0)
    return r


def generalized_inverse(s, rtol=PINV_RTOL):
    """Moore-Penrose inverse of a symmetric matrix via its eigendecomposition.

    Eigenvalues with magnitude at most ``rtol * max|eigenvalue|`` are treated
    as zero.
    """
    w, v = np.linalg.eigh(s)
    cut = rtol * np.abs(w).max(initial=0.0)
    keep = np.abs(w) > cut
    inv = (v[:, keep] / w[keep]) @ v[:, keep].T
    return (inv + inv.T) / 2.0


def _offdiag_magnitudes(m):
    rows, cols = np.tril_indices(m.shape[0], -1)
    return rows, cols, np.abs(m[rows, cols])


def sparsity_threshold(magnitudes, target):
    """Smallest threshold leaving an off-diagonal sparsity of at least ``target``.

    An edge is kept iff its magnitude strictly exceeds the threshold, so the
    answer is an order statistic of the magnitudes.
    """
    if not 0.0 < target < 1.0:
        raise InputError(f"target sparsity must lie in (0, 1), got {target}")
    m = magnitudes.size
    if m == 0:
        return 0.0
    allowed = int(np.floor((1.0 - target) * m + 1e-9))
    ordered = np.sort(magnitudes)[::-1]
    if allowed >= m:
        return 0.0
    return float(ordered[allowed])


def threshold_graph(s, tau=None, target_sparsity=None, rtol=PINV_RTOL, return_threshold=False):
    """Graph from thresholding the (generalized) inverse of ``s``.

    Exactly one of ``tau`` (absolute threshold) or ``target_sparsity``
    (fraction of off-diagonal pairs left without an edge) must be given.
    With ``return_threshold`` the applied threshold is returned as well.
    """
    if (tau is None) == (target_sparsity is None):
        raise InputError("give exactly one of tau or target_sparsity")
    s = as_symmetric(s, "covariance")
    inv = generalized_inverse(s, rtol)
    rows, cols, mag = _offdiag_magnitudes(inv)
    if tau is None:
        tau = sparsity_threshold(mag, target_sparsity)
    elif tau < 0:
        raise InputError("threshold must be non-negative")
    keep = mag > tau
    g = Graph(s.shape[0], frozenset(zip(rows[keep].tolist(), cols[keep].tolist())))
    if return_threshold:
        return g, float(tau)
    return g
