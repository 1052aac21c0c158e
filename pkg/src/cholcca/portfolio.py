"""Global minimum-variance portfolios from rolling-window precision estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cca import cca_estimate
from .cov import as_symmetric, sample_covariance, threshold_graph
from .errors import InputError, NumericalFailure

__all__ = ["min_variance_weights", "RebalanceRecord", "rolling_portfolio"]


def min_variance_weights(omega):
    """Fully invested minimum-variance weights ``Omega 1 / (1' Omega 1)``."""
    omega = as_symmetric(omega, "precision matrix")
    row_sums = omega.sum(axis=1)
    total = row_sums.sum()
    if not total > 0:
        raise NumericalFailure("1' Omega 1 is not positive; the precision estimate is not positive definite")
    return row_sums / total


@dataclass
class RebalanceRecord:
    start: int            # first observation (0-based) used for estimation
    end: int              # one past the last estimation observation
    weights: np.ndarray
    in_sample_variance: float
    out_of_sample_variance: float
    n_edges: int


def rolling_portfolio(returns, window, step=None, graph=None, target_sparsity=None,
                      ordering="rcm"):
    """Re-estimate and rebalance every ``step`` observations.

    Each window of ``window`` rows gives a sample covariance S and a graph
    (a fixed ``graph`` or a thresholded one at ``target_sparsity``). The
    weights come from the CCA precision estimate. In-sample variance is
    ``w' S w``; out-of-sample variance is the variance (divisor count) of the
    realised portfolio returns over the following ``step`` rows, or NaN
    when fewer than two of them exist.
    """
    r = np.asarray(returns, dtype=float)
    if r.ndim != 2:
        raise InputError("returns must be a 2-D array")
    t_len, p = r.shape
    step = window if step is None else int(step)
    if window < 2 or window > t_len:
        raise InputError(f"window must lie in [2, {t_len}]")
    if step < 1:
        raise InputError("rebalancing step must be positive")
    if (graph is None) == (target_sparsity is None):
        raise InputError("give exactly one of a graph or a target sparsity")
    if graph is not None and graph.p != p:
        raise InputError(f"graph has {graph.p} vertices, returns have {p} columns")
    records = []
    for end in range(window, t_len + 1, step):
        start = end - window
        s = sample_covariance(r[start:end])
        g = graph if graph is not None else threshold_graph(s, target_sparsity=target_sparsity)
        try:
            est = cca_estimate(s, g, ordering=ordering)
        except NumericalFailure as exc:
            raise NumericalFailure(f"window [{start + 1}, {end}]: {exc}", column=exc.column) from None
        w = min_variance_weights(est.omega_hat)
        future = r[end:end + step] @ w
        oos = float(np.mean((future - future.mean()) ** 2)) if future.size >= 2 else float("nan")
        records.append(RebalanceRecord(start, end, w, float(w @ s @ w), oos, g.n_edges))
    return records
