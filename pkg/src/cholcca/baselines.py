"""Iterative maximum-likelihood baselines for a known zero pattern.

Both solvers minimise ``tr(Omega S) - log det(Omega)`` over positive-definite
matrices with zeros at the non-edges of a graph:

* :func:`ipf_mle` cycles over the maximal cliques and matches the clique
  marginals of ``Omega^{-1}`` to those of ``S``;
* :func:`gipf_mle` cycles over rows, minimising exactly over the free entries
  of one row/column at a time (no clique enumeration needed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .cov import as_symmetric
from .errors import InputError, NumericalFailure
from .graph import DEFAULT_CLIQUE_CAP, maximal_cliques

__all__ = ["IterativeConfig", "IterativeResult", "neg_loglik", "ipf_mle", "gipf_mle"]


@dataclass
class IterativeConfig:
    """Stopping rule and starting point.

    ``init`` is ``"diagonal"`` (``diag(1/S_ii)``), ``"identity"`` (identity
    scaled by the mean inverse variance) or a positive-definite warm start
    with the right zero pattern.
    """

    tol: float = 1e-8
    max_iter: int = 5000
    init: object = "diagonal"
    clique_cap: int = DEFAULT_CLIQUE_CAP

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if int(self.max_iter) < 1:
            raise InputError("max_iter must be at least 1")
        self.max_iter = int(self.max_iter)


@dataclass
class IterativeResult:
    omega: np.ndarray
    iterations: int
    converged: bool
    final_delta: float
    neg_loglik: float
    history: list = field(default_factory=list, repr=False)

    def summary(self):
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_delta": self.final_delta,
            "neg_loglik": self.neg_loglik,
        }


def neg_loglik(omega, s):
    try:
        c = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        return np.inf
    return float(np.sum(omega * s) - 2.0 * np.log(np.diag(c)).sum())


def _start(s, g, init):
    p = s.shape[0]
    if isinstance(init, str):
        if init == "diagonal":
            return np.diag(1.0 / np.diag(s))
        if init == "identity":
            return np.eye(p) * np.mean(1.0 / np.diag(s))
        raise InputError(f"unknown init {init!r}")
    om = as_symmetric(init, "warm start")
    if om.shape != (p, p):
        raise InputError("warm start has the wrong dimension")
    mask = g.adjacency() | np.eye(p, dtype=bool)
    om = np.where(mask, om, 0.0)
    try:
        np.linalg.cholesky(om)
    except np.linalg.LinAlgError:
        raise InputError("warm start is not positive definite") from None
    return om


def _prepare(s, g):
    s = as_symmetric(s, "covariance")
    if s.shape[0] != g.p:
        raise InputError(f"covariance is {s.shape[0]}x{s.shape[0]} but graph has {g.p} vertices")
    if not np.all(np.diag(s) > 0):
        raise InputError("covariance needs a positive diagonal")
    return s


def _inv_pd(a, what):
    try:
        cf = sla.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise NumericalFailure(f"{what} is not positive definite") from None
    out = sla.cho_solve(cf, np.eye(a.shape[0]), check_finite=False)
    return (out + out.T) / 2.0


def ipf_mle(s, g, cfg=None):
    cfg = cfg or IterativeConfig()
    s = _prepare(s, g)
    cliques = [np.array(c, dtype=np.intp) for c in maximal_cliques(g, cap=cfg.clique_cap)]
    s_inv = [_inv_pd(s[np.ix_(c, c)], f"sample covariance block on clique {tuple(c + 1)}")
             for c in cliques]
    omega = _start(s, g, cfg.init)
    history = [neg_loglik(omega, s)]
    converged = False
    delta = np.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        old = omega.copy()
        sigma = _inv_pd(omega, "current estimate")
        for c, sc_inv in zip(cliques, s_inv):
            sig_cc = sigma[np.ix_(c, c)]
            upd = sc_inv - _inv_pd(sig_cc, "fitted clique block")
            omega[np.ix_(c, c)] += upd
            # Woodbury update of sigma for the rank-|c| change
            m = np.linalg.solve(np.eye(c.size) + upd @ sig_cc, upd)
            sigma -= sigma[:, c] @ m @ sigma[c, :]
            sigma = (sigma + sigma.T) / 2.0
        omega = (omega + omega.T) / 2.0
        delta = float(np.abs(omega - old).max())
        history.append(neg_loglik(omega, s))
        if delta < cfg.tol:
            converged = True
            break
    return IterativeResult(omega, it, converged, delta, history[-1], history)


def gipf_mle(s, g, cfg=None):
    cfg = cfg or IterativeConfig()
    s = _prepare(s, g)
    p = s.shape[0]
    nbrs = [np.asarray(n, dtype=np.intp) for n in g.neighbors]
    omega = _start(s, g, cfg.init)
    history = [neg_loglik(omega, s)]
    converged = False
    delta = np.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        old = omega.copy()
        w = _inv_pd(omega, "current estimate")
        for j in range(p):
            nz = nbrs[j]
            s22 = s[j, j]
            wj = w[:, j].copy()
            w22 = wj[j]
            # b = inverse of omega with row/column j removed (zero row/column at j)
            w -= np.outer(wj, wj / w22)
            if nz.size:
                a = w[np.ix_(nz, nz)]
                try:
                    cf = sla.cho_factor(a, lower=True, check_finite=False)
                except np.linalg.LinAlgError:
                    raise NumericalFailure(f"row {j + 1}: conditional covariance block is singular") from None
                off = -sla.cho_solve(cf, s[nz, j], check_finite=False) / s22
                u = w[:, nz] @ off
                w += np.outer(u, s22 * u)
                omega[nz, j] = off
                omega[j, nz] = off
                omega[j, j] = 1.0 / s22 + off @ (a @ off)
                w[:, j] = -s22 * u
                w[j, :] = -s22 * u
            else:
                omega[j, j] = 1.0 / s22
            w[j, j] = s22
        delta = float(np.abs(omega - old).max())
        history.append(neg_loglik(omega, s))
        if delta < cfg.tol:
            converged = True
            break
    return IterativeResult(omega, it, converged, delta, history[-1], history)
