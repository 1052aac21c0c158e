"""Synthetic precision matrices, named graph families and data samplers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .chordal import CholFactor
from .cov import DataMatrix
from .errors import InputError
from .graph import Graph

__all__ = [
    "SyntheticModel",
    "gen_random_model",
    "gen_named_graph",
    "parse_graph_kind",
    "sample_gaussian",
    "sample_mvt",
    "rel_frobenius_error",
    "SUPPORT_ATOL",
]

SUPPORT_ATOL = 1e-12


@dataclass(frozen=True)
class SyntheticModel:
    omega_true: np.ndarray
    l_true: CholFactor
    graph: Graph
    seed: int

    @property
    def p(self):
        return self.omega_true.shape[0]


def gen_random_model(p, seed, n_nonzero=None):
    """Random sparse lower-triangular factor and the precision it generates.

    About ``2p`` strictly-lower positions (exactly ``min(2p, p(p-1)/2)`` by
    default) are chosen uniformly; magnitudes are U[0.3, 0.7] with half the
    signs negative, and the diagonal is U[2, 5]. The returned graph is the
    exact off-diagonal support of ``L L^T``, which usually has more than 2p
    edges.
    """
    if p < 2:
        raise InputError("p must be at least 2")
    rng = np.random.default_rng(seed)
    rows, cols = np.tril_indices(p, -1)
    k = min(2 * p if n_nonzero is None else int(n_nonzero), rows.size)
    pick = np.sort(rng.choice(rows.size, size=k, replace=False))
    mags = rng.uniform(0.3, 0.7, size=k)
    signs = np.ones(k)
    signs[: k // 2] = -1.0
    rng.shuffle(signs)
    L = np.zeros((p, p))
    L[rows[pick], cols[pick]] = mags * signs
    L[np.arange(p), np.arange(p)] = rng.uniform(2.0, 5.0, size=p)
    omega = L @ L.T
    omega = (omega + omega.T) / 2.0
    g = Graph.from_adjacency(np.abs(omega) > SUPPORT_ATOL)
    return SyntheticModel(omega, CholFactor(L, L != 0), g, int(seed))


def _grid(a, b):
    if a < 1 or b < 1:
        raise InputError("grid needs a, b >= 1")
    w = b + 1
    edges = []
    for r in range(a + 1):
        for c in range(w):
            if c < b:
                edges.append((r * w + c, r * w + c + 1))
            if r < a:
                edges.append((r * w + c, (r + 1) * w + c))
    return Graph.from_edges((a + 1) * w, edges)


def _cycle(p):
    if p < 3:
        raise InputError("cycle needs p >= 3")
    return Graph.from_edges(p, [(i, (i + 1) % p) for i in range(p)])


def _bipartite(m, p):
    # the m vertices of part A carry the largest labels
    if not (1 <= m <= p / 2):
        raise InputError("bipartite needs 1 <= m <= p/2")
    a = range(p - m, p)
    b = range(p - m)
    return Graph.from_edges(p, [(u, v) for u in a for v in b])


def _multipartite3(m):
    if m < 1:
        raise InputError("multipartite3 needs m >= 1")
    p = 3 * m
    return Graph.from_edges(p, [(u, v) for u in range(p) for v in range(u)
                                if u // 3 != v // 3])


def _almost_complete(p):
    if p < 4:
        raise InputError("almost_complete needs p >= 4")
    drop = {(p - 1, p - 3), (p - 2, p - 4)}
    return Graph.from_edges(p, [(u, v) for u in range(p) for v in range(u)
                                if (u, v) not in drop])


_FAMILIES = {
    "grid": (_grid, 2),
    "cycle": (_cycle, 1),
    "bipartite": (_bipartite, 2),
    "multipartite3": (_multipartite3, 1),
    "almost_complete": (_almost_complete, 1),
}


def gen_named_graph(kind, *params):
    """Graph families used in the complexity examples.

    ``grid(a, b)``: (a+1)(b+1) vertices, row-major labels.
    ``cycle(p)``. ``bipartite(m, p)``: complete bipartite, part A = the last m labels.
    ``multipartite3(m)``: p = 3m, groups of three consecutive labels, edges between groups.
    ``almost_complete(p)``: complete graph minus (p, p-2) and (p-1, p-3).
    """
    try:
        fn, arity = _FAMILIES[kind]
    except KeyError:
        raise InputError(f"unknown graph family {kind!r}; choose from {sorted(_FAMILIES)}") from None
    if len(params) != arity:
        raise InputError(f"{kind} takes {arity} parameter(s), got {len(params)}")
    return fn(*(int(x) for x in params))


def parse_graph_kind(text):
    """Parse ``family:params`` such as ``grid:3x3``, ``cycle:8`` or ``bipartite:2,6``."""
    kind, _, rest = text.partition(":")
    parts = [x for x in rest.replace("x", ",").split(",") if x.strip()]
    try:
        params = [int(x) for x in parts]
    except ValueError:
        raise InputError(f"bad graph family parameters in {text!r}") from None
    return gen_named_graph(kind.strip(), *params)


def _gaussian_rows(L, n, rng):
    z = rng.standard_normal((n, L.shape[0]))
    # x = L^{-T} z has covariance (L L^T)^{-1}
    return sla.solve_triangular(L, z.T, lower=True, trans="T").T


def sample_gaussian(model, n, seed):
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return DataMatrix(_gaussian_rows(model.l_true.values, int(n), rng))


def sample_mvt(model, df, n, seed, mixing=None):
    """Multivariate t draws: Gaussian rows divided by sqrt(chi2_df / df).

    The population covariance is ``Omega^{-1} * df / (df - 2)`` for df > 2.
    Passing a fixed ``mixing`` value replaces the chi-square draws, so
    ``mixing=1`` reproduces :func:`sample_gaussian` for the same seed.
    """
    if not df > 0:
        raise InputError("degrees of freedom must be positive")
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    x = _gaussian_rows(model.l_true.values, int(n), rng)
    if mixing is None:
        w = rng.chisquare(df, size=int(n)) / df
    else:
        w = np.full(int(n), float(mixing))
    return DataMatrix(x / np.sqrt(w)[:, None])


def rel_frobenius_error(est, truth):
    est = np.asarray(est, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if est.shape != truth.shape:
        raise InputError("estimate and truth differ in shape")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise InputError("truth is the zero matrix")
    return float(np.linalg.norm(est - truth) / denom)
