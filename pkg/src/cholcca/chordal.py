"""Closed-form Cholesky MLE on a decomposable (filled) graph.

Every function here takes the covariance ``s`` already expressed in the
ordered labelling of the filled graph, i.e. ``s[a, b]`` is the covariance of
the variables at positions ``a`` and ``b``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InputError, NumericalFailure

__all__ = [
    "CholFactor",
    "chordal_cholesky_mle",
    "dense_step1",
    "clique_sequence",
    "chordal_completion",
    "clique_mle_oracle",
]


@dataclass
class CholFactor:
    """Lower-triangular factor with positive diagonal and a fixed pattern.

    ``pattern`` is a boolean ``p x p`` mask of the strictly-lower positions
    allowed to be non-zero.
    """

    values: np.ndarray
    pattern: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InputError("Cholesky factor must be square")
        if not np.all(np.diag(v) > 0):
            raise InputError("Cholesky factor needs a strictly positive diagonal")
        allowed = np.tril(self.pattern, -1) | np.eye(v.shape[0], dtype=bool)
        if np.any(v[~allowed] != 0):
            raise InputError("Cholesky factor has non-zeros outside its pattern")
        self.values = v
        self.pattern = np.tril(np.asarray(self.pattern, dtype=bool), -1)

    @property
    def p(self):
        return self.values.shape[0]

    def omega(self):
        om = self.values @ self.values.T
        return (om + om.T) / 2.0

    def copy(self):
        return CholFactor(self.values.copy(), self.pattern.copy())


def _check_cov(s, p):
    s = np.asarray(s, dtype=float)
    if s.shape != (p, p):
        raise InputError(f"covariance has shape {s.shape}, filled graph has p={p}")
    return s


def _column(s, j, nbrs):
    """Step-I column j: diagonal value and below-diagonal values on ``nbrs``."""
    sjj = s[j, j]
    if len(nbrs) == 0:
        if not sjj > 0:
            raise NumericalFailure(
                f"column {j + 1}: non-positive variance; more observations are needed",
                column=j + 1)
        return 1.0 / np.sqrt(sjj), np.empty(0)
    idx = np.asarray(nbrs)
    q = s[idx, j]
    try:
        cf = sla.cho_factor(s[np.ix_(idx, idx)], lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise NumericalFailure(
            f"column {j + 1}: neighbour covariance block is not positive definite; "
            "the sample size must exceed the largest clique of the filled graph",
            column=j + 1) from None
    x = sla.cho_solve(cf, q, check_finite=False)
    schur = sjj - q @ x
    if not schur > 0:
        raise NumericalFailure(
            f"column {j + 1}: non-positive conditional variance; "
            "the sample size must exceed the largest clique of the filled graph",
            column=j + 1)
    d = 1.0 / np.sqrt(schur)
    return d, -x * d


def chordal_cholesky_mle(s, fg, threads=1):
    """Column-by-column closed form of the Cholesky factor of the chordal MLE.

    Columns are independent; with ``threads > 1`` they are evaluated on a
    thread pool, which does not change the result.
    """
    p = fg.p
    s = _check_cov(s, p)
    cols = fg.below_cols

    def work(j):
        return _column(s, j, cols[j])

    if threads and threads > 1 and p > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, range(p)))
    else:
        results = [work(j) for j in range(p)]
    L = np.zeros((p, p))
    for j, (d, below) in enumerate(results):
        L[j, j] = d
        if len(cols[j]):
            L[list(cols[j]), j] = below
    return CholFactor(L, fg.lower_mask(include_diagonal=False))


def clique_sequence(fg):
    """Maximal cliques of the filled graph in a running-intersection order.

    The clique headed by vertex j is ``{j}`` plus its higher neighbours; it is
    maximal unless some child i in the elimination tree has exactly one more
    higher neighbour. A clique tree is a maximum-weight spanning tree of the
    clique graph (weights = intersection sizes); listing cliques in the order
    Prim's algorithm attaches them gives the running intersection property,
    and each separator is the intersection with the clique's tree parent,
    which equals its intersection with everything listed before it.
    """
    p = fg.p
    cols = fg.below_cols
    absorbed = [False] * p
    for i in range(p):
        if cols[i]:
            parent = cols[i][0]
            if len(cols[i]) == len(cols[parent]) + 1:
                absorbed[parent] = True
    cliques = [np.array((j,) + cols[j], dtype=np.intp) for j in range(p - 1, -1, -1) if not absorbed[j]]
    m = len(cliques)
    member = np.zeros((m, p), dtype=np.int64)
    for k, c in enumerate(cliques):
        member[k, c] = 1
    weight = member @ member.T

    in_tree = np.zeros(m, dtype=bool)
    best = np.full(m, -1, dtype=np.int64)
    link = np.zeros(m, dtype=np.intp)
    seq = []
    nxt = 0
    for _ in range(m):
        in_tree[nxt] = True
        clique = cliques[nxt]
        if seq:
            sep = np.intersect1d(clique, cliques[link[nxt]])
        else:
            sep = np.empty(0, dtype=np.intp)
        seq.append((clique, sep))
        better = ~in_tree & (weight[nxt] > best)
        best[better] = weight[nxt][better]
        link[better] = nxt
        if len(seq) < m:
            cand = np.where(in_tree, -2, best)
            nxt = int(np.argmax(cand))
    return seq


def _inv_spd(a, what):
    try:
        cf = sla.cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise NumericalFailure(f"{what} is not positive definite") from None
    return sla.cho_solve(cf, np.eye(a.shape[0]), check_finite=False)


def chordal_completion(s, fg):
    """Positive-definite completion of ``s`` over the non-edges of the filled graph.

    Entries on the filled pattern and the diagonal are kept; every missing
    entry is filled so that the inverse of the result vanishes there.
    """
    p = fg.p
    s = _check_cov(s, p)
    out = np.zeros((p, p))
    covered = np.zeros(p, dtype=bool)
    for clique, sep in clique_sequence(fg):
        new = clique[~covered[clique]]
        out[np.ix_(clique, clique)] = s[np.ix_(clique, clique)]
        rest = np.flatnonzero(covered)
        rest = rest[~np.isin(rest, sep)]
        if rest.size:
            if sep.size:
                ss = s[np.ix_(sep, sep)]
                try:
                    cf = sla.cho_factor(ss, lower=True, check_finite=False)
                except np.linalg.LinAlgError:
                    raise NumericalFailure(
                        "separator covariance block is not positive definite; "
                        "the sample size must exceed the largest clique of the filled graph") from None
                coef = sla.cho_solve(cf, s[np.ix_(sep, new)], check_finite=False)
                block = out[np.ix_(rest, sep)] @ coef
            else:
                block = np.zeros((rest.size, new.size))
            out[np.ix_(rest, new)] = block
            out[np.ix_(new, rest)] = block.T
        covered[clique] = True
    return out


def dense_step1(s, fg):
    """Step I through the completion: factor the inverse of the completed covariance."""
    completed = chordal_completion(s, fg)
    omega = _inv_spd(completed, "completed covariance")
    omega = (omega + omega.T) / 2.0
    try:
        L = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise NumericalFailure("inverse of the completed covariance is not positive definite") from None
    pattern = fg.lower_mask(include_diagonal=False)
    L[~(pattern | np.eye(fg.p, dtype=bool))] = 0.0
    return CholFactor(L, pattern)


def clique_mle_oracle(s, fg):
    """Decomposable-model MLE as cliques minus separators of inverted blocks."""
    p = fg.p
    s = _check_cov(s, p)
    omega = np.zeros((p, p))
    for clique, sep in clique_sequence(fg):
        omega[np.ix_(clique, clique)] += _inv_spd(s[np.ix_(clique, clique)], "clique covariance block")
        if sep.size:
            omega[np.ix_(sep, sep)] -= _inv_spd(s[np.ix_(sep, sep)], "separator covariance block")
    return (omega + omega.T) / 2.0
