"""Fill-in adjustment (Step II) and the end-to-end estimator."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chordal import CholFactor, chordal_cholesky_mle, dense_step1
from .diagnostics import complexity_estimate
from .errors import InputError, NumericalFailure
from .graph import (
    Graph,
    OrderedGraph,
    VertexOrdering,
    apply_ordering,
    connected_components,
    filled_graph,
    induced_subgraph,
    natural_ordering,
    rcm_ordering,
)
from .cov import as_symmetric

__all__ = [
    "EstimateReport",
    "MembershipReport",
    "cca_adjust",
    "cca_estimate",
    "verify_membership",
    "step2_objective",
    "resolve_ordering",
]

ZERO_RTOL = 1e-10


def cca_adjust(ld, og, fg):
    """Reset every fill-in entry so the product has a zero at that position.

    Fill-ins are visited in row-major order and each update reads the
    already-updated entries of rows i and j. Positions on the original
    graph and the diagonal are never touched.
    """
    p = fg.p
    v = np.asarray(ld.values, dtype=float)
    if v.shape != (p, p):
        raise InputError(f"factor has shape {v.shape}, filled graph has p={p}")
    L = v.copy()
    rows = fg.row_patterns
    with np.errstate(over="ignore", invalid="ignore"):
        for i, j in fg.fillins:
            ri = rows[i]
            ri = ri[: np.searchsorted(ri, j)]
            common = np.intersect1d(ri, rows[j], assume_unique=True)
            if common.size:
                val = -np.dot(L[i, common], L[j, common]) / L[j, j]
                if not np.isfinite(val):
                    raise NumericalFailure(
                        f"fill-in ({i + 1}, {j + 1}) overflowed during the adjustment; "
                        "the Step-I factor is too ill-conditioned for this sample size",
                        column=j + 1)
                L[i, j] = val
            else:
                L[i, j] = 0.0
    return CholFactor(L, ld.pattern.copy())


@dataclass
class EstimateReport:
    """Result of :func:`cca_estimate`.

    ``omega_hat`` is in the original vertex labelling. ``l_hat`` is in the
    ordered labelling given by ``ordering``; ``P L L^T P^T = omega_hat`` where
    P maps positions back to vertices.
    """

    omega_hat: np.ndarray
    l_hat: CholFactor
    ordering: VertexOrdering
    min_eigenvalue: float
    max_nonedge_abs: float
    timings: dict
    path: str
    n_components: int
    n_fillins: int
    n_filled_edges: int
    n_edges: int
    component_paths: list = field(default_factory=list)

    def omega_from_factor(self):
        seq = np.asarray(self.ordering.sequence)
        om = self.l_hat.omega()
        out = np.empty_like(om)
        out[np.ix_(seq, seq)] = om
        return out

    def summary(self):
        return {
            "p": int(self.omega_hat.shape[0]),
            "n_edges": self.n_edges,
            "n_components": self.n_components,
            "n_fillins": self.n_fillins,
            "n_filled_edges": self.n_filled_edges,
            "path": self.path,
            "min_eigenvalue": self.min_eigenvalue,
            "max_nonedge_abs": self.max_nonedge_abs,
            **{f"time_{k}": v for k, v in self.timings.items()},
        }


def resolve_ordering(g, ordering):
    if isinstance(ordering, VertexOrdering):
        if ordering.p != g.p:
            raise InputError(f"ordering has length {ordering.p}, graph has {g.p} vertices")
        return ordering
    if ordering == "rcm":
        return rcm_ordering(g)
    if ordering == "natural":
        return natural_ordering(g.p)
    if isinstance(ordering, (list, tuple)):
        return VertexOrdering(tuple(ordering))
    raise InputError(f"unknown ordering {ordering!r}; use 'natural', 'rcm' or an explicit permutation")


def _estimate_component(s_pos, og, path, threads):
    t = {}
    t0 = time.perf_counter()
    fg = filled_graph(og)
    t["fill"] = time.perf_counter() - t0
    chosen = path
    if path == "auto":
        chosen = complexity_estimate(fg).path
    t0 = time.perf_counter()
    if chosen == "dense":
        ld = dense_step1(s_pos, fg)
    else:
        ld = chordal_cholesky_mle(s_pos, fg, threads=threads)
    t["step1"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    lh = cca_adjust(ld, og, fg)
    t["step2"] = time.perf_counter() - t0
    return lh, fg, chosen, t


def cca_estimate(s, g, ordering="rcm", path="auto", threads=1):
    """Positive-definite precision estimate with the zero pattern of ``g``.

    Parameters
    ----------
    s : (p, p) array
        Sample covariance (divisor n), symmetric with positive diagonal.
    g : Graph
        Allowed off-diagonal support of the precision matrix.
    ordering : {"rcm", "natural"} or VertexOrdering
        Vertex ordering; connected components are estimated separately and
        each inherits the relative order of its vertices.
    path : {"auto", "column", "dense"}
        Step-I route. ``"auto"`` picks the dense route when the filled graph
        has more than p^(5/3) edges.
    threads : int
        Worker threads for independent components (and columns).

    Returns
    -------
    EstimateReport
    """
    s = as_symmetric(s, "covariance")
    p = s.shape[0]
    if p != g.p:
        raise InputError(f"covariance is {p}x{p} but graph has {g.p} vertices")
    d = np.diag(s)
    if not np.all(d > 0):
        k = int(np.flatnonzero(~(d > 0))[0])
        raise InputError(f"covariance has non-positive diagonal at index {k + 1}")
    if path not in ("auto", "column", "dense"):
        raise InputError(f"unknown Step-I path {path!r}")

    timings = {"ordering": 0.0, "fill": 0.0, "step1": 0.0, "step2": 0.0}
    t0 = time.perf_counter()
    sigma = resolve_ordering(g, ordering)
    comps = connected_components(g)
    jobs = []
    for comp in comps:
        pos = sorted(sigma.sigma[v] for v in comp)
        vert_at = [sigma.sequence[q] for q in pos]
        sub = induced_subgraph(g, comp)
        local = {v: k for k, v in enumerate(comp)}
        local_sigma = VertexOrdering.from_sequence([local[v] for v in vert_at])
        og = apply_ordering(sub, local_sigma)
        idx = np.asarray(vert_at)
        jobs.append((np.asarray(pos), og, s[np.ix_(idx, idx)]))
    timings["ordering"] = time.perf_counter() - t0

    inner_threads = threads if len(jobs) == 1 else 1

    def run(k):
        pos, og, s_pos = jobs[k]
        try:
            return _estimate_component(s_pos, og, path, inner_threads)
        except NumericalFailure as exc:
            exc.component = k + 1
            raise

    if threads and threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, range(len(jobs))))
    else:
        results = [run(k) for k in range(len(jobs))]

    L = np.zeros((p, p))
    pattern = np.zeros((p, p), dtype=bool)
    n_fill = n_filled = 0
    paths = []
    for (pos, og, _), (lh, fg, chosen, t) in zip(jobs, results):
        L[np.ix_(pos, pos)] = lh.values
        pattern[np.ix_(pos, pos)] = lh.pattern
        n_fill += fg.n_fillins
        n_filled += len(fg.edges_filled)
        paths.append(chosen)
        for key, val in t.items():
            timings[key] += val

    l_hat = CholFactor(L, pattern)
    seq = np.asarray(sigma.sequence)
    om_pos = l_hat.omega()
    omega = np.empty_like(om_pos)
    omega[np.ix_(seq, seq)] = om_pos
    omega = (omega + omega.T) / 2.0
    if not np.all(np.isfinite(omega)):
        raise NumericalFailure("estimate has non-finite entries; the sample size is too small for the filled graph")

    off =~(g.adjacency() | np.eye(p, dtype=bool))
    max_nonedge = float(np.abs(omega[off]).max(initial=0.0))
    uniq = sorted(set(paths))
    return EstimateReport(
        omega_hat=omega,
        l_hat=l_hat,
        ordering=sigma,
        min_eigenvalue=float(np.linalg.eigvalsh(omega)[0]),
        max_nonedge_abs=max_nonedge,
        timings=timings,
        path=uniq[0] if len(uniq) == 1 else "mixed",
        n_components=len(comps),
        n_fillins=n_fill,
        n_filled_edges=n_filled,
        n_edges=g.n_edges,
        component_paths=paths,
    )


@dataclass(frozen=True)
class MembershipReport:
    passed: bool
    min_eigenvalue: float
    max_offpattern_abs: float
    worst_position: tuple
    tolerance: float

    def __bool__(self):
        return self.passed

    def describe(self):
        status = "pass" if self.passed else "FAIL"
        msg = (f"{status}: min eigenvalue {self.min_eigenvalue:.3e}, "
               f"max off-pattern |entry| {self.max_offpattern_abs:.3e}")
        if self.worst_position is not None:
            msg += f" at {self.worst_position}"
        return msg


def verify_membership(omega, graph, tol=ZERO_RTOL):
    """Check positive definiteness and the zero pattern of ``omega``.

    ``graph`` may be an :class:`OrderedGraph` (``omega`` in the ordered
    labelling) or a :class:`Graph` (``omega`` in its own labelling). The
    zero test is relative: ``|omega_ij| <= tol * max|omega|``.
    """
    if not tol > 0:
        raise InputError("tolerance must be positive")
    omega = np.asarray(omega, dtype=float)
    if isinstance(graph, OrderedGraph):
        edges, p = graph.edges_sigma, graph.p
    elif isinstance(graph, Graph):
        edges, p = graph.edges, graph.p
    else:
        raise InputError("expected a Graph or an OrderedGraph")
    if omega.shape != (p, p):
        raise InputError(f"matrix has shape {omega.shape}, graph has p={p}")
    allowed = np.eye(p, dtype=bool)
    for i, j in edges:
        allowed[i, j] = allowed[j, i] = True
    off = np.abs(np.where(allowed, 0.0, omega))
    worst = None
    max_off = float(off.max(initial=0.0))
    if max_off > 0:
        i, j = np.unravel_index(np.argmax(off), off.shape)
        worst = (int(max(i, j)) + 1, int(min(i, j)) + 1)
    scale = float(np.abs(omega).max(initial=0.0))
    min_eig = float(np.linalg.eigvalsh((omega + omega.T) / 2.0)[0])
    passed = min_eig > 0 and max_off <= tol * scale
    return MembershipReport(passed, min_eig, max_off, worst, tol)


def step2_objective(l, ld, og):
    """Squared distance to ``ld`` over the original edges and the diagonal."""
    a = np.asarray(getattr(l, "values", l), dtype=float)
    b = np.asarray(getattr(ld, "values", ld), dtype=float)
    if a.shape != b.shape:
        raise InputError("factor dimensions differ")
    idx = np.arange(a.shape[0])
    total = float(np.sum((b[idx, idx] - a[idx, idx]) ** 2))
    for i, j in og.edges_sigma:
        total += float((b[i, j] - a[i, j]) ** 2)
    return total
