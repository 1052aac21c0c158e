"""Graphs, vertex orderings and the filled (decomposable cover) graph.

Vertices are 0-based everywhere inside the library. Text formats and reports
use 1-based labels; the conversion happens only in :func:`parse_graph`,
:func:`format_graph` and the ordering helpers.

An undirected edge is stored once as a tuple ``(i, j)`` with ``i > j``, which
is also the (row, column) of the corresponding strictly-lower-triangular
Cholesky position.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import InputError, ResourceError

__all__ = [
    "Graph",
    "VertexOrdering",
    "OrderedGraph",
    "FilledGraph",
    "parse_graph",
    "format_graph",
    "parse_ordering",
    "format_ordering",
    "natural_ordering",
    "rcm_ordering",
    "apply_ordering",
    "filled_graph",
    "is_perfect_elimination",
    "maximal_cliques",
    "connected_components",
    "induced_subgraph",
    "bandwidth",
]

DEFAULT_CLIQUE_CAP = 10**6


def _canon(u, v):
    return (u, v) if u > v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected loop-free graph on vertices ``0..p-1``."""

    p: int
    edges: frozenset

    def __post_init__(self):
        if self.p < 1:
            raise InputError(f"vertex count must be positive, got {self.p}")
        for i, j in self.edges:
            if not (0 <= j < i < self.p):
                raise InputError(f"invalid stored edge ({i}, {j}) for p={self.p}")

    @classmethod
    def from_edges(cls, p, pairs, one_based=False):
        """Build a graph from any iterable of vertex pairs (either orientation)."""
        off = 1 if one_based else 0
        edges = set()
        for u, v in pairs:
            u, v = int(u) - off, int(v) - off
            if u == v:
                raise InputError(f"self-loop at vertex {u + off}")
            if not (0 <= u < p and 0 <= v < p):
                raise InputError(f"edge ({u + off}, {v + off}) out of range for p={p}")
            edges.add(_canon(u, v))
        return cls(int(p), frozenset(edges))

    @classmethod
    def from_adjacency(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        rows, cols = np.nonzero(np.tril(mask | mask.T, -1))
        return cls(mask.shape[0], frozenset(zip(rows.tolist(), cols.tolist())))

    @classmethod
    def complete(cls, p):
        return cls(p, frozenset(combinations(range(p - 1, -1, -1), 2)))

    @cached_property
    def neighbors(self):
        """Tuple of sorted neighbour tuples, indexed by vertex."""
        adj = [[] for _ in range(self.p)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def n_edges(self):
        return len(self.edges)

    def degree(self, v):
        return len(self.neighbors[v])

    def has_edge(self, u, v):
        return u != v and _canon(u, v) in self.edges

    def adjacency(self):
        """Dense symmetric boolean adjacency matrix (no diagonal)."""
        a = np.zeros((self.p, self.p), dtype=bool)
        if self.edges:
            idx = np.array(sorted(self.edges))
            a[idx[:, 0], idx[:, 1]] = True
            a[idx[:, 1], idx[:, 0]] = True
        return a

    def sorted_edges(self):
        return sorted(self.edges)


@dataclass(frozen=True)
class VertexOrdering:
    """Permutation ``sigma`` mapping original vertex -> position (0-based)."""

    sigma: tuple

    def __post_init__(self):
        sigma = tuple(int(s) for s in self.sigma)
        if sorted(sigma) != list(range(len(sigma))):
            raise InputError("ordering is not a bijection onto 1..p")
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def from_sequence(cls, seq):
        """Build from the elimination sequence: ``seq[k]`` is the vertex placed at position k."""
        seq = [int(v) for v in seq]
        if sorted(seq) != list(range(len(seq))):
            raise InputError("ordering is not a bijection onto 1..p")
        sigma = [0] * len(seq)
        for pos, v in enumerate(seq):
            sigma[v] = pos
        return cls(tuple(sigma))

    @property
    def p(self):
        return len(self.sigma)

    @cached_property
    def sequence(self):
        """Inverse permutation: vertex occupying each position."""
        inv = [0] * len(self.sigma)
        for v, pos in enumerate(self.sigma):
            inv[pos] = v
        return tuple(inv)

    def inverse(self):
        return VertexOrdering(self.sequence)


@dataclass(frozen=True)
class OrderedGraph:
    graph: Graph
    sigma: VertexOrdering
    edges_sigma: frozenset

    @property
    def p(self):
        return self.graph.p

    @cached_property
    def relabeled(self):
        """The ordered graph as a plain :class:`Graph` on positions."""
        return Graph(self.graph.p, self.edges_sigma)


@dataclass(frozen=True)
class FilledGraph:
    """Decomposable cover of an ordered graph plus its fill-in bookkeeping.

    ``fillins`` is sorted row-major over the strict lower triangle
    (row ascending, then column ascending); Step II and the error-propagation
    diagnostics both rely on that order.
    """

    base: OrderedGraph
    edges_filled: frozenset
    fillins: tuple
    below_cols: tuple
    row_counts: tuple

    @property
    def p(self):
        return self.base.p

    @property
    def n_fillins(self):
        return len(self.fillins)

    @cached_property
    def as_ordered(self):
        """The filled graph as an ordered graph under the identity ordering."""
        g = Graph(self.p, self.edges_filled)
        return OrderedGraph(g, VertexOrdering(tuple(range(self.p))), self.edges_filled)

    @cached_property
    def col_nnz(self):
        return tuple(len(c) for c in self.below_cols)

    @cached_property
    def row_patterns(self):
        """Sorted column indices of the filled strict-lower pattern, per row."""
        rows = [[] for _ in range(self.p)]
        for j, col in enumerate(self.below_cols):
            for i in col:
                rows[i].append(j)
        return tuple(np.array(r, dtype=np.intp) for r in rows)

    def lower_mask(self, include_diagonal=True):
        m = np.zeros((self.p, self.p), dtype=bool)
        if self.edges_filled:
            idx = np.array(sorted(self.edges_filled))
            m[idx[:, 0], idx[:, 1]] = True
        if include_diagonal:
            np.fill_diagonal(m, True)
        return m


# --------------------------------------------------------------------------
# text formats


def parse_graph(text):
    """Parse the edge-list format.

    A header line ``p <count>`` must precede the edges; every other
    non-blank line holds two 1-based vertex labels. ``#`` starts a comment.
    Duplicate and reversed pairs collapse to one edge.
    """
    p = None
    pairs = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0].lower() == "p":
            if p is not None:
                raise InputError(f"line {lineno}: duplicate header")
            if len(tok) != 2:
                raise InputError(f"line {lineno}: header must be 'p <count>'")
            try:
                p = int(tok[1])
            except ValueError:
                raise InputError(f"line {lineno}: vertex count is not an integer") from None
            if p < 1:
                raise InputError(f"line {lineno}: vertex count must be positive")
            continue
        if p is None:
            raise InputError(f"line {lineno}: edge before 'p <count>' header")
        if len(tok) != 2:
            raise InputError(f"line {lineno}: expected two vertex labels")
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise InputError(f"line {lineno}: vertex labels must be integers") from None
        if not (1 <= u <= p and 1 <= v <= p):
            raise InputError(f"line {lineno}: vertex out of range 1..{p}")
        if u == v:
            raise InputError(f"line {lineno}: self-loop at vertex {u}")
        pairs.add(_canon(u - 1, v - 1))
    if p is None:
        raise InputError("missing 'p <count>' header")
    return Graph(p, frozenset(pairs))


def format_graph(g, comment=None):
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"p {g.p}")
    lines.extend(f"{i + 1} {j + 1}" for i, j in g.sorted_edges())
    return "\n".join(lines) + "\n"


def parse_ordering(text, p=None):
    """Parse an ordering file: one 1-based vertex label per line, in position order."""
    seq = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            seq.append(int(line) - 1)
        except ValueError:
            raise InputError(f"line {lineno}: expected a vertex label") from None
    if p is not None and len(seq) != p:
        raise InputError(f"ordering has {len(seq)} labels, graph has {p} vertices")
    return VertexOrdering.from_sequence(seq)


def format_ordering(sigma):
    return "\n".join(str(v + 1) for v in sigma.sequence) + "\n"


# --------------------------------------------------------------------------
# orderings


def natural_ordering(p):
    return VertexOrdering(tuple(range(p)))


def _bfs_levels(g, start, allowed=None):
    levels = [[start]]
    seen = {start}
    while True:
        nxt = []
        for u in levels[-1]:
            for w in g.neighbors[u]:
                if w not in seen and (allowed is None or w in allowed):
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            return levels
        levels.append(nxt)


def _pseudo_peripheral(g, comp):
    """George-Liu pseudo-peripheral vertex search inside one component."""
    allowed = set(comp)
    start = min(comp, key=lambda v: (g.degree(v), v))
    levels = _bfs_levels(g, start, allowed)
    while True:
        cand = min(levels[-1], key=lambda v: (g.degree(v), v))
        cand_levels = _bfs_levels(g, cand, allowed)
        if len(cand_levels) <= len(levels):
            return start
        start, levels = cand, cand_levels


def rcm_ordering(g):
    """Reverse Cuthill-McKee ordering, applied component by component.

    Deterministic: the start vertex of each component is a pseudo-peripheral
    vertex, and neighbours are queued by increasing degree with ties broken
    by the smaller label.
    """
    order = []
    for comp in connected_components(g):
        start = _pseudo_peripheral(g, comp)
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            order.append(u)
            nbrs = sorted((w for w in g.neighbors[u] if w not in seen),
                          key=lambda v: (g.degree(v), v))
            seen.update(nbrs)
            queue.extend(nbrs)
    order.reverse()
    return VertexOrdering.from_sequence(order)


def apply_ordering(g, sigma):
    if not isinstance(sigma, VertexOrdering):
        sigma = VertexOrdering(tuple(sigma))
    if sigma.p != g.p:
        raise InputError(f"ordering has length {sigma.p}, graph has {g.p} vertices")
    s = sigma.sigma
    edges = frozenset(_canon(s[u], s[v]) for u, v in g.edges)
    return OrderedGraph(g, sigma, edges)


def bandwidth(g):
    return max((i - j for i, j in g.edges), default=0)


# --------------------------------------------------------------------------
# filled graph


def filled_graph(og):
    """Symbolic elimination of an ordered graph.

    Eliminating vertex k turns its higher-numbered neighbourhood into a
    clique. Only the elimination-tree parent (the smallest higher neighbour)
    needs to receive the rest of the neighbourhood: every other pair is
    created when the parent itself is eliminated.
    """
    p = og.p
    higher = [set() for _ in range(p)]
    for i, j in og.edges_sigma:
        higher[j].add(i)
    for k in range(p):
        nk = higher[k]
        if len(nk) > 1:
            parent = min(nk)
            higher[parent].update(nk)
            higher[parent].discard(parent)
    below_cols = tuple(tuple(sorted(h)) for h in higher)
    edges = frozenset((i, j) for j, col in enumerate(below_cols) for i in col)
    fill = sorted(edges - og.edges_sigma)
    row_counts = [0] * p
    for i, _ in edges:
        row_counts[i] += 1
    return FilledGraph(og, edges, tuple(fill), below_cols, tuple(row_counts))


def is_perfect_elimination(og):
    """True iff every vertex's higher-numbered neighbourhood is a clique."""
    higher = [[] for _ in range(og.p)]
    for i, j in og.edges_sigma:
        higher[j].append(i)
    e = og.edges_sigma
    for nk in higher:
        for a, b in combinations(sorted(nk), 2):
            if (b, a) not in e:
                return False
    return True


# --------------------------------------------------------------------------
# cliques and components


def maximal_cliques(g, cap=DEFAULT_CLIQUE_CAP):
    """All maximal cliques, each a sorted tuple, listed in lexicographic order.

    Bron-Kerbosch with Tomita pivoting. The number of maximal cliques can be
    exponential in ``p``; once more than ``cap`` have been found a
    :class:`ResourceError` is raised.
    """
    nbr = [set(n) for n in g.neighbors]
    out = []

    def expand(r, cand, excl):
        if not cand and not excl:
            out.append(tuple(sorted(r)))
            if len(out) > cap:
                raise ResourceError(
                    f"more than {cap} maximal cliques; raise the cap or use a row-wise method")
            return
        pivot = max(cand | excl, key=lambda u: len(cand & nbr[u]))
        for v in sorted(cand - nbr[pivot]):
            expand(r + [v], cand & nbr[v], excl & nbr[v])
            cand = cand - {v}
            excl = excl | {v}

    expand([], set(range(g.p)), set())
    out.sort()
    return out


def connected_components(g):
    """Vertex sets of the connected components, each sorted, ordered by smallest vertex."""
    seen = [False] * g.p
    comps = []
    for s in range(g.p):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.neighbors[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def induced_subgraph(g, vertices):
    """Subgraph on ``vertices`` relabelled to ``0..len(vertices)-1`` in the given order."""
    index = {v: k for k, v in enumerate(vertices)}
    edges = set()
    for v in vertices:
        for w in g.neighbors[v]:
            if w in index:
                edges.add(_canon(index[v], index[w]))
    return Graph(len(vertices), frozenset(edges))
