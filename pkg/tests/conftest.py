import numpy as np
import pytest

from cholcca.graph import Graph, VertexOrdering

CYCLE4_OMEGA = np.array([
    [3.0, 1.0, 0.0, 1.0],
    [1.0, 3.0, 1.0, 0.0],
    [0.0, 1.0, 3.0, 2.0],
    [1.0, 0.0, 2.0, 3.0],
])

CYCLE4_FACTOR = np.array([
    [1.732, 0.0, 0.0, 0.0],
    [0.577, 1.633, 0.0, 0.0],
    [0.0, 0.612, 1.620, 0.0],
    [0.577, -0.204, 1.312, 0.951],
])

CYCLE4 = Graph.from_edges(4, [(1, 2), (2, 3), (3, 4), (4, 1)], one_based=True)


def random_graph(rng, p, density):
    mask = np.tril(rng.random((p, p)) < density, -1)
    return Graph.from_adjacency(mask)


def random_decomposable(rng, p, max_parent_nbrs=None, p_isolated=0.05):
    """Chordal graph for which the natural order is a perfect elimination scheme.

    Vertices are added from p-1 down to 0; each new vertex joins a random
    subset of (parent + parent's higher neighbours), which is a clique.
    """
    higher = [set() for _ in range(p)]
    for v in range(p - 2, -1, -1):
        if rng.random() < p_isolated:
            continue
        parent = int(rng.integers(v + 1, p))
        pool = sorted(higher[parent])
        keep = [u for u in pool if rng.random() < 0.6]
        if max_parent_nbrs is not None:
            keep = keep[:max_parent_nbrs]
        higher[v] = {parent, *keep}
    edges = [(i, v) for v in range(p) for i in higher[v]]
    return Graph.from_edges(p, edges)


def shuffled(rng, g):
    """Randomly relabel g; returns (graph, ordering that restores the original labels' order)."""
    perm = rng.permutation(g.p)  # new label of old vertex v is perm[v]
    h = Graph.from_edges(g.p, [(perm[i], perm[j]) for i, j in g.edges])
    # position of new vertex perm[v] is v
    sigma = [0] * g.p
    for v in range(g.p):
        sigma[perm[v]] = v
    return h, VertexOrdering(tuple(sigma))


def wishart_cov(rng, p, n, sigma=None):
    """Sample covariance (divisor n) of n Gaussian draws."""
    if sigma is None:
        a = rng.standard_normal((p, p))
        sigma = a @ a.T / p + np.eye(p)
    x = rng.multivariate_normal(np.zeros(p), sigma, size=n)
    x -= x.mean(axis=0)
    s = x.T @ x / n
    return (s + s.T) / 2.0


def rel_max(a, b):
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ------------------------------------------------------------ acceptance summary

ACCEPTANCE_RESULTS = {}


def record_criterion(number, passed, detail):
    """Remember and print one pass/fail line for an acceptance criterion."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_RESULTS[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
