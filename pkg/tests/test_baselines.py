import numpy as np
import pytest

from cholcca.baselines import IterativeConfig, gipf_mle, ipf_mle, neg_loglik
from cholcca.cca import cca_estimate, verify_membership
from cholcca.chordal import clique_mle_oracle
from cholcca.errors import InputError, NumericalFailure, ResourceError
from cholcca.graph import Graph, apply_ordering, filled_graph, natural_ordering
from cholcca.simgen import gen_named_graph

from conftest import CYCLE4, CYCLE4_OMEGA, random_decomposable, random_graph, wishart_cov

SOLVERS = [ipf_mle, gipf_mle]


def battery(seed=0, count=12, max_p=30):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        p = int(rng.integers(4, max_p))
        g = random_graph(rng, p, float(rng.uniform(0.05, 0.35)))
        yield g, wishart_cov(rng, p, 3 * p)


def assert_monotone(history):
    h = np.asarray(history)
    # exact arithmetic is non-increasing; allow round-off relative to the objective scale
    slack = 1e-12 * np.abs(h).max()
    assert np.all(np.diff(h) <= slack)


@pytest.mark.parametrize("solver", SOLVERS)
def test_complete_graph_gives_inverse(solver):
    rng = np.random.default_rng(1)
    s = wishart_cov(rng, 5, 20)
    res = solver(s, Graph.complete(5), IterativeConfig(tol=1e-12))
    assert res.converged
    assert np.abs(res.omega - np.linalg.inv(s)).max() <= 1e-8


def test_ipf_complete_graph_one_sweep():
    rng = np.random.default_rng(1)
    s = wishart_cov(rng, 5, 20)
    res = ipf_mle(s, Graph.complete(5), IterativeConfig(max_iter=1))
    assert np.abs(res.omega - np.linalg.inv(s)).max() <= 1e-8


@pytest.mark.parametrize("solver", SOLVERS)
def test_four_cycle_example(solver):
    res = solver(np.linalg.inv(CYCLE4_OMEGA), CYCLE4, IterativeConfig(tol=1e-12))
    assert res.converged
    assert np.abs(res.omega - CYCLE4_OMEGA).max() <= 1e-6


@pytest.mark.parametrize("solver", SOLVERS)
def test_edgeless(solver):
    s = np.array([[2.0, 0.3, 0.1], [0.3, 4.0, 0.2], [0.1, 0.2, 5.0]])
    res = solver(s, Graph(3, frozenset()))
    assert np.allclose(res.omega, np.diag([0.5, 0.25, 0.2]), atol=1e-15)


@pytest.mark.parametrize("solver", SOLVERS)
def test_decomposable_matches_oracle(solver):
    rng = np.random.default_rng(2)
    for _ in range(5):
        g = random_decomposable(rng, 10)
        s = wishart_cov(rng, 10, 40)
        oracle = clique_mle_oracle(s, filled_graph(apply_ordering(g, natural_ordering(10))))
        res = solver(s, g, IterativeConfig(tol=1e-11))
        assert np.abs(res.omega - oracle).max() <= 1e-6


def test_cross_method_agreement_and_membership():
    tol = 1e-9
    for g, s in battery(3):
        a = ipf_mle(s, g, IterativeConfig(tol=tol))
        b = gipf_mle(s, g, IterativeConfig(tol=tol))
        assert a.converged and b.converged
        assert np.abs(a.omega - b.omega).max() <= 10 * tol * max(1.0, np.abs(a.omega).max())
        for res in (a, b):
            assert verify_membership(res.omega, g, tol=1e-8).passed
            assert_monotone(res.history)
            assert res.neg_loglik == pytest.approx(neg_loglik(res.omega, s), rel=1e-12)


def test_fitted_covariance_matches_on_edges():
    for g, s in battery(4, count=5):
        res = gipf_mle(s, g, IterativeConfig(tol=1e-11))
        sigma = np.linalg.inv(res.omega)
        mask = g.adjacency() | np.eye(g.p, dtype=bool)
        assert np.abs(sigma - s)[mask].max() <= 1e-7 * np.abs(s).max()


def test_warm_start_never_needs_more_sweeps():
    for g, s in battery(5):
        warm = cca_estimate(s, g).omega_hat
        cold = gipf_mle(s, g)
        hot = gipf_mle(s, g, IterativeConfig(init=warm))
        assert hot.converged and cold.converged
        assert hot.iterations <= cold.iterations


def test_identity_init_reaches_same_optimum():
    g, s = next(battery(6, count=1))
    a = gipf_mle(s, g, IterativeConfig(tol=1e-11))
    b = gipf_mle(s, g, IterativeConfig(tol=1e-11, init="identity"))
    assert np.abs(a.omega - b.omega).max() <= 1e-8


def test_non_convergence_is_flagged():
    g, s = next(battery(7, count=1))
    res = ipf_mle(s, g, IterativeConfig(max_iter=1, tol=1e-14))
    assert not res.converged and res.iterations == 1
    assert res.summary()["converged"] is False


def test_clique_cap():
    g = gen_named_graph("multipartite3", 6)
    with pytest.raises(ResourceError):
        ipf_mle(np.eye(g.p), g, IterativeConfig(clique_cap=10))


def test_config_and_input_validation():
    with pytest.raises(InputError):
        IterativeConfig(tol=0)
    with pytest.raises(InputError):
        IterativeConfig(max_iter=0)
    with pytest.raises(InputError):
        gipf_mle(np.eye(4), CYCLE4, IterativeConfig(init="random"))
    with pytest.raises(InputError):
        gipf_mle(np.eye(4), CYCLE4, IterativeConfig(init=-np.eye(4)))
    with pytest.raises(InputError):
        gipf_mle(np.eye(4), CYCLE4, IterativeConfig(init=np.eye(3)))
    with pytest.raises(InputError):
        ipf_mle(np.eye(3), CYCLE4)
    with pytest.raises(InputError):
        ipf_mle(np.diag([1.0, 0.0, 1.0, 1.0]), CYCLE4)


def test_singular_clique_block():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((2, 4))
    s = x.T @ x / 2
    with pytest.raises(NumericalFailure):
        ipf_mle(s, Graph.complete(4))
