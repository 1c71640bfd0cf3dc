import numpy as np
import pytest

from riskbn.factors import Cpt, Evidence, binary
from riskbn.loopy import BpSettings, loopy_bp
from riskbn.network import build_network
from riskbn.exact import posterior_marginals

from conftest import random_evidence, random_net


def tree_net(seed=0):
    rng = np.random.default_rng(seed)
    # star: r -> a, b, c
    r, a, b, c = binary("r"), binary("a"), binary("b"), binary("c")
    def rows(n):
        m = rng.random((n, 2)) + 0.1
        return m / m.sum(axis=1, keepdims=True)
    return build_network([
        Cpt(r, (), rows(1)),
        Cpt(a, (r,), rows(2)),
        Cpt(b, (r,), rows(2)),
        Cpt(c, (r,), rows(2)),
    ])


def four_cycle():
    rng = np.random.default_rng(42)
    a, b, c, d = binary("a"), binary("b"), binary("c"), binary("d")
    def rows(n):
        m = rng.random((n, 2)) + 0.1
        return m / m.sum(axis=1, keepdims=True)
    # a -> b, a -> c, (b, c) -> d: the moralized/factor graph has a cycle
    return build_network([
        Cpt(a, (), rows(1)),
        Cpt(b, (a,), rows(2)),
        Cpt(c, (a,), rows(2)),
        Cpt(d, (b, c), rows(4)),
    ])


class TestSettings:
    def test_damping_range_checked(self):
        with pytest.raises(ValueError):
            BpSettings(damping=1.0)
        with pytest.raises(ValueError):
            BpSettings(damping=-0.1)

    def test_max_iters_positive(self):
        with pytest.raises(ValueError):
            BpSettings(max_iters=0)


class TestTreesAreExact:
    def test_star_marginals_match_exact(self):
        for seed in range(10):
            net = tree_net(seed)
            rng = np.random.default_rng(seed + 50)
            ev = random_evidence(rng, net, max_vars=2)
            res = loopy_bp(net, ev)
            assert res.converged
            targets = [n for n in net.names if n not in ev.hard]
            exact, _ = posterior_marginals(net, targets, ev)
            for t in targets:
                assert np.allclose(res.marginals[t].values, exact[t].values,
                                   atol=1e-6)

    def test_evidence_variable_pinned(self):
        net = tree_net()
        res = loopy_bp(net, Evidence(hard={"a": 1}))
        assert res.marginals["a"].values[1] == pytest.approx(1.0, abs=1e-6)


class TestLoopyGraphs:
    def test_cycle_reports_convergence_status(self):
        res = loopy_bp(four_cycle())
        assert isinstance(res.converged, bool)
        assert res.iterations >= 1

    def test_cycle_close_but_approximate(self):
        net = four_cycle()
        res = loopy_bp(net)
        exact, _ = posterior_marginals(net, list(net.names))
        worst = max(float(np.max(np.abs(res.marginals[n].values - exact[n].values)))
                    for n in net.names)
        assert worst < 0.1          # in the right neighborhood...
        # ...and marginals are proper distributions
        for n in net.names:
            assert np.isclose(res.marginals[n].values.sum(), 1.0)

    def test_iteration_budget_respected(self):
        res = loopy_bp(four_cycle(), settings=BpSettings(max_iters=3))
        assert res.iterations <= 3

    def test_random_nets_nonconvergence_is_reported_not_hidden(self):
        for seed in range(5):
            net = random_net(np.random.default_rng(seed + 900), 6)
            res = loopy_bp(net, settings=BpSettings(max_iters=50))
            assert res.iterations <= 50
            for n in net.names:
                assert np.all(res.marginals[n].values >= 0)
