import numpy as np
import pytest

from riskbn.errors import ZeroMass
from riskbn.factors import Evidence, marginalize
from riskbn.exact import (build_junction_tree, calibrate, eliminate,
                          min_fill_order, posterior_marginals, query_marginals)
from riskbn.graph import moralize

from conftest import oracle_posterior, random_evidence, random_net


class TestMinFill:
    def test_order_covers_all_nodes(self, rng):
        net = random_net(rng, 7)
        order = min_fill_order(net)
        assert sorted(order) == sorted(net.names)

    def test_excluded_nodes_not_in_order(self, rng):
        net = random_net(rng, 7)
        order = min_fill_order(net, exclude={net.names[0]})
        assert net.names[0] not in order

    def test_deterministic(self, rng):
        net = random_net(rng, 7)
        assert min_fill_order(net) == min_fill_order(net)


class TestEliminate:
    def test_matches_oracle_over_many_nets(self):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            net = random_net(rng, int(rng.integers(3, 8)))
            ev = random_evidence(rng, net)
            targets = [n for n in net.names if n not in ev.hard][:2]
            if not targets:
                continue
            want, want_mass = oracle_posterior(net, targets, ev)
            for t in targets:
                got, mass = eliminate(net, [t], ev)
                assert np.allclose(got.values, want[t].values, atol=1e-12)
                assert np.isclose(mass, want_mass, rtol=1e-12)

    def test_joint_query_scope_order(self, rng):
        net = random_net(rng, 5)
        a, b = net.names[0], net.names[2]
        post, _ = eliminate(net, [b, a])
        assert post.names == (b, a)
        assert np.isclose(post.values.sum(), 1.0)

    def test_explicit_order_must_be_permutation(self, rng):
        net = random_net(rng, 4)
        with pytest.raises(ValueError):
            eliminate(net, [net.names[0]], order=[net.names[1]])

    def test_hard_evidence_on_query_rejected(self, rng):
        net = random_net(rng, 4)
        with pytest.raises(ValueError):
            eliminate(net, [net.names[0]], Evidence(hard={net.names[0]: 0}))

    def test_impossible_evidence_raises(self):
        from riskbn.factors import Cpt, binary
        from riskbn.network import build_network

        a, b = binary("a"), binary("b")
        net = build_network([Cpt(a, (), [[1.0, 0.0]]),
                             Cpt(b, (a,), [[1.0, 0.0], [0.0, 1.0]])])
        with pytest.raises(ZeroMass):
            eliminate(net, ["a"], Evidence(hard={"b": 1}))


class TestJunctionTreeStructure:
    def _trees(self, n_seeds=25):
        for seed in range(n_seeds):
            rng = np.random.default_rng(seed + 100)
            net = random_net(rng, int(rng.integers(3, 9)))
            yield net, build_junction_tree(net)

    def test_family_covering(self):
        for net, tree in self._trees():
            for cpt, home in zip(net.cpts, tree.assignment):
                family = {cpt.child.name} | {p.name for p in cpt.parents}
                assert family <= tree.cliques[home]

    def test_is_a_tree(self):
        for _, tree in self._trees():
            assert len(tree.edges) == len(tree.cliques) - 1
            seen = {0}
            frontier = [0]
            while frontier:
                u = frontier.pop()
                for v in tree.neighbors(u):
                    if v not in seen:
                        seen.add(v)
                        frontier.append(v)
            assert seen == set(range(len(tree.cliques)))

    def test_running_intersection(self):
        # for every variable, the cliques containing it form a connected subtree
        for _, tree in self._trees():
            all_vars = set().union(*tree.cliques)
            for name in all_vars:
                holding = {i for i, c in enumerate(tree.cliques) if name in c}
                start = next(iter(holding))
                seen = {start}
                frontier = [start]
                while frontier:
                    u = frontier.pop()
                    for v in tree.neighbors(u):
                        if v in holding and v not in seen:
                            seen.add(v)
                            frontier.append(v)
                assert seen == holding

    def test_cliques_are_maximal(self):
        for _, tree in self._trees():
            for i, c in enumerate(tree.cliques):
                for j, d in enumerate(tree.cliques):
                    assert i == j or not (c <= d)

    def test_moral_edges_covered(self):
        for net, tree in self._trees():
            moral = moralize(net.dag)
            for i in range(moral.n):
                for j in moral.adjacency[i]:
                    pair = {moral.names[i], moral.names[j]}
                    assert any(pair <= c for c in tree.cliques)


class TestCalibration:
    def test_clique_beliefs_match_enumeration(self):
        for seed in range(20):
            rng = np.random.default_rng(seed + 400)
            net = random_net(rng, int(rng.integers(3, 7)))
            ev = random_evidence(rng, net)
            tree = build_junction_tree(net)
            try:
                cal = calibrate(tree, ev)
            except ZeroMass:
                continue
            from riskbn.network import joint_enumerate

            joint = joint_enumerate(net, ev)
            for belief in cal.clique_beliefs:
                want = marginalize(joint, set(joint.names) - set(belief.names))
                # beliefs share one scale; log_z pins the absolute level
                scale = np.exp(cal.log_z) / belief.total()
                got = belief.aligned_values(want.scope) * scale
                assert np.allclose(got, want.values, atol=1e-12)

    def test_sepset_consistency(self):
        for seed in range(20):
            rng = np.random.default_rng(seed + 500)
            net = random_net(rng, int(rng.integers(3, 8)))
            tree = build_junction_tree(net)
            cal = calibrate(tree, random_evidence(rng, net, allow_soft=False))
            for (i, j), sep in cal.sepset_beliefs.items():
                for side in (i, j):
                    belief = cal.clique_beliefs[side]
                    got = marginalize(belief, set(belief.names) - set(sep.names))
                    assert np.allclose(got.aligned_values(sep.scope), sep.values,
                                       atol=1e-10)

    def test_log_z_matches_evidence_mass(self):
        for seed in range(20):
            rng = np.random.default_rng(seed + 600)
            net = random_net(rng, int(rng.integers(3, 7)))
            ev = random_evidence(rng, net)
            _, mass = oracle_posterior(net, [net.names[0]], ev) \
                if net.names[0] not in ev.hard else oracle_posterior(net, [net.names[-1]], ev)
            if mass <= 0:
                continue
            cal = calibrate(build_junction_tree(net), ev)
            assert np.isclose(cal.log_z, np.log(mass), rtol=1e-9)

    def test_impossible_evidence_raises(self):
        from riskbn.factors import Cpt, binary
        from riskbn.network import build_network

        a = binary("a")
        net = build_network([Cpt(a, (), [[1.0, 0.0]])])
        with pytest.raises(ZeroMass):
            calibrate(build_junction_tree(net), Evidence(hard={"a": 1}))


class TestQueryMarginals:
    def test_matches_eliminate(self, rng):
        net = random_net(rng, 6)
        ev = random_evidence(rng, net, allow_soft=False)
        targets = [n for n in net.names if n not in ev.hard]
        marginals, log_z = posterior_marginals(net, targets, ev)
        for t in targets:
            want, _ = eliminate(net, [t], ev)
            assert np.allclose(marginals[t].values, want.values, atol=1e-12)

    def test_hard_evidence_keeps_variable_queryable(self, rng):
        net = random_net(rng, 5)
        name = net.names[0]
        marginals, _ = posterior_marginals(net, [name], Evidence(hard={name: 0}))
        assert marginals[name].values[0] == pytest.approx(1.0)
