"""Shared test helpers: random network generation and the enumeration
oracle, kept independent of the inference code under test."""

from __future__ import annotations

import numpy as np
import pytest

from riskbn.factors import Cpt, Evidence, Variable
from riskbn.graph import Dag
from riskbn.network import BayesNet, joint_enumerate
from riskbn.factors import marginalize, normalize


def random_dag(rng: np.random.Generator, n_nodes: int, edge_prob: float = 0.4) -> Dag:
    """Random DAG over x0..x{n-1}; edges only from lower to higher index."""
    names = tuple(f"x{i}" for i in range(n_nodes))
    parents = []
    for i in range(n_nodes):
        parents.append(tuple(j for j in range(i) if rng.random() < edge_prob))
    return Dag(names, tuple(parents))


def random_net(rng: np.random.Generator, n_nodes: int, max_card: int = 3,
               edge_prob: float = 0.4) -> BayesNet:
    dag = random_dag(rng, n_nodes, edge_prob)
    variables = [Variable(name, tuple(str(s) for s in range(rng.integers(2, max_card + 1))))
                 for name in dag.names]
    cpts = []
    for i, name in enumerate(dag.names):
        ps = tuple(variables[j] for j in dag.parents[i])
        n_rows = int(np.prod([p.card for p in ps])) if ps else 1
        rows = rng.random((n_rows, variables[i].card)) + 0.05
        rows /= rows.sum(axis=1, keepdims=True)
        cpts.append(Cpt(variables[i], ps, rows))
    return BayesNet(dag, variables, cpts)


def random_evidence(rng: np.random.Generator, net: BayesNet,
                    max_vars: int = 3, allow_soft: bool = True) -> Evidence:
    n_pick = int(rng.integers(0, min(max_vars, len(net.variables)) + 1))
    picks = rng.choice(len(net.variables), size=n_pick, replace=False)
    hard, soft = {}, {}
    for i in picks:
        v = net.variables[i]
        if allow_soft and rng.random() < 0.3:
            soft[v.name] = rng.random(v.card) + 0.05
        else:
            hard[v.name] = int(rng.integers(0, v.card))
    return Evidence(hard, soft)


def oracle_posterior(net: BayesNet, targets: list[str], ev: Evidence):
    """Posterior marginals and evidence mass straight from the brute-force
    joint — no elimination, no trees."""
    joint = joint_enumerate(net, ev)
    mass = float(joint.values.sum())
    out = {}
    for t in targets:
        f = marginalize(joint, set(joint.names) - {t})
        out[t], _ = normalize(f)
    return out, mass


@pytest.fixture
def rng():
    return np.random.default_rng(0)
