"""Loopy belief propagation on the factor-graph view of a network.

Synchronous (flooding) sum-product with damping; messages are normalized
after every update and convergence is max-norm change on factor-to-variable
messages.  Exact on trees; an approximation elsewhere, with non-convergence
reported rather than hidden.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroMass
from .factors import Evidence, Factor
from .network import BayesNet
from .exact import _evidence_factors


@dataclass(frozen=True)
class BpSettings:
    max_iters: int = 200
    damping: float = 0.5
    tolerance: float = 1e-8

    def __post_init__(self):
        if not (0.0 <= self.damping < 1.0):
            raise ValueError("damping must lie in [0, 1)")
        if self.max_iters < 1 or self.tolerance <= 0:
            raise ValueError("max_iters >= 1 and tolerance > 0 required")


@dataclass
class BpResult:
    marginals: dict[str, Factor]
    converged: bool
    iterations: int


class FactorGraph:
    """Bipartite variable/factor graph: one factor node per CPT plus one
    unary factor per evidence entry."""

    def __init__(self, net: BayesNet, ev: Evidence | None = None):
        self.variables = list(net.variables)
        self.factors: list[Factor] = net.factors() + _evidence_factors(net, ev or Evidence())
        self.var_index = {v.name: i for i, v in enumerate(self.variables)}
        self.neighbors = [[self.var_index[n] for n in f.names] for f in self.factors]


def loopy_bp(net: BayesNet, ev: Evidence | None = None,
             settings: BpSettings = BpSettings()) -> BpResult:
    fg = FactorGraph(net, ev)
    n_var = len(fg.variables)
    cards = [v.card for v in fg.variables]
    # messages indexed by (factor, position-of-variable-in-factor-scope)
    f2v = [[np.full(cards[v], 1.0 / cards[v]) for v in nbrs] for nbrs in fg.neighbors]
    v2f = [[np.ones(cards[v]) / cards[v] for v in nbrs] for nbrs in fg.neighbors]
    lam = settings.damping
    converged = False
    it = 0
    for it in range(1, settings.max_iters + 1):
        # factor -> variable from the previous variable -> factor messages
        new_f2v = []
        delta = 0.0
        for fi, f in enumerate(fg.factors):
            msgs = []
            k = len(f.scope)
            for pos in range(k):
                vals = f.values
                for other in range(k):
                    if other == pos:
                        continue
                    shape = [1] * k
                    shape[other] = f.scope[other].card
                    vals = vals * v2f[fi][other].reshape(shape)
                axes = tuple(a for a in range(k) if a != pos)
                m = vals.sum(axis=axes) if axes else vals
                s = m.sum()
                m = m / s if s > 0 else np.full_like(m, 1.0 / len(m))
                m = (1 - lam) * m + lam * f2v[fi][pos]
                s = m.sum()
                m = m / s
                delta = max(delta, float(np.max(np.abs(m - f2v[fi][pos]))))
                msgs.append(m)
            new_f2v.append(msgs)
        f2v = new_f2v
        # variable -> factor from the fresh factor -> variable messages
        incoming: list[list[tuple[int, int]]] = [[] for _ in range(n_var)]
        for fi, nbrs in enumerate(fg.neighbors):
            for pos, vi in enumerate(nbrs):
                incoming[vi].append((fi, pos))
        for fi, nbrs in enumerate(fg.neighbors):
            for pos, vi in enumerate(nbrs):
                m = np.ones(cards[vi])
                for fj, pj in incoming[vi]:
                    if (fj, pj) != (fi, pos):
                        m = m * f2v[fj][pj]
                s = m.sum()
                v2f[fi][pos] = m / s if s > 0 else np.full(cards[vi], 1.0 / cards[vi])
        if delta < settings.tolerance:
            converged = True
            break
    marginals = {}
    incoming = [[] for _ in range(n_var)]
    for fi, nbrs in enumerate(fg.neighbors):
        for pos, vi in enumerate(nbrs):
            incoming[vi].append((fi, pos))
    for vi, v in enumerate(fg.variables):
        b = np.ones(v.card)
        for fi, pos in incoming[vi]:
            b = b * f2v[fi][pos]
        s = b.sum()
        if s <= 0:
            raise ZeroMass(f"belief for {v.name!r} is all zero")
        marginals[v.name] = Factor((v,), b / s)
    return BpResult(marginals=marginals, converged=converged, iterations=it)
