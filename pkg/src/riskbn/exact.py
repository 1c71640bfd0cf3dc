"""Exact posterior computation.

Variable elimination answers ad-hoc queries; a min-fill junction tree with
Hugin-style two-pass calibration (sepset division, 0/0 = 0) serves repeated
queries.  Hard evidence enters as indicator likelihoods so clique scopes
are preserved; underflow is handled by scaling each initial clique to unit
mass and accumulating the log constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import VariableNotInScope, ZeroMass
from .factors import Evidence, Factor, marginalize, normalize, ones_factor, product, reduce
from .graph import moralize
from .network import BayesNet


def min_fill_order(net: BayesNet, exclude: set[str] = frozenset()) -> list[str]:
    """Greedy elimination order over the moral graph, minimizing fill-in
    edges per step; ties go to the lowest node index."""
    moral = moralize(net.dag)
    adj = {i: set(moral.adjacency[i]) for i in range(moral.n)}
    remaining = [i for i in range(moral.n) if moral.names[i] not in exclude]
    # keep excluded nodes in the graph so fill counts stay honest
    order = []
    pending = set(remaining)
    while pending:
        best, best_fill = None, None
        for i in sorted(pending):
            nbrs = [j for j in adj[i]]
            fill = 0
            for a in range(len(nbrs)):
                for b in range(a + 1, len(nbrs)):
                    if nbrs[b] not in adj[nbrs[a]]:
                        fill += 1
            if best_fill is None or fill < best_fill:
                best, best_fill = i, fill
        nbrs = list(adj[best])
        for a in range(len(nbrs)):
            for b in range(a + 1, len(nbrs)):
                adj[nbrs[a]].add(nbrs[b])
                adj[nbrs[b]].add(nbrs[a])
        for j in nbrs:
            adj[j].discard(best)
        del adj[best]
        pending.discard(best)
        order.append(net.dag.names[best])
    return order


def eliminate(net: BayesNet, query: set[str] | list[str], ev: Evidence | None = None,
              order: list[str] | None = None) -> tuple[Factor, float]:
    """Posterior joint over ``query`` plus the probability of evidence.

    Hard-evidence variables are reduced out of every factor up front; soft
    evidence multiplies in and the variable is summed out normally.
    """
    ev = ev or Evidence()
    query = list(query)
    if not query:
        raise ValueError("query must be non-empty")
    for q in query:
        if q not in net.names:
            raise VariableNotInScope(f"query variable {q!r} not in network", locus=q)
        if q in ev.hard:
            raise ValueError(f"query variable {q!r} has hard evidence")
    hard_only = Evidence(dict(ev.hard), {})
    factors = [reduce(f, hard_only) for f in net.factors()]
    # soft likelihoods enter exactly once, as unary factors
    for name, vec in ev.soft.items():
        if name in net.names:
            v = net.variable(name)
            factors.append(Factor((v,), np.asarray(vec, dtype=np.float64)))
    elim = [n for n in net.names if n not in query and n not in ev.hard]
    if order is None:
        order = [n for n in min_fill_order(net, exclude=set(query) | set(ev.hard))
                 if n in elim]
    else:
        if sorted(order) != sorted(elim):
            raise ValueError("order must be a permutation of the eliminable variables")
    for name in order:
        bucket = [f for f in factors if name in f.names]
        factors = [f for f in factors if name not in f.names]
        if not bucket:
            continue
        prod = bucket[0]
        for f in bucket[1:]:
            prod = product(prod, f)
        factors.append(marginalize(prod, {name}))
    result = factors[0] if factors else ones_factor(())
    for f in factors[1:]:
        result = product(result, f)
    if set(result.names) != set(query):
        result = marginalize(result, set(result.names) - set(query))
    # order result scope to match the query order
    perm = [result.names.index(q) for q in query]
    result = Factor(tuple(result.scope[i] for i in perm), result.values.transpose(perm))
    posterior, mass = normalize(result)
    return posterior, mass


@dataclass(frozen=True)
class CliqueTree:
    net: BayesNet
    cliques: tuple[frozenset[str], ...]
    edges: tuple[tuple[int, int], ...]          # tree edges between clique indices
    assignment: tuple[int, ...]                 # per-CPT clique index

    def sepset(self, i: int, j: int) -> frozenset[str]:
        return self.cliques[i] & self.cliques[j]

    def neighbors(self, i: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return out

    @property
    def max_clique_size(self) -> int:
        return max(len(c) for c in self.cliques)


def build_junction_tree(net: BayesNet) -> CliqueTree:
    """Moralize, triangulate by min-fill, collect maximal cliques, connect
    them by a maximum-weight spanning tree on sepset sizes, and assign each
    CPT to the first clique covering its family."""
    order = min_fill_order(net)
    moral = moralize(net.dag)
    adj = {n: {moral.names[j] for j in moral.adjacency[moral.names.index(n)]}
           for n in net.names}
    cliques: list[frozenset[str]] = []
    eliminated: set[str] = set()
    for name in order:
        clique = frozenset({name} | (adj[name] - eliminated))
        nbrs = list(adj[name] - eliminated)
        for a in range(len(nbrs)):
            for b in range(a + 1, len(nbrs)):
                adj[nbrs[a]].add(nbrs[b])
                adj[nbrs[b]].add(nbrs[a])
        eliminated.add(name)
        if not any(clique <= c for c in cliques):
            cliques.append(clique)
    cliques = [c for i, c in enumerate(cliques)
               if not any(c < cliques[j] for j in range(len(cliques)) if j != i)]
    # maximum-weight spanning tree over sepset sizes (Kruskal, deterministic ties)
    cand = []
    for i in range(len(cliques)):
        for j in range(i + 1, len(cliques)):
            w = len(cliques[i] & cliques[j])
            cand.append((-w, i, j))
    cand.sort()
    parent = list(range(len(cliques)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = []
    for w, i, j in cand:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
    assignment = []
    for c_idx, cpt in enumerate(net.cpts):
        family = {cpt.child.name} | {p.name for p in cpt.parents}
        home = next(i for i, c in enumerate(cliques) if family <= c)
        assignment.append(home)
    return CliqueTree(net, tuple(cliques), tuple(edges), tuple(assignment))


@dataclass(frozen=True)
class CalibratedTree:
    tree: CliqueTree
    clique_beliefs: tuple[Factor, ...]   # unnormalized P(scope, e), common scale
    sepset_beliefs: dict
    log_z: float                          # log probability of evidence


def _evidence_factors(net: BayesNet, ev: Evidence) -> list[Factor]:
    out = []
    for name, state in ev.hard.items():
        if name in net.names:
            v = net.variable(name)
            vec = np.zeros(v.card)
            vec[v.state_index(state)] = 1.0
            out.append(Factor((v,), vec))
    for name, vec in ev.soft.items():
        if name in net.names:
            v = net.variable(name)
            out.append(Factor((v,), np.asarray(vec, dtype=np.float64)))
    return out


def calibrate(tree: CliqueTree, ev: Evidence | None = None) -> CalibratedTree:
    """Two-pass Hugin propagation; afterwards every clique belief is the
    joint marginal of its scope with the evidence, up to one shared
    normalization constant."""
    net = tree.net
    ev = ev or Evidence()
    var_map = net.var_map()
    potentials: list[Factor] = []
    for clique in tree.cliques:
        scope = tuple(var_map[n] for n in sorted(clique, key=net.names.index))
        potentials.append(ones_factor(scope))
    cpt_factors = net.factors()
    for cpt_idx, home in enumerate(tree.assignment):
        potentials[home] = product(potentials[home], cpt_factors[cpt_idx])
    for f in _evidence_factors(net, ev):
        home = next(i for i, c in enumerate(tree.cliques) if f.names[0] in c)
        potentials[home] = product(potentials[home], f)
    log_scale = 0.0
    for i, p in enumerate(potentials):
        m = p.total()
        if m > 0:
            potentials[i] = Factor(p.scope, p.values / m)
            log_scale += math.log(m)
    sepsets: dict[tuple[int, int], Factor] = {}
    for i, j in tree.edges:
        scope = tuple(v for v in potentials[i].scope if v.name in tree.cliques[j])
        sepsets[(i, j)] = ones_factor(scope)

    def sep_key(a, b):
        return (a, b) if (a, b) in sepsets else (b, a)

    def pass_message(src: int, dst: int):
        key = sep_key(src, dst)
        sep_scope = sepsets[key].scope
        new_sep = marginalize(potentials[src], set(potentials[src].names) - {v.name for v in sep_scope})
        new_sep = Factor(sep_scope, new_sep.aligned_values(sep_scope))
        old = sepsets[key]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(old.values > 0, new_sep.values / np.where(old.values > 0, old.values, 1.0), 0.0)
        potentials[dst] = product(potentials[dst], Factor(sep_scope, ratio))
        sepsets[key] = new_sep

    root = 0
    order: list[tuple[int, int]] = []
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in tree.neighbors(u):
            if v not in seen:
                seen.add(v)
                order.append((u, v))
                stack.append(v)
    for u, v in reversed(order):   # collect towards the root
        pass_message(v, u)
    for u, v in order:             # distribute outwards
        pass_message(u, v)
    z = potentials[root].total()
    if z <= 0:
        raise ZeroMass("evidence has zero probability under the model")
    log_z = math.log(z) + log_scale
    return CalibratedTree(tree, tuple(potentials), dict(sepsets), log_z)


def query_marginals(cal: CalibratedTree, names: list[str]) -> dict[str, Factor]:
    """Normalized per-variable posteriors read off the calibrated cliques."""
    out = {}
    for name in names:
        candidates = [i for i, c in enumerate(cal.tree.cliques) if name in c]
        if not candidates:
            raise VariableNotInScope(f"{name!r} is not in any clique", locus=name)
        i = min(candidates, key=lambda k: len(cal.tree.cliques[k]))
        belief = cal.clique_beliefs[i]
        f = marginalize(belief, set(belief.names) - {name})
        out[name], _ = normalize(f)
    return out


def posterior_marginals(net: BayesNet, targets: list[str], ev: Evidence | None = None
                        ) -> tuple[dict[str, Factor], float]:
    """Junction-tree marginals for several targets plus log P(evidence)."""
    tree = build_junction_tree(net)
    cal = calibrate(tree, ev)
    return query_marginals(cal, targets), cal.log_z
