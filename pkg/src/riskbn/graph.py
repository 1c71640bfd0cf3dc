"""Directed-graph core: DAG topology, moralization, d-separation, Markov properties.

Nodes are dense integer indices; names exist for I/O only.  ``Dag`` and
``UndirectedGraph`` are immutable after construction and safe to share
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections import deque

from .errors import CycleDetected, OverlappingSets


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named nodes.

    ``parents[i]`` is the ordered tuple of parent indices of node ``i``.
    Construction validates name uniqueness, absence of self-loops and
    duplicate edges, and acyclicity.
    """

    names: tuple[str, ...]
    parents: tuple[tuple[int, ...], ...]
    _children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.names)
        if len(self.parents) != n:
            raise ValueError("parents list length must match names")
        if len(set(self.names)) != n or any(not s for s in self.names):
            raise ValueError("node names must be unique and non-empty")
        children = [[] for _ in range(n)]
        for i, ps in enumerate(self.parents):
            if len(set(ps)) != len(ps):
                raise ValueError(f"duplicate edge into {self.names[i]}")
            for p in ps:
                if not (0 <= p < n):
                    raise ValueError(f"parent index {p} out of range")
                if p == i:
                    raise ValueError(f"self-loop at {self.names[i]}")
                children[p].append(i)
        object.__setattr__(self, "_children", tuple(tuple(c) for c in children))
        topological_order(self)  # raises CycleDetected on bad input

    @property
    def n(self) -> int:
        return len(self.names)

    def children(self, i: int) -> tuple[int, ...]:
        return self._children[i]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown node {name!r}") from None

    def edges(self) -> list[tuple[int, int]]:
        return [(p, c) for c, ps in enumerate(self.parents) for p in ps]

    @staticmethod
    def from_edges(names: list[str], edges: list[tuple[str, str]]) -> "Dag":
        idx = {s: i for i, s in enumerate(names)}
        parents: list[list[int]] = [[] for _ in names]
        for p, c in edges:
            parents[idx[c]].append(idx[p])
        return Dag(tuple(names), tuple(tuple(ps) for ps in parents))


@dataclass(frozen=True)
class UndirectedGraph:
    """Symmetric adjacency over named nodes; no self-loops."""

    names: tuple[str, ...]
    adjacency: tuple[frozenset[int], ...]

    def __post_init__(self):
        for i, nb in enumerate(self.adjacency):
            if i in nb:
                raise ValueError(f"self-loop at {self.names[i]}")
            for j in nb:
                if i not in self.adjacency[j]:
                    raise ValueError("adjacency must be symmetric")

    @property
    def n(self) -> int:
        return len(self.names)

    def has_edge(self, i: int, j: int) -> bool:
        return j in self.adjacency[i]

    def separated(self, x: set[int], y: set[int], z: set[int]) -> bool:
        """True when every path from x to y passes through z."""
        blocked = set(z)
        seen = set(x) - blocked
        queue = deque(seen)
        while queue:
            u = queue.popleft()
            if u in y:
                return False
            for v in self.adjacency[u]:
                if v not in seen and v not in blocked:
                    seen.add(v)
                    queue.append(v)
        return not (seen & set(y))


def topological_order(dag: Dag) -> list[int]:
    """Kahn's algorithm; among ready nodes the lowest index goes first, so an
    edgeless graph comes back in insertion order."""
    n = len(dag.names)
    indeg = [len(ps) for ps in dag.parents]
    children = [[] for _ in range(n)]
    for c, ps in enumerate(dag.parents):
        for p in ps:
            children[p].append(c)
    import heapq

    ready = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != n:
        stuck = [dag.names[i] for i in range(n) if indeg[i] > 0]
        raise CycleDetected(f"graph contains a directed cycle through {stuck}")
    return order


def _closure(dag: Dag, x: int, step) -> set[int]:
    out: set[int] = set()
    queue = deque(step(x))
    while queue:
        u = queue.popleft()
        if u not in out:
            out.add(u)
            queue.extend(step(u))
    out.discard(x)
    return out


def ancestors(dag: Dag, x: int) -> set[int]:
    return _closure(dag, x, lambda u: dag.parents[u])


def descendants(dag: Dag, x: int) -> set[int]:
    return _closure(dag, x, lambda u: dag.children(u))


def moralize(dag: Dag) -> UndirectedGraph:
    """Drop directions and marry every pair of co-parents."""
    adj: list[set[int]] = [set() for _ in range(dag.n)]
    for c, ps in enumerate(dag.parents):
        for p in ps:
            adj[p].add(c)
            adj[c].add(p)
        for a in ps:
            for b in ps:
                if a != b:
                    adj[a].add(b)
    return UndirectedGraph(dag.names, tuple(frozenset(s) for s in adj))


def _ancestral_set(dag: Dag, nodes: set[int]) -> set[int]:
    out = set(nodes)
    for v in nodes:
        out |= ancestors(dag, v)
    return out


def _induced_subdag(dag: Dag, keep: set[int]) -> tuple[Dag, dict[int, int]]:
    kept = sorted(keep)
    remap = {old: new for new, old in enumerate(kept)}
    names = tuple(dag.names[i] for i in kept)
    parents = tuple(tuple(remap[p] for p in dag.parents[i] if p in keep) for i in kept)
    return Dag(names, parents), remap


def d_separated(dag: Dag, x: set[int], y: set[int], z: set[int]) -> bool:
    """Moral-graph criterion: x and y are separated by z in the moralized
    ancestral graph of x ∪ y ∪ z.  This is the contract; see
    :func:`d_separated_paths` for the path-blocking cross-check."""
    _check_disjoint(x, y, z)
    if not x or not y:
        return True
    sub, remap = _induced_subdag(dag, _ancestral_set(dag, set(x) | set(y) | set(z)))
    moral = moralize(sub)
    return moral.separated({remap[v] for v in x}, {remap[v] for v in y}, {remap[v] for v in z})


def d_separated_paths(dag: Dag, x: set[int], y: set[int], z: set[int]) -> bool:
    """Path-blocking criterion via active-trail reachability (Bayes-ball style).

    Kept independent of :func:`d_separated` so the two can be tested
    against each other.
    """
    _check_disjoint(x, y, z)
    if not x or not y:
        return True
    zset = set(z)
    anc_of_z = set()
    for v in zset:
        anc_of_z |= ancestors(dag, v)
    anc_of_z |= zset
    # states: (node, direction) with direction "up" = reached via an edge out
    # of the node (from a child), "down" = reached via an edge into the node.
    visited = set()
    queue = deque((s, "up") for s in x)
    while queue:
        u, d = queue.popleft()
        if (u, d) in visited:
            continue
        visited.add((u, d))
        if u not in zset and u in y:
            return False
        if d == "up" and u not in zset:
            for p in dag.parents[u]:
                queue.append((p, "up"))
            for c in dag.children(u):
                queue.append((c, "down"))
        elif d == "down":
            if u not in zset:
                for c in dag.children(u):
                    queue.append((c, "down"))
            if u in anc_of_z:
                for p in dag.parents[u]:
                    queue.append((p, "up"))
    return True


def _check_disjoint(x, y, z):
    if (set(x) & set(y)) or (set(x) & set(z)) or (set(y) & set(z)):
        raise OverlappingSets("x, y and z must be pairwise disjoint")


def local_markov_pairs(dag: Dag) -> list[tuple[int, set[int], set[int]]]:
    """One (node, non-descendants, parents) triple per node: each is a
    conditional-independence statement the joint must satisfy."""
    out = []
    for v in range(dag.n):
        nd = set(range(dag.n)) - {v} - descendants(dag, v) - set(dag.parents[v])
        out.append((v, nd, set(dag.parents[v])))
    return out


def markov_blanket(dag: Dag, x: int) -> set[int]:
    """Parents, children, and co-parents of children."""
    out = set(dag.parents[x]) | set(dag.children(x))
    for c in dag.children(x):
        out |= set(dag.parents[c])
    out.discard(x)
    return out
