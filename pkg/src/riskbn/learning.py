"""Parameter estimation and structure learning.

Parameters: maximum likelihood with an optional uniform Dirichlet prior,
and EM for latent variables with an exact per-row E-step.  Structure: BIC
hill-climbing with add/remove/reverse operators and seeded restarts, and a
PC-style skeleton phase driven by the G-squared conditional-independence
test.  Every randomized procedure takes an explicit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .errors import EmptyDataset, InsufficientData, ParseError
from .factors import Cpt, Evidence, Factor, Variable, marginalize
from .graph import Dag, UndirectedGraph
from .network import BayesNet
from . import exact

MISSING = -1
MISSING_TOKEN = "?"


@dataclass(frozen=True)
class Dataset:
    """Rows of state indices per variable; ``-1`` marks a missing cell."""

    variables: tuple[Variable, ...]
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[1] != len(self.variables):
            raise ValueError("rows must be (n, len(variables))")
        for j, v in enumerate(self.variables):
            col = rows[:, j]
            if np.any((col < MISSING) | (col >= v.card)):
                raise ValueError(f"column {v.name!r} has out-of-range states")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def column(self, name: str) -> int:
        for j, v in enumerate(self.variables):
            if v.name == name:
                return j
        raise KeyError(name)

    def is_complete(self) -> bool:
        return not np.any(self.rows == MISSING)

    @staticmethod
    def from_csv(text: str, variables: list[Variable] | None = None) -> "Dataset":
        """Header of variable names, then comma-separated state labels;
        missing cells use ``?``.  Without an explicit variable list, states
        are the sorted distinct labels per column."""
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ParseError("empty dataset file", locus="line 1")
        names = [s.strip() for s in lines[0].split(",")]
        cells = []
        for lineno, ln in enumerate(lines[1:], start=2):
            parts = [s.strip() for s in ln.split(",")]
            if len(parts) != len(names):
                raise ParseError(f"expected {len(names)} fields, got {len(parts)}",
                                 locus=f"line {lineno}")
            cells.append(parts)
        if variables is None:
            variables = []
            for j, name in enumerate(names):
                labels = sorted({row[j] for row in cells if row[j] != MISSING_TOKEN})
                variables.append(Variable(name, tuple(labels) or ("0",)))
        else:
            by_name = {v.name: v for v in variables}
            variables = [by_name[n] for n in names]
        rows = np.empty((len(cells), len(names)), dtype=np.int64)
        for i, row in enumerate(cells):
            for j, cell in enumerate(row):
                rows[i, j] = MISSING if cell == MISSING_TOKEN else variables[j].state_index(cell)
        return Dataset(tuple(variables), rows)

    def to_csv(self) -> str:
        lines = [",".join(v.name for v in self.variables)]
        for row in self.rows:
            lines.append(",".join(
                MISSING_TOKEN if s == MISSING else self.variables[j].states[s]
                for j, s in enumerate(row)))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_samples(net: BayesNet, samples: np.ndarray) -> "Dataset":
        return Dataset(tuple(net.variables), samples)


@dataclass(frozen=True)
class DirichletPrior:
    """Equivalent sample size spread uniformly over each CPT row."""

    alpha: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


def _family_counts(data: Dataset, child: str, parent_names: list[str]) -> np.ndarray:
    """(parent-config, child-state) counts; complete data only."""
    cj = data.column(child)
    pjs = [data.column(p) for p in parent_names]
    child_card = data.variables[cj].card
    p_cards = [data.variables[j].card for j in pjs]
    n_rows = int(np.prod(p_cards)) if p_cards else 1
    idx = np.zeros(data.n, dtype=np.int64)
    for j, c in zip(pjs, p_cards):
        idx = idx * c + data.rows[:, j]
    flat = idx * child_card + data.rows[:, cj]
    counts = np.bincount(flat, minlength=n_rows * child_card).astype(np.float64)
    return counts.reshape(n_rows, child_card)


def _rows_from_counts(counts: np.ndarray, prior: DirichletPrior | None) -> np.ndarray:
    if prior is not None:
        counts = counts + prior.alpha / counts.shape[1]
    totals = counts.sum(axis=1, keepdims=True)
    rows = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 1.0 / counts.shape[1])
    return rows


def fit_mle(dag: Dag, data: Dataset, prior: DirichletPrior | None = None) -> BayesNet:
    """Maximum-likelihood (or Dirichlet-smoothed) CPTs for a fixed structure.
    Parent configurations never seen in the data fall back to uniform rows."""
    if data.n == 0:
        raise EmptyDataset("cannot fit parameters on an empty dataset")
    if not data.is_complete():
        raise ValueError("fit_mle requires complete data; use fit_em")
    variables = {v.name: v for v in data.variables}
    cpts = []
    for i, name in enumerate(dag.names):
        parent_names = [dag.names[p] for p in dag.parents[i]]
        counts = _family_counts(data, name, parent_names)
        cpts.append(Cpt(variables[name], tuple(variables[p] for p in parent_names),
                        _rows_from_counts(counts, prior)))
    return BayesNet(dag, [variables[n] for n in dag.names], cpts)


def loglik_complete(net: BayesNet, data: Dataset) -> float:
    total = 0.0
    for i, name in enumerate(net.names):
        parent_names = [p.name for p in net.cpts[i].parents]
        counts = _family_counts(data, name, parent_names)
        probs = net.cpts[i].rows
        with np.errstate(divide="ignore"):
            lp = np.where(counts > 0, np.log(np.where(probs > 0, probs, 1.0)), 0.0)
        if np.any((counts > 0) & (probs <= 0)):
            return -math.inf
        total += float((counts * lp).sum())
    return total


def free_parameters(net_or_dag, cards: dict[str, int] | None = None) -> int:
    if isinstance(net_or_dag, BayesNet):
        dag = net_or_dag.dag
        cards = {v.name: v.card for v in net_or_dag.variables}
    else:
        dag = net_or_dag
    out = 0
    for i, name in enumerate(dag.names):
        prod = 1
        for p in dag.parents[i]:
            prod *= cards[dag.names[p]]
        out += (cards[name] - 1) * prod
    return out


def score_bic(net: BayesNet, data: Dataset) -> float:
    """Log-likelihood minus (free parameters) · ln(n) / 2."""
    if data.n == 0:
        raise EmptyDataset("cannot score an empty dataset")
    if not data.is_complete():
        raise ValueError("score_bic requires complete data")
    return loglik_complete(net, data) - free_parameters(net) * math.log(data.n) / 2.0


# ---------------------------------------------------------------------------
# EM


def fit_em(dag: Dag, latent: set[str], data: Dataset, seed: int | None = 0,
           max_iters: int = 100, tol: float = 1e-6) -> tuple[BayesNet, list[float]]:
    """EM with an exact E-step: per (distinct) row, the posterior over the
    unobserved variables comes from variable elimination on the current
    parameter estimate.  Returns the fitted net plus the log-likelihood
    trace, which is non-decreasing.

    ``seed=None`` initializes every CPT row uniform; otherwise rows are
    seeded random.
    """
    if data.n == 0:
        raise EmptyDataset("cannot fit on an empty dataset")
    variables = {v.name: v for v in data.variables}
    for name in latent:
        col = data.column(name)
        if np.any(data.rows[:, col] != MISSING):
            raise ValueError(f"latent variable {name!r} appears observed in the data")
    rng = np.random.default_rng(seed) if seed is not None else None
    cpts = []
    for i, name in enumerate(dag.names):
        parent_names = [dag.names[p] for p in dag.parents[i]]
        child = variables[name]
        n_rows = int(np.prod([variables[p].card for p in parent_names])) if parent_names else 1
        if rng is None:
            rows = np.full((n_rows, child.card), 1.0 / child.card)
        else:
            rows = rng.random((n_rows, child.card)) + 0.1
            rows /= rows.sum(axis=1, keepdims=True)
        cpts.append(Cpt(child, tuple(variables[p] for p in parent_names), rows))
    net = BayesNet(dag, [variables[n] for n in dag.names], cpts)

    uniq, inverse, weights = _unique_rows(data)
    trace: list[float] = []
    for _ in range(max_iters + 1):
        ll, expected = _e_step(net, data.variables, uniq, weights)
        trace.append(ll)
        if len(trace) >= 2 and trace[-1] - trace[-2] < tol:
            break
        if len(trace) > max_iters:
            break
        cpts = []
        for i, name in enumerate(dag.names):
            parent_names = [p.name for p in net.cpts[i].parents]
            rows = _rows_from_counts(expected[i], None)
            cpts.append(Cpt(variables[name], net.cpts[i].parents, rows))
        net = BayesNet(dag, net.variables, cpts)
    return net, trace


def _unique_rows(data: Dataset):
    uniq, inverse, counts = np.unique(data.rows, axis=0, return_inverse=True, return_counts=True)
    return uniq, inverse, counts.astype(np.float64)


def _e_step(net: BayesNet, variables, uniq: np.ndarray, weights: np.ndarray):
    """Weighted expected family counts and the observed-data log-likelihood."""
    expected = []
    for i, cpt in enumerate(net.cpts):
        n_rows = cpt.rows.shape[0]
        expected.append(np.zeros((n_rows, cpt.child.card)))
    ll = 0.0
    names = [v.name for v in variables]
    for row, w in zip(uniq, weights):
        observed = {names[j]: int(s) for j, s in enumerate(row) if s != MISSING}
        hidden = [names[j] for j, s in enumerate(row) if s == MISSING]
        ev = Evidence(hard=observed)
        if hidden:
            post, mass = exact.eliminate(net, hidden, ev)
        else:
            post, mass = None, _complete_row_prob(net, observed)
        if mass <= 0:
            from .errors import ZeroMass

            raise ZeroMass("a data row has zero probability under the current model")
        ll += w * math.log(mass)
        for i, cpt in enumerate(net.cpts):
            fam = [p.name for p in cpt.parents] + [cpt.child.name]
            fam_hidden = [n for n in fam if n in hidden]
            if fam_hidden:
                joint = marginalize(post, set(post.names) - set(fam_hidden))
                # distribute posterior mass over the family table
                _accumulate_family(expected[i], cpt, observed, joint, w)
            else:
                idx = 0
                for p in cpt.parents:
                    idx = idx * p.card + observed[p.name]
                expected[i][idx, observed[cpt.child.name]] += w
    return ll, expected


def _complete_row_prob(net: BayesNet, observed: dict[str, int]) -> float:
    prob = 1.0
    for cpt in net.cpts:
        row = cpt.row(tuple(observed[p.name] for p in cpt.parents))
        prob *= float(row[observed[cpt.child.name]])
    return prob


def _accumulate_family(table: np.ndarray, cpt: Cpt, observed: dict[str, int],
                       joint: Factor, w: float):
    fam_vars = list(cpt.parents) + [cpt.child]
    hidden_pos = {n: k for k, n in enumerate(joint.names)}
    it = np.ndindex(*(v.card for v in fam_vars)) if fam_vars else iter([()])
    vals = joint.values
    for assign in it:
        ok = True
        h_idx = [0] * len(joint.names)
        for v, s in zip(fam_vars, assign):
            if v.name in observed:
                if observed[v.name] != s:
                    ok = False
                    break
            else:
                h_idx[hidden_pos[v.name]] = s
        if not ok:
            continue
        p = float(vals[tuple(h_idx)]) if joint.names else 1.0
        row_idx = 0
        for v, s in zip(cpt.parents, assign[:-1]):
            row_idx = row_idx * v.card + s
        table[row_idx, assign[-1]] += w * p


# ---------------------------------------------------------------------------
# Structure search


@dataclass(frozen=True)
class StructureSearchSettings:
    max_iters: int = 200
    restarts: int = 5
    seed: int = 0
    whitelist: frozenset[tuple[str, str]] = frozenset()   # edges forced present
    blacklist: frozenset[tuple[str, str]] = frozenset()   # edges forced absent


def _family_bic(data: Dataset, child: str, parent_names: tuple[str, ...],
                cache: dict) -> float:
    key = (child, parent_names)
    if key in cache:
        return cache[key]
    counts = _family_counts(data, child, list(parent_names))
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        probs = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 0.0)
        lp = np.where(counts > 0, np.log(np.where(probs > 0, probs, 1.0)), 0.0)
    ll = float((counts * lp).sum())
    card = data.variables[data.column(child)].card
    k = (card - 1) * int(np.prod([data.variables[data.column(p)].card for p in parent_names])
                         if parent_names else 1)
    score = ll - k * math.log(data.n) / 2.0
    cache[key] = score
    return score


def hill_climb(data: Dataset, settings: StructureSearchSettings = StructureSearchSettings()
               ) -> tuple[Dag, list[float]]:
    """Greedy best-improvement search over add/remove/reverse moves with the
    decomposable BIC score; best graph over seeded restarts wins.  The score
    trace of the winning restart is strictly increasing per accepted move."""
    if data.n == 0:
        raise EmptyDataset("cannot learn structure from an empty dataset")
    if not data.is_complete():
        raise ValueError("hill_climb requires complete data")
    names = [v.name for v in data.variables]
    n = len(names)
    cache: dict = {}
    rng = np.random.default_rng(settings.seed)

    def dag_score(parents: list[set[int]]) -> float:
        return sum(_family_bic(data, names[i], tuple(sorted(names[p] for p in parents[i])), cache)
                   for i in range(n))

    def creates_cycle(parents, src, dst) -> bool:
        # would dst ~> src exist after adding src -> dst?
        stack, seen = [src], set()
        children = [[] for _ in range(n)]
        for c in range(n):
            for p in parents[c]:
                children[p].append(c)
        stack = [dst]
        while stack:
            u = stack.pop()
            if u == src:
                return True
            if u in seen:
                continue
            seen.add(u)
            stack.extend(children[u])
        return False

    def allowed(src, dst) -> bool:
        return (names[src], names[dst]) not in settings.blacklist

    best_overall = None
    best_trace: list[float] = []
    for restart in range(max(1, settings.restarts)):
        parents: list[set[int]] = [set() for _ in range(n)]
        for a, b in settings.whitelist:
            parents[names.index(b)].add(names.index(a))
        if restart > 0:
            order = rng.permutation(n)
            for k in range(n):
                for j in range(k):
                    if (rng.random() < 0.3 and allowed(order[j], order[k])
                            and not creates_cycle(parents, order[j], order[k])):
                        parents[order[k]].add(order[j])
        score = dag_score(parents)
        trace = [score]
        for _ in range(settings.max_iters):
            best_move, best_gain = None, 1e-12
            for src in range(n):
                for dst in range(n):
                    if src == dst:
                        continue
                    fam = tuple(sorted(names[p] for p in parents[dst]))
                    if src in parents[dst]:
                        if (names[src], names[dst]) in settings.whitelist:
                            continue
                        new_fam = tuple(sorted(names[p] for p in parents[dst] if p != src))
                        gain = (_family_bic(data, names[dst], new_fam, cache)
                                - _family_bic(data, names[dst], fam, cache))
                        if gain > best_gain:
                            best_move, best_gain = ("remove", src, dst), gain
                        # reverse: remove src->dst, add dst->src
                        if allowed(dst, src) and not creates_cycle(
                                [p - {src} if i == dst else set(p) for i, p in enumerate(parents)],
                                dst, src):
                            fam_src = tuple(sorted(names[p] for p in parents[src]))
                            new_src = tuple(sorted(set(fam_src) | {names[dst]}))
                            gain2 = gain + (_family_bic(data, names[src], new_src, cache)
                                            - _family_bic(data, names[src], fam_src, cache))
                            if gain2 > best_gain:
                                best_move, best_gain = ("reverse", src, dst), gain2
                    else:
                        if not allowed(src, dst) or creates_cycle(parents, src, dst):
                            continue
                        new_fam = tuple(sorted(set(fam) | {names[src]}))
                        gain = (_family_bic(data, names[dst], new_fam, cache)
                                - _family_bic(data, names[dst], fam, cache))
                        if gain > best_gain:
                            best_move, best_gain = ("add", src, dst), gain
            if best_move is None:
                break
            op, src, dst = best_move
            if op == "add":
                parents[dst].add(src)
            elif op == "remove":
                parents[dst].discard(src)
            else:
                parents[dst].discard(src)
                parents[src].add(dst)
            score += best_gain
            trace.append(score)
        if best_overall is None or score > best_overall[0]:
            dag = Dag(tuple(names), tuple(tuple(sorted(p)) for p in parents))
            best_overall = (score, dag)
            best_trace = trace
    return best_overall[1], best_trace


# ---------------------------------------------------------------------------
# Conditional-independence testing and the PC skeleton


@dataclass(frozen=True)
class G2Result:
    statistic: float
    p_value: float
    dof: int


def ci_test_g2(data: Dataset, x: str, y: str, z: list[str] = ()) -> G2Result:
    """Likelihood-ratio (G-squared) test of x ⟂ y | z on the contingency
    table.  Zero-expected cells contribute nothing and shrink the degrees
    of freedom.  Raises InsufficientData when a conditioning stratum holds
    fewer than 5 rows."""
    if data.n == 0:
        raise EmptyDataset("cannot test on an empty dataset")
    if not data.is_complete():
        raise ValueError("ci_test_g2 requires complete data")
    xi, yi = data.column(x), data.column(y)
    zis = [data.column(v) for v in z]
    cx = data.variables[xi].card
    cy = data.variables[yi].card
    z_cards = [data.variables[j].card for j in zis]
    strata = np.zeros(data.n, dtype=np.int64)
    for j, c in zip(zis, z_cards):
        strata = strata * c + data.rows[:, j]
    n_strata = int(np.prod(z_cards)) if z_cards else 1
    g2 = 0.0
    dof = 0
    counts_by_stratum = np.bincount(strata, minlength=n_strata)
    for s in range(n_strata):
        mask = strata == s
        n_s = int(counts_by_stratum[s])
        if n_s == 0:
            continue
        if n_s < 5:
            raise InsufficientData(
                f"conditioning stratum {s} has only {n_s} rows", locus=f"{x}⊥{y}|{','.join(z)}")
        table = np.zeros((cx, cy))
        np.add.at(table, (data.rows[mask, xi], data.rows[mask, yi]), 1.0)
        row_m = table.sum(axis=1, keepdims=True)
        col_m = table.sum(axis=0, keepdims=True)
        expected_tbl = row_m * col_m / n_s
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(table > 0, table * np.log(table / np.where(expected_tbl > 0, expected_tbl, 1.0)), 0.0)
        g2 += 2.0 * float(terms.sum())
        nz_rows = int((row_m > 0).sum())
        nz_cols = int((col_m > 0).sum())
        dof += max(nz_rows - 1, 0) * max(nz_cols - 1, 0)
    p = float(chi2.sf(g2, dof)) if dof > 0 else 1.0
    return G2Result(statistic=g2, p_value=p, dof=dof)


@dataclass
class SkeletonResult:
    skeleton: UndirectedGraph
    separating_sets: dict[frozenset[str], tuple[str, ...]]
    colliders: list[tuple[str, str, str]]   # (x, c, y) oriented x -> c <- y
    warnings: list[str] = field(default_factory=list)


def pc_skeleton(data: Dataset, alpha: float = 0.01) -> SkeletonResult:
    """Standard skeleton phase plus v-structure orientation.  An edge whose
    test cannot run for lack of data is kept, with a warning."""
    names = [v.name for v in data.variables]
    n = len(names)
    adj = {i: set(j for j in range(n) if j != i) for i in range(n)}
    sepsets: dict[frozenset[str], tuple[str, ...]] = {}
    warnings: list[str] = []
    from itertools import combinations

    level = 0
    while True:
        any_tested = False
        for i in range(n):
            for j in sorted(adj[i]):
                if j < i:
                    continue
                for side in ((i, j), (j, i)):
                    a, b = side
                    cand = sorted(adj[a] - {b})
                    if len(cand) < level:
                        continue
                    removed = False
                    for zs in combinations(cand, level):
                        any_tested = True
                        try:
                            res = ci_test_g2(data, names[a], names[b], [names[k] for k in zs])
                        except (InsufficientData, EmptyDataset) as e:
                            warnings.append(
                                f"kept edge {names[a]}-{names[b]}: {e.message}")
                            continue
                        if res.p_value > alpha:
                            adj[i].discard(j)
                            adj[j].discard(i)
                            sepsets[frozenset({names[i], names[j]})] = tuple(names[k] for k in zs)
                            removed = True
                            break
                    if removed:
                        break
                if j not in adj[i]:
                    continue
        max_deg = max((len(adj[i]) for i in range(n)), default=0)
        level += 1
        if level > max_deg or not any_tested and level > 1:
            break
    skeleton = UndirectedGraph(tuple(names), tuple(frozenset(adj[i]) for i in range(n)))
    colliders = []
    for c in range(n):
        nbrs = sorted(adj[c])
        for a, b in combinations(nbrs, 2):
            if b in adj[a]:
                continue
            sep = sepsets.get(frozenset({names[a], names[b]}))
            if sep is not None and names[c] not in sep:
                colliders.append((names[a], names[c], names[b]))
    return SkeletonResult(skeleton=skeleton, separating_sets=sepsets,
                          colliders=colliders, warnings=warnings)
