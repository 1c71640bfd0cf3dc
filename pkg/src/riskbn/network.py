"""The BayesNet aggregate, validation, the enumeration oracle, numeric CI
checks, forward sampling, and the JSON file format.

The on-disk format is a single JSON document::

    {"variables": [{"name": ..., "states": [...]}, ...],
     "edges": [["parent", "child"], ...],
     "cpts": [{"child": ..., "parents": [...], "rows": [[...], ...]}, ...],
     "meta": {...}}

Rows are row-major over the listed parents, last parent fastest.  The
canonical form (what ``save`` emits) lists variables in topological order
and prints probabilities in shortest round-trip decimal, so re-saving a
loaded document is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, StateSpaceTooLarge
from .factors import Cpt, Evidence, Factor, factor_from_cpt, marginalize
from .graph import Dag, topological_order

ENUMERATION_CAP = 2 ** 22


@dataclass
class Violation:
    code: str
    node: str | None
    detail: str

    def to_dict(self) -> dict:
        return {"code": self.code, "node": self.node, "detail": self.detail}


@dataclass(frozen=True)
class CiStatement:
    """Conditional-independence statement x ⟂ y | z with its expected truth."""

    x: frozenset[str]
    y: frozenset[str]
    z: frozenset[str]
    expected: bool = True

    def __post_init__(self):
        if (self.x & self.y) or (self.x & self.z) or (self.y & self.z):
            raise ValueError("CI statement sets must be disjoint")

    @staticmethod
    def of(x, y, z=(), expected=True) -> "CiStatement":
        as_set = lambda s: frozenset([s] if isinstance(s, str) else s)
        return CiStatement(as_set(x), as_set(y), as_set(z), expected)


class BayesNet:
    """Dag + per-node Variable + per-node Cpt; immutable once built."""

    def __init__(self, dag: Dag, variables, cpts):
        self.dag = dag
        self.variables = tuple(variables)
        self.cpts = tuple(cpts)
        by_name = {v.name: v for v in self.variables}
        if len(by_name) != len(self.variables):
            raise ValueError("duplicate variable names")
        self._by_name = by_name
        violations = validate_parts(dag, self.variables, self.cpts)
        if violations:
            raise ValueError("; ".join(f"{v.code} at {v.node}: {v.detail}" for v in violations))

    @property
    def names(self) -> tuple[str, ...]:
        return self.dag.names

    def variable(self, name: str):
        return self._by_name[name]

    def var_map(self) -> dict:
        return dict(self._by_name)

    def cpt(self, name: str) -> Cpt:
        return self.cpts[self.dag.index(name)]

    def state_space(self) -> int:
        out = 1
        for v in self.variables:
            out *= v.card
        return out

    def factors(self) -> list[Factor]:
        return [factor_from_cpt(c) for c in self.cpts]


def build_network(cpts: list[Cpt]) -> BayesNet:
    """Assemble a BayesNet from CPTs alone; structure is read off the
    parent lists."""
    names = [c.child.name for c in cpts]
    dag = Dag.from_edges(names, [(p.name, c.child.name) for c in cpts for p in c.parents])
    variables = [c.child for c in cpts]
    return BayesNet(dag, variables, cpts)


def validate_parts(dag: Dag, variables, cpts) -> list[Violation]:
    out: list[Violation] = []
    if len(variables) != dag.n or len(cpts) != dag.n:
        out.append(Violation("Shape", None, "one variable and one CPT required per node"))
        return out
    for i in range(dag.n):
        name = dag.names[i]
        if variables[i].name != name:
            out.append(Violation("NameMismatch", name, f"variable {variables[i].name!r} at node {name!r}"))
            continue
        cpt = cpts[i]
        if cpt.child.name != name:
            out.append(Violation("NameMismatch", name, f"CPT child is {cpt.child.name!r}"))
            continue
        graph_parents = sorted(dag.names[p] for p in dag.parents[i])
        cpt_parents = sorted(p.name for p in cpt.parents)
        if graph_parents != cpt_parents:
            out.append(Violation(
                "ParentMismatch", name,
                f"CPT parents {cpt_parents} vs graph parents {graph_parents}"))
    return out


def validate(net: BayesNet) -> list[Violation]:
    """Constructed nets are valid by construction; kept for document-level use."""
    return validate_parts(net.dag, net.variables, net.cpts)


def validate_document(doc: dict) -> list[Violation]:
    """Validate a parsed JSON document without raising; violations are data."""
    try:
        load_doc(doc)
    except ParseError as e:
        return [Violation("ParseError", e.locus, e.message)]
    except ValueError as e:
        return [Violation("Invalid", None, str(e))]
    return []


def joint_enumerate(net: BayesNet, ev: Evidence | None = None,
                    cap: int = ENUMERATION_CAP) -> Factor:
    """Brute-force joint: product of all CPT entries times evidence
    likelihoods, unnormalized, over every variable.  This is the oracle the
    rest of the code is tested against."""
    size = net.state_space()
    if size > cap:
        raise StateSpaceTooLarge(f"joint has {size} states, cap is {cap}")
    scope = net.variables
    pos = {v.name: i for i, v in enumerate(scope)}
    vals = np.ones(tuple(v.card for v in scope))
    for f in net.factors():
        shape = [1] * len(scope)
        perm_axes = sorted(range(len(f.scope)), key=lambda k: pos[f.scope[k].name])
        sub = f.values.transpose(perm_axes)
        for v in f.scope:
            shape[pos[v.name]] = v.card
        vals = vals * sub.reshape(shape)
    if ev:
        for name, state in ev.hard.items():
            if name in pos:
                v = scope[pos[name]]
                mask = np.zeros(v.card)
                mask[v.state_index(state)] = 1.0
                shape = [1] * len(scope)
                shape[pos[name]] = v.card
                vals = vals * mask.reshape(shape)
        for name, vec in ev.soft.items():
            if name in pos:
                shape = [1] * len(scope)
                shape[pos[name]] = scope[pos[name]].card
                vals = vals * np.asarray(vec).reshape(shape)
    return Factor(scope, vals)


def check_ci_numeric(net: BayesNet, s: CiStatement, tol: float = 1e-9,
                     cap: int = ENUMERATION_CAP) -> bool:
    """Numeric test of x ⟂ y | z: max deviation |P(x|y,z) − P(x|z)| over
    configurations with positive conditioning mass, compared to ``tol``.
    Empty x or y is vacuously independent."""
    return ci_deviation(net, s, cap=cap) <= tol


def ci_deviation(net: BayesNet, s: CiStatement, cap: int = ENUMERATION_CAP) -> float:
    if not s.x or not s.y:
        return 0.0
    joint = joint_enumerate(net, None, cap=cap)
    keep = set(s.x) | set(s.y) | set(s.z)
    pxyz = marginalize(joint, set(joint.names) - keep)
    names = pxyz.names
    x_axes = tuple(i for i, n in enumerate(names) if n in s.x)
    y_axes = tuple(i for i, n in enumerate(names) if n in s.y)
    v = pxyz.values
    pyz = v.sum(axis=x_axes, keepdims=True)
    pz = pyz.sum(axis=y_axes, keepdims=True)
    pxz = v.sum(axis=y_axes, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        c_xyz = np.where(pyz > 0, v / pyz, np.nan)
        c_xz = np.where(pz > 0, pxz / pz, np.nan)
        diff = np.abs(c_xyz - c_xz)
    defined = ~np.isnan(diff)
    return float(np.max(diff[defined])) if np.any(defined) else 0.0


def sample(net: BayesNet, n: int, seed: int) -> np.ndarray:
    """Forward (ancestral) sampling; returns an (n, nodes) int array in the
    net's declared variable order."""
    rng = np.random.default_rng(seed)
    order = topological_order(net.dag)
    out = np.zeros((n, net.dag.n), dtype=np.int64)
    for i in order:
        cpt = net.cpts[i]
        parent_idx = [net.dag.index(p.name) for p in cpt.parents]
        if parent_idx:
            cards = [p.card for p in cpt.parents]
            row_idx = np.zeros(n, dtype=np.int64)
            for col, c in zip(parent_idx, cards):
                row_idx = row_idx * c + out[:, col]
            probs = cpt.rows[row_idx]
        else:
            probs = np.broadcast_to(cpt.rows[0], (n, cpt.child.card))
        cum = np.cumsum(probs, axis=1)
        u = rng.random((n, 1))
        out[:, i] = (u > cum[:, :-1]).sum(axis=1) if cpt.child.card > 1 else 0
    return out


# ---------------------------------------------------------------------------
# JSON format


def _need(doc: dict, key: str, locus: str):
    if key not in doc:
        raise ParseError(f"missing field {key!r}", locus=locus)
    return doc[key]


def _need_list(doc: dict, key: str, locus: str) -> list:
    val = _need(doc, key, locus)
    if not isinstance(val, list):
        raise ParseError(f"field {key!r} must be a list", locus=key)
    return val


def _reject_unknown(doc: dict, allowed: set[str], locus: str):
    unknown = set(doc) - allowed
    if unknown:
        raise ParseError(f"unknown field(s) {sorted(unknown)}", locus=locus)


def load_doc(doc: dict) -> BayesNet:
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object", locus="$")
    _reject_unknown(doc, {"variables", "edges", "cpts", "meta"}, "$")
    variables = []
    for i, vdoc in enumerate(_need_list(doc, "variables", "$")):
        locus = f"variables[{i}]"
        _reject_unknown(vdoc, {"name", "states"}, locus)
        try:
            variables.append(Variable_from_doc(vdoc))
        except ValueError as e:
            raise ParseError(str(e), locus=locus) from None
    by_name = {v.name: v for v in variables}
    if len(by_name) != len(variables):
        raise ParseError("duplicate variable name", locus="variables")
    edges = []
    for i, e in enumerate(_need_list(doc, "edges", "$")):
        locus = f"edges[{i}]"
        if not (isinstance(e, list) and len(e) == 2):
            raise ParseError("edge must be a [parent, child] pair", locus=locus)
        for name in e:
            if name not in by_name:
                raise ParseError(f"edge references unknown variable {name!r}", locus=locus)
        edges.append((e[0], e[1]))
    dag = Dag.from_edges([v.name for v in variables], edges)
    cpt_by_child = {}
    for i, cdoc in enumerate(_need_list(doc, "cpts", "$")):
        locus = f"cpts[{i}]"
        _reject_unknown(cdoc, {"child", "parents", "rows"}, locus)
        child = _need(cdoc, "child", locus)
        if child not in by_name:
            raise ParseError(f"CPT child {child!r} is not a variable", locus=locus)
        parent_names = _need(cdoc, "parents", locus)
        for p in parent_names:
            if p not in by_name:
                raise ParseError(f"CPT parent {p!r} is not a variable", locus=locus)
        try:
            cpt = Cpt(by_name[child], tuple(by_name[p] for p in parent_names),
                      _need(cdoc, "rows", locus))
        except ValueError as e:
            raise ParseError(str(e), locus=locus) from None
        if child in cpt_by_child:
            raise ParseError(f"duplicate CPT for {child!r}", locus=locus)
        cpt_by_child[child] = cpt
    missing = set(by_name) - set(cpt_by_child)
    if missing:
        raise ParseError(f"missing CPT for {sorted(missing)}", locus="cpts")
    try:
        return BayesNet(dag, variables, [cpt_by_child[n] for n in dag.names])
    except ValueError as e:
        raise ParseError(str(e), locus="$") from None


def Variable_from_doc(vdoc: dict):
    from .factors import Variable

    name = vdoc["name"] if "name" in vdoc else None
    states = vdoc.get("states")
    if not isinstance(name, str) or not isinstance(states, list):
        raise ValueError("variable needs a string name and a list of states")
    return Variable(name, tuple(str(s) for s in states))


def load(text: str) -> BayesNet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", locus=f"line {e.lineno}") from None
    return load_doc(doc)


def to_doc(net: BayesNet, meta: dict | None = None) -> dict:
    """Canonical document: variables in topological order, probabilities in
    shortest round-trip decimal."""
    order = topological_order(net.dag)
    names = [net.dag.names[i] for i in order]
    return {
        "variables": [
            {"name": net.variables[i].name, "states": list(net.variables[i].states)}
            for i in order
        ],
        "edges": [[net.dag.names[p], net.dag.names[c]]
                  for c in order for p in net.dag.parents[c]],
        "cpts": [
            {"child": net.cpts[i].child.name,
             "parents": [p.name for p in net.cpts[i].parents],
             "rows": [[float(x) for x in row] for row in net.cpts[i].rows]}
            for i in order
        ],
        "meta": dict(meta or {}),
    }


def save(net: BayesNet, meta: dict | None = None) -> str:
    return canonical_json(to_doc(net, meta)) + "\n"


def canonical_json(obj) -> str:
    """Deterministic JSON with shortest round-trip floats (repr), 2-space
    indentation, and insertion key order."""

    def emit(o, indent):
        pad = "  " * indent
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f'{pad}  {json.dumps(k)}: {emit(v, indent + 1)}' for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            flat = all(isinstance(x, (int, float, str, bool)) or x is None for x in o)
            if flat:
                return "[" + ", ".join(emit(x, indent) for x in o) + "]"
            items = [f"{pad}  {emit(x, indent + 1)}" for x in o]
            return "[\n" + ",\n".join(items) + "\n" + pad + "]"
        if isinstance(o, bool) or o is None or isinstance(o, (int, str)):
            return json.dumps(o)
        if isinstance(o, float):
            if o != o or math.isinf(o):
                raise ValueError("non-finite float in document")
            return repr(o)
        raise TypeError(f"cannot serialize {type(o)}")

    return emit(obj, 0)
