"""Plate-structured dynamic networks, unrolling, and the update/predict
filtering recursion.

A ``DynamicNet`` has a static fragment (nodes outside the plate), a slice
template (variables repeated each tick), and lag-1 cross-slice edges marked
by the ``@prev`` suffix on a CPT parent name.  Carried variables — the
scope the running belief lives over — are the static nodes plus any slice
variable with an outgoing cross-slice edge, which is exactly what the
autoregressive variant needs while keeping the plain case a pure
static-node posterior.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ZeroMass
from .factors import (
    Cpt,
    Evidence,
    Factor,
    Variable,
    factor_from_cpt,
    marginalize,
    normalize,
    product,
    scalar_factor,
)
from .network import BayesNet, build_network, canonical_json

PREV_SUFFIX = "@prev"


def prev_of(v: Variable) -> Variable:
    return Variable(v.name + PREV_SUFFIX, v.states)


def _is_prev(name: str) -> bool:
    return name.endswith(PREV_SUFFIX)


def _base(name: str) -> str:
    return name[: -len(PREV_SUFFIX)] if _is_prev(name) else name


class DynamicNet:
    """Time-homogeneous plate model.

    ``slice_cpts`` parents may name static variables, same-slice variables,
    or previous-slice variables via ``X@prev``.  Variables whose template
    CPT has a ``@prev`` parent need an entry in ``initial_cpts`` defining
    their first-slice distribution.
    """

    def __init__(self, static: BayesNet | None, slice_vars, slice_cpts,
                 initial_cpts: dict[str, Cpt] | None = None):
        if static is None:
            static = build_network([])
        self.static = static
        self.slice_vars = tuple(slice_vars)
        self.slice_cpts = tuple(slice_cpts)
        self.initial_cpts = dict(initial_cpts or {})
        slice_names = {v.name for v in self.slice_vars}
        static_names = set(static.names)
        if slice_names & static_names:
            raise ValueError(f"static/slice name clash: {sorted(slice_names & static_names)}")
        by_child = {c.child.name: c for c in self.slice_cpts}
        if set(by_child) != slice_names:
            raise ValueError("exactly one template CPT per slice variable required")
        for cpt in self.slice_cpts:
            for p in cpt.parents:
                base = _base(p.name)
                if _is_prev(p.name):
                    if base not in slice_names:
                        raise ValueError(f"{p.name!r} does not reference a slice variable")
                elif base not in slice_names and base not in static_names:
                    raise ValueError(f"unknown parent {p.name!r} of {cpt.child.name!r}")
            has_prev = any(_is_prev(p.name) for p in cpt.parents)
            if has_prev and cpt.child.name not in self.initial_cpts:
                raise ValueError(
                    f"{cpt.child.name!r} has a cross-slice parent; an initial CPT is required")
        for name, cpt in self.initial_cpts.items():
            if name not in slice_names:
                raise ValueError(f"initial CPT for unknown slice variable {name!r}")
            if any(_is_prev(p.name) for p in cpt.parents):
                raise ValueError(f"initial CPT for {name!r} may not have @prev parents")
        # validates acyclicity of the unrolled graph, including the first slice
        unroll(self, 2 if self.carried_dynamic() else 1)

    def carried_dynamic(self) -> list[str]:
        """Slice variables with an outgoing cross-slice edge, template order."""
        targets = {_base(p.name) for c in self.slice_cpts for p in c.parents if _is_prev(p.name)}
        return [v.name for v in self.slice_vars if v.name in targets]

    def carried_names(self) -> list[str]:
        return list(self.static.names) + self.carried_dynamic()

    def slice_var(self, name: str) -> Variable:
        for v in self.slice_vars:
            if v.name == name:
                return v
        raise KeyError(name)


def _rename(cpt: Cpt, rename: dict[str, str], var_of: dict[str, Variable]) -> Cpt:
    def rn(v: Variable) -> Variable:
        new = rename.get(v.name, v.name)
        return Variable(new, var_of.get(new, v).states)

    return Cpt(rn(cpt.child), tuple(rn(p) for p in cpt.parents), cpt.rows)


def unroll(dnet: DynamicNet, T: int) -> BayesNet:
    """Instantiate T slices: static nodes once, slice variables suffixed
    ``_1`` .. ``_T``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    cpts: list[Cpt] = list(dnet.static.cpts)
    for t in range(1, T + 1):
        rename: dict[str, str] = {}
        for v in dnet.slice_vars:
            rename[v.name] = f"{v.name}_{t}"
            rename[v.name + PREV_SUFFIX] = f"{v.name}_{t - 1}"
        for cpt in dnet.slice_cpts:
            if t == 1 and cpt.child.name in dnet.initial_cpts:
                cpt = dnet.initial_cpts[cpt.child.name]
            cpts.append(_rename(cpt, rename, {}))
    return build_network(cpts)


@dataclass(frozen=True)
class FilterState:
    """Running posterior over the carried variables after t observed ticks."""

    t: int
    belief: Factor
    log_evidence: float = 0.0


def filter_init(dnet: DynamicNet) -> FilterState:
    belief = scalar_factor(1.0)
    for cpt in dnet.static.cpts:
        belief = product(belief, factor_from_cpt(cpt))
    if belief.scope:
        belief, _ = normalize(belief)
    return FilterState(t=0, belief=belief, log_evidence=0.0)


def _slice_joint(dnet: DynamicNet, state: FilterState) -> Factor:
    """Belief times the next slice's CPT factors: a joint over previous
    carried variables (dynamic ones renamed ``X@prev``), static nodes, and
    the new slice."""
    belief = state.belief
    if state.t > 0:
        carried_dyn = set(dnet.carried_dynamic())
        scope = tuple(prev_of(v) if v.name in carried_dyn else v for v in belief.scope)
        belief = Factor(scope, belief.values)
    joint = belief
    first = state.t == 0
    for cpt in dnet.slice_cpts:
        if first and cpt.child.name in dnet.initial_cpts:
            cpt = dnet.initial_cpts[cpt.child.name]
        joint = product(joint, factor_from_cpt(cpt))
    return joint


def _apply_evidence_keep_scope(dnet: DynamicNet, joint: Factor, ev: Evidence) -> Factor:
    """Multiply in per-tick evidence as likelihood vectors so carried
    variables never leave the scope."""
    slice_names = {v.name for v in dnet.slice_vars}
    vals = joint.values
    for name in ev.names:
        if name not in slice_names:
            raise ValueError(f"evidence variable {name!r} is not a slice variable")
    for axis, v in enumerate(joint.scope):
        if v.name in ev.hard:
            vec = np.zeros(v.card)
            vec[v.state_index(ev.hard[v.name])] = 1.0
        elif v.name in ev.soft:
            vec = np.asarray(ev.soft[v.name], dtype=np.float64)
            if len(vec) != v.card:
                raise ValueError(f"likelihood for {v.name!r} has wrong length")
        else:
            continue
        shape = [1] * len(joint.scope)
        shape[axis] = v.card
        vals = vals * vec.reshape(shape)
    return Factor(joint.scope, vals)


def filter_step(dnet: DynamicNet, state: FilterState, ev: Evidence | None = None) -> FilterState:
    """One update tick: belief ∝ previous belief × slice likelihood of the
    evidence; the normalizer increments the accumulated log-evidence."""
    ev = ev or Evidence()
    joint = _apply_evidence_keep_scope(dnet, _slice_joint(dnet, state), ev)
    keep = set(dnet.carried_names())
    reduced = marginalize(joint, set(joint.names) - keep)
    try:
        belief, mass = normalize(reduced)
    except ZeroMass:
        raise ZeroMass(f"impossible evidence at tick {state.t + 1}", locus=str(state.t + 1))
    return FilterState(t=state.t + 1, belief=belief,
                       log_evidence=state.log_evidence + math.log(mass))


def predict(dnet: DynamicNet, state: FilterState, horizon: int, target: str) -> Factor:
    """Posterior of a slice variable ``horizon`` ticks ahead given the
    current belief and no further evidence."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    dnet.slice_var(target)
    cur = state
    for h in range(1, horizon + 1):
        joint = _slice_joint(dnet, cur)
        if h == horizon:
            out = marginalize(joint, set(joint.names) - {target})
            out, _ = normalize(out)
            return out
        keep = set(dnet.carried_names())
        belief, _ = normalize(marginalize(joint, set(joint.names) - keep))
        cur = FilterState(t=cur.t + 1, belief=belief, log_evidence=cur.log_evidence)


@dataclass(frozen=True)
class FilterTick:
    t: int
    state: FilterState
    predictions: dict[str, Factor]   # one-step-ahead marginal per slice variable


def filter_run(dnet: DynamicNet, stream) -> list[FilterTick]:
    """Fold :func:`filter_step` over an evidence stream.  Each output entry
    holds the posterior state after the tick plus the next tick's
    predictive marginals.  Empty evidence (missing sensor ticks) is fine."""
    state = filter_init(dnet)
    out = [FilterTick(0, state, _one_step_predictions(dnet, state))]
    for ev in stream:
        state = filter_step(dnet, state, ev)
        out.append(FilterTick(state.t, state, _one_step_predictions(dnet, state)))
    return out


def _one_step_predictions(dnet: DynamicNet, state: FilterState) -> dict[str, Factor]:
    joint = _slice_joint(dnet, state)
    preds = {}
    for v in dnet.slice_vars:
        f = marginalize(joint, set(joint.names) - {v.name})
        preds[v.name], _ = normalize(f)
    return preds


# ---------------------------------------------------------------------------
# NDJSON evidence streams and the dynamic JSON document


def parse_stream(text: str, variables: dict[str, Variable]) -> list[tuple[int, Evidence]]:
    """Newline-delimited ``{"t": int, "evidence": {var: state-or-likelihood}}``."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", locus=f"line {lineno}") from None
        if not isinstance(rec, dict) or set(rec) - {"t", "evidence"}:
            raise ParseError("stream records need exactly 't' and 'evidence'",
                             locus=f"line {lineno}")
        t = rec.get("t")
        if not isinstance(t, int):
            raise ParseError("'t' must be an integer", locus=f"line {lineno}")
        out.append((t, Evidence.from_json(rec.get("evidence", {}), variables)))
    out.sort(key=lambda r: r[0])
    return out


def is_dynamic_doc(doc: dict) -> bool:
    return isinstance(doc, dict) and "slice" in doc


def dynamic_to_doc(dnet: DynamicNet, meta: dict | None = None) -> dict:
    from .network import to_doc

    static_doc = to_doc(dnet.static)
    static_doc.pop("meta")
    return {
        "static": static_doc,
        "slice": {
            "variables": [{"name": v.name, "states": list(v.states)} for v in dnet.slice_vars],
            "cpts": [
                {"child": c.child.name,
                 "parents": [p.name for p in c.parents],
                 "rows": [[float(x) for x in row] for row in c.rows]}
                for c in dnet.slice_cpts
            ],
        },
        "initial_cpts": [
            {"child": c.child.name,
             "parents": [p.name for p in c.parents],
             "rows": [[float(x) for x in row] for row in c.rows]}
            for c in (dnet.initial_cpts[n] for n in sorted(dnet.initial_cpts))
        ],
        "meta": dict(meta or {}),
    }


def dynamic_save(dnet: DynamicNet, meta: dict | None = None) -> str:
    return canonical_json(dynamic_to_doc(dnet, meta)) + "\n"


def dynamic_load_doc(doc: dict) -> DynamicNet:
    from .network import Variable_from_doc, load_doc

    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object", locus="$")
    unknown = set(doc) - {"static", "slice", "initial_cpts", "meta"}
    if unknown:
        raise ParseError(f"unknown field(s) {sorted(unknown)}", locus="$")
    static_doc = dict(doc.get("static") or {"variables": [], "edges": [], "cpts": []})
    static_doc.setdefault("meta", {})
    static = load_doc(static_doc)
    sdoc = doc.get("slice")
    if not isinstance(sdoc, dict) or set(sdoc) - {"variables", "cpts"}:
        raise ParseError("'slice' needs 'variables' and 'cpts'", locus="slice")
    slice_vars = [Variable_from_doc(v) for v in sdoc.get("variables", [])]
    by_name = {v.name: v for v in slice_vars}
    static_by_name = {v.name: v for v in static.variables}

    def resolve(name: str, locus: str) -> Variable:
        base = _base(name)
        if _is_prev(name):
            if base not in by_name:
                raise ParseError(f"{name!r} does not reference a slice variable", locus=locus)
            return prev_of(by_name[base])
        if base in by_name:
            return by_name[base]
        if base in static_by_name:
            return static_by_name[base]
        raise ParseError(f"unknown parent {name!r}", locus=locus)

    def parse_cpt(cdoc: dict, locus: str) -> Cpt:
        if set(cdoc) - {"child", "parents", "rows"}:
            raise ParseError(f"unknown field(s) in CPT", locus=locus)
        child = cdoc.get("child")
        if child not in by_name:
            raise ParseError(f"CPT child {child!r} is not a slice variable", locus=locus)
        try:
            return Cpt(by_name[child],
                       tuple(resolve(p, locus) for p in cdoc.get("parents", [])),
                       cdoc.get("rows"))
        except ValueError as e:
            raise ParseError(str(e), locus=locus) from None

    slice_cpts = [parse_cpt(c, f"slice.cpts[{i}]") for i, c in enumerate(sdoc.get("cpts", []))]
    initial = {}
    for i, cdoc in enumerate(doc.get("initial_cpts", [])):
        cpt = parse_cpt(cdoc, f"initial_cpts[{i}]")
        initial[cpt.child.name] = cpt
    try:
        return DynamicNet(static, slice_vars, slice_cpts, initial)
    except ValueError as e:
        raise ParseError(str(e), locus="$") from None


def dynamic_load(text: str) -> DynamicNet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", locus=f"line {e.lineno}") from None
    return dynamic_load_doc(doc)
