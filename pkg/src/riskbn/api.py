"""Shared request handlers returning plain JSON-ready dicts.

The HTTP service and the CLI's ``--json`` mode both call these functions,
so their outputs agree by construction.  All numbers pass through
``float`` untouched; errors are the package's exception types, mapped to
transport-specific envelopes by the callers.
"""

from __future__ import annotations

import numpy as np

from .errors import NotFound
from .factors import Evidence, Factor, marginalize, normalize
from .graph import d_separated
from .loopy import BpSettings, loopy_bp
from .network import BayesNet, to_doc, validate_document
from .exact import build_junction_tree, calibrate, query_marginals
from .temporal import DynamicNet, FilterState, dynamic_to_doc, filter_init, filter_step, _one_step_predictions
from . import catalog as catalog_mod


def _marginal_json(f: Factor) -> dict:
    v = f.scope[0]
    return {"states": list(v.states), "probabilities": [float(x) for x in f.values]}


def net_document(net) -> dict:
    if isinstance(net, DynamicNet):
        return dynamic_to_doc(net)
    return to_doc(net)


def run_validate(doc: dict) -> dict:
    violations = validate_document(doc)
    return {"valid": not violations, "violations": [v.to_dict() for v in violations]}


def _require_static(net) -> BayesNet:
    if isinstance(net, DynamicNet):
        raise ValueError("operation requires a static network; dynamic networks "
                         "are driven through filter sessions")
    return net


def run_query(net, targets: list[str], evidence: dict, method: str = "exact") -> dict:
    net = _require_static(net)
    if not targets:
        raise ValueError("at least one target is required")
    ev = Evidence.from_json(evidence or {}, net.variables)
    if method == "exact":
        tree = build_junction_tree(net)
        cal = calibrate(tree, ev)
        marg = query_marginals(cal, [t for t in targets if t not in ev.hard])
        out = {}
        for t in targets:
            if t in ev.hard:
                v = net.variable(t)
                vec = np.zeros(v.card)
                vec[v.state_index(ev.hard[t])] = 1.0
                out[t] = _marginal_json(Factor((v,), vec))
            else:
                out[t] = _marginal_json(marg[t])
        return {"method": "exact", "posteriors": out,
                "log_prob_evidence": float(cal.log_z)}
    if method == "loopy":
        res = loopy_bp(net, ev, BpSettings())
        out = {}
        for t in targets:
            if t not in res.marginals:
                raise NotFound(f"unknown target variable {t!r}", locus=t)
            out[t] = _marginal_json(res.marginals[t])
        return {"method": "loopy", "posteriors": out,
                "converged": bool(res.converged), "iterations": int(res.iterations)}
    raise ValueError(f"unknown method {method!r}; expected 'exact' or 'loopy'")


def run_dsep(net, x: list[str], y: list[str], z: list[str]) -> dict:
    net = _require_static(net)
    idx = {n: i for i, n in enumerate(net.dag.names)}
    for name in [*x, *y, *z]:
        if name not in idx:
            raise NotFound(f"unknown variable {name!r}", locus=name)
    sep = d_separated(net.dag, {idx[n] for n in x}, {idx[n] for n in y},
                      {idx[n] for n in z})
    return {"separated": bool(sep)}


def run_jtree(net) -> dict:
    net = _require_static(net)
    tree = build_junction_tree(net)
    cliques = [sorted(c) for c in tree.cliques]
    sepsets = [{"between": [i, j], "variables": sorted(tree.sepset(i, j))}
               for i, j in tree.edges]
    return {"cliques": cliques, "sepsets": sepsets,
            "max_clique_size": int(tree.max_clique_size)}


def run_anomaly(net, observed: dict, reported: dict, threshold: float = 0.05) -> dict:
    net = _require_static(net)
    obs = Evidence.from_json(observed or {}, net.variables)
    rep = Evidence.from_json(reported or {}, net.variables)
    return catalog_mod.anomaly_screen(net, obs, rep, threshold)


def catalog_listing() -> dict:
    manifest = catalog_mod.fixture_manifest()
    entries = []
    for cid, info in manifest["entries"].items():
        entry = catalog_mod.build(cid)
        entries.append({
            "id": cid,
            "kind": info["kind"],
            "figure": info["figure"],
            "variants": sorted(info["variants"]),
            "doc": entry.doc,
            "queries": [{"name": q.name, "targets": list(q.targets),
                         "evidence": q.evidence, "doc": q.doc}
                        for q in entry.queries],
        })
    return {"version": manifest["version"], "entries": entries}


def catalog_entry_json(catalog_id: str, variant: str | None = None) -> dict:
    try:
        entry = catalog_mod.build(catalog_id)
    except KeyError:
        raise NotFound(f"unknown catalog id {catalog_id!r}", locus=catalog_id) from None
    if variant:
        if variant not in entry.variants:
            raise NotFound(f"unknown variant {variant!r} of {catalog_id!r}", locus=variant)
        net = entry.variants[variant]
    else:
        net = entry.net
    return {
        "id": catalog_id,
        "variant": variant,
        "kind": entry.kind,
        "doc": entry.doc,
        "network": net_document(net),
        "ci_assertions": [
            {"x": sorted(s.x), "y": sorted(s.y), "z": sorted(s.z),
             "expected": s.expected}
            for s in entry.ci_assertions
        ],
    }


# ---------------------------------------------------------------------------
# Filter sessions (used by the service and by `filter` on the CLI)


def session_tick_json(dnet: DynamicNet, state: FilterState) -> dict:
    preds = _one_step_predictions(dnet, state)
    belief = {}
    for name in state.belief.names:
        f = marginalize(state.belief, set(state.belief.names) - {name})
        f, _ = normalize(f)
        belief[name] = _marginal_json(f)
    return {
        "t": int(state.t),
        "belief": belief,
        "prediction": {name: _marginal_json(f) for name, f in sorted(preds.items())},
        "log_evidence": float(state.log_evidence),
    }


def run_filter(dnet: DynamicNet, stream: list[dict]) -> dict:
    """Fold a parsed evidence stream; per-tick beliefs and one-step-ahead
    predictions, mirroring a session's observe history."""
    slice_vars = {v.name: v for v in dnet.slice_vars}
    state = filter_init(dnet)
    ticks = [session_tick_json(dnet, state)]
    for rec in stream:
        ev = Evidence.from_json(rec.get("evidence", {}), list(slice_vars.values()))
        state = filter_step(dnet, state, ev)
        ticks.append(session_tick_json(dnet, state))
    return {"ticks": ticks, "log_evidence": float(state.log_evidence)}
