"""Built-in catalog of example networks: commercial auto, home property
damage, frequency-severity, GLM predictor elimination, summary scores,
stochastic Bornhuetter-Ferguson reserving, capital modelling, sensor-driven
claim alerts, dynamic claims learning, smart-home loss models, and latent
tree / emission structures.

Each entry pairs a network with the conditional-independence assertions its
structure is meant to encode and a few named queries.  Structures are fixed;
probability tables are seeded-random generic fixtures rounded to four
decimals (the desk chain and the dynamic-claims desk parametrization use
their fixed documented numbers).  ``tools/gen_fixtures.py`` writes the
canonical fixture files; a test locks them to these builders.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConflictingEvidence
from .factors import Cpt, Evidence, Variable, binary
from .network import BayesNet, CiStatement, build_network, joint_enumerate
from .exact import posterior_marginals
from .factors import marginalize
from .temporal import DynamicNet, prev_of, unroll

FIXTURE_VERSION = "v1"


@dataclass(frozen=True)
class CatalogQuery:
    name: str
    targets: tuple[str, ...]
    evidence: dict
    doc: str


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    kind: str                                  # "static" | "dynamic"
    net: object                                # BayesNet | DynamicNet
    ci_assertions: tuple[CiStatement, ...]
    queries: tuple[CatalogQuery, ...] = ()
    variants: dict = field(default_factory=dict)
    figure: tuple[str, ...] = ()
    doc: str = ""

    def ci_net(self) -> BayesNet:
        """Static net the CI assertions refer to; dynamic entries unroll
        two slices (enough for every lag-1 statement and small enough to
        enumerate)."""
        return unroll(self.net, 2) if self.kind == "dynamic" else self.net

    def all_nets(self) -> dict[str, object]:
        out = {"": self.net}
        out.update(self.variants)
        return out


def _rand_rows(rng: np.random.Generator, n_rows: int, card: int) -> np.ndarray:
    """Generic strictly-positive probability rows rounded to 4 decimals."""
    raw = rng.random((n_rows, card)) + 0.15
    raw /= raw.sum(axis=1, keepdims=True)
    rows = np.round(raw, 4)
    rows[:, -1] = np.round(1.0 - rows[:, :-1].sum(axis=1), 4)
    return rows


def _rand_cpt(rng, child: Variable, parents: tuple[Variable, ...]) -> Cpt:
    n_rows = int(np.prod([p.card for p in parents])) if parents else 1
    return Cpt(child, parents, _rand_rows(rng, n_rows, child.card))


def _rand_net(seed: int, variables: dict[str, Variable], edges: list[tuple[str, str]]
              ) -> BayesNet:
    rng = np.random.default_rng(seed)
    parent_map: dict[str, list[str]] = {n: [] for n in variables}
    for p, c in edges:
        parent_map[c].append(p)
    cpts = [
        _rand_cpt(rng, v, tuple(variables[p] for p in parent_map[name]))
        for name, v in variables.items()
    ]
    return build_network(cpts)


def desk_chain() -> BayesNet:
    """The worked K -> D -> C home-insurance chain with its fixed numbers."""
    K, D, C = binary("K"), binary("D"), binary("C")
    return build_network([
        Cpt(K, (), [[0.5, 0.5]]),
        Cpt(D, (K,), [[0.7, 0.3], [0.2, 0.8]]),
        Cpt(C, (D,), [[0.98, 0.02], [0.9, 0.1]]),
    ])


def _fig1() -> CatalogEntry:
    vs = {n: binary(n) for n in ["B", "P", "S", "C"]}
    net = _rand_net(101, vs, [("B", "P"), ("P", "C"), ("S", "C")])
    return CatalogEntry(
        id="fig1_commercial_auto", kind="static", net=net, figure=("fig1",),
        doc="Commercial auto: industry class B matters for claims C only as a "
            "proxy for parked time P; max speed S acts directly.",
        ci_assertions=(
            CiStatement.of("B", "C", {"P"}, True),
            CiStatement.of("B", "C", (), False),
        ),
        queries=(
            CatalogQuery("parked_known", ("C",), {"P": 1},
                         "Claims outlook once parked time is observed."),
        ),
    )


def _fig2() -> CatalogEntry:
    K, D, C = binary("K"), binary("D"), binary("C")
    edgeless = build_network([Cpt(K, (), [[0.5, 0.5]]), Cpt(C, (), [[0.95, 0.05]])])
    direct = build_network([
        Cpt(K, (), [[0.5, 0.5]]), Cpt(C, (K,), [[0.97, 0.03], [0.88, 0.12]])])
    collider = build_network([
        Cpt(K, (), [[0.5, 0.5]]), Cpt(D, (), [[0.45, 0.55]]),
        Cpt(C, (K, D), [[0.99, 0.01], [0.92, 0.08], [0.96, 0.04], [0.85, 0.15]])])
    return CatalogEntry(
        id="fig2_fig3_home", kind="static", net=desk_chain(),
        figure=("fig2", "fig3", "fig4"),
        doc="Home property damage: construction K, door alarm D, claims C; "
            "the chain variant makes C independent of K given D.",
        ci_assertions=(
            CiStatement.of("C", "K", {"D"}, True),
            CiStatement.of("C", "K", (), False),
        ),
        variants={"edgeless": edgeless, "direct": direct, "collider": collider},
        queries=(
            CatalogQuery("construction_known", ("C",), {"K": 1},
                         "Forward update of claims from observed construction."),
            CatalogQuery("claim_observed", ("K",), {"C": 1},
                         "Reverse update of construction from an observed claim."),
        ),
    )


def _fig5() -> CatalogEntry:
    X1, X2 = binary("X1"), binary("X2")
    N = Variable("N", ("0", "1", "2"))
    S = Variable("S", ("1", "2"))
    vs = {"X1": X1, "X2": X2, "N": N, "S": S}
    edges = [("X1", "N"), ("X2", "N"), ("X1", "S"), ("X2", "S")]
    net = _rand_net(105, vs, edges)
    variant = _rand_net(1105, vs, edges + [("N", "S")])
    return CatalogEntry(
        id="fig5_freq_severity", kind="static", net=net, figure=("fig5",),
        doc="Frequency-severity split: rating factors X1, X2 drive claim "
            "count N and average severity S with no direct N-S link.",
        ci_assertions=(
            CiStatement.of("S", "N", {"X1", "X2"}, True),
            CiStatement.of("S", "N", {"X1"}, False),
            CiStatement.of("S", "N", {"X2"}, False),
        ),
        variants={"n_to_s": variant},
        queries=(
            CatalogQuery("rated", ("N", "S"), {"X1": 1, "X2": 0},
                         "Frequency and severity outlook for one rating cell."),
        ),
    )


def _fig6() -> CatalogEntry:
    vs = {n: binary(n) for n in ["X1", "X2", "X3", "Y"]}
    right = _rand_net(106, vs, [("X1", "Y"), ("X2", "Y"), ("X3", "X2")])
    left = _rand_net(1106, vs, [("X1", "Y"), ("X2", "Y"), ("X3", "Y")])
    return CatalogEntry(
        id="fig6_glm", kind="static", net=right, figure=("fig6",),
        doc="Predictor elimination: X3 is correlated with X2 and adds nothing "
            "to the outcome Y once X2 is in the model.",
        ci_assertions=(
            CiStatement.of("Y", "X3", {"X2"}, True),
            CiStatement.of("X3", "X2", (), False),
        ),
        variants={"all_relevant": left},
        queries=(
            CatalogQuery("outcome_given_x2", ("Y",), {"X2": 1},
                         "Outcome once the retained predictor is known."),
        ),
    )


def _fig7() -> CatalogEntry:
    vs = {n: binary(n) for n in ["X1", "X2", "X3", "S", "Y"]}
    net = _rand_net(107, vs, [("X2", "S"), ("X3", "S"), ("S", "Y"), ("X1", "Y")])
    return CatalogEntry(
        id="fig7_summary_score", kind="static", net=net, figure=("fig7",),
        doc="Summary score S standing in for the unavailable factors X2, X3.",
        ci_assertions=(
            CiStatement.of("Y", {"X2", "X3"}, {"S"}, True),
            CiStatement.of("Y", {"X2"}, (), False),
        ),
        queries=(
            CatalogQuery("scored", ("Y",), {"S": 1},
                         "Outcome given the summary score alone."),
        ),
    )


def _fig8() -> CatalogEntry:
    five = tuple(f"b{i}" for i in range(5))
    alpha = Variable("alpha", five)
    beta = Variable("beta", five)
    phi = Variable("phi", five)
    tau = Variable("tau", ("const",))   # degenerate: constants, one bin
    psi = Variable("psi", five)
    C = Variable("C", five)
    vs = {"alpha": alpha, "beta": beta, "phi": phi, "tau": tau, "psi": psi, "C": C}
    net = _rand_net(108, vs, [("alpha", "phi"), ("beta", "phi"),
                              ("phi", "C"), ("tau", "C"), ("psi", "C")])
    return CatalogEntry(
        id="fig8_stoch_bf", kind="static", net=net, figure=("fig8",),
        doc="Stochastic Bornhuetter-Ferguson reserving: hyper-parameters "
            "(alpha, beta) shape the row level phi; losses C depend on "
            "(phi, tau, psi).  Parameters are discretized to five bins; tau "
            "is a known constant (one bin).  Bin edges: equal quantiles of "
            "the working range, documented in the fixture meta.",
        ci_assertions=(
            CiStatement.of("C", {"alpha", "beta"}, {"phi", "tau", "psi"}, True),
            CiStatement.of({"phi", "alpha", "beta"}, "tau", (), True),
            CiStatement.of({"phi", "alpha", "beta"}, "psi", (), True),
            CiStatement.of("tau", "psi", (), True),
            CiStatement.of("C", "alpha", (), False),
        ),
        queries=(
            CatalogQuery("losses_seen", ("phi",), {"C": 4},
                         "Update of the row level after heavy observed losses."),
        ),
    )


FIG9_EDGES = [("T", "Y"), ("T", "B"), ("T", "F"), ("F", "W"), ("F", "Q"),
              ("Y", "R"), ("B", "A"), ("Q", "A"), ("R", "L"), ("H", "L"),
              ("W", "L")]


def _fig9() -> CatalogEntry:
    names = ["T", "F", "Y", "B", "W", "Q", "H", "R", "L", "A"]
    vs = {n: binary(n) for n in names}
    net = _rand_net(109, vs, FIG9_EDGES)
    # liabilities rise monotonically with reinsurer default R, catastrophe H,
    # and attritional losses W, so catastrophe scenarios move L the right way
    l_rows = [[0.8, 0.2], [0.6, 0.4], [0.45, 0.55], [0.3, 0.7],
              [0.55, 0.45], [0.35, 0.65], [0.2, 0.8], [0.05, 0.95]]
    cpts = [Cpt(vs["L"], (vs["R"], vs["H"], vs["W"]), l_rows)
            if c.child.name == "L" else c for c in net.cpts]
    net = build_network(cpts)
    capital = Variable("capital", ("low", "mid", "high"))
    # deterministic capital level from (A, L): strong assets + light
    # liabilities is high, the reverse is low, anything else mid
    rows = {(0, 0): "mid", (0, 1): "low", (1, 0): "high", (1, 1): "mid"}
    cap_rows = []
    for a in range(2):
        for l in range(2):
            vec = [0.0, 0.0, 0.0]
            vec[capital.states.index(rows[(a, l)])] = 1.0
            cap_rows.append(vec)
    with_capital = build_network(
        list(net.cpts) + [Cpt(capital, (vs["A"], vs["L"]), cap_rows)])
    return CatalogEntry(
        id="fig9_capital", kind="static", net=net, figure=("fig9",),
        doc="Capital model: interest rate T, cost inflation F, market "
            "softness Y, bond index B, attritional losses W, equity index Q, "
            "catastrophe H, reinsurer default R, liabilities L, assets A.",
        ci_assertions=(
            CiStatement.of("A", "T", {"B", "F"}, True),
            CiStatement.of("H", "T", (), True),
            CiStatement.of("L", "H", (), False),
        ),
        variants={"with_capital": with_capital},
        queries=(
            CatalogQuery("catastrophe", ("L", "A"), {"H": 1},
                         "Effect of a catastrophe on liabilities and assets."),
        ),
    )


FIG10_EDGES = [("G", "C"), ("G", "L"), ("S", "C"), ("S", "T"),
               ("L", "T"), ("L", "S")]


def _fig10() -> CatalogEntry:
    vs = {n: binary(n) for n in ["G", "L", "S", "T", "C"]}
    net = _rand_net(110, vs, FIG10_EDGES)
    return CatalogEntry(
        id="fig10_sensor_home", kind="static", net=net, figure=("fig10",),
        doc="Claim alert system: car in garage G, kitchen lights L, smoke S, "
            "temperature T, claim C.",
        ci_assertions=(
            CiStatement.of("T", "G", {"S", "L"}, True),
            CiStatement.of("T", "G", (), False),
        ),
        queries=(
            CatalogQuery("smoke_and_car", ("C",), {"S": 1, "G": 1},
                         "Claim chance when smoke is detected with the car home."),
            CatalogQuery("temp_only", ("S", "C"), {"T": 1},
                         "Inferring smoke and claims from temperature alone."),
        ),
    )


def _fig11() -> CatalogEntry:
    K = binary("K")
    C = binary("C")
    static = build_network([Cpt(K, (), [[0.5, 0.5]])])
    emission = Cpt(C, (K,), [[0.95, 0.05], [0.8, 0.2]])
    plain = DynamicNet(static, [C], [emission])
    rng = np.random.default_rng(111)
    ar_cpt = Cpt(C, (K, prev_of(C)), _rand_rows(rng, 4, 2))
    autoreg = DynamicNet(static, [C], [ar_cpt], {"C": emission})
    return CatalogEntry(
        id="fig11_dynamic_claims", kind="dynamic", net=plain, figure=("fig11",),
        doc="Claims across time driven by a constant combustibility class K; "
            "the autoregressive variant lets last period's claim matter too.",
        ci_assertions=(
            CiStatement.of("C_1", "C_2", {"K"}, True),
            CiStatement.of("C_1", "C_2", (), False),
        ),
        variants={"autoregressive": autoreg},
        queries=(
            CatalogQuery("first_claim", ("K",), {"C_1": 1},
                         "Belief about combustibility after one observed claim."),
        ),
    )


FIG12_STATIC_EDGES = [("Y", "K"), ("Y", "F"), ("I", "K"), ("I", "P")]
FIG12_SLICE_EDGES = [("G", "C"), ("G", "L"), ("S", "C"), ("S", "T"),
                     ("L", "T"), ("L", "S"), ("W", "C")]
FIG12_STATIC_TO_SLICE = [("P", "C"), ("K", "C"), ("F", "C"), ("M", "C"), ("M", "B")]


def _fig12() -> CatalogEntry:
    rng = np.random.default_rng(112)
    static_vs = {n: binary(n) for n in ["I", "Y", "K", "P", "F", "M"]}
    sparents: dict[str, list[str]] = {n: [] for n in static_vs}
    for p, c in FIG12_STATIC_EDGES:
        sparents[c].append(p)
    static = build_network([
        _rand_cpt(rng, v, tuple(static_vs[p] for p in sparents[n]))
        for n, v in static_vs.items()])
    slice_vs = {n: binary(n) for n in ["B", "W", "G", "L", "S", "T", "C"]}
    parents: dict[str, list[Variable]] = {n: [] for n in slice_vs}
    for p, c in FIG12_SLICE_EDGES:
        parents[c].append(slice_vs[p])
    for p, c in FIG12_STATIC_TO_SLICE:
        parents[c].append(static_vs[p])
    slice_cpts = [_rand_cpt(rng, v, tuple(parents[n])) for n, v in slice_vs.items()]
    dnet = DynamicNet(static, list(slice_vs.values()), slice_cpts)
    return CatalogEntry(
        id="fig12_smart_home", kind="dynamic", net=dnet, figure=("fig12",),
        doc="Smart-home loss model: static risk characteristics (income I, "
            "year built Y, construction K, protection P, flood score F, crime "
            "score M) feeding a per-tick sensor sub-net with burglar alarm B "
            "and weather station W.",
        ci_assertions=(
            CiStatement.of("C_1", "B_1", {"M"}, True),
            CiStatement.of("B_1", "M", (), False),
        ),
        queries=(
            CatalogQuery("alarm_tick", ("C_1",), {"B_1": 1},
                         "Claim chance for a tick with the burglar alarm firing."),
        ),
    )


def _fig13_tree() -> CatalogEntry:
    rng = np.random.default_rng(113)
    names = (["annual"] + [f"biannual{i}" for i in (1, 2)]
             + [f"quarterly{i}" for i in (1, 2, 3, 4)]
             + [f"C{i}" for i in range(1, 13)])
    vs = {n: binary(n) for n in names}
    edges = [("annual", "biannual1"), ("annual", "biannual2")]
    for q in range(1, 5):
        edges.append((f"biannual{(q + 1) // 2}", f"quarterly{q}"))
        for m in range(3 * q - 2, 3 * q + 1):
            edges.append((f"quarterly{q}", f"C{m}"))
    parents: dict[str, list[str]] = {n: [] for n in names}
    for p, c in edges:
        parents[c].append(p)
    net = build_network([
        _rand_cpt(rng, vs[n], tuple(vs[p] for p in parents[n])) for n in names])
    return CatalogEntry(
        id="fig13_tree", kind="static", net=net, figure=("fig13_left",),
        doc="Hierarchy of hidden climate factors (annual, biannual, quarterly)"
            " over twelve observed monthly claims.",
        ci_assertions=(
            CiStatement.of("C1", "C12", {"annual"}, True),
            CiStatement.of("C1", "C2", {"quarterly1"}, True),
            CiStatement.of("C1", "C2", (), False),
        ),
        queries=(
            CatalogQuery("winter_claims", ("annual",), {"C1": 1, "C2": 1},
                         "Updated belief about the annual factor from two "
                         "claim months."),
        ),
    )


def _fig13_emission() -> CatalogEntry:
    O, F, C = binary("O"), binary("F"), binary("C")
    o_init = Cpt(O, (), [[0.3, 0.7]])
    o_trans = Cpt(O, (prev_of(O),), [[0.75, 0.25], [0.2, 0.8]])
    f_emit = Cpt(F, (O,), [[0.85, 0.15], [0.97, 0.03]])
    c_emit = Cpt(C, (O, F), [[0.995, 0.005], [0.7, 0.3], [0.999, 0.001], [0.9, 0.1]])
    dnet = DynamicNet(None, [O, F, C], [o_trans, f_emit, c_emit], {"O": o_init})
    return CatalogEntry(
        id="fig13_emission", kind="dynamic", net=dnet, figure=("fig13_right",),
        doc="Emission model: occupancy O transitions across time and, with "
            "smoke/fire F, drives claim occurrences C.",
        ci_assertions=(
            CiStatement.of("F_1", "F_2", {"O_1"}, True),
            CiStatement.of("C_1", "C_2", (), False),
        ),
        queries=(
            CatalogQuery("claims_seen", ("O_2",), {"C_1": 1, "C_2": 1},
                         "Occupancy inferred from observed claims."),
        ),
    )


_BUILDERS = {
    "fig1_commercial_auto": _fig1,
    "fig2_fig3_home": _fig2,
    "fig5_freq_severity": _fig5,
    "fig6_glm": _fig6,
    "fig7_summary_score": _fig7,
    "fig8_stoch_bf": _fig8,
    "fig9_capital": _fig9,
    "fig10_sensor_home": _fig10,
    "fig11_dynamic_claims": _fig11,
    "fig12_smart_home": _fig12,
    "fig13_tree": _fig13_tree,
    "fig13_emission": _fig13_emission,
}


def catalog_ids() -> list[str]:
    return list(_BUILDERS)


def build(catalog_id: str) -> CatalogEntry:
    try:
        builder = _BUILDERS[catalog_id]
    except KeyError:
        raise KeyError(f"unknown catalog id {catalog_id!r}") from None
    return builder()


def manifest() -> dict:
    """Coverage manifest: id, fixture file, figure panel(s), kind."""
    out = {"version": FIXTURE_VERSION, "entries": {}}
    for cid in catalog_ids():
        e = build(cid)
        out["entries"][cid] = {
            "file": f"fixtures/{FIXTURE_VERSION}/{cid}.json",
            "figure": list(e.figure),
            "kind": e.kind,
            "variants": {
                name: f"fixtures/{FIXTURE_VERSION}/{cid}__{name}.json"
                for name in e.variants
            },
        }
    return out


def fixture_text(catalog_id: str, variant: str | None = None) -> str:
    """Raw canonical JSON of a committed fixture file."""
    from importlib import resources

    name = f"{catalog_id}__{variant}.json" if variant else f"{catalog_id}.json"
    ref = resources.files("riskbn") / "fixtures" / FIXTURE_VERSION / name
    return ref.read_text()


def load_fixture(catalog_id: str, variant: str | None = None):
    """Network parsed from the committed fixture file (static or dynamic)."""
    from .network import load
    from .temporal import dynamic_load, is_dynamic_doc
    import json as _json

    text = fixture_text(catalog_id, variant)
    doc = _json.loads(text)
    return dynamic_load(text) if is_dynamic_doc(doc) else load(text)


def fixture_manifest() -> dict:
    from importlib import resources
    import json as _json

    ref = resources.files("riskbn") / "fixtures" / "manifest.json"
    return _json.loads(ref.read_text())


# ---------------------------------------------------------------------------
# Domain checks built on the catalog


def _numeric_states(v: Variable) -> np.ndarray:
    return np.array([float(s) for s in v.states])


def verify_frequency_severity(net: BayesNet, tol: float = 1e-9) -> dict:
    """Check the frequency-severity factorization on a claims net with
    numeric N (count) and S (severity) states.

    (a) E(total | x1, x2) decomposed as sum over n of n * P(n | x) * E(S | n, x)
        must match direct enumeration of E(N*S | x).
    (b) E(S | n, x) must not depend on n (the separation that justifies
        fitting severity without frequency); reported as the max deviation.
    """
    joint = joint_enumerate(net)
    keep = {"X1", "X2", "N", "S"}
    f = marginalize(joint, set(joint.names) - keep)
    order = ["X1", "X2", "N", "S"]
    vals = f.aligned_values(tuple(f.var(n) for n in order))
    n_vals = _numeric_states(f.var("N"))
    s_vals = _numeric_states(f.var("S"))
    a_dev = 0.0
    b_dev = 0.0
    for x1 in range(2):
        for x2 in range(2):
            p = vals[x1, x2]                      # (N, S) joint, unnormalized
            mass = p.sum()
            if mass <= 0:
                continue
            p = p / mass
            e_c = float((p * np.outer(n_vals, s_vals)).sum())
            p_n = p.sum(axis=1)
            e_s_given_x = float((p.sum(axis=0) * s_vals).sum())
            decomposed = 0.0
            for n_i in range(len(n_vals)):
                if p_n[n_i] <= 0:
                    continue
                e_s_given_n = float((p[n_i] / p_n[n_i] * s_vals).sum())
                decomposed += n_vals[n_i] * p_n[n_i] * e_s_given_n
                b_dev = max(b_dev, abs(e_s_given_n - e_s_given_x))
            a_dev = max(a_dev, abs(e_c - decomposed))
    return {
        "a_deviation": a_dev, "a_pass": a_dev <= tol,
        "b_deviation": b_dev, "b_pass": b_dev <= tol,
    }


def capital_whatif(entry: CatalogEntry, scenario: Evidence,
                   capital_quantile: float = 0.995) -> dict:
    """Posterior assets/liabilities under a scenario plus the requested
    quantile of the derived capital variable."""
    net = entry.variants.get("with_capital", entry.net)
    marginals, log_z = posterior_marginals(net, ["A", "L", "capital"], scenario)
    cap = marginals["capital"]
    cum = np.cumsum(cap.values)
    q_idx = int(np.searchsorted(cum, capital_quantile))
    q_idx = min(q_idx, cap.scope[0].card - 1)
    return {
        "assets": [float(x) for x in marginals["A"].values],
        "liabilities": [float(x) for x in marginals["L"].values],
        "capital": [float(x) for x in cap.values],
        "capital_quantile_state": cap.scope[0].states[q_idx],
        "log_prob_evidence": log_z,
    }


def anomaly_screen(net: BayesNet, observed: Evidence, reported: Evidence,
                   threshold: float = 0.05) -> dict:
    """Compare reported inputs against their posteriors given the observed
    outcomes only; flag reported values whose posterior probability falls
    below the threshold."""
    overlap = observed.names & reported.names
    if overlap:
        raise ConflictingEvidence(f"observed and reported overlap on {sorted(overlap)}")
    if reported.soft:
        raise ValueError("reported evidence must be hard values")
    targets = sorted(reported.hard)
    marginals, _ = posterior_marginals(net, targets, observed)
    findings = []
    for name in targets:
        v = net.variable(name)
        state = v.state_index(reported.hard[name])
        post = float(marginals[name].values[state])
        findings.append({
            "variable": name,
            "reported_state": v.states[state],
            "posterior_probability": post,
            "flagged": post < threshold,
        })
    return {"threshold": threshold, "findings": findings}
