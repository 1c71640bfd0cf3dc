import json

import numpy as np
import pytest

from riskbn.errors import ParseError, StateSpaceTooLarge
from riskbn.factors import Cpt, Evidence, binary
from riskbn.network import (BayesNet, CiStatement, build_network, canonical_json,
                            check_ci_numeric, ci_deviation, joint_enumerate,
                            load, sample, save, to_doc, validate_document)

from conftest import random_net


def chain_net():
    K, D, C = binary("K"), binary("D"), binary("C")
    return build_network([
        Cpt(K, (), [[0.5, 0.5]]),
        Cpt(D, (K,), [[0.7, 0.3], [0.2, 0.8]]),
        Cpt(C, (D,), [[0.98, 0.02], [0.9, 0.1]]),
    ])


class TestBuildNetwork:
    def test_structure_read_off_cpts(self):
        net = chain_net()
        assert sorted((net.names[p], net.names[c]) for p, c in net.dag.edges()) \
            == [("D", "C"), ("K", "D")]

    def test_parent_mismatch_rejected(self):
        K, D = binary("K"), binary("D")
        dag = chain_net().dag
        with pytest.raises(ValueError):
            BayesNet(dag, [K, D, binary("C")],
                     [Cpt(K, (), [[0.5, 0.5]]),
                      Cpt(D, (), [[0.5, 0.5]]),          # missing parent K
                      Cpt(binary("C"), (D,), [[1.0, 0.0], [0.0, 1.0]])])


class TestJointEnumerate:
    def test_joint_sums_to_one_without_evidence(self):
        joint = joint_enumerate(chain_net())
        assert np.isclose(joint.values.sum(), 1.0)

    def test_evidence_masks_mass(self):
        joint = joint_enumerate(chain_net(), Evidence(hard={"K": 1}))
        assert np.isclose(joint.values.sum(), 0.5)
        assert np.allclose(joint.values[0], 0.0)

    def test_cap_enforced(self):
        net = random_net(np.random.default_rng(0), 6)
        with pytest.raises(StateSpaceTooLarge):
            joint_enumerate(net, cap=4)

    def test_matches_hand_computation(self):
        # P(C=1) = sum_d P(C=1|d) P(d): with P(D=1)=0.55, 0.45*0.02+0.55*0.1
        joint = joint_enumerate(chain_net())
        p_c1 = joint.values.sum(axis=(0, 1))[1]
        assert np.isclose(p_c1, 0.45 * 0.02 + 0.55 * 0.1)


class TestCiNumeric:
    def test_chain_ci_holds(self):
        s = CiStatement.of("C", "K", {"D"})
        assert check_ci_numeric(chain_net(), s)

    def test_marginal_dependence_detected(self):
        s = CiStatement.of("C", "K", ())
        assert not check_ci_numeric(chain_net(), s)
        assert ci_deviation(chain_net(), s) > 1e-3

    def test_empty_sets_vacuous(self):
        assert ci_deviation(chain_net(), CiStatement(frozenset(), frozenset({"C"}),
                                                     frozenset())) == 0.0

    def test_statement_sets_must_be_disjoint(self):
        with pytest.raises(ValueError):
            CiStatement.of("C", "C", ())


class TestSampling:
    def test_frequencies_approach_cpt(self):
        net = chain_net()
        rows = sample(net, 200_000, seed=5)
        k = rows[:, net.dag.index("K")]
        d = rows[:, net.dag.index("D")]
        p_d1_k1 = d[k == 1].mean()
        assert abs(p_d1_k1 - 0.8) < 0.01

    def test_deterministic_given_seed(self):
        net = chain_net()
        assert np.array_equal(sample(net, 100, seed=3), sample(net, 100, seed=3))


class TestJsonFormat:
    def test_roundtrip_bit_exact(self):
        text = save(chain_net())
        assert save(load(text)) == text

    def test_shortest_float_representation(self):
        assert '0.1' in save(chain_net())
        assert '0.30000000000000004' not in save(chain_net())

    def test_topological_variable_order(self):
        doc = to_doc(chain_net())
        assert [v["name"] for v in doc["variables"]] == ["K", "D", "C"]

    def test_unknown_field_rejected_with_locus(self):
        doc = to_doc(chain_net())
        doc["cpts"][1]["extra"] = 1
        with pytest.raises(ParseError) as exc:
            load(json.dumps(doc))
        assert exc.value.locus == "cpts[1]"

    def test_missing_cpt_rejected(self):
        doc = to_doc(chain_net())
        doc["cpts"].pop()
        with pytest.raises(ParseError):
            load(json.dumps(doc))

    def test_edge_to_unknown_variable_rejected(self):
        doc = to_doc(chain_net())
        doc["edges"].append(["K", "Zzz"])
        with pytest.raises(ParseError) as exc:
            load(json.dumps(doc))
        assert "edges[" in exc.value.locus

    def test_validate_document_collects_instead_of_raising(self):
        violations = validate_document({"variables": []})
        assert violations and violations[0].code == "ParseError"

    def test_canonical_json_rejects_nan(self):
        with pytest.raises(ValueError):
            canonical_json({"x": float("nan")})

    def test_random_nets_roundtrip(self):
        for seed in range(10):
            net = random_net(np.random.default_rng(seed), 6)
            text = save(net)
            assert save(load(text)) == text
