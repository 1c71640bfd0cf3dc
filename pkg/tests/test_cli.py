import json

import numpy as np
import pytest

from riskbn import catalog
from riskbn.cli import main
from riskbn.network import save, sample
from riskbn.learning import Dataset
from riskbn.temporal import dynamic_save


@pytest.fixture
def chain_path(tmp_path):
    p = tmp_path / "chain.json"
    p.write_text(save(catalog.build("fig2_fig3_home").net))
    return str(p)


@pytest.fixture
def dyn_path(tmp_path):
    p = tmp_path / "dyn.json"
    p.write_text(dynamic_save(catalog.build("fig11_dynamic_claims").net))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestValidate:
    def test_valid_network(self, capsys, chain_path):
        code, out, _ = run(capsys, "validate", chain_path)
        assert code == 0 and "valid" in out

    def test_broken_network_still_exit_zero_with_violations(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"variables": [], "edges": [], "cpts": 3, "meta": {}}')
        code, out, _ = run(capsys, "validate", str(p), "--json")
        assert code == 0
        assert json.loads(out)["valid"] is False

    def test_missing_file_exit_two(self, capsys):
        code, _, err = run(capsys, "validate", "/nonexistent.json")
        assert code == 2
        assert json.loads(err)["code"] == "ParseError"


class TestQuery:
    def test_human_output_six_decimals(self, capsys, chain_path):
        code, out, _ = run(capsys, "query", chain_path, "--target", "C",
                           "--evidence", "K=1")
        assert code == 0
        assert "0.916000, 0.084000" in out

    def test_json_matches_service_shape(self, capsys, chain_path):
        code, out, _ = run(capsys, "query", chain_path, "--target", "C",
                           "--evidence", "K=1", "--json")
        body = json.loads(out)
        assert body["posteriors"]["C"]["probabilities"] == \
            pytest.approx([0.916, 0.084], abs=1e-12)
        assert "log_prob_evidence" in body

    def test_soft_evidence_flag(self, capsys, chain_path):
        code, out, _ = run(capsys, "query", chain_path, "--target", "C",
                           "--soft", "K=0.3,0.7", "--json")
        assert code == 0

    def test_impossible_evidence_exit_one(self, capsys, tmp_path):
        p = tmp_path / "det.json"
        p.write_text(json.dumps({
            "variables": [{"name": "a", "states": ["0", "1"]}],
            "edges": [], "meta": {},
            "cpts": [{"child": "a", "parents": [], "rows": [[1.0, 0.0]]}]}))
        code, _, err = run(capsys, "query", str(p), "--target", "a",
                           "--evidence", "a=1")
        assert code == 1
        assert json.loads(err)["code"] == "ZeroMass"

    def test_bad_evidence_syntax_exit_two(self, capsys, chain_path):
        code, _, err = run(capsys, "query", chain_path, "--target", "C",
                           "--evidence", "K:1")
        assert code == 2


class TestDsep:
    def test_separated_chain(self, capsys, chain_path):
        code, out, _ = run(capsys, "dsep", chain_path, "--x", "K", "--y", "C",
                           "--z", "D")
        assert code == 0 and "separated: true" in out

    def test_connected_without_z(self, capsys, chain_path):
        code, out, _ = run(capsys, "dsep", chain_path, "--x", "K", "--y", "C")
        assert "separated: false" in out


class TestJtree:
    def test_prints_cliques(self, capsys, chain_path):
        code, out, _ = run(capsys, "jtree", chain_path)
        assert code == 0 and "max clique size: 2" in out


class TestFilter:
    def test_desk_values_in_stream(self, capsys, dyn_path, tmp_path):
        stream = tmp_path / "ev.ndjson"
        stream.write_text('{"t": 1, "evidence": {"C": 1}}\n')
        code, out, _ = run(capsys, "filter", dyn_path, "--stream", str(stream),
                           "--json")
        body = json.loads(out)
        assert body["ticks"][1]["belief"]["K"]["probabilities"] == \
            pytest.approx([0.2, 0.8])
        assert body["ticks"][1]["prediction"]["C"]["probabilities"][1] == \
            pytest.approx(0.17)

    def test_static_network_rejected(self, capsys, chain_path, tmp_path):
        stream = tmp_path / "ev.ndjson"
        stream.write_text("")
        code, _, err = run(capsys, "filter", chain_path, "--stream", str(stream))
        assert code == 1


class TestLearn:
    def test_structure_recovers_chain(self, capsys, tmp_path, chain_path):
        net = catalog.build("fig2_fig3_home").net
        data = Dataset(net.variables, sample(net, 10_000, seed=1))
        csv = tmp_path / "data.csv"
        csv.write_text(data.to_csv())
        code, out, _ = run(capsys, "learn", "structure", str(csv), "--json")
        assert code == 0
        edges = {frozenset(e) for e in json.loads(out)["edges"]}
        assert edges == {frozenset({"K", "D"}), frozenset({"D", "C"})}

    def test_params_fits_cpts(self, capsys, tmp_path, chain_path):
        net = catalog.build("fig2_fig3_home").net
        data = Dataset(net.variables, sample(net, 50_000, seed=2))
        csv = tmp_path / "data.csv"
        csv.write_text(data.to_csv())
        code, out, _ = run(capsys, "learn", "params", str(csv), "--dag",
                           chain_path, "--json")
        body = json.loads(out)
        fitted = {c["child"]: c["rows"] for c in body["network"]["cpts"]}
        assert np.allclose(fitted["D"], [[0.7, 0.3], [0.2, 0.8]], atol=0.01)

    def test_em_with_latent_column(self, capsys, tmp_path, chain_path):
        net = catalog.build("fig2_fig3_home").net
        rows = sample(net, 500, seed=3)
        rows[:, net.dag.index("D")] = -1
        data = Dataset(net.variables, rows)
        csv = tmp_path / "data.csv"
        csv.write_text(data.to_csv())
        code, out, _ = run(capsys, "learn", "em", str(csv), "--dag", chain_path,
                           "--latent", "D", "--max-iters", "15", "--json")
        body = json.loads(out)
        trace = body["loglik_trace"]
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))

    def test_params_without_dag_exit_two(self, capsys, tmp_path):
        csv = tmp_path / "d.csv"
        csv.write_text("A\n0\n1\n")
        code, _, err = run(capsys, "learn", "params", str(csv))
        assert code == 2


class TestCatalogCommands:
    def test_list_names_every_id(self, capsys):
        code, out, _ = run(capsys, "catalog", "list")
        for cid in catalog.catalog_ids():
            assert cid in out

    def test_instantiate_emits_loadable_document(self, capsys, tmp_path):
        code, out, _ = run(capsys, "catalog", "instantiate", "fig1_commercial_auto",
                           "--json")
        from riskbn.network import load_doc

        net = load_doc(json.loads(out))
        assert len(net.names) == 4

    def test_unknown_id_exit_one(self, capsys):
        code, _, err = run(capsys, "catalog", "show", "fig99")
        assert code == 1
        assert json.loads(err)["code"] == "NotFound"


class TestDeterminism:
    def test_same_invocation_same_bytes(self, capsys, chain_path):
        _, out1, _ = run(capsys, "query", chain_path, "--target", "C", "--json")
        _, out2, _ = run(capsys, "query", chain_path, "--target", "C", "--json")
        assert out1 == out2
