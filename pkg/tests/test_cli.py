import json

import pytest

from qflb.catalog import family_L
from qflb.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_mu1(capsys):
    code, out, _ = run(capsys, "verify", "--family", "mu1", "--n", "6")
    assert code == 0
    assert "fail" not in out


def test_verify_solvable(capsys):
    code, _, _ = run(capsys, "verify", "--family", "R1_1m10", "--n", "8",
                     "--checks", "solvable,nilradical")
    assert code == 0


def test_verify_perturbed_file_fails(capsys, tmp_path):
    data = family_L(6, 1, -1, 0).to_dict()
    # perturb one structure constant: [e1,e1] gains an e1 component
    prod = next(p for p in data["products"] if p["left"] == 1 and p["right"] == 1)
    prod["value"].append([1, "1"])
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", "--file", str(path), "--checks", "leibniz", "--format", "json")
    assert code == 1
    assert json.loads(out)["checks"]["leibniz"] == "fail"


def test_verify_good_file(capsys, tmp_path):
    path = tmp_path / "good.json"
    path.write_text(family_L(6, 1, -1, 0).to_json())
    assert run(capsys, "verify", "--file", str(path))[0] == 0


def test_bad_json_is_input_error(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "verify", "--file", str(path))
    assert code == 2 and "error" in err


def test_g_alpha_one_even(capsys):
    assert run(capsys, "catalog", "--family", "G", "--alpha", "1", "--n", "6")[0] == 2


def test_unknown_family(capsys):
    assert run(capsys, "catalog", "--family", "nonsense", "--n", "6")[0] == 2


def test_missing_subcommand():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_der(capsys):
    code, out, _ = run(capsys, "der", "--family", "L", "--alpha", "1", "--beta", "-1", "--n", "6",
                       "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["dim_der"] == 8 and data["rank_diag"] == 2
    assert len(data["basis"]) == 8


def test_table1_n7(capsys):
    code, out, _ = run(capsys, "table1", "--n", "7", "--format", "json")
    assert code == 0
    assert json.loads(out)["status"] == "pass"


def test_table1_empty_list(capsys):
    assert run(capsys, "table1", "--n")[0] == 2


def test_invariants_pair(capsys):
    code, out, _ = run(capsys, "invariants", "--family", "mu1", "--family", "L", "--n", "6",
                       "--format", "json")
    assert code == 0
    pairs = json.loads(out)["distinction"]["pairs"]
    assert pairs[0]["verdict"] == "DIFFER"


def test_extend_toy(capsys, tmp_path):
    nil = tmp_path / "n.json"
    nil.write_text(json.dumps({"dim": 1, "field": "Q", "basis": ["e1"], "products": []}))
    d = tmp_path / "d.json"
    d.write_text(json.dumps([["1"]]))
    code, out, _ = run(capsys, "extend", "--file", str(nil), "--derivation", str(d), "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert sorted(data["free_params"]) == ["[x,e1]_e1", "[x,x]_e1"]
    assert data["quadratic_residuals"]


def test_extend_nilpotent_action_is_input_error(capsys, tmp_path):
    nil = tmp_path / "n.json"
    nil.write_text(json.dumps({"dim": 1, "field": "Q", "basis": ["e1"], "products": []}))
    d = tmp_path / "d.json"
    d.write_text(json.dumps([["0"]]))
    assert run(capsys, "extend", "--file", str(nil), "--derivation", str(d))[0] == 2


def test_deterministic_json(capsys):
    argv = ("invariants", "--family", "R1_100", "--family", "R2_100", "--n", "6", "--format", "json")
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second


def test_seed_env_override(capsys, monkeypatch):
    argv = ("invariants", "--family", "L", "--n", "7", "--format", "json", "--seed", "3")
    assert json.loads(run(capsys, *argv)[1])["seed"] == 3
    monkeypatch.setenv("QFLB_SEED", "11")
    assert json.loads(run(capsys, *argv)[1])["seed"] == 11
    monkeypatch.setenv("QFLB_SEED", "not-a-number")
    assert run(capsys, *argv)[0] == 2


def test_out_file(capsys, tmp_path):
    target = tmp_path / "alg.json"
    code, out, _ = run(capsys, "catalog", "--family", "mu2", "--n", "7", "--format", "json",
                       "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())
