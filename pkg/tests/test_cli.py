import json

import pytest

from aritycheck.cli import main
from aritycheck.fincat import FinitePoset
from aritycheck.patterns import enumerate_segal, pattern_fin


def run(capsys, *argv):
    code = main(list(argv))
    report = json.loads(capsys.readouterr().out)
    assert report["schema_version"] == "1" and report["exit_code"] == code
    return code, report


def test_pi(capsys):
    code, rep = run(capsys, "pi", "--operad", "e_infinity", "--arity", "4", "--which", "part")
    assert code == 0 and rep["homology"]["degrees"]["1"]["betti"] == 6
    code, rep = run(capsys, "pi", "--operad", "e_one", "--arity", "3", "--which", "part")
    assert rep["objects"] == 2 and rep["homology"]["degrees"]["0"]["betti"] == 1
    code, rep = run(capsys, "pi", "--operad", "e_infinity", "--arity", "2")
    assert rep["connectivity"]["level"] == -2


def test_sigma(capsys):
    assert run(capsys, "sigma", "--operad", "e_infinity", "--from", "3", "--to", "6")[1]["value"] == 0
    assert run(capsys, "sigma", "--operad", "e_one", "--from", "4", "--to", "6")[1]["value"] == 1
    code, rep = run(capsys, "sigma", "--operad", "e_infinity", "--from", "1", "--to", "2")
    assert rep["value"] == -2 and rep["finite_window"]
    assert run(capsys, "sigma", "--operad", "e_one", "--from", "3", "--to", "inf")[0] == 2
    assert run(capsys, "sigma", "--operad", "e_one", "--from", "5", "--to", "3")[0] == 2


def test_verify(capsys, tmp_path):
    code, rep = run(capsys, "verify", "part-vs-qpart", "--operad", "e_infinity", "--from", "3", "--to", "4")
    assert code == 0 and rep["all_pass"]
    code, rep = run(capsys, "verify", "qpart-reduction", "--operad", "e_infinity", "--from", "3", "--to", "3")
    assert code == 0 and len(rep["instances"]) == 3
    P = FinitePoset(3, [(0, 1), (1, 2), (0, 2)], ["x", "y", "z"])
    path = tmp_path / "poset.json"
    path.write_text(json.dumps({"poset": P.to_json()}))
    assert run(capsys, "verify", "quillen-a", "--functor", str(path), "--n", "3")[0] == 0
    path.write_text(json.dumps({"poset": {"elements": ["a", "b", "c"], "leq": [["a", "c"], ["b", "c"]]},
                                "subposet": ["a", "b"]}))
    assert run(capsys, "verify", "quillen-a", "--functor", str(path), "--n", "0")[0] == 1
    assert run(capsys, "verify", "quillen-a", "--functor", str(tmp_path / "missing.json"))[0] == 2


def test_segal(capsys, frozen, tmp_path):
    code, rep = run(capsys, "segal", "enumerate", "--pattern", "fin", "--k", "3", "--base", "2")
    assert {"raw": rep["raw"], "iso_classes": rep["iso_classes"]} == frozen["commutative_monoids"]["2"]
    code, rep = run(capsys, "segal", "check-unique", "--pattern", "fin", "--k", "2", "--to", "3", "--base", "3")
    assert code == 1 and rep["verdicts"]["counterexample"] > 0
    code, rep = run(capsys, "segal", "check-unique", "--pattern", "assoc", "--k", "3", "--to", "4", "--base", "2")
    assert code == 0 and rep["verdicts"] == {"extends_uniquely": 4}
    code, rep = run(capsys, "segal", "extend", "--pattern", "fin", "--k", "3", "--to", "4", "--base", "2")
    assert code == 0 and all(r["sizes"] == [1, 2, 4, 8, 16] for r in rep["extensions"])
    F = enumerate_segal(pattern_fin(3), 2).functors[0]
    path = tmp_path / "f.json"
    path.write_text(json.dumps(F.to_json()))
    code, rep = run(capsys, "segal", "check-unique", "--pattern", "fin", "--k", "3", "--to", "4",
                    "--functor", str(path))
    assert code == 0 and rep["verdicts"] == {"extends_uniquely": 1}
    assert run(capsys, "segal", "enumerate", "--pattern", "fin", "--k", "3", "--base", "4", "--bound", "10")[0] == 3
    assert run(capsys, "segal", "extend", "--pattern", "fin", "--k", "3", "--to", "2", "--base", "2")[0] == 2


def test_parallel_merge_is_deterministic(capsys):
    argv = ["segal", "check-unique", "--pattern", "fin", "--k", "2", "--to", "3", "--base", "2"]
    _, serial = run(capsys, *argv)
    _, parallel = run(capsys, *argv, "--jobs", "2")
    assert serial == parallel


def test_reports_are_byte_stable(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        main(["--output", str(path), "sigma", "--operad", "e_infinity", "--from", "3", "--to", "5"])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_bad_arguments_exit_through_argparse():
    with pytest.raises(SystemExit):
        main(["segal", "enumerate", "--pattern", "lie", "--k", "3"])
