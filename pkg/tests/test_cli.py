import json

import numpy as np
import pytest

from bosesep.cli import main
from bosesep.formats import load_state


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dim(capsys):
    assert run(capsys, "dim", "--n", "3", "--k", "4")[:2] == (0, "15\n")


def test_gen_and_classify_product(capsys, tmp_path):
    path = tmp_path / "p.json"
    assert run(capsys, "gen", "--kind", "product", "--n", "3", "--k", "3", "--vector", "1,1j,0", "--out", str(path))[0] == 0
    s = load_state(path.read_text())
    assert s.basis == "full" and s.problems() == []
    code, out, _ = run(capsys, "classify", "--in", str(path))
    assert (code, out) == (0, "Separable (R-T1)\n")


def test_classify_ghz_npt(capsys, tmp_path):
    path = tmp_path / "g.json"
    run(capsys, "gen", "--kind", "ghz", "--n", "3", "--k", "3", "--out", str(path))
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "classify", "--in", str(path), "--report", str(report))
    assert (code, out) == (4, "EntangledNPT\n")
    d = json.loads(report.read_text())
    assert d["report"]["verdict"] == "EntangledNPT"


def test_classify_invalid_exit_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema": "bose-state-v1", "n": 2, "k": 1, "basis": "full",
                                "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}))
    code, out, _ = run(capsys, "classify", "--in", str(path))
    assert code == 2 and out.startswith("InvalidInput")


def test_missing_file_exit_3(capsys, tmp_path):
    assert run(capsys, "classify", "--in", str(tmp_path / "nope.json"))[0] == 3


def test_gen_requires_rank(capsys):
    assert run(capsys, "gen", "--kind", "random-rank", "--n", "3", "--k", "3")[0] == 2


def test_gen_rank_too_large(capsys):
    assert run(capsys, "gen", "--kind", "random-rank", "--n", "3", "--k", "3", "--rank", "11")[0] == 2


def test_gen_dicke_symmetric_default(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "dicke", "--n", "2", "--k", "4", "--occ", "2,2")
    assert code == 0
    assert json.loads(out)["basis"] == "symmetric"


def test_decompose(capsys, tmp_path):
    path, out = tmp_path / "s.json", tmp_path / "c.json"
    run(capsys, "gen", "--kind", "random-separable", "--n", "3", "--k", "3", "--rank", "4", "--seed", "9", "--out", str(path))
    code, text, _ = run(capsys, "decompose", "--in", str(path), "--out", str(out))
    assert code == 0 and "4 terms" in text
    d = json.loads(out.read_text())
    assert len(d["certificate"]["terms"]) == 4
    assert d["certificate"]["trace_distance"] <= 1e-7


def test_decompose_refused_and_failed(capsys, tmp_path):
    path = tmp_path / "g.json"
    run(capsys, "gen", "--kind", "ghz", "--n", "3", "--k", "3", "--out", str(path))
    assert run(capsys, "decompose", "--in", str(path), "--out", str(tmp_path / "x.json"))[0] == 2
    code, _, err = run(capsys, "decompose", "--in", str(path), "--out", str(tmp_path / "x.json"),
                       "--force", "--restarts", "8")
    assert code == 6 and "ExtractionFailed" in err
    assert not (tmp_path / "x.json").exists()


def test_pt_twice_round_trip(capsys, tmp_path):
    a, b, c = (tmp_path / f"{x}.json" for x in "abc")
    run(capsys, "gen", "--kind", "random-rank", "--n", "2", "--k", "3", "--rank", "2", "--out", str(a))
    assert run(capsys, "pt", "--in", str(a), "--parties", "0", "2", "--out", str(b))[0] == 0
    run(capsys, "pt", "--in", str(b), "--parties", "2", "0", "--out", str(c))
    assert np.array_equal(load_state(c.read_text()).matrix, load_state(a.read_text()).matrix)
    assert run(capsys, "pt", "--in", str(a), "--parties", "5")[0] == 2


def test_undetermined_and_hunt_verify(capsys, tmp_path):
    hunt = tmp_path / "h.jsonl"
    code, out, _ = run(capsys, "hunt", "--n", "3", "--k", "3", "--rank", "10", "--trials", "3", "--seed", "1", "--out", str(hunt))
    assert code == 0 and out.startswith("trials=3 converged=3")
    assert run(capsys, "verify", "--in", str(hunt))[:2] == (0, "verified 3 records, 0 failed\n")
    first = json.loads(hunt.read_text().splitlines()[0])
    state = tmp_path / "s.json"
    state.write_text(json.dumps(first["state"]))
    code, out, _ = run(capsys, "classify", "--in", str(state))
    assert (code, out) == (5, "Undetermined, window [10,10]\n")
    first["rank"] = 3
    hunt.write_text(json.dumps(first) + "\n")
    assert run(capsys, "verify", "--in", str(hunt))[0] == 7


def test_hunt_rank_outside_window(capsys):
    code, _, err = run(capsys, "hunt", "--n", "3", "--k", "3", "--rank", "9", "--trials", "1", "--seed", "0")
    assert code == 2 and "window [10,10]" in err


def test_verify_garbage(capsys, tmp_path):
    path = tmp_path / "g.jsonl"
    path.write_text("nonsense\n")
    assert run(capsys, "verify", "--in", str(path))[0] == 2


def test_bad_arguments_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--kind", "unknown", "--n", "2", "--k", "2"])
    assert exc.value.code == 2


def test_hunt_accepts_rank_17_at_four_levels(capsys):
    code, out, err = run(capsys, "hunt", "--n", "4", "--k", "3", "--rank", "17", "--trials", "1", "--seed", "1")
    assert code == 0
    assert "trials=1" in err
