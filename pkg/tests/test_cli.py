import json

import pytest

from ccg.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ex1_dir(tmp_path, capsys):
    d = tmp_path / "ex1"
    assert run(capsys, "gen", "example1", "--out-dir", str(d))[0] == 0
    return d


def test_verify_example1(ex1_dir, capsys):
    code, out, _ = run(capsys, "verify", "--game", str(ex1_dir / "game.json"),
                       "--strategy", str(ex1_dir / "z3.json"), "--phi", "ALL", "--eps", "0")
    assert code == 1
    assert json.loads(out)["gaps"][1] == pytest.approx(1 / 3, abs=1e-6)
    code, out, _ = run(capsys, "verify", "--game", str(ex1_dir / "game.json"),
                       "--strategy", str(ex1_dir / "z1.json"), "--phi", "ALL")
    assert code == 0 and json.loads(out)["verdict"] is True


def test_input_errors(ex1_dir, tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--game", str(tmp_path / "missing.json"),
                       "--strategy", str(ex1_dir / "z1.json"), "--phi", "ALL")
    assert code == 2 and "cannot read" in err
    code, _, err = run(capsys, "verify", "--game", str(ex1_dir / "game.json"),
                       "--strategy", str(ex1_dir / "z1.json"), "--phi", "NOPE")
    assert code == 2 and "--phi" in err
    with pytest.raises(SystemExit) as e:
        main(["verify", "--bogus"])
    assert e.value.code == 2


def test_best_dev_and_strict_feas(ex1_dir, capsys):
    g, z = str(ex1_dir / "game.json"), str(ex1_dir / "z3.json")
    code, out, _ = run(capsys, "best-dev", "--game", g, "--strategy", z, "--phi", "ALL", "--player", "1")
    assert code == 0 and json.loads(out)["players"][0]["best_value"] == pytest.approx(0.5)
    code, out, _ = run(capsys, "strict-feas", "--game", g, "--strategy", z, "--phi", "ALL")
    assert code == 0 and min(p["rho"] for p in json.loads(out)["players"]) >= 0.5 - 1e-9


def test_solve_special_refuses_then_solves(ex1_dir, tmp_path, capsys):
    code, _, err = run(capsys, "solve-special", "--game", str(ex1_dir / "game.json"), "--phi", "ALL",
                       "--objective", "welfare")
    assert code == 2 and "depend on z" in err
    d = tmp_path / "r"
    run(capsys, "gen", "random", "--marginal", "--constraints", "2", "--seed", "3", "--out-dir", str(d))
    code, out, _ = run(capsys, "solve-special", "--game", str(d / "game.json"), "--objective", "welfare",
                       "--z-out", str(tmp_path / "z.json"))
    assert code == 0 and json.loads(out)["max_gap"] <= 1e-6
    code, _, _ = run(capsys, "verify", "--game", str(d / "game.json"), "--strategy", str(tmp_path / "z.json"),
                     "--phi", "CCE")
    assert code == 0


def test_learn_and_oracle(tmp_path, capsys):
    d = tmp_path / "r"
    run(capsys, "gen", "random", "--marginal", "--seed", "2", "--out-dir", str(d))
    trace = tmp_path / "t.csv"
    code, out, _ = run(capsys, "learn", "--game", str(d / "game.json"), "--rounds", "64", "--seed", "2",
                       "--trace", str(trace), "--checkpoints")
    assert code == 0 and all(json.loads(out)["checkpoints_verified"])
    assert trace.read_text().splitlines()[0] == "t,player,regret,gap_bound,max_cost_residual,utility_avg"
    code, out, _ = run(capsys, "--threads", "2", "oracle", "--game", str(d / "game.json"), "--phi", "CCE",
                       "--objective", "welfare", "--grid", "40", "--eps", "1e-3",
                       "--out", str(tmp_path / "o.json"))
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "o.json").read_text())["found"] is True


def test_gen_hardness(tmp_path, capsys):
    edges = tmp_path / "g.txt"
    edges.write_text("\n".join(f"{v} {(v + 1) % 8}" for v in range(8)) + "\n1 5\n")
    d = tmp_path / "h"
    code, out, _ = run(capsys, "gen", "hardness", "--graph", str(edges), "--independent", "0,2,4,6",
                       "--out-dir", str(d))
    assert code == 0 and "z.json" in json.loads(out)["files"]
    code, _, _ = run(capsys, "verify", "--game", str(d / "game.json"), "--strategy", str(d / "z.json"),
                     "--phi", "ALL")
    assert code == 0


def test_selftest_quick(capsys):
    code, out, _ = run(capsys, "selftest", "--quick", "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and doc["passed"], [c for c in doc["cases"] if not c["passed"]]
