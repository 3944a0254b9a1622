import json
import subprocess
import sys

import numpy as np
import pytest

from bidask.cli import canonical_json, main
from bidask.cost import AlmostSimpleStrategy, StrategyPath
from bidask.market import BidAskPath


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_dynkin_depth_one_fixture(capsys):
    code, rep, _ = run(capsys, "dynkin", "--fixture", "depth1", "--seed", "1")
    assert code == 0
    assert rep["result"]["value0"] == pytest.approx(0.4)
    assert rep["checks"] == {"drift_sign": True, "nash": True, "oracle": True, "sandwich": True}
    assert rep["result"]["tau_star"] == [1, 1]


def test_dynkin_random_and_game_file(capsys, tmp_path):
    code, rep, _ = run(capsys, "generate", "--kind", "tree_random", "--depth", "3", "--seed", "4",
                       "--out", str(tmp_path))
    assert code == 0
    game = tmp_path / "game.json"
    assert game.exists()
    code, from_file, _ = run(capsys, "dynkin", "--tree", str(game), "--seed", "4")
    code2, direct, _ = run(capsys, "dynkin", "--depth", "3", "--seed", "4")
    assert code == code2 == 0
    assert from_file["result"]["value_per_node"] == direct["result"]["value_per_node"]


def test_cost_defaults_and_files(capsys, tmp_path):
    code, rep, _ = run(capsys, "cost", "--steps", "10", "--seed", "0")
    assert code == 0
    assert rep["result"]["C"][-1]["value"] == pytest.approx(1.0)
    path = BidAskPath.uniform([0.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 0.0])
    (tmp_path / "p.csv").write_text(path.to_csv())
    (tmp_path / "s.csv").write_text(StrategyPath([0.0, 0.0, 1.0]).to_csv(path.times))
    code, rep, _ = run(capsys, "cost", "--path", str(tmp_path / "p.csv"), "--strategy", str(tmp_path / "s.csv"),
                       "--seed", "0", "--out", str(tmp_path / "o"))
    assert code == 0 and [c["value"] for c in rep["result"]["C"]] == [0.0, 0.0, 1.0]
    assert (tmp_path / "o" / "cost.csv").read_text().startswith("t,C,")
    jump = AlmostSimpleStrategy(2, (1,), (0.0,), (1.0,))
    (tmp_path / "a.json").write_text(jump.to_json(path.times))
    code, rep, _ = run(capsys, "cost", "--path", str(tmp_path / "p.csv"), "--almost-simple",
                       str(tmp_path / "a.json"), "--seed", "0")
    assert code == 0 and rep["checks"]["closed_form"]


def test_check_frictionless(capsys):
    code, rep, _ = run(capsys, "check", "--seed", "3")
    assert code == 0
    assert rep["result"]["terminal_cost"] == 0.0
    assert all(rep["checks"].values())


def test_check_invalid_model_fails(capsys, tmp_path):
    (tmp_path / "bad.csv").write_text("t,bid,ask\n0,0.5,0.4\n1,0.5,0.6\n")
    code, rep, _ = run(capsys, "check", "--path", str(tmp_path / "bad.csv"), "--seed", "1")
    assert code == 1 and rep["checks"] == {"model_valid": False}


def test_small_experiments_pass(capsys):
    assert run(capsys, "invariance", "--seed", "2")[0] == 0
    assert run(capsys, "upbr", "--depth", "4")[0] == 0
    assert run(capsys, "approx", "--seed", "2", "--levels", "2,4")[0] == 0
    code, rep, _ = run(capsys, "counterexample", "--steps", "100", "--paths", "50", "--seed", "7",
                       "--abs-tolerance", "1", "--separation-tolerance", "1")
    assert code == 0 and rep["result"]["chatter_detected"]


def test_bad_input_exit_codes(capsys, tmp_path):
    assert run(capsys, "dynkin", "--fixture", "nope", "--seed", "1")[0] == 2
    assert run(capsys, "cost", "--steps", "abc", "--seed", "1")[0] == 2
    assert run(capsys, "dynkin", "--strict")[0] == 2
    assert run(capsys, "nonexistent")[0] == 2
    assert run(capsys, "cost", "--path", str(tmp_path / "missing.csv"), "--seed", "1")[0] == 2
    cfg = tmp_path / "c.toml"
    cfg.write_text("[cost]\nsteps = 4\nbogus = 1\n")
    code, _, err = run(capsys, "cost", "--config", str(cfg))
    assert code == 2 and "bogus" in err
    cfg.write_text("whatever = 1\n")
    assert run(capsys, "cost", "--config", str(cfg))[0] == 2


def test_config_precedence_and_replay(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("seed = 11\n[cost]\nsteps = 6\nfamily = 'ramp'\n")
    code, rep, _ = run(capsys, "cost", "--config", str(cfg), "--steps", "8", "--out", str(tmp_path))
    assert code == 0
    assert rep["seed"] == 11 and rep["config"]["steps"] == 8 and rep["config"]["family"] == "ramp"
    first = (tmp_path / "cost.json").read_text()
    code, again, _ = run(capsys, "cost", "--config", str(tmp_path / "cost.json"))
    assert code == 0 and canonical_json(again) + "\n" == first
    assert run(capsys, "dynkin", "--config", str(tmp_path / "cost.json"))[0] == 2


def test_seeded_generation_is_deterministic(capsys):
    a = run(capsys, "generate", "--kind", "fbm", "--hurst", "0.7", "--steps", "64", "--seed", "5")[1]
    b = run(capsys, "generate", "--kind", "fbm", "--hurst", "0.7", "--steps", "64", "--seed", "5")[1]
    assert a == b


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "bidask", "dynkin", "--fixture", "depth1", "--seed", "1"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert np.isclose(json.loads(out.stdout)["result"]["value0"], 0.4)
