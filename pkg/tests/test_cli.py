import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from quasifree.cli import main, parse_state_file
from quasifree.errors import StructureError
from quasifree.states import SingleModeState, TwoModeState, build_critical_state, state_to_json

SUBCOMMANDS = ["check-cp", "validate", "evolve", "find-violation", "witness", "slippage-demo", "sweep"]

HEADLINE = {
    "params": {"omega1": 0, "omega2": 0, "eta": 1, "sigma": 0, "lam": [0.8, 0]},
    "initial_state": {"kind": "critical", "g1": {"beta": 2}, "g2": {"beta": 2}},
    "horizon": 3.0,
    "dt": 0.01,
}


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def product_file(tmp_path):
    s = TwoModeState.product(SingleModeState.from_moments(2.0, 0.3), SingleModeState.thermal(1.5))
    return write_json(tmp_path / "product.json", state_to_json(s))


@pytest.fixture
def critical_file(tmp_path):
    g = SingleModeState.from_moments(2.0, 1.0)
    return write_json(tmp_path / "critical.json", state_to_json(build_critical_state(g, g)))


def test_check_cp_noncp(capsys):
    code, out, _ = run(["check-cp", "--eta", "1", "--sigma", "0", "--lam-re", "0.8", "--lam-im", "0"], capsys)
    doc = json.loads(out)
    assert code == 1
    assert doc["cp"] is False
    assert doc["discriminant"] == pytest.approx(-0.64, abs=1e-15)


def test_check_cp_cp(capsys):
    code, out, _ = run(["check-cp", "--eta", "1", "--sigma", "1", "--lam-re", "0", "--lam-im", "0"], capsys)
    assert code == 0
    assert json.loads(out) == {"cp": True, "discriminant": 1.0}


def test_unknown_flag(capsys):
    code, _, err = run(["check-cp", "--eta", "1", "--frobnicate"], capsys)
    assert code == 2
    assert "unrecognized" in err


def test_negative_rate_is_input_error(capsys):
    code, _, err = run(["check-cp", "--eta", "-1"], capsys)
    assert code == 2
    assert err.count("\n") == 1


def test_witness_product(product_file, capsys):
    code, out, _ = run(["witness", "--state", product_file], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["entangled"] is False and doc["min_eig_pt"] >= 0


def test_witness_critical(critical_file, capsys):
    code, out, _ = run(["witness", "--state", critical_file], capsys)
    assert code == 1
    assert json.loads(out)["entangled"] is True


def test_witness_needs_two_modes(tmp_path, capsys):
    path = write_json(tmp_path / "v.json", state_to_json(SingleModeState.vacuum()))
    assert run(["witness", "--state", path], capsys)[0] == 2


def test_validate(tmp_path, capsys):
    good = write_json(tmp_path / "g.json", state_to_json(SingleModeState.from_moments(2.0, 1.0)))
    code, out, _ = run(["validate", "--state", good], capsys)
    assert code == 0 and json.loads(out)["psd"] is True
    bad = write_json(tmp_path / "b.json", state_to_json(SingleModeState.from_moments(2.0, 2.0)))
    code, out, _ = run(["validate", "--state", bad], capsys)
    assert code == 1 and json.loads(out)["psd"] is False
    noccr = write_json(tmp_path / "c.json", {"modes": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]})
    code, out, _ = run(["validate", "--state", noccr], capsys)
    assert code == 1 and json.loads(out)["structure_ok"] is False


def test_evolve_zero_time_echo(critical_file, capsys):
    code, out, _ = run(["evolve", "--mode", "two", "--eta", "1", "--lam-re", "0.8",
                        "--state", critical_file, "--t", "0"], capsys)
    assert code == 0
    with open(critical_file) as fh:
        assert json.loads(out) == json.load(fh)


def test_evolve_single_time(tmp_path, capsys):
    path = write_json(tmp_path / "t.json", state_to_json(SingleModeState.thermal(2.0)))
    code, out, _ = run(["evolve", "--eta", "1", "--state", path, "--t", "1"], capsys)
    assert code == 0
    assert json.loads(out)["matrix"][0][0][0] == pytest.approx(1 + np.exp(-1), abs=1e-14)


def test_evolve_timeseries_csv(critical_file, tmp_path, capsys):
    out_path = tmp_path / "traj.csv"
    code, _, _ = run(["evolve", "--mode", "two", "--eta", "1", "--lam-re", "0.8", "--state", critical_file,
                      "--horizon", "0.1", "--dt", "0.01", "--out", str(out_path)], capsys)
    assert code == 0
    rows = list(csv.reader(out_path.open()))
    assert len(rows) == 12 and len(rows[0]) == 24


def test_evolve_timeseries_json_stdout(tmp_path, capsys):
    path = write_json(tmp_path / "t.json", state_to_json(SingleModeState.thermal(2.0)))
    code, out, _ = run(["evolve", "--eta", "1", "--state", path, "--horizon", "0.3", "--dt", "0.1",
                        "--format", "json"], capsys)
    assert code == 0
    assert len(json.loads(out)["times"]) == 4


def test_evolve_mode_mismatch(critical_file, capsys):
    assert run(["evolve", "--mode", "single", "--state", critical_file, "--t", "1"], capsys)[0] == 2


def test_find_violation(capsys):
    code, out, _ = run(["find-violation", "--eta", "1", "--lam-re", "1", "--beta", "2"], capsys)
    doc = json.loads(out)
    assert code == 1
    assert doc["rate"] == pytest.approx(1 - 2 * np.sqrt(2), abs=1e-12)
    assert 0 < doc["onset_time"] <= 1e-3
    assert doc["state"]["matrix"][0][1][0] == pytest.approx(-np.sqrt(2))


def test_find_violation_zero_lambda(capsys):
    assert run(["find-violation", "--eta", "1", "--beta", "2"], capsys)[0] == 2


def test_find_violation_cp_params(capsys):
    code, out, _ = run(["find-violation", "--eta", "1", "--sigma", "1", "--lam-re", "0.5", "--beta", "2"], capsys)
    assert code == 0 and json.loads(out)["onset_time"] is None


def test_slippage_demo(tmp_path, capsys):
    cfg = write_json(tmp_path / "cfg.json", HEADLINE)
    code, out, _ = run(["slippage-demo", "--config", cfg], capsys)
    doc = json.loads(out)
    assert code == 1
    assert doc["verdict"] == "slippage_fails"
    assert doc["entangled_at_t0"] is True


def test_slippage_demo_cp_not_applicable(tmp_path, capsys):
    cfg = write_json(tmp_path / "cfg.json", dict(HEADLINE, params={"omega1": 0, "eta": 1, "sigma": 1}))
    assert run(["slippage-demo", "--config", cfg], capsys)[0] == 2


def test_slippage_demo_singular_input(tmp_path, capsys):
    doc = dict(HEADLINE, initial_state={"kind": "critical", "g1": {"beta": 1}, "g2": {"beta": 1}})
    cfg = write_json(tmp_path / "cfg.json", doc)
    assert run(["slippage-demo", "--config", cfg], capsys)[0] == 3


def test_sweep(tmp_path, capsys):
    cfg = write_json(tmp_path / "cfg.json", {"params": {}, "seed": 5, "n_params": 3, "n_states": 20})
    code, out, _ = run(["sweep", "--config", cfg], capsys)
    assert code == 0
    first = json.loads(out)
    assert first["min_min_eig"] >= -1e-8
    run(["sweep", "--config", cfg], capsys)
    code, out, _ = run(["sweep", "--config", cfg], capsys)
    assert json.loads(out) == first


def test_missing_file(capsys):
    code, _, err = run(["witness", "--state", "/nonexistent/state.json"], capsys)
    assert code == 2 and "nonexistent" in err


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"modes": 1,\n "matrix": [}')
    code, _, err = run(["witness", "--state", str(path)], capsys)
    assert code == 2 and "line 2" in err


def test_parse_state_file(tmp_path):
    vac = write_json(tmp_path / "v.json", {"modes": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]})
    s = parse_state_file(vac)
    assert s.beta == 1.0 and s.alpha == 0
    nonherm = write_json(tmp_path / "n.json", {"modes": 1, "matrix": [[[1, 0], [1, 0]], [[0, 0], [0, 0]]]})
    with pytest.raises(StructureError):
        parse_state_file(nonherm)
    G = np.diag([2.0, 0.0, 2.0, 1.0])
    bad = write_json(tmp_path / "c.json", {"modes": 2, "matrix": [[[x, 0] for x in row] for row in G]})
    with pytest.raises(StructureError):
        parse_state_file(bad)


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help(sub, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "quasifree.cli", sub, "--help"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert "usage" in proc.stdout
    assert list(tmp_path.iterdir()) == []
