import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from xorrigidity.cli import main
from xorrigidity.games import binary_game_values, build_chsh_game, build_ffl_game
from xorrigidity.rigidity import BoundReport
from xorrigidity.serialize import (
    binary_game_to_dict,
    fmt,
    game_from_dict,
    game_to_dict,
    report_from_dict,
    report_to_dict,
    strategy_from_dict,
    strategy_to_dict,
)
from xorrigidity.strategies import build_optimal_chsh_strategy, perturb_strategy
from xorrigidity.sweep import CSV_COLUMNS, SweepConfig, run_sweep, summarize
from xorrigidity.errors import DomainError, ShapeError


def test_fmt_round_trip():
    for x in (0.1, 1 / 3, 2**-0.5, 1e-300, -0.0):
        assert float(fmt(x)) == x
    assert fmt(-0.0) == "0.0"


def test_game_round_trip():
    g = build_chsh_game(3)
    back = game_from_dict(json.loads(json.dumps(game_to_dict(g))))
    assert np.array_equal(back.entries, g.entries)
    assert back.bob_labels == g.bob_labels and back.exact == g.exact


def test_binary_game_round_trip():
    doc = binary_game_to_dict(build_ffl_game())
    back = game_from_dict(json.loads(json.dumps(doc)))
    assert binary_game_values(back).value == Fraction(2, 3)


def test_strategy_round_trip():
    s, _ = perturb_strategy(build_optimal_chsh_strategy(3), 0.05, 2)
    back = strategy_from_dict(json.loads(json.dumps(strategy_to_dict(s))))
    for lab in s.bob:
        assert np.array_equal(back.bob[lab], s.bob[lab])
    assert np.array_equal(back.state.amplitudes, s.state.amplitudes)


def test_bad_documents():
    with pytest.raises(ShapeError, match="schema"):
        game_from_dict({"schema": "strategy", "version": 1})
    with pytest.raises(ShapeError, match="version"):
        strategy_from_dict({"schema": "strategy", "version": 99})


def test_report_round_trip():
    r = BoundReport("LEMMA5", 3, 0.01, 0.2, 1.0, seed=4, theta=0.05, metadata={"i": 2})
    back = report_from_dict(json.loads(json.dumps(report_to_dict(r))))
    assert back == r and back.passed


def test_sweep_config_validation():
    with pytest.raises(DomainError):
        SweepConfig(theta_grid=(-1.0,))
    with pytest.raises(DomainError):
        SweepConfig(n_values=(1,))
    with pytest.raises(DomainError):
        SweepConfig(bounds=("BOGUS",))


def test_small_sweep_passes():
    results = run_sweep(SweepConfig(n_values=(2,), theta_grid=(0.0, 0.01, 0.05), seeds=tuple(range(1, 11))))
    assert len(results) == 30
    summary = summarize(results)
    assert not summary["any_failures"]
    for p in results:
        if p.theta == 0:
            assert all(r.residual <= 1e-8 for r in p.reports)


def test_cli_game_build(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["game", "build", "chsh", "--n", "2", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert sum(x != "0.0" for row in doc["entries"] for x in row) == 4
    assert {x.lstrip("-") for row in doc["entries"] for x in row} == {"0.25"}
    assert "signed_sum=0.5" in capsys.readouterr().out


def test_cli_game_build_ffl(tmp_path):
    out = tmp_path / "ffl.json"
    assert main(["game", "build", "ffl", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["metadata"]["classical_value"] == "2/3"


def test_cli_usage_error(capsys):
    assert main(["game", "build", "chsh", "--n", "1"]) == 2
    assert "n must be ≥ 2" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["game", "build", "nope"])
    assert exc.value.code == 2


def test_cli_evaluate(capsys):
    assert main(["evaluate", "chsh", "--n", "2", "--canonical"]) == 0
    out = capsys.readouterr().out
    assert abs(float(out.split("bias: ")[1].split()[0]) - 0.70710678) < 1e-8
    assert main(["evaluate", "chsh", "--n", "2", "--classical"]) == 0
    assert "classical_bias: 1/2" in capsys.readouterr().out
    assert main(["evaluate", "ffl", "--canonical"]) == 0
    assert "win_probability: 0.6666666666666666" in capsys.readouterr().out
    assert main(["evaluate", "chsh", "--n", "2", "--sdp"]) == 0
    gap = float(capsys.readouterr().out.split("duality_gap: ")[1])
    assert -1e-8 <= gap <= 1e-6


def test_cli_evaluate_files(tmp_path, capsys):
    g = tmp_path / "g.json"
    s = tmp_path / "s.json"
    g.write_text(json.dumps(game_to_dict(build_chsh_game(3))))
    s.write_text(json.dumps(strategy_to_dict(build_optimal_chsh_strategy(3))))
    assert main(["evaluate", str(g), "--strategy", str(s)]) == 0
    assert "bias: 0.70710678" in capsys.readouterr().out
    assert main(["evaluate", str(tmp_path / "missing.json"), "--canonical"]) == 2


def test_cli_sweep_csv(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["rigidity", "sweep", "--n", "2", "--theta", "0", "0.05", "--seeds", "1-3",
                 "--format", "csv", "-o", str(out)])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert all(r[-1] == "true" for r in rows[1:])


def test_cli_sweep_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_values": [3], "theta_grid": [0.01], "seeds": [1, 2], "bounds": ["LEMMA4"]}))
    out = tmp_path / "r.json"
    assert main(["rigidity", "sweep", "--config", str(cfg), "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [r["bound_id"] for r in doc["reports"]] == ["LEMMA4", "LEMMA4"]
    assert "seconds" not in doc["points"][0]


def test_cli_sweep_capacity(tmp_path):
    assert main(["rigidity", "sweep", "--n", "14", "--theta", "0", "--seeds", "1",
                 "-o", str(tmp_path / "r.json")]) == 3


def test_cli_ffl_sweep_reports_failures(tmp_path):
    # epsilon measured against 2/3 vanishes for the FFL correlator strategy while
    # its residuals do not, so the FFL-relative sweep exposes failures
    out = tmp_path / "r.json"
    assert main(["rigidity", "sweep", "--game", "ffl", "--theta", "0", "--seeds", "1", "-o", str(out)]) == 1
    assert json.loads(out.read_text())["summary"]["any_failures"]


def test_cli_sdp_certify(tmp_path):
    out = tmp_path / "c.json"
    assert main(["sdp", "certify", "chsh", "--n", "2", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert abs(float(doc["objective"]) - 2**-0.5) < 1e-6
