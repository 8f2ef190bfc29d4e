import json
import math

import pytest

from kinlab.cli import main


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def test_distance_subcommand(capsys):
    code, out = run(capsys, ["distance", "--s", "0.5",
                             "--z1", "0,0,0", "--z2", "0,0,0.7"])
    assert code == 0
    rows = dict(line.split(",") for line in out.strip().splitlines()[1:])
    assert float(rows["scaling"]) == pytest.approx(0.7)
    assert float(rows["euclid"]) == pytest.approx(0.7)
    assert 0 < float(rows["left"]) <= 0.7 + 1e-9


def test_kernel_check_subcommand(tmp_path, capsys):
    cfg = tmp_path / "k.json"
    cfg.write_text(json.dumps({"form": "stable", "s": 0.5, "d": 1}))
    code, out = run(capsys, ["kernel-check", "--config", str(cfg)])
    assert code == 0
    lam = float(next(l for l in out.splitlines() if l.startswith("Lambda")).split(",")[2])
    assert lam == pytest.approx(2.0, abs=1e-8)


def test_apply_op_subcommand(tmp_path, capsys):
    cfg = tmp_path / "a.json"
    cfg.write_text(json.dumps({
        "kernel": {"form": "stable", "s": 0.5, "d": 1},
        "field": "cos", "v0": [0.0], "reg": [1.0, 0.5],
    }))
    code, out = run(capsys, ["apply-op", "--config", str(cfg)])
    assert code == 0
    value, bound = (float(p) for p in out.strip().splitlines()[1].split(","))
    assert value == pytest.approx(-math.pi, abs=1e-4)
    assert bound < 1e-3


def test_solve_subcommand(tmp_path, capsys):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({
        "kernel": {"form": "stable", "s": 0.5, "d": 1},
        "modes": [[0, 1, 0.5, 0.0]],
        "t_grid": [1.0],
    }))
    code, out = run(capsys, ["solve", "--config", str(cfg)])
    assert code == 0
    row = next(l for l in out.splitlines() if l.startswith("1.0,0,1,"))
    assert float(row.split(",")[3]) == pytest.approx(0.5 * math.exp(-math.pi), abs=1e-10)


def test_liouville_subcommand_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({
        "s": 0.5, "poly": [[0, 0, 2, 1.0]],
        "kernel": {"form": "truncated", "s": 0.5, "d": 1},
        "xi": [-0.3, 0.2, 0.4],
    }))
    code, out = run(capsys, ["liouville", "--config", str(good)])
    assert code == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "s": 0.5, "poly": [[1, 0, 1, 1.0]],
        "kernel": {"form": "truncated", "s": 0.5, "d": 1},
        "xi": [-0.3, 0.2, 0.4],
    }))
    code, _ = run(capsys, ["liouville", "--config", str(bad)])
    assert code == 1


def test_sweep_subcommand_writes_report(tmp_path, capsys):
    out_file = tmp_path / "sweep.csv"
    code = main(["sweep", "--s", "0.5", "--ladder", "6,12", "--out", str(out_file)])
    assert code in (0, 1)
    text = out_file.read_text()
    assert text.startswith("kernel,s,grid")
    assert "flag,passed" in text
