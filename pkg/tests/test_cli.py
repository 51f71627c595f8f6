import json

import numpy as np
import pytest

from bellbounce.cli import main

CERT_SHA = "402455be3535bd7f61760cb7e0ccf0679b0cd281b97936dde814e90d1f348443"


def test_classical_bound_gisin(capsys, tmp_path):
    assert main(["classical-bound", "--gisin-delta", "2", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "classical bound: -8" in out
    assert "difference: 0" in out
    summary = json.loads((tmp_path / "classical_bound_summary.json").read_text())
    assert summary["beta_c"] == -8
    assert summary["witness_a"] == [1, -1, -1, -1]
    assert summary["provenance"]["version"]


def test_classical_bound_inline_alpha(capsys):
    argv = ["classical-bound", "--alpha", "1 1 1 -1", "--m1", "2", "--m2", "2"]
    assert main(argv) == 0
    assert "classical bound: -2" in capsys.readouterr().out


def test_classical_bound_alpha_file(capsys, tmp_path):
    path = tmp_path / "eq5.json"
    path.write_text(json.dumps([[0, 1, -1], [-1, 0, 1], [1, 0, 1], [0, -1, -1]]))
    assert main(["classical-bound", "--alpha-file", str(path)]) == 0
    assert "classical bound: -4" in capsys.readouterr().out


def test_validation_exit_codes(capsys, tmp_path):
    assert main(["classical-bound"]) == 2  # no coefficient source
    assert main(["classical-bound", "--gisin-delta", "1", "--alpha-file", "x"]) == 2
    assert main(["bounce", "--max-loops", "0", "--steps", "5", "--out", str(tmp_path)]) == 2
    assert main(["ineq2ham", "--p-grid", "bad", "--out", str(tmp_path)]) == 2
    assert main(["ham2ineq", "--preset", "H_G", "--m1", "4", "--m2", "4",
                 "--solve-mode", "unique", "--out", str(tmp_path)]) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"classical-bound": {"bogus": 1}}')
    assert main(["classical-bound", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_numerical_failure_exit_code(capsys, tmp_path):
    # a generic 9-vector is unreachable in a 2x2 scenario
    argv = ["ham2ineq", "--h", "1 .7 -.3 .2 -1 .4 .9 -.6 .5", "--m1", "2", "--m2", "2",
            "--restarts", "2", "--steps", "30", "--out", str(tmp_path)]
    assert main(argv) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_ham2ineq_outputs(capsys, tmp_path):
    argv = ["ham2ineq", "--preset", "H_G", "--m1", "3", "--m2", "3",
            "--restarts", "2", "--steps", "40", "--out", str(tmp_path)]
    assert main(argv) == 0
    capsys.readouterr()
    summary = json.loads((tmp_path / "ham2ineq_summary.json").read_text())
    assert summary["scenario"] == [3, 3]
    assert summary["residual"] <= 1e-8 * np.linalg.norm(summary["h"])
    assert len(summary["alpha"]) == 3
    curve = (tmp_path / "ham2ineq_curve.csv").read_text().splitlines()
    assert curve[0] == "step,value"
    values = [float(line.split(",")[1]) for line in curve[1:]]
    assert values == sorted(values)  # best-so-far never decreases
    assert abs(values[-1] - summary["best_beta_c"]) < 1e-9


def test_ham2ineq_reruns_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["ham2ineq", "--preset", "H_G", "--m1", "3", "--m2", "3",
            "--restarts", "2", "--steps", "30"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    capsys.readouterr()
    assert (a / "ham2ineq_summary.json").read_bytes() == (b / "ham2ineq_summary.json").read_bytes()
    assert (a / "ham2ineq_curve.csv").read_bytes() == (b / "ham2ineq_curve.csv").read_bytes()


def test_ineq2ham_zero_data(capsys, tmp_path):
    data = tmp_path / "zeros.json"
    data.write_text("[0,0,0,0,0,0,0,0,0]")
    argv = ["ineq2ham", "--data-file", str(data), "--restarts", "1", "--steps", "20",
            "--out", str(tmp_path)]
    assert main(argv) == 0
    capsys.readouterr()
    summary = json.loads((tmp_path / "ineq2ham_summary.json").read_text())
    (row,) = summary["rows"]
    assert row[0] is None
    assert row[1] == 0 and row[2] == 0  # zero data: original and optimized both 0
    assert row[3] == -8


def test_ineq2ham_small_grid(capsys, tmp_path):
    argv = ["ineq2ham", "--p-grid", "0:0.002:0.001", "--restarts", "1", "--steps", "30",
            "--out", str(tmp_path)]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert out.count("original") == 3
    rows = json.loads((tmp_path / "ineq2ham_summary.json").read_text())["rows"]
    assert [r[0] for r in rows] == [0.0, 0.001, 0.002]
    assert abs(rows[0][1] - (-16 / np.sqrt(3))) < 1e-9  # ideal data at preset settings
    for _, original, optimized, beta_c in rows:
        assert optimized <= original
        assert beta_c == -8


def test_bounce_outputs(capsys, tmp_path):
    argv = ["bounce", "--p", "0.01", "--steps", "60", "--max-loops", "2",
            "--out", str(tmp_path)]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "violation: True" in out
    lines = (tmp_path / "bounce_trajectory.jsonl").read_text().splitlines()
    rows = [json.loads(line) for line in lines]
    summary = json.loads((tmp_path / "bounce_summary.json").read_text())
    assert len(rows) == 2 * summary["loops"] + 1
    assert rows[0]["kind"] == "init"
    for row in rows:
        # fields round to 12 significant digits independently on write
        assert abs(row["gap"] - (row["beta_q"] - row["beta_c"])) < 1e-10
    assert summary["violation"] is True
    assert summary["final_gap"] == rows[-1]["gap"]


def test_lattice_report(capsys, tmp_path):
    argv = ["lattice", "--improved-bound", "-7.39", "-6.56", "--out", str(tmp_path)]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "classical bound: -526" in out
    assert "-485.8925" in out and "-431.32" in out
    summary = json.loads((tmp_path / "lattice_summary.json").read_text())
    assert summary["vertices"] == 73
    assert summary["certificate_sha256"] == CERT_SHA
    assert abs(summary["quantum_floor"] - 65.75 * (-16 / np.sqrt(3))) < 1e-9


def test_lattice_epsilon_recoupling(capsys):
    # epsilon 1 turns off green/blue links: 33 red edges at J=2 plus the
    # lone "other" edge keeping its file coupling
    assert main(["lattice", "--epsilon", "1"]) == 0
    out = capsys.readouterr().out
    assert "total coupling: 66.02" in out


def test_config_file_merge(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"classical-bound": {"gisin_delta": 1.0}}')
    assert main(["classical-bound", "--config", str(cfg)]) == 0
    assert "classical bound: -6" in capsys.readouterr().out
    # explicit flag wins over the config value
    assert main(["classical-bound", "--config", str(cfg), "--gisin-delta", "0"]) == 0
    assert "classical bound: -4" in capsys.readouterr().out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
