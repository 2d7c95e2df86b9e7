import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from glnz.cli import EXIT_ERROR, EXIT_NOT_SOLVED, EXIT_SOLVED, EXIT_TIMEOUT, exit_code, main
from glnz.generators import gen_silverman, gen_unipotent_product
from glnz.io import matrix_from_json, matrix_to_json, read_matrix, write_matrix
from glnz.linalg import as_matrix, gram_of, identity
from glnz.recognition import E8_GRAM, AttackReport

FIXTURES = Path(__file__).parent / "fixtures"


def test_matrix_json_round_trip(tmp_path):
    M = as_matrix([[1 << 200, -3], [0, -(1 << 90)]])
    data = matrix_to_json(M, kind="basis")
    assert data["rows"][0][0] == str(1 << 200)
    back, kind = matrix_from_json(json.loads(json.dumps(data)))
    assert kind == "basis" and (back == M).all()
    digest = write_matrix(tmp_path / "m.json", M)
    assert len(digest) == 64
    back, kind = read_matrix(tmp_path / "m.json")
    assert kind is None and (back == M).all()


@pytest.mark.parametrize(
    "doc",
    [
        {"n": 2, "m": 2, "rows": [["1", "0"]]},
        {"n": 1, "m": 2, "rows": [["1", "x"]]},
        {"m": 1, "rows": [["1"]]},
        {"n": 1, "m": 1, "rows": [["1.5"]]},
    ],
)
def test_malformed_matrix_documents(doc):
    with pytest.raises(ValueError):
        matrix_from_json(doc)


def test_bad_kind():
    with pytest.raises(ValueError):
        matrix_to_json(identity(2), kind="lattice")


def test_e8_fixture_matches_constant():
    G, kind = read_matrix(FIXTURES / "e8_gram.json")
    assert kind == "gram" and (G == E8_GRAM).all()


def test_gen_is_byte_identical(tmp_path, capsys):
    outs = []
    for run in ("a", "b"):
        prefix = tmp_path / run
        assert main(["gen", "--alg", "silverman", "--n", "30", "--T", "2", "--seed", "7", "--out", str(prefix)]) == 0
        outs.append((prefix.with_name(f"{run}.json").read_bytes(), prefix.with_name(f"{run}.record.json").read_bytes()))
    assert outs[0] == outs[1]
    out = capsys.readouterr().out
    assert "det 1" in out or "det -1" in out


def test_gen_silverman_100_prints_unit_det(tmp_path, capsys):
    assert main(["gen", "--alg", "silverman", "--n", "100", "--T", "1", "--seed", "7", "--out", str(tmp_path / "s")]) == 0
    out = capsys.readouterr().out
    assert any(line in ("det 1", "det -1") for line in out.splitlines())
    M, kind = read_matrix(tmp_path / "s.json")
    assert kind == "basis" and M.shape == (100, 100)


def test_gen_refuses_heavy_drs(tmp_path, capsys):
    code = main(["gen", "--alg", "drs", "--n", "912", "--R", "24", "--seed", "1", "--out", str(tmp_path / "d")])
    assert code == EXIT_ERROR
    assert "--heavy" in capsys.readouterr().err
    assert not (tmp_path / "d.json").exists()


def test_gen_box_cap_error(tmp_path, capsys):
    assert main(["gen", "--alg", "box", "--n", "50", "--T", "3", "--out", str(tmp_path / "b")]) == EXIT_ERROR
    assert "n <= 6" in capsys.readouterr().err


def test_gen_missing_parameter(tmp_path, capsys):
    assert main(["gen", "--alg", "unipotent", "--n", "5", "--out", str(tmp_path / "u")]) == EXIT_ERROR
    assert "--b" in capsys.readouterr().err


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["attack"])
    assert exc.value.code == EXIT_ERROR
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--alg", "silverman", "--n", "4", "--T", "1", "--seed", "-3"])
    assert exc.value.code == EXIT_ERROR


def test_gram_subcommand(tmp_path):
    M = gen_silverman(6, 2, 0).matrix
    write_matrix(tmp_path / "b.json", M, kind="basis")
    assert main(["gram", "--in", str(tmp_path / "b.json"), "--out", str(tmp_path / "g.json")]) == 0
    G, kind = read_matrix(tmp_path / "g.json")
    assert kind == "gram" and (G == gram_of(M)).all()


def test_attack_identity_exits_zero(tmp_path):
    write_matrix(tmp_path / "i.json", gram_of(identity(5)), kind="gram")
    out = tmp_path / "r.json"
    assert main(["attack", "--in", str(tmp_path / "i.json"), "--out", str(out)]) == EXIT_SOLVED
    report = json.loads(out.read_text())
    assert report["success"] and report["stage_of_success"] == "input"


def test_attack_e8_exits_two(tmp_path):
    out = tmp_path / "r.json"
    code = main(["attack", "--in", str(FIXTURES / "e8_gram.json"), "--out", str(out)])
    assert code == EXIT_NOT_SOLVED
    report = AttackReport.from_dict(json.loads(out.read_text()))
    assert report.exhausted and not report.timed_out and not report.success


def test_attack_basis_file_checks_equivalence(tmp_path, capsys):
    write_matrix(tmp_path / "b.json", gen_silverman(12, 2, 3).matrix, kind="basis")
    assert main(["attack", "--in", str(tmp_path / "b.json")]) == EXIT_SOLVED
    assert "signed permutation: True" in capsys.readouterr().out


def test_attack_timeout_exits_three(tmp_path):
    G = gram_of(gen_unipotent_product(60, 2, 3000, 1).matrix)
    write_matrix(tmp_path / "g.json", G, kind="gram")
    assert main(["attack", "--in", str(tmp_path / "g.json"), "--timeout", "1e-9"]) == EXIT_TIMEOUT


def test_attack_rejects_bad_input(tmp_path, capsys):
    write_matrix(tmp_path / "g.json", as_matrix([[1, 2], [2, 1]]), kind="gram")
    assert main(["attack", "--in", str(tmp_path / "g.json")]) == EXIT_ERROR
    (tmp_path / "x.json").write_text("{not json")
    assert main(["attack", "--in", str(tmp_path / "x.json")]) == EXIT_ERROR
    assert main(["attack", "--in", str(tmp_path / "missing.json")]) == EXIT_ERROR
    write_matrix(tmp_path / "r.json", as_matrix([[1, 0, 0], [0, 1, 0]]))
    assert main(["attack", "--in", str(tmp_path / "r.json")]) == EXIT_ERROR
    assert main(["attack", "--in", str(tmp_path / "g.json"), "--schedule", "3,x"]) == EXIT_ERROR


def test_exit_code_is_function_of_report():
    base = dict(n=1, stage_of_success=None, recovered_transform=identity(1), equivalence_verified=None, total_seconds=0.0)
    assert exit_code(AttackReport(success=True, **base)) == EXIT_SOLVED
    assert exit_code(AttackReport(success=False, timed_out=True, **base)) == EXIT_TIMEOUT
    assert exit_code(AttackReport(success=False, exhausted=True, **base)) == EXIT_NOT_SOLVED


def test_stats_subcommand(tmp_path, capsys):
    write_matrix(tmp_path / "b.json", gen_silverman(10, 1, 0).matrix, kind="basis")
    heat = tmp_path / "h.csv"
    assert main(["stats", "--in", str(tmp_path / "b.json"), "--band", "2", "--heatmap", str(heat)]) == 0
    out = capsys.readouterr().out
    assert "row_bits" in out and "band_ratio w=2" in out and "sigma2_over_sigma1" in out
    grid = np.loadtxt(heat, delimiter=",")
    assert grid.shape == (10, 10)


def test_console_script_runs(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "glnz.cli", "attack", "--in", str(FIXTURES / "e8_gram.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_NOT_SOLVED
    assert "not solved" in proc.stdout
