"""Command line: exit codes, determinism, and output formats."""

import json

import pytest

import chaos_descent.cli as cli

TINY_SOLVE = """
problem.kind = quadratic
problem.mu = 1.0
problem.L = 200.0
basis.nodes = 256
schedule.kind = paper_sqrt
steps.kind = gd_exact
oracle.mode = exact
solver.method = gd
solver.iterations = 20
solver.seed = 0
"""

TINY_AGD = """
problem.kind = quadratic
basis.nodes = 256
schedule.kind = paper_sqrt
steps.kind = agd_exact
oracle.mode = exact
solver.method = gd
solver.iterations = 20
"""

TINY_COMPARE = """
experiment.name = fig1a
experiment.trials = 1
solver.iterations = 8
"""


@pytest.fixture()
def solve_cfg(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_SOLVE, encoding="utf-8")
    return path


def test_unknown_subcommand_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_exits_1(solve_cfg, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--config", str(solve_cfg), "--frob", "1"])
    assert exc.value.code == 1


def test_missing_config_exits_1(tmp_path, capsys):
    code = cli.main(["solve", "--config", str(tmp_path / "nope.cfg")])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_invalid_config_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("solver.method = newton\n", encoding="utf-8")
    assert cli.main(["solve", "--config", str(bad)]) == 1


def test_solve_reruns_are_byte_identical(solve_cfg, tmp_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["solve", "--config", str(solve_cfg), "--seed", "7",
                     "--out", str(out_a)]) == 0
    assert cli.main(["solve", "--config", str(solve_cfg), "--seed", "7",
                     "--out", str(out_b)]) == 0
    a = (out_a / "tiny_gd_seed7.csv").read_bytes()
    b = (out_b / "tiny_gd_seed7.csv").read_bytes()
    assert a == b
    assert a.startswith(b"k,m,step,err_trunc_sq")


def test_solve_method_override_and_json(tmp_path, capsys):
    cfg = tmp_path / "tiny_agd.cfg"
    cfg.write_text(TINY_AGD, encoding="utf-8")
    # the file pairs accelerated steps with method gd: invalid as written
    assert cli.main(["solve", "--config", str(cfg)]) == 1
    assert "config error" in capsys.readouterr().err
    # the override makes it a consistent accelerated run
    assert cli.main(["solve", "--config", str(cfg), "--method", "agd",
                     "--format", "json", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "tiny_agd_agd_seed0.json").read_text())
    assert doc["method"] == "agd"
    assert doc["aborted_at"] is None
    assert len(doc["rows"]) == 21
    assert doc["rows"][0]["k"] == 0 and doc["rows"][0]["m"] == 5


def test_compare_runs_experiment(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(TINY_COMPARE, encoding="utf-8")
    out = tmp_path / "curves"
    assert cli.main(["compare", "--config", str(cfg),
                     "--out", str(out)]) == 0
    assert (out / "gd_aggregate.csv").exists()
    assert (out / "agd_aggregate.csv").exists()
    assert (out / "manifest.json").exists()
    stdout = capsys.readouterr().out
    assert "gd:" in stdout and "agd:" in stdout


def test_verify_exits_0_and_writes_report(tmp_path, capsys):
    assert cli.main(["verify", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["passed"] is True
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_verify_maps_failure_to_exit_2(monkeypatch, capsys):
    import chaos_descent.verify as verify

    def fake_suite(nodes=1024, workers=None, out=None):
        return {"passed": False,
                "checks": [{"name": "x", "passed": False, "slack": -1.0}]}

    monkeypatch.setattr(verify, "run_verify_suite", fake_suite)
    assert cli.main(["verify"]) == 2
    assert "FAIL x" in capsys.readouterr().out


def test_coeffs_stdout_and_file(tmp_path, capsys):
    assert cli.main(["coeffs"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "index,coefficient"
    assert len(lines) == 514  # header + levels 0..512
    assert cli.main(["coeffs", "--family", "legendre", "--format", "json",
                     "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "benchmark_legendre.json").read_text())
    assert doc["level"] == 512
    assert len(doc["coefficients"]) == 513


def test_bench_reports_all_backends(capsys):
    assert cli.main(["bench", "--nodes", "128", "--repeats", "1"]) == 0
    out = capsys.readouterr().out
    header, *rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert header.split(",")[:2] == ["backend", "kernel"]
    backends = {r.split(",")[0] for r in rows if r}
    assert "numpy" in backends
