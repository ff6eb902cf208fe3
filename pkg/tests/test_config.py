"""Config parsing and object builders."""

import pytest

from chaos_descent.config import (basis_from_config, get_bool, get_float,
                                  get_int, get_str, oracle_from_config,
                                  parse_config_text, problem_from_config,
                                  read_config, schedule_from_config,
                                  solver_from_config, steps_from_config)
from chaos_descent.problems import ConfigurationError

SAMPLE = """
# a comment line
problem.kind = noisy-quadratic
problem.mu = 1.0
problem.L = 200.0   # trailing comment
schedule.kind = constant
schedule.level = 91
steps.kind = gd_noisy
steps.q_convention = index
oracle.mode = monte_carlo
oracle.samples = 250
solver.method = fixed_gd
solver.iterations = 40
solver.seed = 3
"""


def test_parse_basics():
    cfg = parse_config_text(SAMPLE)
    assert cfg["problem.kind"] == "noisy-quadratic"
    assert cfg["problem.L"] == "200.0"
    assert "# a comment line" not in cfg


def test_parse_duplicates_last_wins():
    cfg = parse_config_text("a.b = 1\na.b = 2\n")
    assert cfg["a.b"] == "2"


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigurationError, match="line 2"):
        parse_config_text("a = 1\nnot a pair\n")
    with pytest.raises(ConfigurationError, match="line 1"):
        parse_config_text("= 3\n")


def test_typed_accessors():
    cfg = {"x": "2.5", "n": "7", "flag": "yes", "s": "hello"}
    assert get_float(cfg, "x") == 2.5
    assert get_int(cfg, "n") == 7
    assert get_bool(cfg, "flag") is True
    assert get_bool(cfg, "missing", default=False) is False
    assert get_str(cfg, "s") == "hello"
    assert get_float(cfg, "missing", 1.5) == 1.5
    with pytest.raises(ConfigurationError):
        get_float(cfg, "s")
    with pytest.raises(ConfigurationError):
        get_int(cfg, "x")
    with pytest.raises(ConfigurationError):
        get_str(cfg, "missing")
    with pytest.raises(ConfigurationError):
        get_bool(cfg, "s")


def test_basis_builder_defaults_and_errors():
    spec = basis_from_config({})
    assert spec.family == "trigonometric"
    assert spec.nodes.size == 1024
    spec = basis_from_config({"basis.family": "legendre",
                              "basis.nodes": "256"})
    assert spec.family == "legendre" and spec.nodes.size == 256
    with pytest.raises(ConfigurationError):
        basis_from_config({"basis.family": "hermite"})


def test_problem_builder_kinds():
    p = problem_from_config({})
    assert p.name == "quadratic" and (p.mu, p.L) == (1.0, 200.0)
    p = problem_from_config(parse_config_text(SAMPLE))
    assert p.name == "noisy-quadratic"
    p = problem_from_config({"problem.kind": "coupled-quadratic",
                             "problem.coupling": "0.5"})
    assert p.name == "coupled-quadratic"
    assert p.mu == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(ConfigurationError):
        problem_from_config({"problem.kind": "cubic"})
    with pytest.raises(ConfigurationError):
        problem_from_config({"problem.kind": "coupled-quadratic",
                             "problem.coupling": "1.5"})


def test_schedule_and_steps_builders():
    sched = schedule_from_config(parse_config_text(SAMPLE))
    assert sched.kind == "constant" and sched.level == 91
    sched = schedule_from_config({"schedule.kind": "explicit",
                                  "schedule.levels": "2, 4, 9"})
    assert sched.levels == (2, 4, 9)
    assert schedule_from_config({}).kind == "paper_sqrt"
    with pytest.raises(ConfigurationError):
        schedule_from_config({"schedule.kind": "constant"})
    steps = steps_from_config(parse_config_text(SAMPLE))
    assert steps.kind == "gd_noisy" and steps.q_convention == "index"
    steps = steps_from_config({"steps.kind": "explicit",
                               "steps.gamma": "0.004"})
    assert steps.gamma == 0.004
    with pytest.raises(ConfigurationError):
        steps_from_config({"steps.kind": "bdf"})


def test_solver_builder_and_overrides():
    cfg = parse_config_text(SAMPLE)
    sc = solver_from_config(cfg)
    assert sc.method == "fixed_gd"
    assert sc.iterations == 40 and sc.seed == 3
    assert sc.oracle.mode == "monte_carlo" and sc.oracle.samples == 250
    assert sc.timing is False
    sc = solver_from_config(cfg, method="gd", seed=11)
    assert sc.method == "gd" and sc.seed == 11
    with pytest.raises(ConfigurationError):
        solver_from_config({"solver.method": "newton"})
    # incompatible method/schedule pairs surface as config errors
    bad = dict(cfg)
    bad["schedule.kind"] = "paper_sqrt"
    with pytest.raises(ConfigurationError):
        solver_from_config(bad)


def test_read_config_round_trip(tmp_path):
    path = tmp_path / "sample.cfg"
    path.write_text(SAMPLE, encoding="utf-8")
    assert read_config(path) == parse_config_text(SAMPLE)
    oc = oracle_from_config(read_config(path))
    assert oc.samples == 250
