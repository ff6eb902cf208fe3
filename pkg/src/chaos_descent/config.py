"""Flat key = value configuration files with dotted section prefixes.

The format is deliberately tiny: one `key = value` pair per line, `#`
starts a comment, keys use dotted prefixes (`problem.mu`, `schedule.kind`),
later duplicates win. Everything is stored as strings; typed accessors
convert on read. Builders turn a parsed mapping into problems, bases, and
solver configurations.
"""

import numpy as np

from .basis import make_basis
from .oracle import OracleConfig
from .problems import (ConfigurationError, make_coupled_quadratic,
                       make_noisy_quadratic, make_paper_target,
                       make_quadratic)
from .solvers import SolverConfig, StepPolicy, TruncationSchedule

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_config_text(text):
    """Parse config text into a flat {key: value} dict of strings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def read_config(path):
    """Parse a config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def get_str(cfg, key, default=None):
    value = cfg.get(key, default)
    if value is None:
        raise ConfigurationError(f"missing config key {key!r}")
    return value


def get_float(cfg, key, default=None):
    raw = get_str(cfg, key, None if default is None else str(default))
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {raw!r}")


def get_int(cfg, key, default=None):
    raw = get_str(cfg, key, None if default is None else str(default))
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {raw!r}")


def get_bool(cfg, key, default=False):
    raw = get_str(cfg, key, str(default)).lower()
    if raw in _TRUE:
        return True
    if raw in _FALSE:
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {raw!r}")


def basis_from_config(cfg):
    family = get_str(cfg, "basis.family", "trigonometric")
    nodes = get_int(cfg, "basis.nodes", 1024)
    try:
        return make_basis(family, nodes)
    except ValueError as exc:
        raise ConfigurationError(str(exc))


def problem_from_config(cfg):
    kind = get_str(cfg, "problem.kind", "quadratic")
    target = make_paper_target()
    if kind == "quadratic":
        return make_quadratic(get_float(cfg, "problem.mu", 1.0),
                              get_float(cfg, "problem.L", 200.0), target)
    if kind == "noisy-quadratic":
        return make_noisy_quadratic(get_float(cfg, "problem.mu", 1.0),
                                    get_float(cfg, "problem.L", 200.0),
                                    target)
    if kind == "coupled-quadratic":
        c = get_float(cfg, "problem.coupling", 0.5)
        if not (0 <= c < 1):
            raise ConfigurationError("problem.coupling must lie in [0, 1)")
        return make_coupled_quadratic(
            lambda t: 1.0 + c * np.sin(t), target,
            bounds=(1.0 - c, 1.0 + c) if c > 0 else (1.0, 1.0))
    raise ConfigurationError(f"unknown problem.kind {kind!r}")


def schedule_from_config(cfg):
    kind = get_str(cfg, "schedule.kind", "paper_sqrt")
    try:
        if kind == "constant":
            return TruncationSchedule(kind, level=get_int(
                cfg, "schedule.level"))
        if kind == "explicit":
            raw = get_str(cfg, "schedule.levels")
            levels = tuple(int(tok) for tok in raw.split(",") if tok.strip())
            return TruncationSchedule(kind, levels=levels)
        return TruncationSchedule(kind)
    except ValueError as exc:
        raise ConfigurationError(str(exc))


def steps_from_config(cfg):
    kwargs = {"kind": get_str(cfg, "steps.kind", "gd_exact")}
    if "steps.gamma" in cfg:
        kwargs["gamma"] = get_float(cfg, "steps.gamma")
    if "steps.beta" in cfg:
        kwargs["beta"] = get_float(cfg, "steps.beta")
    if "steps.gamma0" in cfg:
        kwargs["gamma0"] = get_float(cfg, "steps.gamma0")
    if "steps.q_convention" in cfg:
        kwargs["q_convention"] = get_str(cfg, "steps.q_convention")
    if "steps.fixed_c_g" in cfg:
        kwargs["fixed_c_g"] = get_float(cfg, "steps.fixed_c_g")
    try:
        return StepPolicy(**kwargs)
    except ValueError as exc:
        raise ConfigurationError(str(exc))


def oracle_from_config(cfg):
    try:
        return OracleConfig(mode=get_str(cfg, "oracle.mode", "exact"),
                            samples=get_int(cfg, "oracle.samples", 250),
                            nodes=get_int(cfg, "oracle.nodes", 1024))
    except ValueError as exc:
        raise ConfigurationError(str(exc))


def solver_from_config(cfg, method=None, seed=None, trial=0, timing=False):
    try:
        return SolverConfig(
            method=method or get_str(cfg, "solver.method", "gd"),
            schedule=schedule_from_config(cfg),
            steps=steps_from_config(cfg),
            iterations=get_int(cfg, "solver.iterations", 300),
            oracle=oracle_from_config(cfg),
            seed=seed if seed is not None else get_int(cfg, "solver.seed", 0),
            trial=trial,
            timing=timing)
    except ValueError as exc:
        raise ConfigurationError(str(exc))
