"""First-order solvers over growing truncated expansions.

All four methods share one loop: at iteration k the truncation level m_k
comes from the schedule (new coefficients start at exactly zero), a descent
vector is computed by the configured oracle, and the iterate moves against
it. They differ in the step rule:

* gd: constant step, either the exact-oracle optimum 2/(mu+L) or the
  noise-aware 2/((mu+L)(1+C_G)) with C_G re-evaluated at each level.
* agd: momentum form. With y_k = (1+beta) u_k - beta u_{k-1}, the gradient
  is taken at y_k and the new iterate is y_k - alpha * D(y_k). Stepping
  from u_k instead is unstable for alpha = 1/L (the momentum companion
  matrix acquires an eigenvalue below -1), so the stable base point is used.
* sa: Robbins-Monro decay gamma_k = gamma_0 / k.
* fixed_gd: gd pinned to one level, the comparison baseline.

Every run emits a `Trace` of per-iteration records; a divergence guard
turns runaway configurations into flagged (aborted) traces instead of
crashes. Step caps from the convergence theory are deliberately not
enforced: runs outside them are legitimate experiments and end at the
guard.
"""

import hashlib
import io
import json
import time
from dataclasses import dataclass, fields

import numpy as np

from .basis import GRID_SUP, Q_CONVENTIONS, q_factor
from .oracle import (MONTE_CARLO, OracleConfig,
                     _exact_descent_matrix, _mc_descent_matrix)
from .problems import truncated_optimum

PAPER_SQRT = "paper_sqrt"
CONSTANT = "constant"
EXPLICIT = "explicit"

GD_EXACT = "gd_exact"
GD_NOISY = "gd_noisy"
AGD_EXACT = "agd_exact"
AGD_LIKE_GD = "agd_like_gd"
SA_DECAY = "sa_decay"
EXPLICIT_STEP = "explicit"

GD = "gd"
AGD = "agd"
SA = "sa"
FIXED_GD = "fixed_gd"
METHODS = (GD, AGD, SA, FIXED_GD)

DIVERGENCE_FACTOR = 1e6

TRACE_COLUMNS = ("k", "m", "step", "err_trunc_sq", "err_full_sq",
                 "grad_norm", "elapsed_ns")
_INT_COLUMNS = {"k", "m", "elapsed_ns"}


@dataclass(frozen=True)
class TruncationSchedule:
    """Truncation level as a function of the iteration index.

    Kinds: `paper_sqrt` grows like floor(sqrt(k+10)+2); `constant` stays at
    `level`; `explicit` follows `levels` (then holds its last value).
    """

    kind: str = PAPER_SQRT
    level: int = None
    levels: tuple = None

    def __post_init__(self):
        if self.kind == CONSTANT:
            if self.level is None or self.level < 0:
                raise ValueError("constant schedule needs a level >= 0")
        elif self.kind == EXPLICIT:
            if not self.levels:
                raise ValueError("explicit schedule needs a level list")
            lv = tuple(int(x) for x in self.levels)
            if any(b < a for a, b in zip(lv, lv[1:])) or lv[0] < 0:
                raise ValueError("levels must be nonnegative, nondecreasing")
            object.__setattr__(self, "levels", lv)
        elif self.kind != PAPER_SQRT:
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def level_at(self, k):
        if self.kind == PAPER_SQRT:
            return int(np.floor(np.sqrt(k + 10.0) + 2.0))
        if self.kind == CONSTANT:
            return int(self.level)
        return self.levels[min(k, len(self.levels) - 1)]


@dataclass(frozen=True)
class StepPolicy:
    """Step-size rule; level-dependent rules are re-derived each iteration.

    `q_convention` selects how Q_m enters C_G for the noise-aware rules
    (`grid_sup` by default; `index` reproduces worked arithmetic such as
    C_G = 1.728 at level 91 with 250 samples). `fixed_c_g` freezes C_G to a
    given value instead. For explicit kinds, `gamma` is the step (and for
    agd runs `beta` may be given; otherwise it follows the momentum formula
    for alpha = gamma).
    """

    kind: str = GD_EXACT
    gamma: float = None
    beta: float = None
    gamma0: float = 0.01
    q_convention: str = GRID_SUP
    fixed_c_g: float = None

    def __post_init__(self):
        kinds = (GD_EXACT, GD_NOISY, AGD_EXACT, AGD_LIKE_GD, SA_DECAY,
                 EXPLICIT_STEP)
        if self.kind not in kinds:
            raise ValueError(f"unknown step kind {self.kind!r}")
        if self.q_convention not in Q_CONVENTIONS:
            raise ValueError(f"unknown Q convention {self.q_convention!r}")
        if self.kind == EXPLICIT_STEP and self.gamma is None:
            raise ValueError("explicit step policy needs gamma")

    def multiplicative_c_g(self, p, spec, m, samples):
        if self.fixed_c_g is not None:
            return float(self.fixed_c_g)
        Q = q_factor(spec, m, convention=self.q_convention)
        return 1.0 + 2.0 * p.noise.V_G * Q / samples

    def gd_step(self, p, spec, m, k, samples):
        if self.kind == GD_EXACT:
            return 2.0 / (p.mu + p.L)
        if self.kind == GD_NOISY:
            c_g = self.multiplicative_c_g(p, spec, m, samples)
            return 2.0 / ((p.mu + p.L) * (1.0 + c_g))
        if self.kind == SA_DECAY:
            return self.gamma0 / k
        if self.kind == EXPLICIT_STEP:
            return float(self.gamma)
        raise ValueError(f"step kind {self.kind!r} is not a gd rule")

    def agd_step(self, p, spec, m, samples):
        if self.kind == AGD_EXACT:
            alpha = 1.0 / p.L
        elif self.kind == AGD_LIKE_GD:
            c_g = self.multiplicative_c_g(p, spec, m, samples)
            alpha = 2.0 / ((p.mu + p.L) * (1.0 + c_g))
        elif self.kind == EXPLICIT_STEP:
            alpha = float(self.gamma)
        else:
            raise ValueError(f"step kind {self.kind!r} is not an agd rule")
        if self.kind == EXPLICIT_STEP and self.beta is not None:
            return alpha, float(self.beta)
        root = np.sqrt(alpha * p.mu)
        return alpha, (1.0 - root) / (1.0 + root)


@dataclass(frozen=True)
class SolverConfig:
    """Everything a run needs beyond the problem and the basis."""

    method: str
    schedule: TruncationSchedule
    steps: StepPolicy
    iterations: int
    oracle: OracleConfig = OracleConfig()
    seed: int = 0
    trial: int = 0
    initial: np.ndarray = None
    timing: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.iterations < 0:
            raise ValueError("iteration count must be nonnegative")
        if self.method == FIXED_GD and self.schedule.kind != CONSTANT:
            raise ValueError("fixed_gd requires a constant schedule")
        if self.method == SA and self.steps.kind != SA_DECAY:
            raise ValueError("sa requires the sa_decay step policy")
        if self.method == AGD:
            allowed = (AGD_EXACT, AGD_LIKE_GD, EXPLICIT_STEP)
        else:
            allowed = (GD_EXACT, GD_NOISY, SA_DECAY, EXPLICIT_STEP)
        if self.steps.kind not in allowed:
            raise ValueError(f"step kind {self.steps.kind!r} does not fit "
                             f"method {self.method!r}")


def config_fingerprint(cfg):
    """Deterministic short hash of a solver configuration."""

    def plain(obj):
        if hasattr(obj, "__dataclass_fields__"):
            return {f.name: plain(getattr(obj, f.name)) for f in fields(obj)}
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (tuple, list)):
            return [plain(x) for x in obj]
        return obj

    blob = json.dumps(plain(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Trace:
    """Per-iteration records of one solver run plus run metadata.

    `records` has one row per iteration (including the initial state) with
    columns `TRACE_COLUMNS`. `aborted_at` is the iteration at which the
    divergence guard fired, or None for a completed run.
    """

    records: np.ndarray
    method: str
    seed: int
    trial: int
    config_hash: str
    aborted_at: int = None
    final_state: np.ndarray = None

    def column(self, name):
        return self.records[:, TRACE_COLUMNS.index(name)]

    def to_csv(self, destination):
        if hasattr(destination, "write"):
            _write_trace_rows(destination, self.records)
            return
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            _write_trace_rows(fh, self.records)

    def csv_bytes(self):
        buf = io.StringIO()
        _write_trace_rows(buf, self.records)
        return buf.getvalue().encode()


def _write_trace_rows(fh, records):
    fh.write(",".join(TRACE_COLUMNS) + "\n")
    for row in records:
        cells = []
        for name, value in zip(TRACE_COLUMNS, row):
            if name in _INT_COLUMNS:
                cells.append(str(int(value)))
            else:
                cells.append(repr(float(value)))
        fh.write(",".join(cells) + "\n")


def trace_records_from_csv(path):
    """Numeric rows of a persisted trace, shaped like `Trace.records`."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(TRACE_COLUMNS):
        raise ValueError(f"expected {len(TRACE_COLUMNS)} columns")
    return data


class _ErrorMeter:
    """Truncated and full squared errors against the known optimum."""

    def __init__(self, p, spec):
        self.p = p
        self.spec = spec
        u = p.optimum_expansion(spec) if p.optimum_expansion else None
        self.full = u.as_matrix() if u is not None else None
        self.diagonal = p.name in ("quadratic", "noisy-quadratic")
        self._trunc_cache = {}

    def _trunc_target(self, m):
        if m not in self._trunc_cache:
            if self.diagonal:
                levels = self.full.shape[0] - 1
                tgt = self.full[:min(m, levels) + 1]
            else:
                tgt = truncated_optimum(self.p, m, self.spec).as_matrix()
            self._trunc_cache[m] = tgt
        return self._trunc_cache[m]

    def errors(self, U, m):
        if self.full is None:
            return float("nan"), float("nan")
        tgt = self._trunc_target(m)
        r = min(tgt.shape[0], U.shape[0])
        et = (np.sum((U[:r] - tgt[:r]) ** 2) + np.sum(U[r:] ** 2)
              + np.sum(tgt[r:] ** 2))
        rf = min(self.full.shape[0], U.shape[0])
        ef = (np.sum((U[:rf] - self.full[:rf]) ** 2) + np.sum(U[rf:] ** 2)
              + np.sum(self.full[rf:] ** 2))
        return float(et), float(ef)


def _initial_state(cfg, m0, q):
    U = np.zeros((m0 + 1, q))
    if cfg.initial is not None:
        given = np.asarray(cfg.initial, dtype=np.float64)
        if given.ndim != 2 or given.shape[1] != q:
            raise ValueError(f"initial state must be (level+1, {q})")
        if given.shape[0] > m0 + 1:
            raise ValueError("initial state exceeds the starting level")
        U[:given.shape[0]] = given
    return U


def _extend(U, m_new):
    if U.shape[0] < m_new + 1:
        pad = np.zeros((m_new + 1 - U.shape[0], U.shape[1]))
        U = np.vstack([U, pad])
    return U


def run(p, spec, cfg):
    """Execute one solver run and return its Trace."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, cfg.trial]))
    meter = _ErrorMeter(p, spec)
    is_agd = cfg.method == AGD
    mc_mode = cfg.oracle.mode == MONTE_CARLO
    samples = cfg.oracle.samples

    m = cfg.schedule.level_at(0)
    U = _initial_state(cfg, m, p.q)
    Uprev = U.copy()

    et0, ef0 = meter.errors(U, m)
    guard = DIVERGENCE_FACTOR * max(et0, 1e-30)
    records = [(0, m, 0.0, et0, ef0, 0.0, 0)]
    elapsed = 0
    aborted = None

    for k in range(1, cfg.iterations + 1):
        t0 = time.perf_counter_ns()
        mk = cfg.schedule.level_at(k)
        if mk > m:
            U = _extend(U, mk)
            Uprev = _extend(Uprev, mk)
            m = mk
        if is_agd:
            alpha, beta = cfg.steps.agd_step(p, spec, m, samples)
            Y = (1.0 + beta) * U - beta * Uprev
            if mc_mode:
                D = _mc_descent_matrix(p, Y, m, samples, rng, spec)
            else:
                D = _exact_descent_matrix(p, Y, m, spec)
            Uprev, U = U, Y - alpha * D
            step = alpha
        else:
            step = cfg.steps.gd_step(p, spec, m, k, samples)
            if mc_mode:
                D = _mc_descent_matrix(p, U, m, samples, rng, spec)
            else:
                D = _exact_descent_matrix(p, U, m, spec)
            U = U - step * D
        gnorm = float(np.linalg.norm(D))
        elapsed += time.perf_counter_ns() - t0

        et, ef = meter.errors(U, m)
        records.append((k, m, step, et, ef, gnorm,
                        elapsed if cfg.timing else 0))
        if et > guard:
            aborted = k
            break

    return Trace(records=np.array(records, dtype=np.float64),
                 method=cfg.method, seed=cfg.seed, trial=cfg.trial,
                 config_hash=config_fingerprint(cfg), aborted_at=aborted,
                 final_state=U)


def _require_method(cfg, method):
    if cfg.method != method:
        raise ValueError(f"config method {cfg.method!r}, expected {method!r}")


def run_gd(p, spec, cfg):
    """Plain descent with a growing (or constant) schedule."""
    _require_method(cfg, GD)
    return run(p, spec, cfg)


def run_agd(p, spec, cfg):
    """Accelerated descent: gradient at the momentum point y_k."""
    _require_method(cfg, AGD)
    return run(p, spec, cfg)


def run_sa(p, spec, cfg):
    """Robbins-Monro baseline: the gd loop with decaying steps."""
    _require_method(cfg, SA)
    return run(p, spec, cfg)


def run_fixed(p, spec, cfg):
    """Fixed-level baseline: the gd loop pinned to one truncation level."""
    _require_method(cfg, FIXED_GD)
    return run(p, spec, cfg)
