"""Numerical verification of the convergence theory behind the solvers.

Each `check_*` operation evaluates one inequality, rate constant, or matrix
condition on concrete problems and reports machine-readable slack. The
`run_verify_suite` entry point executes all of them (optionally in a thread
pool), merges the reports, and can emit a JSON document. A negative slack
larger than -1e-8 counts as numerical zero.

Conventions verified here, stated once:

* plain descent with step gamma contracts squared error by
  1 - 2 gamma mu L / (mu + L) per iteration down to a floor
  (mu + L) gamma C / (2 mu L);
* the accelerated method contracts its envelope by 1 - sqrt(alpha mu)/3
  with leading constant 4 kappa^2 (mu + 2 alpha C_G)/(mu + 4 alpha C_G + L)
  and floor 2 alpha C / (mu^2 + 4 alpha C_G mu + 2 L);
* the momentum iteration admits a quadratic Lyapunov certificate: with
  system matrices A = [[1+b, -b], [1, 0]], B = [-a, 0]^T and
  P the outer product of [sqrt(1/2a), sqrt(mu/2) - sqrt(1/2a)], the matrix
  rho^2 X1 + (1-rho^2) X2 - [[A'PA - rho^2 P, A'PB], [B'PA, B'PB]] is PSD
  at rho^2 = 1 - sqrt(alpha mu) for certified parameters.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .basis import (GRID_SUP, INDEX_CONVENTION, make_basis, q_factor)
from .oracle import (OracleConfig, _exact_descent_matrix,
                     _mc_descent_matrix, error_constants, required_samples)
from .problems import (make_coupled_quadratic, make_noisy_quadratic,
                       make_paper_target, make_quadratic, truncated_optimum)
from .solvers import (CONSTANT, SolverConfig, StepPolicy,
                      TruncationSchedule, run)

SLACK_TOL = -1e-8


@dataclass
class CheckReport:
    """One verified statement: inputs, numbers, and a verdict.

    `passed` is None for purely informational entries.
    """

    name: str
    passed: bool
    slack: float = None
    predicted: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    note: str = ""


@dataclass
class RateReport:
    """Predicted vs measured contraction for one fixed-level run."""

    predicted_factor: float
    predicted_floor: float
    measured_factors: list
    measured_plateau: float
    factor_ok: bool
    floor_ok: bool


@dataclass
class LyapunovCertificate:
    """All matrices of the momentum LMI plus its minimum-eigenvalue slack."""

    rho2: float
    X1: np.ndarray
    X2: np.ndarray
    P: np.ndarray
    Q_alpha: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    slack: float
    valid: bool


def _pair_inner(spec, F, G):
    """Quadrature inner product of two (nodes, q) value arrays."""
    return float(np.sum(spec.weights[:, None] * F * G))


def _random_states(p, spec, level, count, seed):
    rng = np.random.default_rng(seed)
    return [rng.standard_normal((level + 1, p.q)) for _ in range(count)]


def _node_values(spec, U):
    return kernels.synthesize_values(spec.family_code, spec.nodes, U)


def check_cocoercivity(p, spec, trials=100, level=32, seed=1):
    """<grad f(x)-grad f(y), x-y> >= (1/L) |grad f(x)-grad f(y)|^2."""
    states = _random_states(p, spec, level, 2 * trials, seed)
    worst = np.inf
    for U1, U2 in zip(states[::2], states[1::2]):
        X1, X2 = _node_values(spec, U1), _node_values(spec, U2)
        G1 = p.grad_f_nodes(X1, spec)
        G2 = p.grad_f_nodes(X2, spec)
        lhs = _pair_inner(spec, G1 - G2, X1 - X2)
        rhs = _pair_inner(spec, G1 - G2, G1 - G2) / p.L
        worst = min(worst, lhs - rhs)
    return CheckReport(name=f"cocoercivity[{p.name}]",
                       passed=bool(worst >= SLACK_TOL), slack=float(worst),
                       inputs={"trials": trials, "level": level, "L": p.L})


def check_strong_cocoercivity(p, spec, trials=100, level=32, seed=2):
    """(L+mu)<dg, dx> >= mu L |dx|^2 + |dg|^2 on random pairs."""
    states = _random_states(p, spec, level, 2 * trials, seed)
    worst = np.inf
    for U1, U2 in zip(states[::2], states[1::2]):
        X1, X2 = _node_values(spec, U1), _node_values(spec, U2)
        G1 = p.grad_f_nodes(X1, spec)
        G2 = p.grad_f_nodes(X2, spec)
        lhs = (p.L + p.mu) * _pair_inner(spec, G1 - G2, X1 - X2)
        rhs = (p.mu * p.L * _pair_inner(spec, X1 - X2, X1 - X2)
               + _pair_inner(spec, G1 - G2, G1 - G2))
        worst = min(worst, lhs - rhs)
    return CheckReport(name=f"strong_cocoercivity[{p.name}]",
                       passed=bool(worst >= SLACK_TOL), slack=float(worst),
                       inputs={"trials": trials, "level": level,
                               "mu": p.mu, "L": p.L})


def check_remainder_lemma(p, spec, levels=(2, 4, 8, 16, 32)):
    """Projection-vs-truncated-optimum gap against kappa times remainder.

    Verifies |P_m(u*) - u*_m|^2 <= kappa |R_m|^2 and the corollary
    |u* - u*_m|^2 <= (kappa + 1) |R_m|^2 at each level.
    """
    ustar = p.optimum_expansion(spec)
    full = ustar.as_matrix()
    ratios, corollary_ratios = [], []
    for m in levels:
        um = truncated_optimum(p, m, spec).as_matrix()
        proj = full[:m + 1]
        left = float(np.sum((proj - um) ** 2))
        rem2 = float(np.sum(full[m + 1:] ** 2))
        ratios.append(left / rem2)
        corollary_ratios.append((left + rem2) / rem2)
    worst = max(ratios)
    worst_cor = max(corollary_ratios)
    passed = worst <= p.kappa + 1e-12 and worst_cor <= p.kappa + 1.0 + 1e-12
    return CheckReport(
        name=f"remainder_lemma[{p.name}]", passed=bool(passed),
        slack=float(p.kappa - worst),
        predicted={"kappa": p.kappa, "kappa_plus_1": p.kappa + 1.0},
        measured={"ratios": ratios, "corollary_ratios": corollary_ratios},
        inputs={"levels": list(levels)})


def gd_rate_prediction(mu, L, gamma, C, C_G=1.0):
    """Contraction factor and noise floor of constant-step descent.

    Refuses steps above the stability cap 2/((mu+L) C_G).
    """
    if not (0 < mu <= L):
        raise ValueError("need 0 < mu <= L")
    cap = 2.0 / ((mu + L) * max(C_G, 1.0))
    if gamma > cap * (1.0 + 1e-12):
        raise ValueError(f"step {gamma:g} exceeds the cap {cap:g}")
    factor = 1.0 - 2.0 * gamma * mu * L / (mu + L)
    floor = (mu + L) * gamma * C / (2.0 * mu * L)
    return factor, floor


def agd_step_cap(mu, L, C_G):
    """Largest certified accelerated step: min{1/L, mu^3/(60 C_G)^2}."""
    if C_G <= 0:
        return 1.0 / L
    return min(1.0 / L, mu ** 3 / (60.0 * C_G) ** 2)


@dataclass(frozen=True)
class AgdPrediction:
    """Envelope rate, leading constant, and floor for the momentum method."""

    factor: float
    constant: float
    floor: float
    certified: bool

    def __iter__(self):
        return iter((self.factor, self.constant, self.floor))


def agd_rate_prediction(mu, L, alpha, C, C_G):
    """Envelope constants of the accelerated method.

    Outside the certified step range the numbers are still returned,
    flagged descriptive via `certified=False`.
    """
    if not (0 < mu <= L):
        raise ValueError("need 0 < mu <= L")
    kappa = L / mu
    factor = 1.0 - np.sqrt(alpha * mu) / 3.0
    constant = (4.0 * kappa ** 2 * (mu + 2.0 * alpha * C_G)
                / (mu + 4.0 * alpha * C_G + L))
    floor = 2.0 * alpha * C / (mu ** 2 + 4.0 * alpha * C_G * mu + 2.0 * L)
    certified = alpha <= agd_step_cap(mu, L, C_G) * (1.0 + 1e-12)
    return AgdPrediction(float(factor), float(constant), float(floor),
                         bool(certified))


def lyapunov_certificate(mu, L, alpha, beta, rho2, c2=0.0):
    """Assemble the momentum-method LMI and report its eigenvalue slack.

    The inequality uses P alone; Q_alpha = P + 2 alpha c^2 C'C is assembled
    and reported alongside because the envelope argument consumes it.
    """
    if not (0 < alpha <= 1.0 / L):
        raise ValueError("need 0 < alpha <= 1/L")
    if not (0 <= beta < 1):
        raise ValueError("need 0 <= beta < 1")
    X1 = 0.5 * np.array([
        [beta ** 2 * mu, -beta ** 2 * mu, -beta],
        [-beta ** 2 * mu, beta ** 2 * mu, beta],
        [-beta, beta, alpha * (2.0 - L * alpha)],
    ])
    X2 = 0.5 * np.array([
        [(1 + beta) ** 2 * mu, -beta * (1 + beta) * mu, -(1 + beta)],
        [-beta * (1 + beta) * mu, beta ** 2 * mu, beta],
        [-(1 + beta), beta, alpha * (2.0 - L * alpha)],
    ])
    A = np.array([[1.0 + beta, -beta], [1.0, 0.0]])
    B = np.array([[-alpha], [0.0]])
    C = np.array([[1.0 + beta, -beta]])
    v = np.array([np.sqrt(1.0 / (2.0 * alpha)),
                  np.sqrt(mu / 2.0) - np.sqrt(1.0 / (2.0 * alpha))])
    P = np.outer(v, v)
    Q_alpha = P + 2.0 * alpha * c2 * (C.T @ C)
    top = A.T @ P @ A - rho2 * P
    off = A.T @ P @ B
    bot = B.T @ P @ B
    M = rho2 * X1 + (1.0 - rho2) * X2 - np.block([[top, off], [off.T, bot]])
    slack = float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())
    valid = bool(np.linalg.eigvalsh(0.5 * (P + P.T)).min() >= SLACK_TOL)
    return LyapunovCertificate(rho2=float(rho2), X1=X1, X2=X2, P=P,
                               Q_alpha=Q_alpha, A=A, B=B, C=C,
                               slack=slack, valid=valid)


def check_mc_error_bound(p, spec, m=8, M=100, repeats=2000, states=10,
                         seed=5):
    """Empirical E|e|^2 of the sampled oracle against its variance bound.

    The bound at a state x is (Q_m/M)(V_G |grad f(x)|_pi^2 + V) with the
    definitional grid-sup Q_m. Passes when the empirical mean stays below
    bound + 3 standard errors at every state.
    """
    rng = np.random.default_rng(seed)
    Q = q_factor(spec, m, convention=GRID_SUP)
    worst_ratio = 0.0
    results = []
    ok = True
    for s in range(states):
        U = 0.5 * rng.standard_normal((m + 1, p.q))
        exact = _exact_descent_matrix(p, U, m, spec)
        xvals = _node_values(spec, U)
        G = p.grad_f_nodes(xvals, spec)
        g2 = float(np.sum(spec.weights[:, None] * G * G))
        bound = (Q / M) * (p.noise.V_G * g2 + p.noise.V)
        sq = np.empty(repeats)
        for r in range(repeats):
            D = _mc_descent_matrix(p, U, m, M, rng, spec)
            sq[r] = np.sum((D - exact) ** 2)
        mean = float(sq.mean())
        se = float(sq.std(ddof=1) / np.sqrt(repeats))
        ok = ok and (mean <= bound + 3.0 * se)
        worst_ratio = max(worst_ratio, mean / bound)
        results.append({"empirical": mean, "bound": bound, "se": se})
    return CheckReport(
        name=f"mc_error_bound[{p.name}]", passed=bool(ok),
        slack=float(1.0 - worst_ratio),
        measured={"max_ratio": worst_ratio, "states": results},
        inputs={"m": m, "M": M, "repeats": repeats, "Q": Q})


def linear_phase_epsilon(mu, L, gamma, eps_target):
    """Invert (2e + sqrt(e)) / (1 - sqrt(contraction factor)) = eps_target.

    Solved for e by bisection to 1e-12; the map is monotone through the
    origin, so the root is unique.
    """
    if eps_target <= 0:
        raise ValueError("eps_target must be positive")
    factor, _ = gd_rate_prediction(mu, L, gamma, 0.0)
    denom = 1.0 - np.sqrt(factor)

    def forward(e):
        return (2.0 * e + np.sqrt(e)) / denom

    hi = 1.0
    while forward(hi) < eps_target:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if forward(mid) < eps_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def agd_safe_iterations(mu, L, alpha, C_G):
    """Smallest N with rho^N Gamma < 0.9 for the accelerated envelope."""
    pred = agd_rate_prediction(mu, L, alpha, 0.0, C_G)
    rho = np.sqrt(pred.factor)
    gamma_big = np.sqrt(pred.constant)
    if gamma_big < 0.9:
        return 0
    if rho >= 1.0:
        raise ValueError("envelope does not contract: rho >= 1")
    N = int(np.ceil((np.log(gamma_big) - np.log(0.9)) / (-np.log(rho))))
    N = max(N, 0)
    while rho ** N * gamma_big >= 0.9:
        N += 1
    return N


def check_gd_rate(p, spec, m=16, iterations=60):
    """Measured fixed-level exact-descent contraction vs the prediction."""
    gamma = 2.0 / (p.mu + p.L)
    factor, floor = gd_rate_prediction(p.mu, p.L, gamma, 0.0)
    cfg = SolverConfig(method="gd",
                       schedule=TruncationSchedule(CONSTANT, level=m),
                       steps=StepPolicy("gd_exact"), iterations=iterations,
                       oracle=OracleConfig("exact"), timing=False)
    trace = run(p, spec, cfg)
    et = trace.column("err_trunc_sq")
    measured = (et[1:] / et[:-1]).tolist()
    dev = float(np.max(np.abs(np.array(measured) - factor)))
    plateau = float(np.mean(et[-max(1, iterations // 10):]))
    report = RateReport(predicted_factor=factor, predicted_floor=floor,
                        measured_factors=measured, measured_plateau=plateau,
                        factor_ok=dev <= 1e-10, floor_ok=True)
    return CheckReport(
        name=f"gd_rate[{p.name}]", passed=report.factor_ok,
        slack=float(1e-10 - dev),
        predicted={"factor": factor, "floor": floor},
        measured={"max_factor_deviation": dev, "plateau": plateau},
        inputs={"m": m, "gamma": gamma, "iterations": iterations})


def check_agd_envelope(p, spec, m=16, iterations=600):
    """Accelerated-run error under the predicted envelope for k >= N."""
    alpha = 1.0 / p.L
    pred = agd_rate_prediction(p.mu, p.L, alpha, 0.0, 0.0)
    N = agd_safe_iterations(p.mu, p.L, alpha, 0.0)
    cfg = SolverConfig(method="agd",
                       schedule=TruncationSchedule(CONSTANT, level=m),
                       steps=StepPolicy("agd_exact"), iterations=iterations,
                       oracle=OracleConfig("exact"), timing=False)
    trace = run(p, spec, cfg)
    et = trace.column("err_trunc_sq")
    e1 = et[1] if et.size > 1 else et[0]
    ks = np.arange(et.size)
    envelope = pred.constant * pred.factor ** ks * e1
    tail = slice(max(N, 1), et.size)
    ok = bool(np.all(et[tail] <= envelope[tail] + 1e-30))
    margin = float(np.min(envelope[tail] - et[tail]))
    return CheckReport(
        name=f"agd_envelope[{p.name}]", passed=ok, slack=margin,
        predicted={"factor": pred.factor, "constant": pred.constant,
                   "safe_iterations": N},
        measured={"first_checked": max(N, 1),
                  "final_error": float(et[-1])},
        inputs={"m": m, "alpha": alpha, "iterations": iterations})


def check_lyapunov_region(points=20, seed=9):
    """LMI slack at the canonical certified point and random certified ones."""
    mu0, L0 = 1.0, 200.0
    alpha0 = 1.0 / L0
    beta0 = (1 - np.sqrt(alpha0 * mu0)) / (1 + np.sqrt(alpha0 * mu0))
    certs = [lyapunov_certificate(mu0, L0, alpha0, beta0,
                                  1 - np.sqrt(alpha0 * mu0), c2=0.0)]
    rng = np.random.default_rng(seed)
    for _ in range(points):
        mu = 10 ** rng.uniform(-1, 1)
        kappa = 10 ** rng.uniform(np.log10(4.0), 3)
        L = kappa * mu
        alpha = (1.0 / L) * rng.uniform(0.05, 1.0)
        beta = (1 - np.sqrt(alpha * mu)) / (1 + np.sqrt(alpha * mu))
        certs.append(lyapunov_certificate(mu, L, alpha, beta,
                                          1 - np.sqrt(alpha * mu), c2=0.0))
    worst = min(c.slack for c in certs)
    ok = worst >= SLACK_TOL and all(c.valid for c in certs)
    return CheckReport(
        name="lyapunov_region", passed=bool(ok), slack=float(worst),
        measured={"canonical_slack": certs[0].slack, "points": points + 1},
        inputs={"rho2": "1 - sqrt(alpha mu)", "c2": 0.0})


def check_noise_second_moment(p, spec, samples=100_000, states=20, seed=13):
    """E_v (grad F_c)^2 <= V + V_G (grad f_c)^2 per component, empirically."""
    rng = np.random.default_rng(seed)
    ok = True
    worst = np.inf
    for _ in range(states):
        theta = np.full(1, rng.uniform(*spec.domain))
        x = rng.standard_normal((1, p.q))
        g = p.grad_f(x, theta)[0]
        v = p.sample_v(rng, samples)
        G = p.grad_F(np.repeat(x, samples, axis=0),
                     np.repeat(theta, samples), v)
        for c in range(p.q):
            sq = G[:, c] ** 2
            bound = p.noise.V + p.noise.V_G * float(g[c] ** 2)
            se = float(sq.std(ddof=1) / np.sqrt(samples))
            slack = bound + 3.0 * se - float(sq.mean())
            worst = min(worst, slack)
            ok = ok and slack >= 0.0
    return CheckReport(
        name=f"noise_second_moment[{p.name}]", passed=bool(ok),
        slack=float(worst),
        inputs={"samples": samples, "states": states,
                "V": p.noise.V, "V_G": p.noise.V_G})


def _info_reports(spec, p_noisy):
    """Informational entries: conventions surfaced, not adjudicated."""
    reports = []
    q_sup = q_factor(spec, 91, convention=GRID_SUP)
    q_idx = q_factor(spec, 91, convention=INDEX_CONVENTION)
    cg = error_constants(p_noisy, spec, 91, 250, variant="gd",
                         q_convention=INDEX_CONVENTION, grad_norm=0.0).C_G
    reports.append(CheckReport(
        name="q_factor_conventions", passed=None,
        measured={"grid_sup_Q91": q_sup, "index_Q91": q_idx,
                  "C_G_at_91_250_index": cg},
        note="the definitional sup gives Q_91 = 93 while the worked bound "
             "C_G = 1.728 at (91, 250) requires the index convention "
             "Q_91 = 91; both are exposed and this suite records both"))
    u = p_noisy.optimum_expansion(spec)
    rem91 = u.remainder_norm(91) ** 2
    rem_cross = next(m for m in range(u.level + 1)
                     if u.remainder_norm(m) ** 2 < 1.6e-5)
    reports.append(CheckReport(
        name="benchmark_remainder_reference", passed=None,
        measured={"two_component_sq_remainder_at_91": rem91,
                  "first_level_with_sq_remainder_below_1.6e-5": rem_cross},
        note="squared two-component remainder at level 91 is ~7.0e-7; "
             "nothing near 1.6e-5 occurs at that level (that magnitude "
             "belongs to much smaller levels), so reported truncation "
             "errors are computed, never assumed"))
    reports.append(CheckReport(
        name="objective_normalization", passed=None,
        note="the built-in quadratic is (mu/2)(x-x*)^2 + (L/2)(y-x*)^2: "
             "the halves make strong convexity mu and smoothness L exact, "
             "which every quoted step size and rate in this suite assumes"))
    caps = {"conservative": 2.0 / ((p_noisy.mu + p_noisy.L) * (1.0 + cg)),
            "loose": 2.0 / ((p_noisy.mu + p_noisy.L) * cg)}
    reports.append(CheckReport(
        name="noisy_step_caps", passed=None, measured=caps,
        note="two caps circulate for the noise-aware step; solvers default "
             "to the conservative 2/((mu+L)(1+C_G))"))
    req = required_samples(spec, 91, p_noisy.mu, p_noisy.L,
                           p_noisy.noise.V_G)
    reports.append(CheckReport(
        name="required_samples_flag", passed=None,
        measured={"bound": req.bound, "attainable": req.attainable},
        note=req.note or "certified accelerated step 1/L attainable"))
    return reports


def _suite_checks(spec, problems):
    p_quad, p_noisy, p_coupled = problems
    checks = [
        lambda: check_cocoercivity(p_quad, spec),
        lambda: check_cocoercivity(p_coupled, spec),
        lambda: check_strong_cocoercivity(p_quad, spec),
        lambda: check_strong_cocoercivity(p_coupled, spec),
        lambda: check_remainder_lemma(p_coupled, spec),
        lambda: check_gd_rate(p_quad, spec),
        lambda: check_agd_envelope(p_quad, spec),
        lambda: check_lyapunov_region(),
        lambda: check_mc_error_bound(p_noisy, spec),
        lambda: check_noise_second_moment(p_noisy, spec),
        lambda: _linear_phase_selfcheck(),
    ]
    return checks


def _linear_phase_selfcheck():
    mu, L = 1.0, 200.0
    gamma = 2.0 / (mu + L)
    target = 1e-3
    eps = linear_phase_epsilon(mu, L, gamma, target)
    factor, _ = gd_rate_prediction(mu, L, gamma, 0.0)
    resid = abs((2 * eps + np.sqrt(eps)) / (1 - np.sqrt(factor)) - target)
    return CheckReport(
        name="linear_phase_epsilon", passed=bool(resid <= 1e-10),
        slack=float(1e-10 - resid),
        measured={"eps_star": eps, "forward_residual": resid},
        inputs={"mu": mu, "L": L, "gamma": gamma, "eps_target": target})


def run_verify_suite(nodes=1024, workers=None, out=None):
    """Run every check on the built-in problems and merge the reports."""
    spec = make_basis("trigonometric", nodes)
    target = make_paper_target()
    problems = (make_quadratic(1.0, 200.0, target),
                make_noisy_quadratic(1.0, 200.0, target),
                make_coupled_quadratic(lambda t: 1.0 + 0.5 * np.sin(t),
                                       target))
    checks = _suite_checks(spec, problems)
    if workers is None:
        workers = int(os.environ.get("CHAOS_DESCENT_WORKERS", "4"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda fn: fn(), checks))
    else:
        reports = [fn() for fn in checks]
    reports.sort(key=lambda r: r.name)
    reports.extend(_info_reports(spec, problems[1]))
    passed = all(r.passed for r in reports if r.passed is not None)
    doc = {
        "suite": "theory-verification",
        "backend": kernels.BACKEND,
        "nodes": nodes,
        "passed": bool(passed),
        "checks": [_jsonable(asdict(r)) for r in reports],
    }
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return doc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj
