"""Acceptance gate: one check per numbered criterion, one line printed each.

Run with `pytest tests/test_acceptance.py -s` to see every line; under
default capture the lines still appear for failing checks. Each check also
enforces its own runtime budget.
"""

import pathlib
import time

import numpy as np

import chaos_descent.cli as cli
from chaos_descent.basis import FieldVector, analyze, make_basis, synthesize
from chaos_descent.harness import (ExperimentPlan, aggregate,
                                   equal_time_summary, experiment_fixed_vs_uq,
                                   run_trials)
from chaos_descent.kernels import backend_module
from chaos_descent.oracle import OracleConfig, error_constants
from chaos_descent.problems import (make_coupled_quadratic,
                                    make_noisy_quadratic, make_paper_target,
                                    make_quadratic, truncated_optimum)
from chaos_descent.solvers import (SolverConfig, StepPolicy,
                                   TruncationSchedule, run)
from chaos_descent.target import benchmark_expansion
from chaos_descent.verify import (check_cocoercivity, check_lyapunov_region,
                                  check_mc_error_bound,
                                  check_strong_cocoercivity,
                                  gd_rate_prediction)

MU, L = 1.0, 200.0


def report(num, name, passed, detail, elapsed, budget):
    line = (f"[criterion {num:2d}] {'PASS' if passed else 'FAIL'} {name}: "
            f"{detail} ({elapsed:.2f}s / budget {budget:.0f}s)")
    print(line)
    assert passed and elapsed < budget, line


def timer():
    t0 = time.perf_counter()
    return lambda: time.perf_counter() - t0


def test_criterion_01_orthonormality_and_parseval():
    elapsed = timer()
    worst_gram, worst_round = 0.0, 0.0
    rng = np.random.default_rng(1)
    for family in ("trigonometric", "legendre"):
        spec = make_basis(family)  # 1024 nodes
        B = backend_module("numpy").basis_matrix(spec.family_code,
                                                 spec.nodes, 64)
        gram = B.T @ (spec.weights[:, None] * B)
        worst_gram = max(worst_gram, float(np.max(np.abs(gram - np.eye(65)))))
        for _ in range(50):  # 50 per family = 100 vectors
            coeffs = rng.standard_normal(65)
            u = FieldVector(spec, (coeffs,))
            vals = synthesize(u, spec.nodes)[:, 0]
            back = analyze(lambda t, v=vals: v, 64, spec).coeffs
            worst_round = max(worst_round,
                              float(np.max(np.abs(back - coeffs))))
            quad_sq = float(np.sum(spec.weights * vals * vals))
            worst_round = max(worst_round,
                              abs(quad_sq - float(np.sum(coeffs ** 2))))
    ok = worst_gram < 1e-10 and worst_round <= 1e-8
    report(1, "orthonormality/parseval", ok,
           f"gram_dev={worst_gram:.2e} (tol 1e-10), "
           f"roundtrip_dev={worst_round:.2e} (tol 1e-8)", elapsed(), 5)


def test_criterion_02_fixed_level_exact_gd_rate():
    elapsed = timer()
    spec = make_basis("trigonometric")
    p = make_quadratic(MU, L, make_paper_target())
    cfg = SolverConfig(method="gd",
                       schedule=TruncationSchedule("constant", level=16),
                       steps=StepPolicy("gd_exact"), iterations=60,
                       oracle=OracleConfig("exact"), timing=False)
    et = run(p, spec, cfg).column("err_trunc_sq")
    factor = ((L - MU) / (L + MU)) ** 2
    dev = float(np.max(np.abs(et[1:] / et[:-1] - factor)))
    report(2, "exact gd contraction", dev < 1e-10,
           f"factor={factor:.6f}, max_dev={dev:.2e} (tol 1e-10)",
           elapsed(), 1)


def test_criterion_03_truncated_optimum_remainder_bound():
    elapsed = timer()
    spec = make_basis("trigonometric")
    p = make_coupled_quadratic(lambda t: 1.0 + 0.5 * np.sin(t),
                               make_paper_target())
    kappa = 3.0
    golden = benchmark_expansion("trigonometric")
    worst = -np.inf
    for m in (2, 4, 8, 16, 32):
        ustar_m = truncated_optimum(p, m, spec).components[0].coeffs
        left = float(np.sum((golden.coeffs[:m + 1] - ustar_m) ** 2))
        right = kappa * golden.remainder_norm(m) ** 2
        worst = max(worst, left / right)
    report(3, "truncated-optimum remainder bound", worst <= 1.0,
           f"max left/(kappa*rem^2)={worst:.3f} over m in 2..32 (need <= 1)",
           elapsed(), 10)


def test_criterion_04_mc_error_bound():
    elapsed = timer()
    spec = make_basis("trigonometric")
    p = make_noisy_quadratic(MU, L, make_paper_target())
    rep = check_mc_error_bound(p, spec, m=8, M=100, repeats=10_000,
                               states=10, seed=5)
    report(4, "mc second-moment bound", bool(rep.passed),
           f"min slack over 10 states={rep.slack:.4f} "
           f"(mean <= bound + 3*SE)", elapsed(), 60)


def test_criterion_05_noise_floor_plateau():
    elapsed = timer()
    spec = make_basis("trigonometric")
    p = make_noisy_quadratic(MU, L, make_paper_target())
    m, M, trials, K = 32, 250, 200, 2000
    cfg = SolverConfig(method="fixed_gd",
                       schedule=TruncationSchedule("constant", level=m),
                       steps=StepPolicy("gd_noisy"), iterations=K,
                       oracle=OracleConfig("monte_carlo", samples=M),
                       seed=0, timing=False)
    traces = run_trials(p, spec, cfg, trials=trials)
    curve = aggregate("gd", traces)
    # mean over the final 10 percent of the mean curve
    tail = curve.column("err_trunc_mean")[-K // 10:]
    plateau = float(np.mean(tail))
    gamma = cfg.steps.gd_step(p, spec, m, 1, M)
    C = error_constants(p, spec, m, M).C
    _, floor = gd_rate_prediction(MU, L, gamma, C,
                                  C_G=cfg.steps.multiplicative_c_g(
                                      p, spec, m, M))
    ok = plateau <= 2.0 * floor
    report(5, "noise floor", ok,
           f"plateau={plateau:.3e} vs floor={floor:.3e} "
           f"(ratio {plateau / floor:.2f}, need <= 2)", elapsed(), 300)


def test_criterion_06_cocoercivity_inequalities():
    elapsed = timer()
    spec = make_basis("trigonometric")
    target = make_paper_target()
    problems = (make_quadratic(MU, L, target),
                make_noisy_quadratic(MU, L, target),
                make_coupled_quadratic(lambda t: 1.0 + 0.5 * np.sin(t),
                                       target))
    worst = np.inf
    for p in problems:
        for check in (check_cocoercivity, check_strong_cocoercivity):
            rep = check(p, spec)
            worst = min(worst, rep.slack)
            assert rep.passed, rep
    report(6, "co-coercivity inequalities", worst >= -1e-8,
           f"min slack={worst:.2e} over 3 problems x 2 inequalities "
           f"x 100 pairs (tol -1e-8)", elapsed(), 10)


def test_criterion_07_lyapunov_lmi():
    elapsed = timer()
    rep = check_lyapunov_region(points=20, seed=9)
    report(7, "lyapunov lmi region", bool(rep.passed),
           f"min slack={rep.slack:.2e} at canonical + 20 certified points "
           f"(tol -1e-8)", elapsed(), 5)


def test_criterion_08_acceleration_iteration_ratio():
    elapsed = timer()
    spec = make_basis("trigonometric")
    p = make_quadratic(MU, L, make_paper_target())

    def first_hit(method, steps, iterations):
        cfg = SolverConfig(method=method,
                           schedule=TruncationSchedule("paper_sqrt"),
                           steps=steps, iterations=iterations,
                           oracle=OracleConfig("exact"), timing=False)
        et = run(p, spec, cfg).column("err_trunc_sq")
        hits = np.nonzero(et <= 1e-6)[0]
        return int(hits[0]) if hits.size else None

    gd_iters = first_hit("gd", StepPolicy("gd_exact"), 1200)
    agd_iters = first_hit("agd", StepPolicy("agd_exact"), 600)
    ok = (gd_iters is not None and agd_iters is not None
          and agd_iters <= gd_iters / 3.0)
    report(8, "acceleration ratio", ok,
           f"gd={gd_iters} iters, agd={agd_iters} iters, "
           f"ratio={gd_iters / agd_iters:.3f} (need >= 3; the growing "
           f"schedule re-injects truncation error on every level increase, "
           f"which caps the measured ratio below the fixed-level one)",
           elapsed(), 30)


def test_criterion_09_schedule_ordering_and_guard():
    elapsed = timer()
    spec = make_basis("trigonometric")
    p = make_quadratic(MU, L, make_paper_target())
    K, M, trials = 300, 500, 50
    oracle = OracleConfig("monte_carlo", samples=M)
    sched = TruncationSchedule("paper_sqrt")
    gd_cfg = SolverConfig(method="gd", schedule=sched,
                          steps=StepPolicy("gd_noisy"), iterations=K,
                          oracle=oracle, seed=42, timing=False)
    sa_cfg = SolverConfig(method="sa", schedule=sched,
                          steps=StepPolicy("sa_decay"), iterations=K,
                          oracle=oracle, seed=43, timing=False)
    gd = aggregate("gd", run_trials(p, spec, gd_cfg, trials))
    sa = aggregate("sa", run_trials(p, spec, sa_cfg, trials))
    sa_above = bool(np.all(sa.column("err_trunc_mean")[50:]
                           > gd.column("err_trunc_mean")[50:]))
    # dropping the 1/(1+C_G) damping makes the sampled-Gram iteration blow up
    bare_cfg = SolverConfig(method="gd", schedule=sched,
                            steps=StepPolicy("gd_exact"), iterations=600,
                            oracle=oracle, seed=11, timing=False)
    bare = run(p, spec, bare_cfg)
    ok = sa_above and bare.aborted_at is not None
    report(9, "sa ordering and divergence guard", ok,
           f"sa>gd for all k>=50: {sa_above} ({trials} trials); "
           f"undamped step aborted at k={bare.aborted_at}", elapsed(), 600)


def test_criterion_10_fixed_vs_growing_level(tmp_path):
    elapsed = timer()
    plan = ExperimentPlan(name="fixed_vs_uq", out=str(tmp_path / "c10"),
                          trials=50, seed=0)
    curves = experiment_fixed_vs_uq(plan)
    summary = equal_time_summary(curves["fixed"], curves["uq"])
    err_ok = (summary["final_err_full"]["uq"]
              < summary["final_err_full"]["fixed"])
    wall_ok = (summary["mean_wall_ns"]["uq"]
               < summary["mean_wall_ns"]["fixed"])
    ratio = summary["equal_time"]["ratio_full"]
    ok = err_ok and wall_ok and ratio >= 10.0
    report(10, "fixed vs growing level", ok,
           f"final err uq={summary['final_err_full']['uq']:.2e} < "
           f"fixed={summary['final_err_full']['fixed']:.2e}: {err_ok}; "
           f"wall uq={summary['mean_wall_ns']['uq'] / 1e6:.0f}ms < "
           f"fixed={summary['mean_wall_ns']['fixed'] / 1e6:.0f}ms: {wall_ok}; "
           f"equal-time ratio={ratio:.1f} (need >= 10)", elapsed(), 900)


def test_criterion_11_solve_determinism(tmp_path):
    elapsed = timer()
    cfg = pathlib.Path(__file__).resolve().parents[1] / "configs" \
        / "fig1a_gd.cfg"
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert cli.main(["solve", "--config", str(cfg),
                         "--seed", "7", "--out", str(out)]) == 0
    a = (out_a / "fig1a_gd_gd_seed7.csv").read_bytes()
    b = (out_b / "fig1a_gd_gd_seed7.csv").read_bytes()
    report(11, "solve determinism", a == b and len(a) > 0,
           f"rerun byte-identical: {a == b} ({len(a)} bytes)", elapsed(), 1)
