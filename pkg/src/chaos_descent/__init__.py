"""Spectral-expansion optimization under uncertainty.

Minimize E_v F(x(theta), theta, v) over random fields x(theta) by expanding
x in an orthonormal basis of theta and running first-order methods on the
coefficients, with the truncation level growing across iterations. Includes
exact (quadrature) and Monte Carlo descent oracles, plain/accelerated/
decaying-step solvers, a verification suite for the underlying convergence
theory, and an experiment harness with reproducible CSV output.
"""

from .basis import (BasisSpec, CoefficientVector, DomainError, FieldVector,
                    GRID_SUP, INDEX_CONVENTION, LEGENDRE, QuadratureError,
                    TRIGONOMETRIC, analyze, evaluate_basis, make_basis,
                    project, q_factor, remainder_norm, synthesize)
from .harness import (AggregateCurve, ExperimentPlan, aggregate,
                      aggregate_from_csvs, plateau_level, plateau_onset,
                      run_experiment, run_trials)
from .kernels import BACKEND, available_backends
from .oracle import (ErrorConstants, OracleConfig, SampleRequirement,
                     error_constants, exact_descent, mc_descent,
                     required_samples)
from .problems import (ConditionReport, ConfigurationError, NoiseModel,
                       ProblemSpec, condition_report,
                       epsilon_condition_number, make_coupled_quadratic,
                       make_noisy_quadratic, make_paper_target,
                       make_quadratic, truncated_optimum)
from .solvers import (SolverConfig, StepPolicy, Trace, TruncationSchedule,
                      run, run_agd, run_fixed, run_gd, run_sa)
from .target import benchmark_expansion, target_value
from .verify import (agd_rate_prediction, agd_safe_iterations,
                     gd_rate_prediction, linear_phase_epsilon,
                     lyapunov_certificate, run_verify_suite)

__version__ = "0.1.0"

__all__ = [
    "AggregateCurve", "BACKEND", "BasisSpec", "CoefficientVector",
    "ConditionReport", "ConfigurationError", "DomainError", "ErrorConstants",
    "ExperimentPlan", "FieldVector", "GRID_SUP", "INDEX_CONVENTION",
    "LEGENDRE", "NoiseModel", "OracleConfig", "ProblemSpec",
    "QuadratureError", "SampleRequirement", "SolverConfig", "StepPolicy",
    "TRIGONOMETRIC", "Trace", "TruncationSchedule", "agd_rate_prediction",
    "agd_safe_iterations", "aggregate", "aggregate_from_csvs", "analyze",
    "available_backends", "benchmark_expansion", "condition_report",
    "epsilon_condition_number", "error_constants", "evaluate_basis",
    "exact_descent", "gd_rate_prediction", "linear_phase_epsilon",
    "lyapunov_certificate", "make_basis", "make_coupled_quadratic",
    "make_noisy_quadratic", "make_paper_target", "make_quadratic",
    "mc_descent", "plateau_level", "plateau_onset", "project", "q_factor",
    "remainder_norm", "required_samples", "run", "run_agd", "run_experiment",
    "run_fixed", "run_gd", "run_sa", "run_trials", "run_verify_suite",
    "synthesize", "target_value", "truncated_optimum",
]
