"""Truncated descent vectors: exact quadrature and Monte Carlo estimates.

The level-m descent vector of f at a field u has entries
D_i = E_theta[ grad f(x(theta), theta) B_i(theta) ] for i <= m, one block
per output component. `exact_descent` computes the expectation with the
basis spec's quadrature rule; `mc_descent` estimates it from M i.i.d. draws
(theta_j, v_j), reusing the same draws for every index and component.

`error_constants` packages the noise constants (C, C_G) the step-size rules
consume, and `required_samples` inverts them: how many samples until the
accelerated method may run at its ideal step 1/L.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .basis import FieldVector, GRID_SUP, q_factor
from .problems import truncated_optimum

EXACT = "exact"
MONTE_CARLO = "monte_carlo"

GD_VARIANT = "gd"
AGD_VARIANT = "agd"


@dataclass(frozen=True)
class OracleConfig:
    """How descent vectors are computed during a solve."""

    mode: str = EXACT
    samples: int = 250
    nodes: int = 1024
    rng_stream: int = 0

    def __post_init__(self):
        if self.mode not in (EXACT, MONTE_CARLO):
            raise ValueError(f"unknown oracle mode {self.mode!r}")
        if self.samples < 1:
            raise ValueError("sample count must be at least 1")
        if self.nodes < 2:
            raise ValueError("need at least 2 quadrature nodes")


@dataclass(frozen=True)
class ErrorConstants:
    """Additive/multiplicative gradient-noise constants for one method."""

    C: float
    C_G: float
    variant: str

    def __post_init__(self):
        if self.variant not in (GD_VARIANT, AGD_VARIANT):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.C < 0 or self.C_G < 1:
            raise ValueError("need C >= 0 and C_G >= 1")


def _require_level(u, m):
    if u.level > m:
        raise ValueError(f"field level {u.level} exceeds oracle level {m}")


def _state_matrix(u, m):
    """(m+1, q) coefficient array of u, zero-padded up to level m."""
    mat = u.as_matrix()
    if mat.shape[0] < m + 1:
        mat = np.vstack([mat, np.zeros((m + 1 - mat.shape[0], mat.shape[1]))])
    return mat


def _exact_descent_matrix(p, U, m, spec):
    """Array fast path: U is (m+1, q), returns the (m+1, q) descent block."""
    xvals = kernels.synthesize_values(spec.family_code, spec.nodes, U)
    G = p.grad_f_nodes(xvals, spec)
    return kernels.accumulate_projection(
        spec.family_code, spec.nodes, G, spec.weights, m)


def _mc_descent_matrix(p, U, m, M, rng, spec):
    """Array fast path for the Monte Carlo estimator."""
    lo, hi = spec.domain
    theta = lo + (hi - lo) * rng.random(M)
    v = p.sample_v(rng, M)
    xvals = kernels.synthesize_values(spec.family_code, theta, U)
    G = p.grad_F(xvals, theta, v)
    weights = np.full(M, 1.0 / M)
    return kernels.accumulate_projection(spec.family_code, theta, G,
                                         weights, m)


def exact_descent(p, u, m, spec=None):
    """Level-m descent vector by quadrature against the basis spec's rule."""
    _require_level(u, m)
    spec = u.spec if spec is None else spec
    D = _exact_descent_matrix(p, _state_matrix(u, m), m, spec)
    return FieldVector.from_matrix(spec, D)


def mc_descent(p, u, m, M, rng):
    """Level-m descent vector estimated from M shared (theta, v) draws."""
    if M < 1:
        raise ValueError("sample count must be at least 1")
    _require_level(u, m)
    D = _mc_descent_matrix(p, _state_matrix(u, m), m, M, rng, u.spec)
    return FieldVector.from_matrix(u.spec, D)


def gradient_norm_at_truncated_optimum(p, m, spec):
    """Measure-weighted norm of the full gradient at the level-m optimum."""
    ustar_m = truncated_optimum(p, m, spec)
    xvals = kernels.synthesize_values(
        spec.family_code, spec.nodes, _state_matrix(ustar_m, m))
    G = p.grad_f_nodes(xvals, spec)
    return float(np.sqrt(np.sum(spec.weights[:, None] * G * G)))


def error_constants(p, spec, m, M, variant=GD_VARIANT,
                    q_convention=GRID_SUP, grad_norm=None):
    """Noise constants (C, C_G) of the Monte Carlo oracle at level m.

    Plain-descent variant: C = (Q_m/M)(2 V_G g*^2 + V) and
    C_G = 1 + 2 V_G Q_m/M, with g* the gradient norm at the truncated
    optimum. The accelerated variant doubles C's leading factor and scales
    the C_G excess by L^2. `q_convention` selects how Q_m is computed; the
    `index` convention reproduces worked bounds like C_G = 1.728 at
    (m, M) = (91, 250).
    """
    Q = q_factor(spec, m, convention=q_convention)
    V, V_G = p.noise.V, p.noise.V_G
    if grad_norm is None:
        grad_norm = gradient_norm_at_truncated_optimum(p, m, spec)
    g2 = grad_norm ** 2
    if variant == GD_VARIANT:
        C = (Q / M) * (2.0 * V_G * g2 + V)
        C_G = 1.0 + 2.0 * V_G * Q / M
    elif variant == AGD_VARIANT:
        C = (2.0 * Q / M) * (2.0 * V_G * g2 + V)
        C_G = 1.0 + 2.0 * (p.L ** 2) * V_G * Q / M
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return ErrorConstants(C=C, C_G=C_G, variant=variant)


@dataclass(frozen=True)
class SampleRequirement:
    """Outcome of inverting C_G for the accelerated step-size condition."""

    bound: float
    samples: int
    attainable: bool
    note: str = ""


def required_samples(spec, m, mu, L, V_G=1.0, q_convention=GRID_SUP):
    """Smallest M making the accelerated C_G small enough for step 1/L.

    The step rule alpha = min{1/L, mu^3/(60 C_G)^2} equals 1/L exactly when
    C_G <= sqrt(mu^3 L)/60. Since C_G >= 1 always, a bound below 1 is
    unattainable at any sample size and is flagged instead.
    """
    if not (0 < mu <= L):
        raise ValueError("need 0 < mu <= L")
    bound = np.sqrt(mu ** 3 * L) / 60.0
    if bound <= 1.0:
        return SampleRequirement(
            bound=float(bound), samples=0, attainable=False,
            note="theoretical step 1/L unattainable: C_G >= 1 > bound")
    Q = q_factor(spec, m, convention=q_convention)
    M = int(np.ceil(2.0 * (L ** 2) * V_G * Q / (bound - 1.0)))
    return SampleRequirement(bound=float(bound), samples=max(M, 1),
                             attainable=True)
