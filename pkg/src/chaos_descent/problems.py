"""Built-in objectives and their solution-side quantities.

Every problem is a `ProblemSpec`: a deterministic gradient map, a stochastic
gradient sampler with its noise constants, the convexity constants (mu, L),
and -- when known -- the optimum both as a closed-form evaluable and as a
benchmark expansion per basis family.

Built-ins:

* `make_quadratic(mu, L, target)`: two decoupled scalar quadratics
  (mu/2)(x - x*)^2 + (L/2)(y - x*)^2 sharing the target as optimum. The
  halves make the strong-convexity and Lipschitz constants equal mu and L
  exactly, so every step-size and rate formula applies verbatim.
* `make_noisy_quadratic(mu, L, target)`: same objective plus v(x + y) with
  v ~ U[-1,1], giving per-component gradient noise of variance 1/3.
* `make_coupled_quadratic(a, target)`: f = a(theta)(x - x*)^2 / 2 with a
  strictly positive weight. Its coefficient-space Hessian is the Gram matrix
  of a(theta) B_i B_j -- not diagonal -- so truncated optima genuinely
  differ from projected optima.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .basis import CoefficientVector, FieldVector, project
from .target import BenchmarkTarget

INNER_SOLVE_TOL = 1e-12
INNER_SOLVE_CAP = 200_000


class ConfigurationError(ValueError):
    """Problem parameters violate their preconditions."""


@dataclass(frozen=True)
class NoiseModel:
    """Second-moment bound E_v |grad F|^2 <= V + V_G |grad f|^2 pointwise."""

    V: float
    V_G: float

    def __post_init__(self):
        if self.V < 0:
            raise ConfigurationError("V must be nonnegative")
        if self.V_G < 1:
            raise ConfigurationError("V_G must be at least 1")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """An expectation-minimization objective over fields of theta.

    `grad_f(xvals, theta)` is the deterministic gradient evaluated pointwise
    ((n, q) values at n points). `grad_F(xvals, theta, v)` adds the sampled
    noise; `sample_v(rng, n)` draws the noise variables. `grad_f_nodes`
    evaluates the deterministic gradient on a full quadrature rule and may
    substitute a band-limited representation of reference data so that the
    rule integrates it exactly; by default it simply calls `grad_f`.
    """

    name: str
    q: int
    mu: float
    L: float
    noise: NoiseModel
    grad_f: callable
    grad_F: callable
    sample_v: callable
    optimum: callable = None
    optimum_expansion: callable = None
    grad_f_nodes: callable = None
    weight: callable = None

    def __post_init__(self):
        if not (0 < self.mu <= self.L):
            raise ConfigurationError("need 0 < mu <= L")
        if self.grad_f_nodes is None:
            object.__setattr__(
                self, "grad_f_nodes",
                lambda xvals, spec: self.grad_f(xvals, spec.nodes))

    @property
    def kappa(self):
        return self.L / self.mu


def make_paper_target():
    """The benchmark target x*(theta) as an evaluable object."""
    return BenchmarkTarget()


def _target_adapters(target):
    """Pointwise evaluator, per-family expansion, per-rule node values."""
    pointwise = target
    if hasattr(target, "expansion"):
        expansion = target.expansion
    else:
        expansion = None
    if hasattr(target, "values_at_nodes"):
        at_nodes = target.values_at_nodes
    else:
        at_nodes = lambda spec: np.asarray(pointwise(spec.nodes))
    return pointwise, expansion, at_nodes


def make_quadratic(mu, L, target):
    """Two decoupled quadratics with optimum (x*, x*) and constants mu, L."""
    if not (0 < mu <= L):
        raise ConfigurationError("need 0 < mu <= L")
    pointwise, expansion, at_nodes = _target_adapters(target)
    scale = np.array([mu, L])

    def grad_f(xvals, theta):
        return scale * (xvals - pointwise(theta)[:, None])

    def grad_f_nodes(xvals, spec):
        return scale * (xvals - at_nodes(spec)[:, None])

    def grad_F(xvals, theta, v):
        return grad_f(xvals, theta)

    def sample_v(rng, n):
        return np.zeros(n)

    def optimum(theta):
        vals = np.asarray(pointwise(theta))
        return np.stack([vals, vals], axis=-1)

    def optimum_expansion(spec):
        if expansion is None:
            return None
        c = expansion(spec.family)
        return FieldVector(spec, (c, c))

    return ProblemSpec(
        name="quadratic", q=2, mu=float(mu), L=float(L),
        noise=NoiseModel(0.0, 1.0),
        grad_f=grad_f, grad_F=grad_F, sample_v=sample_v,
        optimum=optimum, optimum_expansion=optimum_expansion,
        grad_f_nodes=grad_f_nodes)


def make_noisy_quadratic(mu, L, target):
    """The decoupled quadratic plus v(x + y), v ~ U[-1, 1]: V=1/3, V_G=1."""
    base = make_quadratic(mu, L, target)

    def grad_F(xvals, theta, v):
        return base.grad_f(xvals, theta) + np.asarray(v)[:, None]

    def sample_v(rng, n):
        return rng.uniform(-1.0, 1.0, n)

    return ProblemSpec(
        name="noisy-quadratic", q=2, mu=base.mu, L=base.L,
        noise=NoiseModel(1.0 / 3.0, 1.0),
        grad_f=base.grad_f, grad_F=grad_F, sample_v=sample_v,
        optimum=base.optimum, optimum_expansion=base.optimum_expansion,
        grad_f_nodes=base.grad_f_nodes)


def make_coupled_quadratic(a, target, bounds=None, domain=(-np.pi, np.pi)):
    """f = a(theta)(x - x*)^2 / 2 with strictly positive weight a.

    `bounds` supplies (a_min, a_max); when omitted they are estimated on a
    dense grid over `domain`. mu = a_min and L = a_max.
    """
    if bounds is None:
        grid = np.linspace(domain[0], domain[1], 40001)
        avals = np.asarray(a(grid), dtype=np.float64)
        bounds = (float(avals.min()), float(avals.max()))
    a_min, a_max = bounds
    if a_min <= 0:
        raise ConfigurationError("the weight a(theta) must be positive")
    pointwise, expansion, at_nodes = _target_adapters(target)

    def grad_f(xvals, theta):
        res = xvals[:, 0] - np.asarray(pointwise(theta))
        return (np.asarray(a(theta)) * res)[:, None]

    def grad_f_nodes(xvals, spec):
        res = xvals[:, 0] - at_nodes(spec)
        return (np.asarray(a(spec.nodes)) * res)[:, None]

    def grad_F(xvals, theta, v):
        return grad_f(xvals, theta)

    def sample_v(rng, n):
        return np.zeros(n)

    def optimum(theta):
        return np.asarray(pointwise(theta))[:, None]

    def optimum_expansion(spec):
        if expansion is None:
            return None
        return FieldVector(spec, (expansion(spec.family),))

    return ProblemSpec(
        name="coupled-quadratic", q=1, mu=a_min, L=a_max,
        noise=NoiseModel(0.0, 1.0),
        grad_f=grad_f, grad_F=grad_F, sample_v=sample_v,
        optimum=optimum, optimum_expansion=optimum_expansion,
        grad_f_nodes=grad_f_nodes, weight=a)


def _coupled_system(p, m, spec):
    """Gram matrix and right-hand side of the level-m optimality system."""
    B = kernels.basis_matrix(spec.family_code, spec.nodes, m)
    avals = np.asarray(p.weight(spec.nodes))
    wa = spec.weights * avals
    A = B.T @ (wa[:, None] * B)
    tvals = p.optimum_expansion(spec).components[0]
    tnodes = kernels.synthesize_values(
        spec.family_code, spec.nodes, tvals.coeffs.reshape(-1, 1))[:, 0]
    b = B.T @ (wa * tnodes)
    return A, b


def truncated_optimum(p, m, spec):
    """Minimizer of f over expansions of level m, as a FieldVector.

    Diagonal built-ins: the projected optimum. The coupled quadratic: a
    dense linear solve of the level-m optimality system. Anything else:
    exact-gradient descent at level m run to gradient norm <= 1e-12.
    """
    if m < 0:
        raise ValueError("level must be nonnegative")
    if p.name in ("quadratic", "noisy-quadratic"):
        u = p.optimum_expansion(spec)
        return FieldVector(spec, tuple(project(c, m) for c in u.components))
    if p.name == "coupled-quadratic":
        A, b = _coupled_system(p, m, spec)
        return FieldVector(spec, (CoefficientVector(np.linalg.solve(A, b)),))
    return _descend_to_optimum(p, m, spec)


def _descend_to_optimum(p, m, spec):
    from .oracle import _exact_descent_matrix
    U = np.zeros((m + 1, p.q))
    step = 2.0 / (p.mu + p.L)
    for _ in range(INNER_SOLVE_CAP):
        D = _exact_descent_matrix(p, U, m, spec)
        if np.linalg.norm(D) <= INNER_SOLVE_TOL:
            return FieldVector.from_matrix(spec, U)
        U = U - step * D
    raise RuntimeError(f"inner solve did not reach {INNER_SOLVE_TOL:g} "
                       f"within {INNER_SOLVE_CAP} iterations")


def epsilon_condition_number(u, eps):
    """Smallest level m with remainder_norm(u, m) < eps.

    Returns infinity when no stored level qualifies.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    for m in range(u.level + 1):
        if u.remainder_norm(m) < eps:
            return m
    return float("inf")


@dataclass(frozen=True)
class ConditionReport:
    """Condition numbers of a problem: global, per-level, and per-epsilon."""

    kappa: float
    kappa_m: tuple
    kappa_eps: dict


def _level_extremes(p, m, spec):
    """Smallest/largest eigenvalue of the level-m coefficient Hessian."""
    if p.name in ("quadratic", "noisy-quadratic"):
        return p.mu, p.L
    if p.name == "coupled-quadratic":
        A, _ = _coupled_system(p, m, spec)
        vals = np.linalg.eigvalsh(A)
        return float(vals[0]), float(vals[-1])
    return _power_iteration_extremes(p, m, spec)


def _power_iteration_extremes(p, m, spec, iters=200, h=1e-6, seed=0):
    from .oracle import _exact_descent_matrix
    rng = np.random.default_rng(seed)
    base = np.zeros((m + 1, p.q))

    def hessvec(V):
        Dp = _exact_descent_matrix(p, base + h * V, m, spec)
        Dm = _exact_descent_matrix(p, base - h * V, m, spec)
        return (Dp - Dm) / (2.0 * h)

    def top_eig(apply_op):
        V = rng.standard_normal((m + 1, p.q))
        V /= np.linalg.norm(V)
        lam = 0.0
        for _ in range(iters):
            W = apply_op(V)
            lam = float(np.vdot(V, W))
            nrm = np.linalg.norm(W)
            if nrm == 0.0:
                return 0.0
            V = W / nrm
        return lam

    lmax = top_eig(hessvec)
    shifted = top_eig(lambda V: lmax * V - hessvec(V))
    return lmax - shifted, lmax


def condition_report(p, spec, levels, eps_values=()):
    """Assemble a `ConditionReport` over the given levels."""
    kappa_m = []
    for m in levels:
        lo, hi = _level_extremes(p, m, spec)
        kappa_m.append(hi / lo)
    kappa_eps = {}
    if eps_values:
        u = p.optimum_expansion(spec)
        flat = CoefficientVector(np.sqrt(
            sum(np.pad(c.coeffs, (0, u.level - c.level)) ** 2
                for c in u.components)))
        for eps in eps_values:
            kappa_eps[eps] = epsilon_condition_number(flat, eps)
    return ConditionReport(kappa=p.kappa, kappa_m=tuple(kappa_m),
                           kappa_eps=kappa_eps)
