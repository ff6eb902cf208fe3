"""Orthonormal basis families on a 1-D domain with a uniform measure.

Two families are provided, both orthonormal with respect to the uniform
probability measure on their domain:

* ``trigonometric`` on [-pi, pi]: index 0 -> 1, index 2k-1 -> sqrt(2) sin(k t),
  index 2k -> sqrt(2) cos(k t).
* ``legendre`` on [-1, 1]: index k -> sqrt(2k+1) P_k(t).

A `CoefficientVector` holds the coefficients of one scalar expansion; a
`FieldVector` bundles one coefficient vector per output component together
with the `BasisSpec` they are expressed in. Synthesis (coefficients to point
values), analysis (function to coefficients, by quadrature), projections and
remainders implement the usual l2 isometry: the 2-norm of the coefficients
equals the measure-weighted norm of the synthesized function.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels

TRIGONOMETRIC = "trigonometric"
LEGENDRE = "legendre"
FAMILIES = (TRIGONOMETRIC, LEGENDRE)

_FAMILY_CODES = {
    TRIGONOMETRIC: kernels.TRIGONOMETRIC_CODE,
    LEGENDRE: kernels.LEGENDRE_CODE,
}
_DOMAINS = {
    TRIGONOMETRIC: (-np.pi, np.pi),
    LEGENDRE: (-1.0, 1.0),
}

GRID_SUP = "grid_sup"
INDEX_CONVENTION = "index"
Q_CONVENTIONS = (GRID_SUP, INDEX_CONVENTION)

DEFAULT_NODES = 1024
BENCHMARK_NODES = 1 << 17


class DomainError(ValueError):
    """A point lies outside the basis domain."""


class QuadratureError(ValueError):
    """The quadrature rule cannot support the requested operation."""


def _readonly(arr):
    arr = np.asarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BasisSpec:
    """A basis family plus the quadrature rule used for inner products.

    `weights` are probability weights (they sum to 1), so quadrature sums
    approximate expectations under the uniform measure directly.
    """

    family: str
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def family_code(self):
        return _FAMILY_CODES[self.family]

    @property
    def domain(self):
        return _DOMAINS[self.family]

    def contains(self, theta):
        lo, hi = self.domain
        return bool(np.all((theta >= lo) & (theta <= hi)))

    def require_inside(self, theta):
        if not self.contains(theta):
            lo, hi = self.domain
            raise DomainError(f"point outside [{lo:.6g}, {hi:.6g}]")


def make_basis(family, nodes=DEFAULT_NODES):
    """Build a `BasisSpec` with an `nodes`-point quadrature rule.

    Trigonometric: the trapezoid rule over one full period (endpoint weights
    merge by periodicity), exact for trigonometric polynomials of frequency
    below `nodes`. Legendre: Gauss-Legendre, exact for polynomials of degree
    up to 2*nodes - 1.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown basis family {family!r}")
    if nodes < 2:
        raise QuadratureError("need at least 2 quadrature nodes")
    if family == TRIGONOMETRIC:
        pts = -np.pi + 2.0 * np.pi * np.arange(nodes) / nodes
        wts = np.full(nodes, 1.0 / nodes)
    else:
        pts, wts = np.polynomial.legendre.leggauss(nodes)
        wts = wts / 2.0
    return BasisSpec(family, _readonly(pts), _readonly(wts))


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Dense coefficients of one scalar expansion, indices 0..level."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.coeffs)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a nonempty 1-D array")
        object.__setattr__(self, "coeffs", arr)

    @property
    def level(self):
        return self.coeffs.size - 1

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def project(self, m):
        return project(self, m)

    def remainder_norm(self, m):
        return remainder_norm(self, m)


@dataclass(frozen=True, eq=False)
class FieldVector:
    """One `CoefficientVector` per output component, sharing one basis."""

    spec: BasisSpec
    components: tuple

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, CoefficientVector) else CoefficientVector(c)
            for c in self.components)
        if not comps:
            raise ValueError("a field needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def q(self):
        return len(self.components)

    @property
    def level(self):
        return max(c.level for c in self.components)

    def norm(self):
        return float(np.sqrt(sum(c.norm() ** 2 for c in self.components)))

    def as_matrix(self):
        """Stack components into a (level+1, q) array, zero-padding tails."""
        out = np.zeros((self.level + 1, self.q))
        for c, comp in enumerate(self.components):
            out[:comp.level + 1, c] = comp.coeffs
        return out

    @classmethod
    def from_matrix(cls, spec, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("expected a (level+1, q) array")
        return cls(spec, tuple(CoefficientVector(matrix[:, c])
                               for c in range(matrix.shape[1])))

    def project(self, m):
        return FieldVector(self.spec,
                           tuple(project(c, m) for c in self.components))

    def remainder_norm(self, m):
        return float(np.sqrt(sum(remainder_norm(c, m) ** 2
                                 for c in self.components)))


def evaluate_basis(spec, i, theta):
    """B_i at a single point."""
    if i < 0:
        raise ValueError("basis index must be nonnegative")
    spec.require_inside(theta)
    row = kernels.basis_matrix(spec.family_code, np.array([theta]), i)
    return float(row[0, i])


def synthesize(u, theta):
    """Evaluate a field at one point (returns a length-q vector) or at an
    array of points (returns an (n, q) array)."""
    u.spec.require_inside(theta)
    pts = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    vals = kernels.synthesize_values(u.spec.family_code, pts, u.as_matrix())
    return vals[0] if np.isscalar(theta) or np.ndim(theta) == 0 else vals


def project(u, m):
    """Keep entries 0..m; the result level is min(m, u.level)."""
    if m < 0:
        raise ValueError("projection level must be nonnegative")
    return CoefficientVector(u.coeffs[:min(m, u.level) + 1].copy())


def remainder_norm(u, m):
    """2-norm of the entries above index m."""
    if m < 0:
        raise ValueError("remainder level must be nonnegative")
    if m >= u.level:
        return 0.0
    return float(np.linalg.norm(u.coeffs[m + 1:]))


def analyze(fn, m, spec):
    """Coefficients 0..m of a function of theta via the quadrature in ``spec``.

    Refuses when the rule has fewer than 2(m+1) nodes, where aliasing of the
    unresolved tail onto the computed coefficients becomes severe.
    """
    if spec.nodes.size < 2 * (m + 1):
        raise QuadratureError(
            f"{spec.nodes.size} nodes cannot resolve level {m}; "
            f"need at least {2 * (m + 1)}")
    vals = np.asarray(fn(spec.nodes), dtype=np.float64).reshape(-1, 1)
    coeffs = kernels.accumulate_projection(
        spec.family_code, spec.nodes, vals, spec.weights, m)
    return CoefficientVector(coeffs[:, 0])


@lru_cache(maxsize=None)
def _grid_sup(family, m, grid_points=10001):
    lo, hi = _DOMAINS[family]
    grid = np.linspace(lo, hi, grid_points)
    B = kernels.basis_matrix(_FAMILY_CODES[family], grid, m)
    return float(np.max(np.einsum("ij,ij->i", B, B)))


def trig_q_closed_form(m):
    """Exact sup of sum B_i^2 for the trigonometric family.

    Complete sin/cos pairs contribute a constant 2 each; an unpaired sine
    contributes 2 sin^2 with sup 2. Hence m+1 for even m and m+2 for odd m.
    """
    return float(m + 1 if m % 2 == 0 else m + 2)


def q_factor(spec, m, convention=GRID_SUP):
    """sup over theta of sum_{i<=m} B_i(theta)^2.

    `grid_sup` evaluates the definition on a dense grid (>= 10^4 points).
    `index` returns Q_m = m, the convention some worked error-constant
    arithmetic is based on; it is exposed so those numbers can be reproduced
    exactly.
    """
    if m < 0:
        raise ValueError("level must be nonnegative")
    if convention == INDEX_CONVENTION:
        return float(m)
    if convention != GRID_SUP:
        raise ValueError(f"unknown Q convention {convention!r}")
    return _grid_sup(spec.family, m)
