"""The benchmark target field and its high-accuracy expansions.

The target is x*(t) = |4/5 + exp(sin t)/4 - cosh(sin^2 t)| * (1 + sin 2t).
The absolute value introduces kinks where the inner expression crosses zero,
which makes the basis coefficients decay slowly -- the property that makes
this target a good stress case for truncated expansions.

Because of the kinks, plain global quadrature converges poorly. The analysis
here splits the domain at the kinks and applies composite Gauss-Legendre
panels inside each smooth piece, which recovers near machine accuracy.
Expansions to level 512 are shipped as CSV data files; `benchmark_expansion`
loads them, and `scripts/generate_target_data.py` regenerates them.
"""

from functools import lru_cache
from importlib import resources

import numpy as np

from . import kernels
from .basis import CoefficientVector, _DOMAINS, _FAMILY_CODES

BENCHMARK_LEVEL = 512


def inner_expression(theta):
    """The signed expression inside the absolute value."""
    s = np.sin(theta)
    return 0.8 + 0.25 * np.exp(s) - np.cosh(s * s)


def target_value(theta):
    """x*(theta), vectorized; the exact closed form."""
    theta = np.asarray(theta, dtype=np.float64)
    return np.abs(inner_expression(theta)) * (1.0 + np.sin(2.0 * theta))


def _bisect(fn, a, b):
    """Root of a sign change on [a, b], refined to machine precision."""
    fa = fn(a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fa < 0) == (fm < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


@lru_cache(maxsize=None)
def target_kinks(lo=-np.pi, hi=np.pi):
    """Points in [lo, hi] where the inner expression changes sign."""
    grid = np.linspace(lo, hi, 40001)
    vals = inner_expression(grid)
    roots = []
    for a, b, va, vb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if va == 0.0:
            roots.append(float(a))
        elif va * vb < 0.0:
            roots.append(_bisect(inner_expression, float(a), float(b)))
    return tuple(roots)


def piecewise_gauss_analyze(fn, level, family, panels=3072, gl_order=16,
                            breaks=None):
    """Expansion coefficients of `fn` by kink-aware composite quadrature.

    The domain of `family` is split at `breaks` (default: the target's
    kinks), each smooth piece is covered with Gauss-Legendre panels whose
    count is proportional to the piece length (`panels` across the whole
    domain), and the projections are accumulated against the probability
    measure.
    """
    lo, hi = _DOMAINS[family]
    code = _FAMILY_CODES[family]
    if breaks is None:
        breaks = target_kinks(lo, hi)
    xg, wg = np.polynomial.legendre.leggauss(gl_order)
    edges = [lo] + [b for b in breaks if lo < b < hi] + [hi]
    density = panels / (hi - lo)
    total = np.zeros(level + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        npan = max(4, int(np.ceil((b - a) * density)))
        bounds = np.linspace(a, b, npan + 1)
        mid = 0.5 * (bounds[:-1] + bounds[1:])
        half = 0.5 * (bounds[1:] - bounds[:-1])
        nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        wts = (half[:, None] * wg[None, :]).ravel() / (hi - lo)
        vals = np.asarray(fn(nodes), dtype=np.float64).reshape(-1, 1)
        for s in range(0, nodes.size, 8192):
            sl = slice(s, s + 8192)
            total += kernels.accumulate_projection(
                code, nodes[sl], vals[sl], wts[sl], level)[:, 0]
    return CoefficientVector(total)


def target_squared_norm(family):
    """Squared probability-measure norm of x* over the family's domain."""
    moment = piecewise_gauss_analyze(
        lambda t: target_value(t) ** 2, 0, family, panels=3072)
    return float(moment.coeffs[0])


def _data_filename(family):
    return f"target_{family}_{BENCHMARK_LEVEL}.csv"


@lru_cache(maxsize=None)
def benchmark_expansion(family):
    """The shipped level-512 expansion of x* as a `CoefficientVector`."""
    path = resources.files("chaos_descent").joinpath(
        "data", _data_filename(family))
    with path.open("r", encoding="utf-8") as fh:
        rows = np.loadtxt(fh, delimiter=",", skiprows=1)
    idx = rows[:, 0].astype(int)
    if not np.array_equal(idx, np.arange(BENCHMARK_LEVEL + 1)):
        raise ValueError(f"corrupt benchmark data for {family}")
    return CoefficientVector(rows[:, 1])


class BenchmarkTarget:
    """Callable x*(theta) carrying its high-accuracy expansions.

    Calling the object evaluates the closed form pointwise (cheap, suited to
    sampled points). `expansion(family)` returns the level-512 coefficients;
    `values_at_nodes(spec)` synthesizes that expansion on a quadrature rule
    and caches the result, so quadrature paths see a band-limited function
    their rule integrates exactly.
    """

    def __init__(self):
        self._node_cache = {}

    def __call__(self, theta):
        return target_value(theta)

    def expansion(self, family):
        return benchmark_expansion(family)

    def values_at_nodes(self, spec):
        key = id(spec)
        if key not in self._node_cache:
            coeffs = benchmark_expansion(spec.family).coeffs
            vals = kernels.synthesize_values(
                spec.family_code, spec.nodes, coeffs.reshape(-1, 1))
            vals = vals[:, 0]
            vals.setflags(write=False)
            self._node_cache[key] = (spec, vals)
        return self._node_cache[key][1]
