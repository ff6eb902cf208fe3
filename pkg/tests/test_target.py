"""Benchmark target: closed form, kinks, and the shipped golden expansion."""

import numpy as np
import pytest

from chaos_descent.basis import analyze, make_basis
from chaos_descent.target import (BENCHMARK_LEVEL, BenchmarkTarget,
                                  benchmark_expansion, inner_expression,
                                  piecewise_gauss_analyze, target_kinks,
                                  target_squared_norm, target_value)

# Frozen values computed by a kink-split composite Gauss-Legendre pipeline,
# cross-checked at two panel counts agreeing to ~5e-16.
TRIG_S = 0.09535107575812761
TRIG_NORM_SQ = 0.09535107780582695
TRIG_R91_SQ = 3.50503825597504e-07
LEG_S = 0.03867824607959636
LEG_NORM_SQ = 0.03867824610217027
KINKS = (-2.922281309873014, -0.21931134371677977,
         1.2801263753706187, 1.8614662782191744)


def test_target_special_points():
    # sin(0) = sin(pi) = 0 collapses the expression to |4/5 + 1/4 - 1|
    assert target_value(0.0) == pytest.approx(0.05, abs=1e-14)
    assert target_value(np.pi) == pytest.approx(0.05, abs=1e-14)
    assert target_value(-np.pi) == pytest.approx(0.05, abs=1e-14)


def test_target_vectorized_matches_scalar():
    t = BenchmarkTarget()
    pts = np.linspace(-3, 3, 101)
    vals = t(pts)
    assert vals.shape == (101,)
    for p, v in zip(pts[::10], vals[::10]):
        assert v == pytest.approx(target_value(float(p)), abs=1e-15)
    assert np.all(vals >= 0.0)


def test_kink_locations():
    kinks = target_kinks()
    assert len(kinks) == 4
    assert np.allclose(kinks, KINKS, atol=1e-12)
    for k in kinks:
        assert abs(inner_expression(k)) < 1e-13
        # the absolute value really kinks there: slopes differ across it
        h = 1e-5
        left = (target_value(k) - target_value(k - h)) / h
        right = (target_value(k + h) - target_value(k)) / h
        assert abs(left - right) > 0.1


@pytest.mark.parametrize("family,s,norm_sq", [
    ("trigonometric", TRIG_S, TRIG_NORM_SQ),
    ("legendre", LEG_S, LEG_NORM_SQ),
])
def test_golden_expansion_energy(family, s, norm_sq):
    u = benchmark_expansion(family)
    assert u.level == BENCHMARK_LEVEL
    assert float(np.sum(u.coeffs ** 2)) == pytest.approx(s, rel=1e-13)
    # coefficient energy sits strictly below the function's squared norm
    assert target_squared_norm(family) == pytest.approx(norm_sq, rel=1e-10)
    assert float(np.sum(u.coeffs ** 2)) < target_squared_norm(family)


def test_golden_remainder_at_91():
    u = benchmark_expansion("trigonometric")
    tail_sq = float(np.sum(u.coeffs[92:] ** 2))
    assert tail_sq == pytest.approx(TRIG_R91_SQ, rel=1e-12)
    assert u.remainder_norm(91) ** 2 == pytest.approx(TRIG_R91_SQ, rel=1e-12)


@pytest.mark.parametrize("family", ("trigonometric", "legendre"))
def test_coefficients_decay_slowly(family):
    u = benchmark_expansion(family)
    for m in range(0, 65):
        assert u.remainder_norm(m) > 0.0


def test_piecewise_analyze_refinement_agrees():
    a = piecewise_gauss_analyze(target_value, 48, "trigonometric",
                                panels=256)
    b = piecewise_gauss_analyze(target_value, 48, "trigonometric",
                                panels=384)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-13
    golden = benchmark_expansion("trigonometric")
    assert np.max(np.abs(a.coeffs - golden.coeffs[:49])) < 1e-13


def test_default_quadrature_reproduces_golden_head():
    # 1024-node trapezoid aliases only the (tiny) tail onto levels <= 91
    spec = make_basis("trigonometric")
    head = analyze(BenchmarkTarget(), 91, spec)
    golden = benchmark_expansion("trigonometric")
    assert np.max(np.abs(head.coeffs - golden.coeffs[:92])) < 1e-5


def test_values_at_nodes_synthesizes_golden():
    spec = make_basis("trigonometric")
    t = BenchmarkTarget()
    vals = t.values_at_nodes(spec)
    assert vals.shape == spec.nodes.shape
    assert not vals.flags.writeable
    # same spec object -> cached array identity
    assert t.values_at_nodes(spec) is vals
    # the level-512 synthesis tracks the closed form up to its sup-norm tail
    assert np.max(np.abs(vals - t(spec.nodes))) < 1e-3
