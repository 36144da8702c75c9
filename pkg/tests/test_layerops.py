import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cylbem.boundary import Boundary, ClosedCurve, GraphCurve, discretize
from cylbem.errors import TooCloseToBoundary
from cylbem.greens import GreenKernel, kernel_E
from cylbem.layerops import (assemble, eval_double, eval_single, jump_check, k_diagonal,
                             k_diagonal_curvature, layer_potentials)
from cylbem.model import CylinderModel
from cylbem.spectrum import eigensystem


def _adaptive_S(gk, curve, s0, dens):
    p = curve.point(np.array([s0]))

    def integrand(s):
        q = curve.point(np.array([s]))
        return float(kernel_E(gk, p, q)[0]) * float(curve.speed(np.array([s]))[0]) * dens(s)

    a, _ = quad(integrand, s0, s0 + math.pi, limit=200, epsabs=1e-13, epsrel=1e-13)
    b, _ = quad(integrand, s0 - math.pi, s0, limit=200, epsabs=1e-13, epsrel=1e-13)
    return a + b


def test_single_layer_of_one_against_adaptive(gk1, circle, circle_ops):
    ref = _adaptive_S(gk1, circle, 0.0, lambda s: 1.0)
    val = (circle_ops.S @ np.ones(circle_ops.n))[0]
    assert abs(val - ref) < 1e-10 * max(1.0, abs(ref))


def test_single_layer_smooth_density(gk1, circle, circle_ops):
    s = circle_ops.boundary.discs[0].params
    f = np.exp(np.cos(s))
    k = 37
    ref = _adaptive_S(gk1, circle, s[k], lambda t: math.exp(math.cos(t)))
    assert abs((circle_ops.S @ f)[k] - ref) < 1e-9


def test_convergence_in_n(gk1, circle):
    s0 = 0.0
    ref = _adaptive_S(gk1, circle, s0, lambda t: math.exp(math.sin(t)))
    errs = []
    for n in (16, 32):
        ops = assemble(gk1, discretize(circle, n))
        s = ops.boundary.discs[0].params
        errs.append(abs((ops.S @ np.exp(np.sin(s)))[0] - ref))
    assert errs[1] < errs[0] / 8 or errs[1] < 1e-12


def test_symmetry_closed(circle_ops):
    assert circle_ops.symmetry_residual() < 1e-10


def test_kstar_is_weighted_transpose(circle_ops):
    w = circle_ops.weights
    lhs = w[:, None] * circle_ops.Kstar
    rhs = (w[:, None] * circle_ops.K).T
    assert np.abs(lhs - rhs).max() < 1e-12 * np.abs(rhs).max()


def test_k_diagonal_matches_curvature(gk1):
    ellipse = ClosedCurve([0.0, 0.6], [], [math.pi, 0.0], [0.4])
    s = np.linspace(0, 2 * np.pi, 9, endpoint=False)
    rich, _ = k_diagonal(gk1, ellipse, s, 0.05)
    exact = k_diagonal_curvature(gk1, ellipse, s)
    assert np.abs(rich - exact).max() < 1e-6


def test_k_diagonal_on_sharp_bump(gk1):
    g = GraphCurve(math.pi / 2, -0.5, 0.0, 0.4)
    s = np.linspace(-1, 1, 21)
    rich, _ = k_diagonal(gk1, g, s, 0.05)
    exact = k_diagonal_curvature(gk1, g, s)
    assert np.abs(rich - exact).max() < 1e-5


def test_zero_density(circle_ops):
    z = np.zeros(circle_ops.n)
    assert not np.any(circle_ops.S @ z)
    pts = np.array([[0.0, math.pi], [1.0, 0.5]])
    out = layer_potentials(circle_ops.gk, circle_ops.boundary, z, pts, ("S", "D"))
    assert not np.any(out["S"]) and not np.any(out["D"])


def test_linear_in_density(circle_ops, rng):
    f, g = rng.normal(size=(2, circle_ops.n))
    pts = np.array([[0.8, 1.0], [0.0, math.pi + 0.2]])
    bd, gk = circle_ops.boundary, circle_ops.gk
    lhs = eval_single(gk, bd, 2 * f - g, pts)
    rhs = 2 * eval_single(gk, bd, f, pts) - eval_single(gk, bd, g, pts)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_potentials_solve_homogeneous_equation(circle_ops):
    # (Delta + V) u = 0 off the curve, checked by central differences
    bd, gk = circle_ops.boundary, circle_ops.gk
    s = bd.discs[0].params
    f = 1 + np.cos(s)
    h = 1e-3
    p = np.array([1.2, math.pi + 0.4])
    st5 = p + h * np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]])
    for ev in (eval_single, eval_double):
        u = ev(gk, bd, f, st5)
        lap = (u[1] + u[2] + u[3] + u[4] - 4 * u[0]) / h**2
        assert abs(-lap + 1.0 * u[0]) < 1e-5


def test_too_close(circle_ops):
    p = circle_ops.boundary.nodes[:1] * 1.0
    with pytest.raises(TooCloseToBoundary):
        eval_single(circle_ops.gk, circle_ops.boundary, np.ones(circle_ops.n), p)


def test_jump_relations_small(circle_ops_128):
    s = circle_ops_128.boundary.discs[0].params
    f = np.exp(np.cos(s))
    rows = jump_check(circle_ops_128, f, (4e-3, 2e-3))
    last = [r for r in rows if r["t"] == 2e-3]
    assert max(r["limit_error"] for r in last) < 1e-4
    assert min(r["order"] for r in last) > 0.9


def test_strip_decay(strip_ops, strip):
    # entries of S far from the diagonal decay like exp(-sqrt(lambda_0) |dx|)
    gk = strip[3]
    bd = strip_ops.boundary
    blk = bd.block(0)
    x = bd.nodes[blk, 0]
    i = blk.start + int(np.argmin(np.abs(x + 15)))
    js = [blk.start + int(np.argmin(np.abs(x - t))) for t in (0.0, 10.0)]
    a, b = (abs(strip_ops.S[i, j] / bd.weights[j]) for j in js)
    rate = math.log(a / b) / (bd.nodes[js[1], 0] - bd.nodes[js[0], 0])
    assert rate == pytest.approx(math.sqrt(gk.lam0), rel=1e-3)


def test_strip_skew_small_in_bilinear_form(strip_ops):
    # the product quadrature is not entrywise symmetric on graph curves,
    # but the form <S f, g> is for smooth data
    bd = strip_ops.boundary
    x = bd.nodes[:, 0]
    f = np.exp(-x**2 / 4)
    g = np.exp(-(x - 1)**2 / 4) * np.where(bd.curve_index == 0, 1.0, -0.5)
    w = bd.weights
    a = np.sum(w * g * (strip_ops.S @ f))
    b = np.sum(w * f * (strip_ops.S @ g))
    assert abs(a - b) < 1e-7 * abs(a)


@given(st.floats(0.2, 0.45), st.floats(-1.0, 1.0))
@settings(max_examples=8, deadline=None)
def test_double_layer_of_one_interior(r, x0):
    gk = _gk_cached()
    c = ClosedCurve.circle((x0, math.pi), r)
    ops = assemble(gk, discretize(c, 64))
    one = np.ones(ops.n)
    jump = (0.5 * np.eye(ops.n) + ops.K) @ one - (-0.5 * np.eye(ops.n) + ops.K) @ one
    assert np.allclose(jump, 1.0, atol=1e-12)
    # with V > 0 the double layer of 1 stays strictly between its one-sided limits
    assert np.all(np.abs(ops.K @ one) < 0.5)


_GK = []


def _gk_cached():
    if not _GK:
        _GK.append(GreenKernel(eigensystem(CylinderModel())))
    return _GK[0]
