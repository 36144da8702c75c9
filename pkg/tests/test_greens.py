import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cylbem.errors import CoincidentPoints
from cylbem.greens import (GreenKernel, image_sum_oracle, kernel_dE, kernel_E, kernel_gradE,
                           kummer_mode_sum, regular_part, smooth_bump, verify_fundamental)
from cylbem.model import CylinderModel
from cylbem.spectrum import eigensystem

TWO_PI = 2 * math.pi


def _pairs(rng, n, sep=0.1, xr=3.0):
    p = np.column_stack([rng.uniform(-xr, xr, 4 * n), rng.uniform(0, TWO_PI, 4 * n)])
    q = np.column_stack([rng.uniform(-xr, xr, 4 * n), rng.uniform(0, TWO_PI, 4 * n)])
    dth = (q[:, 1] - p[:, 1] + math.pi) % TWO_PI - math.pi
    keep = np.hypot(q[:, 0] - p[:, 0], dth) >= sep
    return p[keep][:n], q[keep][:n]


@pytest.fixture(scope="module")
def gk_var():
    return GreenKernel(eigensystem(CylinderModel(fourier_cos=(1.0, 1.0))))


def test_image_sum_oracle(gk1, rng):
    p, q = _pairs(rng, 500)
    E = kernel_E(gk1, p, q)
    ref = image_sum_oracle(1.0, TWO_PI, p, q)
    assert np.max(np.abs(E - ref) / ref) < 1e-10


def test_kummer_accelerated_mode_sum(gk1, rng):
    p, q = _pairs(rng, 20)
    ref = np.array([kummer_mode_sum(1.0, TWO_PI, a, b) for a, b in zip(p, q)]).ravel()
    assert np.max(np.abs(kernel_E(gk1, p, q) - ref) / ref) < 1e-9


def test_gradient_against_bessel_derivative(gk1, rng):
    p, q = _pairs(rng, 200)
    _, g = kernel_gradE(gk1, p, q)
    _, gref = image_sum_oracle(1.0, TWO_PI, p, q, grad=True)
    assert np.max(np.abs(g - gref)) < 1e-9


def test_gradient_against_finite_differences(gk_var, rng):
    p, q = _pairs(rng, 200, sep=0.2)
    _, g = kernel_gradE(gk_var, p, q)
    h = 1e-5
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (kernel_E(gk_var, p, q + e) - kernel_E(gk_var, p, q - e)) / (2 * h)
        assert np.max(np.abs(fd - g[:, k]) / np.maximum(np.abs(g[:, k]), 1e-3)) < 1e-6


def test_directional_derivative(gk1):
    p = np.array([[0.0, 1.0]])
    q = np.array([[0.4, 1.3]])
    d = np.array([[0.6, 0.8]])
    _, g = kernel_gradE(gk1, p, q)
    assert kernel_dE(gk1, p, q, d)[0] == pytest.approx(float(g[0] @ d[0]), rel=1e-14)


def test_axial_derivative_parity(gk1):
    p = np.zeros((1, 2))
    xs = np.linspace(0.1, 3, 12)
    q1 = np.column_stack([xs, np.zeros_like(xs)])
    q2 = np.column_stack([-xs, np.zeros_like(xs)])
    _, g1 = kernel_gradE(gk1, p, q1)
    _, g2 = kernel_gradE(gk1, p, q2)
    assert np.allclose(g1[:, 0], -g2[:, 0], rtol=1e-13, atol=0)


@given(st.floats(-4, 4), st.floats(0, TWO_PI), st.floats(-4, 4), st.floats(0, TWO_PI))
@settings(max_examples=100, deadline=None)
def test_symmetric_and_positive(gk_var, x1, t1, x2, t2):
    p = np.array([[x1, t1]])
    q = np.array([[x2, t2]])
    dth = (t2 - t1 + math.pi) % TWO_PI - math.pi
    if math.hypot(x2 - x1, dth) < 1e-3:
        return
    a, b = kernel_E(gk_var, p, q)[0], kernel_E(gk_var, q, p)[0]
    assert a > 0
    assert abs(a - b) <= 1e-12 * abs(a)


def test_positive_at_many_pairs(gk_var, rng):
    p, q = _pairs(rng, 10000, sep=1e-3, xr=6.0)
    assert np.all(kernel_E(gk_var, p, q) > 0)


def test_exponential_decay(gk1):
    # ground mode dominates far out: E(0, x) e^{x} tends to a constant
    xs = np.array([20.0, 25.0, 30.0])
    E = kernel_E(gk1, np.zeros((3, 2)), np.column_stack([xs, np.zeros(3)]))
    c = E * np.exp(gk1.tail_bound_rate * xs)
    assert abs(c[2] / c[1] - 1) < 1e-4
    assert np.all(E <= 1.0 * np.exp(-xs))


def test_cutoff_doubling_far_branch(rng):
    base = CylinderModel(fourier_cos=(1.0, 1.0))
    dbl = CylinderModel(fourier_cos=(1.0, 1.0), mode_cutoff=128)
    a, b = GreenKernel(eigensystem(base)), GreenKernel(eigensystem(dbl))
    p, q = _pairs(rng, 400, xr=4.0)
    far = np.abs(p[:, 0] - q[:, 0]) >= 0.5
    assert np.max(np.abs(kernel_E(a, p[far], q[far]) - kernel_E(b, p[far], q[far]))) < 1e-12


def test_coincident_points(gk1):
    with pytest.raises(CoincidentPoints):
        kernel_E(gk1, np.array([[0.0, 1.0]]), np.array([[0.0, 1.0 + TWO_PI]]))


def test_regular_part_is_smooth(gk1):
    p = np.array([[0.0, 1.0]])
    r = np.geomspace(1e-6, 1e-2, 5)
    q = np.column_stack([r, np.ones_like(r)])
    R = regular_part(gk1, p, q)
    assert np.ptp(R) < 1e-4
    with pytest.raises(ValueError):
        regular_part(gk1, p, np.array([[1.0, 1.0]]))


def test_fundamental_far_bump(gk1, unit_model):
    p = np.array([0.0, 1.0])
    assert verify_fundamental(gk1, unit_model, p, (3.0, 1.0), 1.5, 1 / 64) <= 1e-8


def test_fundamental_centered_bump(gk1, unit_model):
    p = np.array([0.0, 1.5])
    r64 = verify_fundamental(gk1, unit_model, p, p, 1.5, 1 / 64)
    r128 = verify_fundamental(gk1, unit_model, p, p, 1.5, 1 / 128)
    assert r64 <= 1e-4 and r128 <= 1e-5
    assert r128 < r64


def test_fundamental_variable_potential(gk_var):
    model = CylinderModel(fourier_cos=(1.0, 1.0))
    p = np.array([0.0, 2.0])
    assert verify_fundamental(gk_var, model, p, p, 1.5, 1 / 64) <= 1e-4


def test_bump_pieces():
    psi, nl = smooth_bump((0.0, 0.0), 1.0)
    q = np.array([[0.2, -0.1], [0.5, 0.4]])
    h = 1e-4
    lap = sum((psi(q + e) - 2 * psi(q) + psi(q - e)) / h**2 for e in (np.array([h, 0]), np.array([0, h])))
    assert np.allclose(nl(q), -lap, atol=1e-5)
    assert psi(np.array([[0.0, 0.0]]))[0] == pytest.approx(1.0)
