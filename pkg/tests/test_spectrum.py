import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cylbem.errors import NonPositiveGroundState
from cylbem.model import CylinderModel
from cylbem.spectrum import circle_green, eigensystem, indicial_resolvent_norm


def test_constant_potential_eigenvalues(unit_spec):
    assert np.allclose(unit_spec.mu[:7], [1, 2, 2, 5, 5, 10, 10], atol=1e-12)


def test_orthonormal_and_resolved(unit_model):
    spec = eigensystem(CylinderModel(fourier_cos=(1.0, 0.6, 0.2)))
    U = spec.vectors
    assert np.abs(U.conj().T @ U - np.eye(U.shape[1])).max() < 1e-12
    assert np.all(spec.residuals <= 1e-8 * np.maximum(1, spec.mu[:spec.residuals.size]))


def test_ground_state_must_be_positive():
    with pytest.raises(NonPositiveGroundState):
        eigensystem(CylinderModel(fourier_cos=(0.0,)))


def test_mathieu_ground_state():
    # -u'' + 2q cos(2 theta) u on a circle of length pi is Mathieu's equation; a_0(q = 1) = -0.4551386...
    spec = eigensystem(CylinderModel(circumference=math.pi, fourier_cos=(1.0, 2.0), mode_cutoff=16))
    assert abs(spec.mu0 - (1 - 0.45513860410)) < 1e-9


@given(st.lists(st.floats(min_value=-0.4, max_value=0.4), min_size=2, max_size=2),
       st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=25, deadline=None)
def test_monotone_in_potential(coefs, shift):
    # V2 = V1 + shift >= V1 pointwise
    v1 = CylinderModel(fourier_cos=(1.0, *coefs), mode_cutoff=12)
    v2 = CylinderModel(fourier_cos=(1.0 + shift, *coefs), mode_cutoff=12)
    m1, m2 = eigensystem(v1).mu, eigensystem(v2).mu
    assert np.all(m1 <= m2 + 1e-10)


def test_resolvent_norms(unit_spec):
    r = indicial_resolvent_norm(unit_spec, 0.0)
    assert r["l2_norm"] == pytest.approx(1.0)
    sup = max(indicial_resolvent_norm(unit_spec, t)["l2_to_h2_norm"] for t in np.arange(-20, 20.5, 0.5))
    spec2 = eigensystem(CylinderModel(mode_cutoff=128))
    sup2 = max(indicial_resolvent_norm(spec2, t)["l2_to_h2_norm"] for t in np.arange(-20, 20.5, 0.5))
    assert np.isfinite(sup) and abs(sup - sup2) <= 0.01 * sup


def test_circle_green_closed_form(unit_spec):
    # V = 1, tau = 0: g(t, t') = cosh(pi - |t - t'|) / (2 sinh pi)
    d = np.linspace(0.05, 2 * np.pi - 0.05, 9)
    g = circle_green(unit_spec, 0.0, d, 0.0)
    assert np.allclose(g, np.cosh(np.pi - d) / (2 * np.sinh(np.pi)), rtol=1e-13)


def test_circle_green_variable_potential_solves_ode():
    model = CylinderModel(fourier_cos=(1.0, 0.5))
    spec = eigensystem(model)
    tau, t0 = 0.7, 1.1
    th = np.array([2.0, 3.0, 4.5])
    h = 1e-3
    g = lambda t: circle_green(spec, tau, t, t0)
    lap = -(g(th + h) - 2 * g(th) + g(th - h)) / h**2
    res = lap + (tau**2 + model.potential(th)) * g(th)
    assert np.abs(res).max() < 1e-5


def test_one_dimensional_derivative_jump(unit_spec):
    # d/dtheta g(theta, t0) drops by exactly 1 across theta = t0
    t0, eps = 1.3, 1e-7
    gp = circle_green(unit_spec, 0.8, t0, t0 + eps, deriv=True)
    gm = circle_green(unit_spec, 0.8, t0, t0 - eps, deriv=True)
    assert abs(abs(gm - gp) - 1.0) < 1e-6
