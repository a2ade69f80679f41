import math

import numpy as np
import pytest

from chemofv.grid import GridSpec
from chemofv.references import barenblatt, barenblatt_exponents, barenblatt_radius, heat_cosine


@pytest.mark.parametrize("m, dim", [(2.0, 1), (3.0, 1), (2.0, 2)])
def test_barenblatt_exponents(m, dim):
    alpha, beta, k = barenblatt_exponents(m, dim)
    assert alpha == pytest.approx(dim / (dim * (m - 1) + 2))
    assert beta == pytest.approx(alpha / dim)
    assert k == pytest.approx(alpha * (m - 1) / (2 * m * dim))


def test_barenblatt_solves_pme_inside_support():
    # Finite-difference residual of u_t - (u^m)_xx at interior points.
    m, C, t = 2.0, 0.05, 0.02
    x = np.linspace(0.35, 0.65, 7)
    eps_t, eps_x = 1e-7, 1e-4
    u = lambda x, t: barenblatt(x, t, m, C, (0.5,))
    ut = (u(x, t + eps_t) - u(x, t - eps_t)) / (2 * eps_t)
    w = lambda x: u(x, t) ** m
    uxx = (w(x + eps_x) - 2 * w(x) + w(x - eps_x)) / eps_x**2
    assert np.all(u(x, t) > 0)
    np.testing.assert_allclose(ut, uxx, rtol=1e-5, atol=1e-6)


def test_barenblatt_support_and_mass():
    m, C = 2.0, 0.05
    r = barenblatt_radius(0.03, m, C, 1)
    x = np.linspace(0, 1, 200001)
    dx = x[1] - x[0]
    u = barenblatt(x, 0.03, m, C, (0.5,))
    assert u[np.abs(x - 0.5) > r + 1e-9].max() == 0.0
    assert u[np.abs(x - 0.5) < r - 1e-3].min() > 0
    m1 = u.sum() * dx
    m2 = barenblatt(x, 0.06, m, C, (0.5,)).sum() * dx
    assert m2 == pytest.approx(m1, rel=1e-4)


def test_barenblatt_2d_radial():
    U = barenblatt((np.array([0.6]), np.array([0.5])), 0.1, 2.0, 0.1, (0.5, 0.5))
    V = barenblatt((np.array([0.5]), np.array([0.4])), 0.1, 2.0, 0.1, (0.5, 0.5))
    assert U[0] == pytest.approx(V[0])


def test_heat_cosine_decay():
    g = GridSpec.interval(4, 2.0)
    u0 = heat_cosine(g, 0.0, 1.0, 0.5)
    u1 = heat_cosine(g, 0.3, 1.0, 0.5, d=2.0)
    (x,) = g.centers()
    np.testing.assert_allclose(u0, 1 + 0.5 * np.cos(math.pi * x / 2))
    np.testing.assert_allclose(u1 - 1, (u0 - 1) * math.exp(-2 * (math.pi / 2) ** 2 * 0.3))
