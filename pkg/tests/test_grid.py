import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chemofv.grid import (
    GridSpec,
    apply_neumann_ghosts,
    grad_component,
    integrate,
    interior,
    laplacian,
    new_field,
)


def test_interval_geometry():
    g = GridSpec.interval(8, 2.0)
    assert g.spacing == (0.25,)
    assert g.h == 0.25
    assert g.shape == (10,)
    assert g.ncells == 8
    np.testing.assert_allclose(g.centers()[0], 0.125 + 0.25 * np.arange(8))


def test_box_geometry():
    g = GridSpec.box(8, 4, 1.0, 0.5)
    assert g.spacing == (0.125, 0.125)
    assert g.shape == (10, 6)
    assert g.cell_volume == pytest.approx(0.125**2)
    x, y = g.mesh()
    assert x.shape == (8, 4)
    assert x[1, 0] > x[0, 0] and y[0, 1] > y[0, 0]


@pytest.mark.parametrize(
    "args",
    [
        (3, (1.0,), (8,)),
        (1, (1.0,), (3,)),
        (1, (0.0,), (8,)),
        (2, (1.0,), (8,)),
        (2, (1.0, 1.0), (8, 40)),
    ],
)
def test_invalid_grids(args):
    with pytest.raises(ValueError):
        GridSpec(*args)


def test_refined():
    g = GridSpec.box(8, 6).refined(2)
    assert g.cells == (16, 12)
    assert g.lengths == (1.0, 1.0)


def test_ghosts_reflect_1d():
    f = new_field(GridSpec.interval(4), [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(f, [1, 1, 2, 3, 4, 4])


def test_ghosts_reflect_2d():
    g = GridSpec.box(4, 5)
    vals = np.arange(20.0).reshape(4, 5)
    f = new_field(g, vals)
    np.testing.assert_array_equal(f[0, 1:-1], vals[0])
    np.testing.assert_array_equal(f[-1, 1:-1], vals[-1])
    np.testing.assert_array_equal(f[1:-1, 0], vals[:, 0])
    np.testing.assert_array_equal(f[1:-1, -1], vals[:, -1])


def test_laplacian_of_quadratic_is_exact_inside():
    g = GridSpec.interval(16)
    (x,) = g.centers()
    f = new_field(g, x**2)
    lap = interior(laplacian(f, g))
    np.testing.assert_allclose(lap[1:-1], 2.0, rtol=1e-10)


def test_laplacian_2d_of_separable_quadratic():
    g = GridSpec.box(10, 12)
    x, y = g.mesh()
    f = new_field(g, x**2 + 3 * y**2)
    lap = interior(laplacian(f, g))
    np.testing.assert_allclose(lap[1:-1, 1:-1], 8.0, rtol=1e-9)


@given(arrays(np.float64, st.integers(4, 30), elements=st.floats(-10, 10)))
def test_laplacian_sums_to_zero_under_no_flux(vals):
    g = GridSpec.interval(vals.size)
    f = new_field(g, vals)
    assert integrate(laplacian(f, g), g) == pytest.approx(0.0, abs=1e-9 * (1 + np.abs(vals).max()) * vals.size**2)


@given(arrays(np.float64, (6, 7), elements=st.floats(-10, 10)))
def test_laplacian_2d_sums_to_zero(vals):
    g = GridSpec.box(6, 7)
    f = new_field(g, vals)
    assert integrate(laplacian(f, g), g) == pytest.approx(0.0, abs=1e-8 * (1 + np.abs(vals).max()))


def test_gradient_faces_and_walls():
    g = GridSpec.interval(5)
    f = new_field(g, [0.0, 1.0, 3.0, 6.0, 10.0])
    d = grad_component(f, g)
    assert d.shape == (6,)
    assert d[0] == 0.0 and d[-1] == 0.0
    np.testing.assert_allclose(d[1:-1], np.array([1, 2, 3, 4]) / 0.2)


def test_gradient_2d_shapes():
    g = GridSpec.box(4, 6)
    f = new_field(g, np.ones((4, 6)))
    assert grad_component(f, g, 0).shape == (5, 6)
    assert grad_component(f, g, 1).shape == (4, 7)


def test_apply_ghosts_in_place():
    f = np.zeros(6)
    f[1:-1] = [5, 6, 7, 8]
    out = apply_neumann_ghosts(f)
    assert out is f
    assert f[0] == 5 and f[-1] == 8


def test_integrate_constant():
    g = GridSpec.box(8, 8, 2.0, 1.5)
    assert integrate(new_field(g, 3.0), g) == pytest.approx(9.0)
