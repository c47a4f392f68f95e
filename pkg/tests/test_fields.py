import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from khmix.fields import (Grid, Params, TruncationWarning, boundary_values, horizontal_average,
                          integrate_profile, make_grid, normalized_integral)


def test_make_grid_spacing():
    g = make_grid(Params(L=4, Ny=64, Nz=257, H=8))
    assert g.dz == 0.0625
    assert g.dy == 4 / 64
    assert g.shape == (64, 257)
    assert g.z[0] == -8 and g.z[-1] == 8 and g.z[128] == 0


def test_small_grid_nodes():
    # Nz=5 is below the Params floor, so the node layout is checked on the bare grid
    g = Grid.uniform(L=1, H=2, Ny=8, Nz=5)
    np.testing.assert_array_equal(g.z, [-2, -1, 0, 1, 2])
    assert g.dy == 0.125
    np.testing.assert_array_equal(g.wz, [0.5, 1, 1, 1, 0.5])


@pytest.mark.parametrize("bad", [
    dict(H=0.5), dict(H=1.0), dict(Nz=7), dict(Ny=9), dict(Ny=6), dict(U=0), dict(L=-1),
    dict(dt=0), dict(dt="fixed"), dict(T=0), dict(c_cfl=1.5), dict(tol_moment=0), dict(dt_ramp=-1),
])
def test_params_rejects(bad):
    with pytest.raises(ValueError):
        Params(**bad)


def test_params_with_keeps_validation():
    p = Params()
    assert p.with_(L=8).L == 8
    with pytest.raises(ValueError):
        p.with_(Ny=7)


def test_horizontal_average_examples():
    g = make_grid(Params(L=3, Ny=16, Nz=33, H=2))
    Y, Z = g.mesh()
    np.testing.assert_allclose(horizontal_average(np.full(g.shape, 2.5), g), 2.5)
    np.testing.assert_allclose(horizontal_average(np.sin(2 * np.pi * Y / g.L) + Z, g), g.z, atol=1e-15)
    np.testing.assert_allclose(horizontal_average(np.cos(4 * np.pi * Y / g.L) * np.exp(-Z ** 2), g), 0,
                               atol=1e-15)


def test_horizontal_average_shape_mismatch():
    g = make_grid(Params(Ny=16, Nz=33))
    with pytest.raises(ValueError):
        horizontal_average(np.zeros((16, 34)), g)


def test_gaussian_mass_and_second_moment():
    g = make_grid(Params(U=1, H=8, Ny=8, Nz=1025))
    sigma = 0.2
    prof = np.exp(-g.z ** 2 / (2 * sigma ** 2)) / np.sqrt(2 * np.pi * sigma ** 2)
    f = np.broadcast_to(prof, g.shape)
    assert normalized_integral(f, g) == pytest.approx(1.0, abs=1e-8)
    assert normalized_integral(f * g.z ** 2, g) == pytest.approx(sigma ** 2, abs=1e-8)
    assert normalized_integral(np.zeros(g.shape), g) == 0.0


def test_truncation_warning():
    g = make_grid(Params(H=2, Ny=8, Nz=65))
    with pytest.warns(TruncationWarning):
        normalized_integral(np.ones(g.shape), g)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        normalized_integral(np.ones(g.shape), g, tol_decay=None)


def test_boundary_values():
    assert boundary_values(np.zeros(5)) == 0.0
    assert boundary_values(np.array([0.1, 1.0, 0.2])) == pytest.approx(0.2)


def test_quadrature_second_order():
    # endpoint terms make trapezoid exactly second order on exp(z); bump integrands converge faster
    exact = 2 * np.sinh(2.0)
    errs = []
    for nz in (33, 65, 129):
        g = Grid.uniform(1, 2, 8, nz)
        errs.append(abs(integrate_profile(np.exp(g.z), g) - exact))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.01)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.01)
    bump = lambda z: np.where(np.abs(z) < 1.5, np.cos(np.pi * z / 3) ** 4, 0.0)
    ref, _ = integrate.quad(bump, -1.5, 1.5, epsabs=1e-14)
    g = Grid.uniform(1, 2, 8, 65)
    assert integrate_profile(bump(g.z), g) == pytest.approx(ref, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.floats(-3, 3), st.floats(0.1, 2))
def test_average_then_integrate_commutes(k, a, s):
    g = make_grid(Params(L=2, Ny=16, Nz=129, H=4))
    Y, Z = g.mesh()
    f = (a + np.cos(2 * np.pi * k * Y / g.L)) * np.exp(-Z ** 2 / s)
    direct = float(np.mean(f @ g.wz))
    assert normalized_integral(f, g, None) == pytest.approx(direct, rel=1e-13, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_average_linear_and_idempotent(a, b):
    g = make_grid(Params(L=1, Ny=8, Nz=17, H=2))
    rng = np.random.default_rng(0)
    f1, f2 = rng.normal(size=g.shape), rng.normal(size=g.shape)
    lhs = horizontal_average(a * f1 + b * f2, g)
    rhs = a * horizontal_average(f1, g) + b * horizontal_average(f2, g)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    p = horizontal_average(f1, g)
    np.testing.assert_allclose(horizontal_average(np.broadcast_to(p, g.shape), g), p, atol=1e-15)
