import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khmix.fields import Grid, Params, horizontal_average, integrate_profile, make_grid
from khmix.initial_data import (InitialDataSpec, build_asymmetric_vorticity, build_initial_vorticity,
                                bump, envelope, mollifier, validate_initial_data)

# high-precision quadrature of the analytic bump exp(1 - 1/(1 - (z/0.25)^2))
BUMP_MASS_025 = 0.30172508060946904
BUMP_L2_025 = 0.009882102266487389

SMALL = Params(U=1, L=2, H=4, Ny=32, Nz=513)


@pytest.fixture
def grid():
    return make_grid(SMALL)


def test_bump_shape():
    assert bump(0.0) == 1.0
    assert bump(1.0) == 0.0 and bump(-1.2) == 0.0
    np.testing.assert_allclose(bump(np.array([-0.3, 0.3])), bump(0.3))


def test_mollifier_against_frozen_quadrature(grid):
    phi = mollifier(grid.z, 0.25, grid.wz)
    assert integrate_profile(phi, grid) == pytest.approx(1.0, abs=1e-14)
    assert integrate_profile(bump(grid.z / 0.25), grid) == pytest.approx(BUMP_MASS_025, rel=1e-5)
    fine = Grid.uniform(1, 2, 8, 4001)
    phi = mollifier(fine.z, 0.25, fine.wz)
    assert integrate_profile(bump(fine.z / 0.25), fine) == pytest.approx(BUMP_MASS_025, rel=1e-10)
    assert integrate_profile(fine.z ** 2 * phi, fine) == pytest.approx(BUMP_L2_025, rel=1e-10)


@pytest.mark.parametrize("kwargs", [dict(epsilon=1.2), dict(epsilon=-0.1), dict(delta=0.0),
                                    dict(delta=0.6), dict(k=0), dict(k=1.5), dict(chi_width=1.0)])
def test_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        InitialDataSpec(**kwargs)


def test_perturbed_datum_constraints(grid):
    spec = InitialDataSpec(delta=0.25, epsilon=0.5, k=2)
    w = build_initial_vorticity(spec, SMALL, grid)
    obar = horizontal_average(w, grid)
    assert w.min() >= 0
    assert integrate_profile(obar, grid) == pytest.approx(1.0, abs=1e-10)
    assert abs(integrate_profile(grid.z * obar, grid)) <= 1e-12
    assert np.all(w[:, np.abs(grid.z) >= 1 - grid.dz] == 0)


def test_unperturbed_datum_is_translation_invariant(grid):
    w = build_initial_vorticity(InitialDataSpec(epsilon=0.0), SMALL, grid)
    np.testing.assert_array_equal(w, np.roll(w, 5, axis=0))


def test_envelope_cancels_cosh_moment(grid):
    phi = mollifier(grid.z, 0.25, grid.wz)
    kappa = 2 * np.pi * 3 / grid.L
    chi = envelope(grid.z, phi, 0.5, kappa, grid.wz)
    assert np.max(np.abs(chi)) == pytest.approx(1.0)
    assert np.dot(grid.wz, np.cosh(kappa * grid.z) * phi * chi) == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(chi, chi[::-1])


def test_validation_passes_on_construction(grid):
    specs = (InitialDataSpec(), InitialDataSpec(epsilon=0.5, k=2), InitialDataSpec(delta=0.5, epsilon=0.9, k=1))
    for spec in specs:
        rep = validate_initial_data(build_initial_vorticity(spec, SMALL, grid), SMALL, grid)
        assert rep.passed, str(rep)


def test_validation_detects_shift(grid):
    spec = InitialDataSpec(delta=0.25)
    n = int(round(0.3 / grid.dz))
    shifted = np.roll(build_initial_vorticity(spec, SMALL, grid), n, axis=1)
    rep = validate_initial_data(shifted, SMALL, grid)
    assert not rep.checks["moment"]
    assert rep.moment_error == pytest.approx(n * grid.dz, rel=1e-12)
    assert rep.checks["positivity"] and rep.checks["circulation"]


def test_validation_detects_negative_node(grid):
    w = build_initial_vorticity(InitialDataSpec(), SMALL, grid)
    w[3, 250] = -1e-3
    rep = validate_initial_data(w, SMALL, grid)
    assert not rep.checks["positivity"]
    assert "FAIL" in str(rep)


def test_validation_detects_missing_circulation(grid):
    rep = validate_initial_data(np.zeros(grid.shape), SMALL, grid)
    assert not rep.checks["circulation"] and rep.farfield_error == np.inf


def test_support_checks():
    coarse = make_grid(Params(H=2, Ny=8, Nz=9))
    with pytest.raises(ValueError, match="under-resolved"):
        build_initial_vorticity(InitialDataSpec(delta=0.25), Params(H=2, Ny=8, Nz=9), coarse)
    g = make_grid(SMALL)
    with pytest.raises(ValueError, match="not resolved"):
        build_initial_vorticity(InitialDataSpec(epsilon=0.5, k=11), SMALL, g)


def test_asymmetric_datum(grid):
    w = build_asymmetric_vorticity(InitialDataSpec(delta=0.25), SMALL, grid, skew=0.6)
    obar = horizontal_average(w, grid)
    assert w.min() >= 0
    assert integrate_profile(obar, grid) == pytest.approx(1.0, abs=1e-12)
    assert abs(integrate_profile(grid.z * obar, grid)) < 1e-12
    assert not np.allclose(obar, obar[::-1])
    assert validate_initial_data(w, SMALL, grid).passed


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.5), st.floats(0.0, 0.99), st.integers(1, 4), st.floats(0.3, 0.9))
def test_constraints_hold_for_all_specs(delta, eps, k, width):
    g = make_grid(SMALL)
    spec = InitialDataSpec(delta=delta, epsilon=eps, k=k, chi_width=width)
    w = build_initial_vorticity(spec, SMALL, g)
    obar = horizontal_average(w, g)
    assert w.min() >= 0
    assert abs(integrate_profile(obar, g) - 1) <= 1e-10
    assert abs(integrate_profile(g.z * obar, g)) <= 1e-10 * SMALL.H
