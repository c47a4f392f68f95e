import logging

import numpy as np
import pytest
from scipy import linalg

from khmix.diagnostics import mixing_width
from khmix.fields import Params, horizontal_average, integrate_profile, make_grid
from khmix.initial_data import InitialDataSpec, build_initial_vorticity
from khmix.solver import (CFLError, CirculationError, ContaminationError, FlowState, SolverError,
                          cfl_dt, circulation, divergence, initial_state, poisson_solve, rescale_state,
                          run, step)

P = Params(U=1, L=2, H=4, Ny=32, Nz=257, dt=0.01, T=0.2)


def sheet(params=P, **spec):
    g = make_grid(params)
    return build_initial_vorticity(InitialDataSpec(**spec), params, g), g


def test_sheet_velocity():
    w, g = sheet()
    _, uy, uz = poisson_solve(w, P, g)
    assert np.max(np.abs(uz)) < 1e-14
    far = np.abs(g.z) >= 1
    u0 = np.where(g.z >= 0, -0.5, 0.5)
    np.testing.assert_allclose(uy[:, far], np.broadcast_to(u0[far], (g.Ny, far.sum())), atol=1e-8)


def test_perturbed_datum_far_field():
    w, g = sheet(epsilon=0.5, k=2, delta=0.25)
    _, uy, uz = poisson_solve(w, P, g)
    far = np.abs(g.z) >= 1
    u0 = np.where(g.z >= 0, -0.5, 0.5)
    assert np.max(np.hypot(uy[:, far] - u0[far], uz[:, far])) < 1e-3


def _manufactured_error(nz):
    params = P.with_(Nz=nz)
    w_sheet, g = sheet(params)
    Y, Z = g.mesh()
    H, L = g.H, g.L
    kap = 2 * np.pi / L
    shape = (1 - (Z / H) ** 2) ** 2
    psi_exact = np.cos(kap * Y) * shape
    d2 = (-4 / H ** 2) * (1 - 3 * (Z / H) ** 2)
    omega = np.cos(kap * Y) * (d2 - kap ** 2 * shape) + w_sheet
    psi, _, _ = poisson_solve(omega, params, g)
    fluct = psi - psi.mean(axis=0)
    return np.max(np.abs(fluct - psi_exact))


def test_manufactured_poisson_second_order():
    errs = [_manufactured_error(n) for n in (65, 129, 257)]
    assert errs[-1] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)


def test_zero_vorticity_rejected():
    g = make_grid(P)
    with pytest.raises(CirculationError):
        poisson_solve(np.zeros(g.shape), P, g)


def test_divergence_and_circulation_consistency():
    w, g = sheet(epsilon=0.7, k=3)
    _, uy, uz = poisson_solve(w, P, g)
    assert np.max(np.abs(divergence(uy, uz, g))) < 1e-10
    ubar = horizontal_average(uy, g)
    assert ubar[0] - ubar[-1] == pytest.approx(circulation(w, g), abs=1e-12)


def test_y_independent_state_stays_y_independent():
    w, g = sheet()
    st = initial_state(w, P, g)
    for _ in range(5):
        st = step(st, 0.01, P)
    assert np.max(np.abs(st.omega - st.omega.mean(axis=0))) < 1e-14
    assert np.max(np.abs(st.uz)) < 1e-14


def _neumann_cn(w, dz, dt, steps):
    # ghost-point Neumann Laplacian, solved as a banded system
    n = len(w)
    r = dt / (2 * dz * dz)
    lower = np.full(n, r); upper = np.full(n, r)
    upper[1] = 2 * r; lower[-2] = 2 * r
    ab = np.vstack([-upper, np.full(n, 1 + 2 * r), -lower])
    for _ in range(steps):
        rhs = (1 - 2 * r) * w
        rhs[1:-1] += r * (w[:-2] + w[2:])
        rhs[0] += 2 * r * w[1]
        rhs[-1] += 2 * r * w[-2]
        w = linalg.solve_banded((1, 1), ab, rhs)
    return w


def test_diffusion_matches_banded_crank_nicolson():
    w, g = sheet()
    st = initial_state(w, P, g)
    for _ in range(10):
        st = step(st, 0.01, P)
    ref = _neumann_cn(horizontal_average(w, g), g.dz, 0.01, 10)
    np.testing.assert_allclose(horizontal_average(st.omega, g), ref, atol=1e-11)


def test_mass_conserved_per_step():
    w, g = sheet(epsilon=0.8, k=2)
    st = initial_state(w, P, g)
    m0 = circulation(st.omega, g)
    for _ in range(20):
        st = step(st, 0.01, P)
        assert abs(circulation(st.omega, g) - m0) <= 1e-10


def test_step_rejects_cfl_and_bad_input():
    w, g = sheet(epsilon=0.5)
    st = initial_state(w, P, g)
    with pytest.raises(CFLError):
        step(st, 10.0, P)
    with pytest.raises(ValueError):
        step(st, -0.1, P)
    bad = FlowState(st.omega, st.uy * np.nan, st.uz, 0.0, g)
    with pytest.raises(SolverError):
        step(bad, 0.01, P)


def test_cfl_dt_examples():
    w, g = sheet()
    st = initial_state(w, P, g)
    still = FlowState(st.omega, np.zeros(g.shape), np.zeros(g.shape), 0.0, g)
    assert cfl_dt(still, P) == pytest.approx(P.c_cfl * g.dz ** 2 / 2)
    coarse = Params(U=1, L=1, H=8, Ny=8, Nz=9)
    gc = make_grid(coarse)
    shear = FlowState(np.zeros(gc.shape), np.full(gc.shape, 0.5), np.zeros(gc.shape), 0.0, gc)
    assert cfl_dt(shear, coarse) == pytest.approx(coarse.c_cfl * 2 * gc.dy / coarse.U)
    nan_state = FlowState(st.omega, st.uy * np.nan, st.uz, 0.0, g)
    assert not np.isfinite(cfl_dt(nan_state, P))


def test_translation_equivariance():
    w, g = sheet(epsilon=0.6, k=1)
    a = initial_state(w, P, g)
    b = initial_state(np.roll(w, 1, axis=0), P, g)
    for _ in range(10):
        a, b = step(a, 0.01, P), step(b, 0.01, P)
    np.testing.assert_allclose(np.roll(a.omega, 1, axis=0), b.omega, atol=1e-12)


def test_positivity_monitor_logs(caplog):
    w, g = sheet()
    st = initial_state(w, P, g)
    st.omega[0, 20] = -1.0
    st.omega_cos = None
    tight = P.with_(tol_positivity=1e-12)
    with caplog.at_level(logging.WARNING):
        step(st, 1e-4, tight)
    assert "negative vorticity" in caplog.text


def test_heat_run_width_identity():
    records = []
    summary = run(P.with_(Ny=8), InitialDataSpec(), records.append, sample_interval=0.02)
    assert len(records) == 11 == summary.samples
    l2 = [r.l ** 2 for r in records]
    assert l2[-1] - l2[0] == pytest.approx(2 * 0.2, rel=1e-4)
    assert max(abs(r.m) for r in records) < 1e-14
    assert np.isnan(records[0].res_energy) and np.isnan(records[-1].res_lwidth)
    assert summary.max_res_lwidth < 1e-6
    assert summary.steps == 20


def test_run_sink_protocols():
    class Sink:
        def __init__(self):
            self.n = 0

        def emit(self, rec):
            self.n += 1

    s = Sink()
    run(P.with_(Ny=8, T=0.05), InitialDataSpec(), s, sample_interval=0.01)
    assert s.n == 6
    with pytest.raises(TypeError):
        run(P.with_(Ny=8, T=0.05), InitialDataSpec(), 42)


def test_run_adaptive_and_ramp():
    rec = []
    summary = run(P.with_(Ny=8, Nz=65, dt="adaptive", T=0.05), InitialDataSpec(), rec.append)
    assert rec[-1].t == pytest.approx(0.05)
    ramped = run(P.with_(Ny=8, dt_ramp=0.05, T=0.1), InitialDataSpec(), None, sample_interval=0.05)
    plain = run(P.with_(Ny=8, T=0.1), InitialDataSpec(), None, sample_interval=0.05)
    assert ramped.steps > plain.steps
    assert summary.steps > 0


def test_contamination_aborts():
    tight = Params(U=1, L=1, H=1.5, Ny=8, Nz=65, dt=0.01, T=2.0, contamination_limit=1e-3)
    with pytest.raises(ContaminationError):
        run(tight, InitialDataSpec(delta=0.25), None, sample_interval=0.1)


def test_rescale_identity_and_mass():
    w, g = sheet(epsilon=0.5, k=1)
    st = initial_state(w, P, g)
    same = rescale_state(st, 1.0)
    np.testing.assert_array_equal(same.omega, st.omega)
    assert same.grid.same_as(g)
    r = rescale_state(st, g.L)
    assert r.grid.L == pytest.approx(1.0)
    assert circulation(r.omega, r.grid) == pytest.approx(P.U, rel=1e-12)
    assert mixing_width(r.omega, r.grid, P.U) == pytest.approx(mixing_width(st.omega, g, P.U) / g.L, rel=1e-12)


def test_rescale_resamples_onto_grid():
    w, g = sheet(epsilon=0.5, k=1)
    st = initial_state(w, P, g)
    target = make_grid(Params(L=1.0, H=2.0, Ny=32, Nz=513))
    r = rescale_state(st, 2.0, target)
    assert r.omega.shape == target.shape
    assert circulation(r.omega, target) == pytest.approx(P.U, rel=1e-6)
    with pytest.raises(ValueError):
        rescale_state(st, 2.0, make_grid(Params(L=3.0, H=2.0, Ny=32, Nz=65)))


def test_initial_state_checks_circulation():
    g = make_grid(P)
    with pytest.raises(CirculationError):
        initial_state(np.zeros(g.shape), P, g)
    w, _ = sheet()
    st = initial_state(w, P, g)
    assert st.t == 0 and integrate_profile(horizontal_average(st.omega, g), g) == pytest.approx(1.0)
