"""Mixing-layer diagnostics and the residuals of the balance identities they satisfy.

For a solution with vorticity ``omega`` of total mass ``U`` the scalar
diagnostics are

* ``m = (1/U) <z omega>`` (layer centre), ``l^2 = (1/U) <z^2 omega>`` (width),
* ``E = (1/2U) <U^2/4 - |u|^2>`` (renormalized energy),
* ``D = (1/2U) <|u - u0 e_y|^2>`` (separation from the sharp shear),

where ``<.>`` is the normalized integral.  Along exact solutions
``dE/dt = (1/U) <|grad u|^2>`` and ``l dl/dt = 1 + (1/U) <u^y u^z>``; the
residuals of both are tracked from stored samples.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, fields

import numpy as np
import scipy.fft as sfft

from .conslaw import SQRT12
from .fields import Grid, boundary_values, horizontal_average, integrate_profile, normalized_integral
from .solver import FlowState, ddz, operators_for

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "t", "m", "l", "E", "D", "eps_diss", "interp_lhs", "interp_rhs",
    "res_energy", "res_lwidth", "min_omega", "boundary_contamination",
)


class DataQualityError(ValueError):
    """A diagnostic is undefined for the supplied data (e.g. negative second moment)."""


@dataclass
class DiagnosticsRecord:
    t: float
    m: float
    l: float
    E: float
    D: float
    eps_diss: float
    interp_lhs: float
    interp_rhs: float
    res_energy: float = math.nan
    res_lwidth: float = math.nan
    min_omega: float = math.nan
    boundary_contamination: float = 0.0
    # <u^y u^z>; needed for the width identity, not part of the CSV schema
    cross_yz: float = math.nan
    # running time integrals of eps_diss and cross_yz from per-step evaluation (NaN if not tracked)
    eps_int: float = math.nan
    cross_int: float = math.nan

    def row(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]

    @classmethod
    def from_row(cls, row: dict) -> "DiagnosticsRecord":
        return cls(**{c: float(row[c]) for c in CSV_COLUMNS})

    def as_dict(self) -> dict:
        return asdict(self)


def _y_derivative(f: np.ndarray, grid: Grid) -> np.ndarray:
    ops = operators_for(grid)
    return sfft.irfft(ops.ikappa[:, None] * sfft.rfft(f, axis=0), n=grid.Ny, axis=0)


def mixing_center(omega: np.ndarray, grid: Grid, U: float) -> float:
    """First moment ``(1/U) <z omega>``."""
    obar = horizontal_average(omega, grid)
    return integrate_profile(grid.z * obar, grid) / U


def mixing_width(omega: np.ndarray, grid: Grid, U: float) -> float:
    """Square root of the second moment ``(1/U) <z^2 omega>`` (raw, not centred at ``m``)."""
    obar = horizontal_average(omega, grid)
    l2 = integrate_profile(grid.z ** 2 * obar, grid) / U
    if l2 < 0:
        raise DataQualityError(f"negative second moment {l2:.3e}: vorticity undershoot dominates")
    return math.sqrt(l2)


def renormalized_energy(uy: np.ndarray, uz: np.ndarray, grid: Grid, U: float,
                        tol_decay: float | None = None) -> float:
    integrand = 0.25 * U * U - (uy * uy + uz * uz)
    return normalized_integral(integrand, grid, tol_decay) / (2 * U)


def separation_integrand(uy: np.ndarray, uz: np.ndarray, grid: Grid, U: float) -> np.ndarray:
    """``|u - u0 e_y|^2``; on a node at ``z = 0`` the two one-sided limits are averaged."""
    u0 = np.where(grid.z >= 0, -0.5 * U, 0.5 * U)
    out = (uy - u0) ** 2 + uz ** 2
    at_sheet = grid.z == 0
    if np.any(at_sheet):
        out[:, at_sheet] = uy[:, at_sheet] ** 2 + 0.25 * U * U + uz[:, at_sheet] ** 2
    return out


def energy_separation(uy: np.ndarray, uz: np.ndarray, grid: Grid, U: float) -> float:
    return normalized_integral(separation_integrand(uy, uz, grid, U), grid, None) / (2 * U)


def dissipation_rate(uy: np.ndarray, uz: np.ndarray, grid: Grid, U: float) -> float:
    """``(1/U) <|grad u|^2>`` with spectral y-derivatives and centered z-derivatives."""
    grad2 = (_y_derivative(uy, grid) ** 2 + ddz(uy, grid.dz) ** 2
             + _y_derivative(uz, grid) ** 2 + ddz(uz, grid.dz) ** 2)
    return normalized_integral(grad2, grid, None) / U


def cross_term(uy: np.ndarray, uz: np.ndarray, grid: Grid) -> float:
    """``<u^y u^z>``."""
    return normalized_integral(uy * uz, grid, None)


def interpolation_check(ubar: np.ndarray, l: float, U: float, grid: Grid,
                        tol: float = 1e-6) -> tuple[float, float]:
    """Both sides of ``(1/U) int g(u_bar) dz <= U l / sqrt(12)``.

    ``u_bar`` is clipped to ``[-U/2, U/2]`` before ``g`` is applied; clipping
    and any increase of ``u_bar`` in ``z`` beyond ``tol * U`` are logged.
    """
    ubar = np.asarray(ubar, dtype=float)
    excursion = float(np.max(np.abs(ubar)) - 0.5 * U)
    if excursion > tol * U:
        log.warning("u_bar leaves [-U/2, U/2] by %.3e; clipped", excursion)
    rise = float(np.max(np.diff(ubar), initial=0.0))
    if rise > tol * U:
        log.warning("u_bar is not monotone: largest increase %.3e", rise)
    s = np.clip(ubar, -0.5 * U, 0.5 * U)
    lhs = integrate_profile(0.5 * (0.25 * U * U - s * s), grid) / U
    rhs = U * l / SQRT12
    return lhs, rhs


def compute_record(state: FlowState, params) -> DiagnosticsRecord:
    """All instantaneous diagnostics of ``state`` (residuals left as NaN)."""
    g, U = state.grid, params.U
    omega, uy, uz = state.omega, state.uy, state.uz
    obar = horizontal_average(omega, g)
    l = mixing_width(omega, g, U)
    lhs, rhs = interpolation_check(horizontal_average(uy, g), l, U, g)
    return DiagnosticsRecord(
        t=float(state.t),
        m=mixing_center(omega, g, U),
        l=l,
        E=renormalized_energy(uy, uz, g, U),
        D=energy_separation(uy, uz, g, U),
        eps_diss=dissipation_rate(uy, uz, g, U),
        interp_lhs=lhs,
        interp_rhs=rhs,
        min_omega=float(np.min(omega)),
        boundary_contamination=boundary_values(obar),
        cross_yz=cross_term(uy, uz, g),
    )


def _interval_mean(t0, t1, t2, f0, f1, f2) -> float:
    """Mean over ``[t0, t2]`` of the quadratic through three samples (Simpson's rule on uneven spacing)."""
    h0, h1 = t1 - t0, t2 - t1
    return ((2 - h1 / h0) * f0 + (h0 + h1) ** 2 / (h0 * h1) * f1 + (2 - h0 / h1) * f2) / 6.0


def centered_residuals(prev: DiagnosticsRecord, cur: DiagnosticsRecord, nxt: DiagnosticsRecord,
                       U: float) -> tuple[float, float]:
    """Energy and width identity residuals at ``cur``, normalized by ``U^2``.

    The time derivative is the centered difference over ``[prev.t, nxt.t]``.
    The right-hand side is averaged over the same interval: from the running
    time integrals ``eps_int``/``cross_int`` when the solver recorded them
    (per-step trapezoid), otherwise from Simpson weights on the three samples.
    """
    span = nxt.t - prev.t
    if not span > 0:
        raise ValueError("samples must be strictly increasing in time")
    ts = (prev.t, cur.t, nxt.t)
    dE = (nxt.E - prev.E) / span
    dl2 = 0.5 * (nxt.l ** 2 - prev.l ** 2) / span
    if np.isfinite(prev.eps_int) and np.isfinite(nxt.eps_int):
        eps = (nxt.eps_int - prev.eps_int) / span
        cross = (nxt.cross_int - prev.cross_int) / span / U
    else:
        eps = _interval_mean(*ts, prev.eps_diss, cur.eps_diss, nxt.eps_diss)
        cross = _interval_mean(*ts, prev.cross_yz, cur.cross_yz, nxt.cross_yz) / U
    return abs(dE - eps) / U ** 2, abs(dl2 - 1.0 - cross) / U ** 2


def fill_residuals(window: list[DiagnosticsRecord], U: float) -> None:
    """Set the residuals of the middle record of a three-sample window in place."""
    prev, cur, nxt = window
    cur.res_energy, cur.res_lwidth = centered_residuals(prev, cur, nxt, U)


@dataclass
class ResidualReport:
    res_energy: np.ndarray
    res_lwidth: np.ndarray

    @property
    def max_energy(self) -> float:
        return float(np.nanmax(self.res_energy))

    @property
    def max_lwidth(self) -> float:
        return float(np.nanmax(self.res_lwidth))


def identity_residuals(series: list[DiagnosticsRecord], U: float,
                       states: list[FlowState] | None = None) -> ResidualReport:
    """Residual series of both balance identities; endpoints are NaN.

    The cross term ``<u^y u^z>`` is taken from ``states`` when given,
    otherwise from each record's ``cross_yz``.
    """
    if len(series) < 3:
        raise ValueError(f"identity residuals need at least 3 samples, got {len(series)}")
    if states is not None:
        if len(states) != len(series):
            raise ValueError("states and series differ in length")
        series = [DiagnosticsRecord(**{**r.as_dict(), "cross_yz": cross_term(s.uy, s.uz, s.grid)})
                  for r, s in zip(series, states)]
    n = len(series)
    res_e = np.full(n, np.nan)
    res_l = np.full(n, np.nan)
    for i in range(1, n - 1):
        res_e[i], res_l[i] = centered_residuals(series[i - 1], series[i], series[i + 1], U)
    return ResidualReport(res_e, res_l)


def record_fields() -> list[str]:
    return [f.name for f in fields(DiagnosticsRecord)]
