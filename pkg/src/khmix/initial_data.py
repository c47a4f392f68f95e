"""Admissible initial vorticity for the mixing-layer problem.

An admissible datum has non-negative vorticity of total normalized mass
``U``, zero first moment in ``z``, and induces exactly the sharp shear
``u0 e_y`` wherever ``|z| >= 1``.  The construction is a product

    omega0(y, z) = U * phi(z) * (1 + eps * cos(2 pi k y / L) * chi(z))

with ``phi`` an even unit-mass bump of half-width ``delta`` and ``chi`` an
even envelope with ``max|chi| = 1``.  A cosine mode of wavenumber ``kappa``
induces no velocity outside the support of its amplitude ``a(z)`` exactly
when ``int cosh(kappa z) a(z) dz = 0``, so ``chi`` changes sign once on
each side to cancel that moment.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .fields import Grid, Params, horizontal_average, integrate_profile


@dataclass(frozen=True)
class InitialDataSpec:
    delta: float = 0.25
    epsilon: float = 0.0
    k: int = 1
    chi_width: float = 0.5

    def __post_init__(self):
        if not 0 < self.delta <= 0.5:
            raise ValueError(f"delta must lie in (0, 1/2], got {self.delta}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must lie in [0, 1) to keep omega0 >= 0, got {self.epsilon}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not 0 < self.chi_width < 1:
            raise ValueError(f"chi_width must lie in (0, 1), got {self.chi_width}")


def bump(x) -> np.ndarray:
    """Standard C-infinity bump ``exp(1 - 1/(1 - x^2))`` on ``|x| < 1``, zero outside, peak 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def mollifier(z: np.ndarray, delta: float, weights: np.ndarray) -> np.ndarray:
    """Even bump of half-width ``delta`` normalized to unit mass under ``weights``."""
    phi = bump(z / delta)
    mass = np.dot(weights, phi)
    if mass <= 0:
        raise ValueError(f"mollifier of half-width {delta} is not resolved by the grid")
    return phi / mass


def envelope(z: np.ndarray, phi: np.ndarray, width: float, kappa: float,
             weights: np.ndarray) -> np.ndarray:
    """Even envelope ``(1 - c (z/w)^2) bump(z/w)`` with the cosh-moment of ``phi*chi`` cancelled, scaled to ``max|chi| = 1``."""
    b = bump(z / width)
    ch = np.cosh(kappa * z) * phi * b
    i0 = np.dot(weights, ch)
    i2 = np.dot(weights, ch * (z / width) ** 2)
    if i2 <= 0:
        raise ValueError("perturbation envelope is not resolved by the grid")
    chi = (1.0 - (i0 / i2) * (z / width) ** 2) * b
    return chi / np.max(np.abs(chi))


def _check_support(spec: InitialDataSpec, grid: Grid) -> None:
    if spec.delta >= 1.0 - grid.dz:
        raise ValueError(f"support of width {spec.delta} leaks past |z| = 1 - dz")
    if spec.delta < 2 * grid.dz:
        raise ValueError(f"delta={spec.delta} is under-resolved by dz={grid.dz}")


def build_initial_vorticity(spec: InitialDataSpec, params: Params, grid: Grid) -> np.ndarray:
    """Smooth admissible ``omega0`` on ``grid`` (see module docstring)."""
    _check_support(spec, grid)
    if spec.epsilon > 0 and spec.k >= grid.Ny / 3:
        raise ValueError(f"perturbation mode k={spec.k} is not resolved by Ny={grid.Ny}")
    z = grid.z
    phi = mollifier(z, spec.delta, grid.wz)
    omega = np.broadcast_to(params.U * phi, grid.shape).copy()
    if spec.epsilon > 0:
        kappa = 2 * np.pi * spec.k / grid.L
        chi = envelope(z, phi, spec.chi_width, kappa, grid.wz)
        wave = np.cos(kappa * grid.y)
        omega *= 1.0 + spec.epsilon * np.outer(wave, chi)
    return omega


def build_asymmetric_vorticity(spec: InitialDataSpec, params: Params, grid: Grid,
                               skew: float = 0.5) -> np.ndarray:
    """Skewed mixing layer ``U phi(z - s) (1 + skew (z - s)/delta)`` with shift ``s`` giving zero first moment.

    The shift is found by bisection on the discrete first moment. The
    perturbation is y-independent; ``epsilon`` and ``k`` are ignored.
    """
    if not -1 < skew < 1:
        raise ValueError(f"skew must lie in (-1, 1), got {skew}")
    _check_support(spec, grid)
    z, w, d = grid.z, grid.wz, spec.delta

    def profile(shift):
        x = (z - shift) / d
        p = bump(x) * (1.0 + skew * x)
        return p / np.dot(w, p)

    def moment(shift):
        return np.dot(w, z * profile(shift))

    shift = optimize.bisect(moment, -d, d, xtol=1e-15)
    if abs(shift) + d >= 1.0 - grid.dz:
        raise ValueError("shifted support leaks past |z| = 1 - dz")
    return np.broadcast_to(params.U * profile(shift), grid.shape).copy()


@dataclass
class ValidationReport:
    min_omega: float
    circulation_error: float
    moment_error: float
    farfield_error: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def __str__(self) -> str:
        lines = [f"{'check':<12}{'value':>14}  status"]
        values = {
            "positivity": self.min_omega,
            "circulation": self.circulation_error,
            "moment": self.moment_error,
            "farfield": self.farfield_error,
        }
        for name, ok in self.checks.items():
            lines.append(f"{name:<12}{values[name]:>14.3e}  {'pass' if ok else 'FAIL'}")
        return "\n".join(lines)


def validate_initial_data(omega0: np.ndarray, params: Params, grid: Grid) -> ValidationReport:
    """Check the admissibility constraints of an initial vorticity field on ``grid``."""
    from .solver import CirculationError, poisson_solve

    U = params.U
    obar = horizontal_average(omega0, grid)
    min_omega = float(np.min(omega0))
    circ = integrate_profile(obar, grid)
    moment = integrate_profile(grid.z * obar, grid)
    try:
        _, uy, uz = poisson_solve(omega0, params, grid)
        far = np.abs(grid.z) >= 1.0
        u0 = np.where(grid.z >= 0, -0.5 * U, 0.5 * U)
        farfield = float(np.max(np.hypot(uy[:, far] - u0[far], uz[:, far])))
    except CirculationError:
        farfield = np.inf
    report = ValidationReport(
        min_omega=min_omega,
        circulation_error=abs(circ - U),
        moment_error=abs(moment),
        farfield_error=farfield,
    )
    report.checks = {
        "positivity": min_omega >= 0.0,
        "circulation": report.circulation_error <= 1e-10 * U,
        "moment": report.moment_error <= 1e-10 * U * params.H,
        "farfield": farfield <= params.tol_farfield * U,
    }
    return report
