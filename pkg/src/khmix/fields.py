"""Grids, quadrature and horizontal averaging on the truncated periodic channel.

The physical domain is ``L T x R`` (periodic in ``y``, unbounded in ``z``).
It is truncated to ``|z| <= H``; fields are stored as ``(Ny, Nz)`` arrays
indexed ``[y, z]`` and profiles as length-``Nz`` arrays.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Union

import numpy as np


class TruncationWarning(UserWarning):
    """A decaying integrand is not small at ``z = +-H``."""


@dataclass(frozen=True)
class Params:
    """Physical and numerical configuration.

    ``U`` is the velocity jump across the sheet and ``L`` the channel width,
    which plays the role of the Reynolds number (viscosity is fixed to one).
    ``dt`` is either a positive float or ``"adaptive"``.
    """

    U: float = 1.0
    L: float = 1.0
    H: float = 8.0
    Ny: int = 256
    Nz: int = 1025
    dt: Union[float, str] = "adaptive"
    T: float = 1.0
    c_cfl: float = 0.4
    # startup: step grows linearly in t from dt/64 to dt over this time (0 disables)
    dt_ramp: float = 0.0
    # min(omega) >= -tol_positivity * max(omega)
    tol_positivity: float = 1e-2
    # |m| <= tol_moment * U * H
    tol_moment: float = 1e-6
    # |circulation - U| <= tol_circulation * U
    tol_circulation: float = 1e-8
    # |f(+-H)| <= tol_decay * max|f| for decaying integrands
    tol_decay: float = 1e-3
    # max |u - u0 e_y| on |z| >= 1 for admissible initial data, relative to U
    tol_farfield: float = 1e-3
    # run aborts when |omega_bar(+-H)| / max(omega_bar) exceeds this
    contamination_limit: float = 1e-2

    def __post_init__(self):
        if not self.U > 0:
            raise ValueError(f"U must be > 0, got {self.U}")
        if not self.L > 0:
            raise ValueError(f"L must be > 0, got {self.L}")
        if not self.H > 1:
            raise ValueError(f"H must be > 1 to contain the initial layer |z| < 1, got {self.H}")
        if self.Ny < 8 or self.Ny % 2:
            raise ValueError(f"Ny must be even and >= 8, got {self.Ny}")
        if self.Nz < 8:
            raise ValueError(f"Nz must be >= 8, got {self.Nz}")
        if isinstance(self.dt, str):
            if self.dt != "adaptive":
                raise ValueError(f"dt must be a positive number or 'adaptive', got {self.dt!r}")
        elif not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if not self.dt_ramp >= 0:
            raise ValueError(f"dt_ramp must be >= 0, got {self.dt_ramp}")
        if not 0 < self.c_cfl <= 1:
            raise ValueError(f"c_cfl must lie in (0, 1], got {self.c_cfl}")
        for f in fields(self):
            if f.name.startswith("tol_") or f.name == "contamination_limit":
                if not getattr(self, f.name) > 0:
                    raise ValueError(f"{f.name} must be > 0")

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform mesh: ``Ny`` periodic nodes on ``[0, L)``, ``Nz`` nodes on ``[-H, H]``."""

    L: float
    H: float
    Ny: int
    Nz: int
    y: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    dy: float
    dz: float
    wz: np.ndarray = field(repr=False)

    @classmethod
    def uniform(cls, L: float, H: float, Ny: int, Nz: int) -> "Grid":
        y = L * np.arange(Ny) / Ny
        z = np.linspace(-H, H, Nz)
        dz = 2.0 * H / (Nz - 1)
        wz = np.full(Nz, dz)
        wz[0] = wz[-1] = 0.5 * dz
        return cls(L=L, H=H, Ny=Ny, Nz=Nz, y=y, z=z, dy=L / Ny, dz=dz, wz=wz)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Ny, self.Nz)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.y, self.z, indexing="ij")

    def same_as(self, other: "Grid") -> bool:
        return (self.Ny, self.Nz) == (other.Ny, other.Nz) and np.isclose(self.L, other.L) and np.isclose(self.H, other.H)


def make_grid(params: Params) -> Grid:
    # Params validation already enforces H > 1, even Ny >= 8, Nz >= 8
    return Grid.uniform(params.L, params.H, params.Ny, params.Nz)


def _check_shape(f: np.ndarray, grid: Grid) -> None:
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")


def horizontal_average(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Mean over the periodic direction; exact for trigonometric polynomials below Nyquist."""
    f = np.asarray(f, dtype=float)
    _check_shape(f, grid)
    return f.mean(axis=0)


def integrate_profile(p: np.ndarray, grid: Grid) -> float:
    """Trapezoid rule on ``[-H, H]``."""
    return float(np.dot(grid.wz, p))


def boundary_values(p: np.ndarray) -> float:
    """Largest magnitude of a profile at ``z = +-H`` relative to its peak."""
    scale = np.max(np.abs(p))
    if scale == 0:
        return 0.0
    return float(max(abs(p[0]), abs(p[-1])) / scale)


def normalized_integral(f: np.ndarray, grid: Grid, tol_decay: float | None = 1e-3) -> float:
    """Integral over ``z`` of the horizontal average of ``f``.

    Issues a :class:`TruncationWarning` when the averaged integrand has not
    decayed at the truncation boundary.
    """
    p = horizontal_average(f, grid)
    if tol_decay is not None:
        contamination = boundary_values(p)
        if contamination > tol_decay:
            warnings.warn(
                f"integrand not decayed at |z| = H: boundary/peak = {contamination:.3e}",
                TruncationWarning,
                stacklevel=2,
            )
    return integrate_profile(p, grid)
