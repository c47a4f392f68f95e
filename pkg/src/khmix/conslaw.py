"""Closed-form scalar conservation-law references.

The horizontally averaged velocity of a mixing layer is compared against
the entropy solution of ``d_t u - (1/2) d_z u^2 = 0`` started from the
sharp shear ``u0 = +U/2 (z < 0), -U/2 (z >= 0)``: a rarefaction fan.
This module holds that fan, its moments, the flux ``g`` and the sharp
constant / optimal profile of the associated interpolation inequality.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

SQRT12 = np.sqrt(12.0)


@dataclass(frozen=True)
class FluxFunction:
    """Concave flux ``g`` on ``[-U/2, U/2]`` with derivative ``dg``."""

    U: float
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __call__(self, s):
        return self.g(s)

    @property
    def half(self) -> float:
        return 0.5 * self.U


def quadratic_flux(U: float = 1.0) -> FluxFunction:
    """``g(s) = (U^2/4 - s^2) / 2``, the flux of the coarse-grained Burgers law."""
    return FluxFunction(
        U=U,
        g=lambda s: 0.5 * (0.25 * U * U - np.square(s)),
        dg=lambda s: -np.asarray(s, dtype=float),
        name="quadratic",
    )


def power_flux(U: float = 1.0, p: float = 1.0) -> FluxFunction:
    """``g(s) = (U^2/4 - s^2)^p / 2``; concave with square-integrable ``g'`` for ``1/2 < p <= 1``."""
    if not 0.5 < p <= 1.0:
        raise ValueError(f"power flux needs 1/2 < p <= 1, got {p}")
    a2 = 0.25 * U * U

    def g(s):
        return 0.5 * np.power(np.maximum(a2 - np.square(s), 0.0), p)

    def dg(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -p * s * np.power(np.maximum(a2 - s * s, 0.0), p - 1.0)

    return FluxFunction(U=U, g=g, dg=dg, name=f"power{p:g}")


def zero_flux(U: float = 1.0) -> FluxFunction:
    return FluxFunction(U=U, g=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                        dg=lambda s: np.zeros_like(np.asarray(s, dtype=float)), name="zero")


def flux_g(s, U: float):
    """Quadratic flux ``g(s) = (U^2/4 - s^2)/2``; raises outside ``[-U/2, U/2]``."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) > 0.5 * U * (1 + 1e-12)):
        raise ValueError(f"flux argument outside [-U/2, U/2] for U={U}")
    out = 0.5 * (0.25 * U * U - s_arr * s_arr)
    return float(out) if out.ndim == 0 else out


def rarefaction_profile(z, t: float, U: float):
    """Entropy solution ``u(z, t)``: ``U/2`` left of the fan, ``-z/t`` inside, ``-U/2`` right."""
    if not t > 0:
        raise ValueError("rarefaction profile needs t > 0")
    z_arr = np.asarray(z, dtype=float)
    out = np.clip(-z_arr / t, -0.5 * U, 0.5 * U)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RarefactionReference:
    U: float
    t: float

    def profile(self, z):
        return rarefaction_profile(z, self.t, self.U)

    @property
    def l(self) -> float:
        return self.U * self.t / SQRT12

    @property
    def E(self) -> float:
        return self.U ** 2 * self.t / 12.0

    @property
    def D(self) -> float:
        return self.U ** 2 * self.t / 24.0


def rarefaction_diagnostics(t: float, U: float) -> tuple[float, float, float]:
    """Mixing width, renormalized energy and separation of the fan: ``Ut/sqrt(12), U^2 t/12, U^2 t/24``."""
    if not t > 0:
        raise ValueError("rarefaction diagnostics need t > 0")
    ref = RarefactionReference(U, t)
    return ref.l, ref.E, ref.D


def sharp_constant(flux: FluxFunction) -> float:
    """``C# = (2 * int_{-U/2}^{U/2} g'(s)^2 ds)^(1/2)`` by adaptive quadrature.

    The range is split at ``s = 0`` so each half carries a single endpoint
    singularity (``g'`` may blow up at ``+-U/2``).  QUADPACK's roundoff
    notices on such integrable singularities are replaced by a check on its
    own error estimate.
    """
    a = flux.half
    total, err = 0.0, 0.0
    for lo, hi in ((-a, 0.0), (0.0, a)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, abserr = integrate.quad(lambda s: float(flux.dg(s)) ** 2, lo, hi,
                                         epsabs=0.0, epsrel=1e-12, limit=400)
        total, err = total + val, err + abserr
    if not np.isfinite(total):
        raise ValueError(f"sharp constant integral is not finite for flux {flux.name}")
    if err > 1e-8 * total:
        warnings.warn(f"sharp constant for {flux.name}: quadrature error estimate {err:.2e}",
                      RuntimeWarning, stacklevel=2)
    return float(np.sqrt(2.0 * total))


def optimal_profile(flux: FluxFunction, z, xtol: float = 1e-12) -> np.ndarray:
    """Optimal profile ``s_g`` solving ``g'(s_g(z)) = z``, clipped to ``+-U/2`` outside the range of ``g'``.

    ``g'`` is non-increasing for concave ``g``, so each inversion is a bracketed
    root search on ``[-U/2, U/2]``.
    """
    a = flux.half
    z = np.atleast_1d(np.asarray(z, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        lo_val = float(flux.dg(-a))   # sup of g'
        hi_val = float(flux.dg(a))    # inf of g'
    if not lo_val > hi_val:
        raise ValueError(f"g' is not invertible for flux {flux.name}")
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        if zi >= lo_val:
            out[i] = -a
        elif zi <= hi_val:
            out[i] = a
        else:
            out[i] = optimize.brentq(lambda s: min(max(float(flux.dg(s)), -1e300), 1e300) - zi,
                                     -a, a, xtol=xtol, rtol=4 * np.finfo(float).eps)
    return out
