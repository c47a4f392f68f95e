"""Brute-force check of the interpolation inequality over monotone step profiles.

For a non-increasing ``s`` with ``s = +U/2`` far below and ``-U/2`` far
above, and a concave flux ``g`` vanishing at ``+-U/2``,

    int g(s) dz <= C# * (int z (s - s0) dz)^(1/2),

where ``s0`` is the sharp step at ``z = 0``.  Profiles here are piecewise
constant, so both integrals are evaluated exactly and a violation would be
a genuine counterexample rather than quadrature noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conslaw import FluxFunction, optimal_profile, sharp_constant


@dataclass(frozen=True)
class MonotoneProfile:
    """Step profile: value ``values[i]`` on ``[breakpoints[i], breakpoints[i+1])``.

    Below ``breakpoints[0]`` the profile is ``+U/2``, above ``breakpoints[-1]``
    it is ``-U/2``.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    U: float = 1.0

    def __post_init__(self):
        z = np.asarray(self.breakpoints, dtype=float)
        s = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "breakpoints", z)
        object.__setattr__(self, "values", s)
        if z.ndim != 1 or s.ndim != 1 or len(z) != len(s) + 1:
            raise ValueError("need n+1 breakpoints for n values")
        if not np.all(np.diff(z) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(np.diff(s) > 0):
            raise ValueError("values must be non-increasing")
        if np.any(np.abs(s) > 0.5 * self.U * (1 + 1e-12)):
            raise ValueError(f"values must lie in [-U/2, U/2] for U={self.U}")

    @property
    def count(self) -> int:
        return len(self.values)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        idx = np.searchsorted(self.breakpoints, z, side="right") - 1
        padded = np.concatenate(([0.5 * self.U], self.values, [-0.5 * self.U]))
        return padded[np.clip(idx + 1, 0, len(padded) - 1)]

    def translated(self, a: float) -> "MonotoneProfile":
        return MonotoneProfile(self.breakpoints + a, self.values, self.U)

    def dilated(self, lam: float) -> "MonotoneProfile":
        return MonotoneProfile(lam * self.breakpoints, self.values, self.U)


def _pieces(profile: MonotoneProfile) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints and values extended so the pieces cover ``z = 0`` and every point where ``s != s0``."""
    z, s, half = profile.breakpoints, profile.values, 0.5 * profile.U
    if z[0] > 0:
        z, s = np.concatenate(([0.0], z)), np.concatenate(([half], s))
    if z[-1] < 0:
        z, s = np.concatenate((z, [0.0])), np.concatenate((s, [-half]))
    if z[0] < 0 < z[-1] and not np.any(z == 0):
        i = np.searchsorted(z, 0.0)
        z = np.insert(z, i, 0.0)
        s = np.insert(s, i, s[i - 1])
    return z, s


def moment(profile: MonotoneProfile) -> float:
    """``int z (s - s0) dz``, exact for step profiles."""
    z, s = _pieces(profile)
    a, b = z[:-1], z[1:]
    s0 = np.where(b <= 0, 0.5 * profile.U, -0.5 * profile.U)
    return float(np.sum((s - s0) * 0.5 * (b * b - a * a)))


def evaluate_sides(profile: MonotoneProfile, flux: FluxFunction,
                   c_sharp: float | None = None) -> tuple[float, float, float]:
    """``(lhs, rhs, ratio)`` of the interpolation inequality for ``profile``."""
    if not np.isclose(flux.U, profile.U):
        raise ValueError("flux and profile use different U")
    tails = np.asarray(flux.g(np.array([-0.5 * profile.U, 0.5 * profile.U])), dtype=float)
    if np.any(np.abs(tails) > 1e-14 * profile.U ** 2):
        raise ValueError("flux must vanish at +-U/2 for the left side to be finite")
    widths = np.diff(profile.breakpoints)
    lhs = float(np.dot(widths, flux.g(profile.values)))
    mom = moment(profile)
    if mom < -1e-14 * max(1.0, abs(lhs)):
        raise ValueError(f"negative moment {mom:.3e}: profile is not monotone")
    mom = max(mom, 0.0)
    if c_sharp is None:
        c_sharp = sharp_constant(flux)
    rhs = c_sharp * np.sqrt(mom)
    if rhs == 0:
        if lhs == 0:
            return lhs, rhs, 0.0
        return lhs, rhs, np.inf
    return lhs, rhs, lhs / rhs


def random_monotone_profile(seed, count: int, U: float = 1.0,
                            z_range: tuple[float, float] = (-1.0, 1.0)) -> MonotoneProfile:
    """Random step profile with ``count`` steps; deterministic in ``seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    lo, hi = z_range
    if not hi > lo:
        raise ValueError("z_range must be increasing")
    rng = np.random.default_rng(seed)
    z = np.sort(rng.uniform(lo, hi, count + 1))
    while np.any(np.diff(z) <= 0):  # measure-zero ties
        z = np.sort(rng.uniform(lo, hi, count + 1))
    s = np.sort(rng.uniform(-0.5 * U, 0.5 * U, count))[::-1]
    return MonotoneProfile(z, s, U)


def sampled_optimal_profile(flux: FluxFunction, count: int = 64) -> MonotoneProfile:
    """Step sampling of ``s_g`` on the range of ``g'``, values at cell midpoints."""
    a = flux.half
    with np.errstate(divide="ignore", invalid="ignore"):
        top, bottom = float(flux.dg(a)), float(flux.dg(-a))
        # unbounded g': stop where s_g is within 1e-3 of +-U/2
        if not np.isfinite(top):
            top = float(flux.dg(a * (1 - 1e-3)))
        if not np.isfinite(bottom):
            bottom = float(flux.dg(-a * (1 - 1e-3)))
    z = np.linspace(top, bottom, count + 1)
    mid = 0.5 * (z[:-1] + z[1:])
    return MonotoneProfile(z, optimal_profile(flux, mid), flux.U)


def _project(z: np.ndarray, s: np.ndarray, U: float) -> tuple[np.ndarray, np.ndarray]:
    z = np.sort(z)
    gap = 1e-12 * max(1.0, float(np.ptp(z)))
    z = z[0] + np.concatenate(([0.0], np.cumsum(np.maximum(np.diff(z), gap))))
    s = np.clip(np.sort(s)[::-1], -0.5 * U, 0.5 * U)
    return z, s


def maximize_ratio(flux: FluxFunction, budget: int, seed=0,
                   count: int = 64, step: float = 0.02) -> tuple[float, MonotoneProfile]:
    """Stochastic hill-climbing on the ratio, warm-started from the sampled ``s_g``.

    Each of the ``budget`` iterations perturbs a few breakpoints or values,
    projects back onto the monotone set (sorting and clipping) and keeps the
    candidate if the ratio does not decrease.  The step size shrinks on
    repeated rejections.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    c_sharp = sharp_constant(flux)
    rng = np.random.default_rng(seed)
    best = sampled_optimal_profile(flux, count)
    best_ratio = evaluate_sides(best, flux, c_sharp)[2]
    width = float(np.ptp(best.breakpoints))
    scale = step
    rejected = 0
    for _ in range(budget):
        z, s = best.breakpoints.copy(), best.values.copy()
        k = rng.integers(1, 4)
        if rng.random() < 0.5:
            idx = rng.integers(0, len(z), k)
            z[idx] += rng.normal(0.0, scale * width / count, k)
        else:
            idx = rng.integers(0, len(s), k)
            s[idx] += rng.normal(0.0, scale * flux.U / count, k)
        z, s = _project(z, s, flux.U)
        cand = MonotoneProfile(z, s, flux.U)
        ratio = evaluate_sides(cand, flux, c_sharp)[2]
        if ratio >= best_ratio:
            best, best_ratio, rejected = cand, ratio, 0
        else:
            rejected += 1
            if rejected >= 50:
                scale, rejected = max(0.5 * scale, 1e-6), 0
    return best_ratio, best


@dataclass
class OracleCampaign:
    seeds: np.ndarray
    ratios: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios)) if len(self.ratios) else 0.0

    def violations(self, tol: float = 1e-9) -> int:
        return int(np.sum(self.ratios > 1 + tol))


def run_campaign(flux: FluxFunction, seeds, count_range: tuple[int, int] = (1, 32),
                 z_range: tuple[float, float] = (-1.0, 1.0)) -> OracleCampaign:
    """Ratio of one random profile per seed; the step count is drawn from ``count_range`` by the same seed."""
    c_sharp = sharp_constant(flux)
    seeds = np.asarray(list(seeds), dtype=np.int64)
    ratios = np.empty(len(seeds))
    for i, seed in enumerate(seeds):
        count = int(np.random.default_rng([int(seed), 1]).integers(count_range[0], count_range[1] + 1))
        prof = random_monotone_profile(int(seed), count, flux.U, z_range)
        ratios[i] = evaluate_sides(prof, flux, c_sharp)[2]
    return OracleCampaign(seeds, ratios)
