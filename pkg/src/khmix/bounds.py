"""Verdicts for the scale-invariant growth bounds of the mixing layer.

The bounds are asymptotic,

    limsup l/(Ut) <= 1/(2 sqrt 3),  limsup E/(U^2 t) <= 1/12,
    limsup D/(U^2 t) <= 1/(4 sqrt 3),

together with ``m(t) = 0``.  A finite run can only approximate the limsup;
here it is replaced by the maximum over the final ``fraction`` of the run.
A run can therefore falsify a bound but never confirm the limit statement,
and no lower bound is checked.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

SCHEMA_VERSION = 1

BOUNDS = {
    "l": 1.0 / (2.0 * math.sqrt(3.0)),
    "E": 1.0 / 12.0,
    "D": 1.0 / (4.0 * math.sqrt(3.0)),
}
# power of U in the normalization q / (U^p t)
_U_POWER = {"l": 1, "E": 2, "D": 2}


@dataclass(frozen=True)
class Tolerances:
    """Additive slack on each normalized bound; ``m`` is checked against ``m * U * H``."""

    l: float = 0.05
    E: float = 0.01
    D: float = 0.02
    m: float = 1e-6
    fraction: float = 0.5

    @classmethod
    def closed_form(cls) -> "Tolerances":
        return cls(l=1e-9, E=1e-9, D=1e-9, m=1e-9)

    def __post_init__(self):
        for name in ("l", "E", "D", "m"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"tolerance {name} must be >= 0")
        if not 0 < self.fraction <= 1:
            raise ValueError("tail fraction must lie in (0, 1]")


@dataclass
class BoundVerdict:
    quantity: str
    observed: float
    bound: float
    tolerance: float
    window: tuple[float, float]
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.observed <= self.bound + self.tolerance)

    @property
    def margin(self) -> float:
        """``bound - observed``; negative margins within tolerance still pass."""
        return self.bound - self.observed

    def as_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        d["margin"] = self.margin
        return d


class InsufficientSamplesError(ValueError):
    pass


def _columns(series) -> tuple[np.ndarray, dict]:
    t = np.array([r.t for r in series], dtype=float)
    cols = {q: np.array([getattr(r, q) for r in series], dtype=float) for q in ("l", "E", "D", "m")}
    return t, cols


def tail_window(t: np.ndarray, fraction: float = 0.5) -> tuple[float, float]:
    T = float(np.max(t))
    return (1.0 - fraction) * T, T


def tail_ratio(series: Sequence, quantity: str, U: float, fraction: float = 0.5,
               min_samples: int = 10) -> float:
    """Max over ``t`` in the final ``fraction`` of the run of ``l/(Ut)`` or ``E/(U^2 t)``, ``D/(U^2 t)``."""
    if quantity not in BOUNDS:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {sorted(BOUNDS)}")
    t, cols = _columns(series)
    if len(t) == 0 or not np.max(t) > 0:
        raise InsufficientSamplesError("series must span a positive time interval")
    lo, _ = tail_window(t, fraction)
    tail = (t >= lo * (1 - 1e-12)) & (t > 0)
    if np.count_nonzero(tail) < min_samples:
        raise InsufficientSamplesError(
            f"{np.count_nonzero(tail)} samples in the tail window, need {min_samples}")
    ratio = cols[quantity][tail] / (U ** _U_POWER[quantity] * t[tail])
    return float(np.max(ratio))


def verify_theorem(series: Sequence, U: float, H: float,
                   tolerances: Tolerances | None = None) -> list[BoundVerdict]:
    """Verdicts for ``l``, ``E``, ``D`` on the tail window and for ``max |m(t)|`` over the whole run."""
    tol = tolerances or Tolerances()
    t, cols = _columns(series)
    window = tail_window(t, tol.fraction)
    out = [BoundVerdict(q, tail_ratio(series, q, U, tol.fraction), BOUNDS[q], getattr(tol, q), window)
           for q in ("l", "E", "D")]
    out.append(BoundVerdict("m", float(np.max(np.abs(cols["m"]))), 0.0, tol.m * U * H,
                            (float(t[0]), float(t[-1]))))
    return out


def all_passed(verdicts: Sequence[BoundVerdict]) -> bool:
    return all(v.passed for v in verdicts)


def format_table(verdicts: Sequence[BoundVerdict], title: str | None = None) -> str:
    lines = [] if title is None else [title]
    lines.append(f"{'quantity':<9}{'observed':>14}{'bound':>14}{'tolerance':>12}{'margin':>14}  status")
    for v in verdicts:
        lines.append(f"{v.quantity:<9}{v.observed:>14.6g}{v.bound:>14.6g}{v.tolerance:>12.3g}"
                     f"{v.margin:>14.6g}  {'pass' if v.passed else 'FAIL'}")
    return "\n".join(lines)


def verdict_report(runs: dict[str, Sequence[BoundVerdict]], meta: dict | None = None) -> dict:
    """JSON-ready verdict document for one or more named runs."""
    return {
        "schema_version": SCHEMA_VERSION,
        "meta": meta or {},
        "runs": {name: {"passed": all_passed(v), "verdicts": [x.as_dict() for x in v]}
                 for name, v in runs.items()},
        "passed": all(all_passed(v) for v in runs.values()),
    }


def dump_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class ScaleReport:
    """Differences of the normalized ratios at matched rescaled times ``t' = t / L``."""

    times: np.ndarray
    differences: dict

    @property
    def max_difference(self) -> dict:
        return {q: float(np.max(np.abs(d))) if len(d) else 0.0 for q, d in self.differences.items()}


def normalized_ratios(series: Sequence, U: float) -> tuple[np.ndarray, dict]:
    t, cols = _columns(series)
    keep = t > 0
    return t[keep], {q: cols[q][keep] / (U ** _U_POWER[q] * t[keep]) for q in BOUNDS}


def scale_invariance_report(series_a: Sequence, L_a: float, series_b: Sequence, L_b: float,
                            U: float, U_b: float | None = None) -> ScaleReport:
    """Compare ``l/(Ut)``, ``E/(U^2 t)``, ``D/(U^2 t)`` of two runs at matched ``t / L``.

    The second series is linearly interpolated onto the rescaled sample
    times of the first within their common range.  The differences need not
    vanish for distinct physical ``L``; only the bounds are ``L``-uniform.
    """
    if U_b is not None and not np.isclose(U, U_b):
        raise ValueError(f"runs use different U ({U} vs {U_b})")
    if not (L_a > 0 and L_b > 0):
        raise ValueError("L must be positive")
    ta, ra = normalized_ratios(series_a, U)
    tb, rb = normalized_ratios(series_b, U)
    sa, sb = ta / L_a, tb / L_b
    common = (sa >= sb.min() - 1e-12) & (sa <= sb.max() + 1e-12) if len(sb) else np.zeros_like(sa, bool)
    if not np.any(common):
        raise ValueError("runs share no rescaled time window")
    diffs = {q: ra[q][common] - np.interp(sa[common], sb, rb[q]) for q in BOUNDS}
    return ScaleReport(sa[common], diffs)
