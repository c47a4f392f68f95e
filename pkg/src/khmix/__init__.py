"""Kelvin-Helmholtz mixing-layer laboratory.

A vorticity-streamfunction Navier-Stokes solver on a periodic channel,
mixing-layer diagnostics, closed-form rarefaction references, a brute-force
oracle for the sharp interpolation inequality, and verdicts on the
scale-invariant growth bounds.
"""
from .bounds import BoundVerdict, Tolerances, scale_invariance_report, tail_ratio, verify_theorem
from .config import ConfigError, RunConfig, SweepConfig, load_config
from .conslaw import (FluxFunction, RarefactionReference, flux_g, optimal_profile, quadratic_flux,
                      rarefaction_diagnostics, rarefaction_profile, sharp_constant)
from .diagnostics import CSV_COLUMNS, DiagnosticsRecord, compute_record, identity_residuals
from .fields import Grid, Params, TruncationWarning, make_grid
from .initial_data import InitialDataSpec, build_initial_vorticity, validate_initial_data
from .oracle import MonotoneProfile, evaluate_sides, maximize_ratio, random_monotone_profile
from .solver import FlowState, poisson_solve, rescale_state, run, step

__version__ = "0.1.0"

__all__ = [
    "BoundVerdict", "CSV_COLUMNS", "ConfigError", "DiagnosticsRecord", "FlowState", "FluxFunction",
    "Grid", "InitialDataSpec", "MonotoneProfile", "Params", "RarefactionReference", "RunConfig",
    "SweepConfig", "Tolerances", "TruncationWarning", "build_initial_vorticity", "compute_record",
    "evaluate_sides", "flux_g", "identity_residuals", "load_config", "make_grid", "maximize_ratio",
    "optimal_profile", "poisson_solve", "quadratic_flux", "random_monotone_profile",
    "rarefaction_diagnostics", "rarefaction_profile", "rescale_state", "run", "scale_invariance_report",
    "sharp_constant", "step", "tail_ratio", "validate_initial_data", "verify_theorem",
]
