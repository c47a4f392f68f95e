"""Run orchestration: one simulation to a directory of artifacts, or a sweep over ``L``.

A run directory holds

* ``config.json``    the fully defaulted configuration,
* ``series.csv``     diagnostics (see :data:`khmix.diagnostics.CSV_COLUMNS`),
* ``profiles.csv``   ``u_bar(z)`` at up to 11 sample times (column ``z`` then one column per time),
* ``verdicts.json``  bound verdicts (versioned schema),
* ``summary.json``   step counts and monitor tallies (wall-clock times are logged only),
* ``snap_NNNNN.{json,bin}`` vorticity snapshots when ``snapshot_every > 0``.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bounds import BoundVerdict, all_passed, dump_report, verdict_report, verify_theorem
from .config import RunConfig, SweepConfig, dump_config
from .io import CSVSink, format_float, write_snapshot
from .solver import RunSummary, run

log = logging.getLogger(__name__)

N_PROFILES = 10


@dataclass
class RunResult:
    directory: Path
    summary: RunSummary
    verdicts: list[BoundVerdict]

    @property
    def passed(self) -> bool:
        return all_passed(self.verdicts)


def _write_profiles(path: Path, z: np.ndarray, profiles: list[tuple[float, np.ndarray]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z"] + [f"t={format_float(t)}" for t, _ in profiles])
        cols = [p for _, p in profiles]
        for j, zj in enumerate(z):
            w.writerow([format_float(zj)] + [format_float(c[j]) for c in cols])


def read_profiles(path) -> tuple[np.ndarray, list[float], np.ndarray]:
    """``(z, times, u_bar)`` with ``u_bar`` of shape ``(len(times), len(z))``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], np.array(rows[1:], dtype=float)
    times = [float(h.split("=", 1)[1]) for h in head[1:]]
    return body[:, 0], times, body[:, 1:].T


def execute_run(cfg: RunConfig, root=None) -> RunResult:
    """Run one configuration and write its artifacts; returns the verdicts."""
    out = cfg.output_path(root)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.json")
    params = cfg.params
    n_samples = int(round(params.T / cfg.interval))
    every = max(1, n_samples // N_PROFILES)
    profiles: list[tuple[float, np.ndarray]] = []
    counter = {"i": 0}
    grid_z: list = []

    def on_sample(state):
        if counter["i"] % every == 0:
            profiles.append((state.t, state.ubar.copy()))
            if not grid_z:
                grid_z.append(state.grid.z)
        counter["i"] += 1

    def snapshot(state, index):
        write_snapshot(out / f"snap_{index:05d}", state.omega, state.grid, state.t, params)

    with CSVSink(out / "series.csv") as sink:
        summary = run(params, cfg.initial, sink, sample_interval=cfg.interval,
                      snapshot_every=cfg.snapshot_every, snapshot_writer=snapshot,
                      state_callback=on_sample)
        records = sink.records
    _write_profiles(out / "profiles.csv", grid_z[0], profiles)
    verdicts = verify_theorem(records, params.U, params.H, cfg.verdict)
    dump_report(verdict_report({out.name: verdicts},
                               meta={"L": params.L, "U": params.U, "H": params.H, "T": params.T,
                                     "seed": cfg.seed}),
                out / "verdicts.json")
    # wall-clock fields are kept out of the deterministic artifacts
    stable = {k: v for k, v in summary.as_dict().items() if k not in ("wall_seconds", "seconds_per_step")}
    (out / "summary.json").write_text(json.dumps(stable, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("run L=%g: %d steps, %.3f s/step", params.L, summary.steps, summary.seconds_per_step)
    return RunResult(out, summary, verdicts)


def _run_in_worker(args):
    cfg, root = args
    return execute_run(cfg, root)


def execute_sweep(cfg: SweepConfig, root=None) -> list[RunResult]:
    """All runs of the sweep, in parallel across runs (each run stays sequential)."""
    runs = cfg.runs()
    if cfg.workers == 1 or len(runs) == 1:
        results = [execute_run(r, root) for r in runs]
    else:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(runs))) as pool:
            results = list(pool.map(_run_in_worker, [(r, root) for r in runs]))
    base = replace(cfg.base, output_dir=cfg.base.output_dir or "sweep").output_path(root)
    base.mkdir(parents=True, exist_ok=True)
    dump_report(verdict_report({f"L{r.params.L:g}": res.verdicts for r, res in zip(runs, results)},
                               meta={"L": list(cfg.L), "U": cfg.base.params.U}),
                base / "verdicts.json")
    return results
