"""CSV time series and binary vorticity snapshots.

CSV files carry a header row with the columns of :data:`CSV_COLUMNS` in
order; floats are written with ``repr`` so a re-read is exact and two runs
of the same configuration produce byte-identical files.

A snapshot is a pair ``<stem>.json`` / ``<stem>.bin``.  The binary file is
the raw ``omega`` array, little-endian float64, C order, shape
``(Ny, Nz)`` (``y`` varies slowest).  The JSON header holds the grid, the
time, the shape/dtype and a SHA-256 hash of the run parameters.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRecord
from .fields import Grid

SNAPSHOT_VERSION = 1


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


class CSVSink:
    """Streams records to a CSV file; usable as the ``sink`` of :func:`khmix.solver.run`."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(CSV_COLUMNS)
        self.records: list[DiagnosticsRecord] = []

    def emit(self, rec: DiagnosticsRecord) -> None:
        self._writer.writerow([format_float(v) for v in rec.row()])
        self.records.append(rec)

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_csv(path, records) -> None:
    with CSVSink(path) as sink:
        for rec in records:
            sink.emit(rec)


def read_csv(path) -> list[DiagnosticsRecord]:
    """Records from a CSV written by :class:`CSVSink`; columns must match exactly."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(DiagnosticsRecord.from_row(row))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out


def params_hash(params) -> str:
    blob = json.dumps(asdict(params), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def write_snapshot(stem, omega: np.ndarray, grid: Grid, t: float, params) -> tuple[Path, Path]:
    stem = Path(stem)
    data = np.ascontiguousarray(omega, dtype="<f8")
    if data.shape != grid.shape:
        raise ValueError(f"omega shape {data.shape} does not match grid {grid.shape}")
    header = {
        "version": SNAPSHOT_VERSION,
        "t": float(t),
        "grid": {"L": grid.L, "H": grid.H, "Ny": grid.Ny, "Nz": grid.Nz},
        "shape": list(data.shape),
        "dtype": "<f8",
        "order": "C",
        "params_sha256": params_hash(params),
    }
    bin_path, json_path = stem.with_suffix(".bin"), stem.with_suffix(".json")
    bin_path.write_bytes(data.tobytes(order="C"))
    json_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return json_path, bin_path


def read_snapshot(stem) -> tuple[np.ndarray, Grid, float, dict]:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text(encoding="utf-8"))
    g = header["grid"]
    grid = Grid.uniform(g["L"], g["H"], g["Ny"], g["Nz"])
    raw = np.frombuffer(stem.with_suffix(".bin").read_bytes(), dtype=header["dtype"])
    if raw.size != grid.Ny * grid.Nz:
        raise ValueError(f"{stem}.bin holds {raw.size} values, header says {grid.shape}")
    return raw.reshape(grid.shape).astype(float), grid, float(header["t"]), header
