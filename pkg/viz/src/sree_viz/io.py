"""Readers for the solver's CSV and manifest outputs.

All readers validate headers and shapes; a corrupt or missing file
raises InputError with a message naming what was expected.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FIELD_FILES = {name: f"fields_{name}.csv" for name in ("k", "c", "K")}
RESIDUALS_FILE = "residuals.csv"
CERTIFICATION_FILE = "certification.csv"
PATH_FILE = "path.csv"
MANIFEST_FILE = "manifest.json"


class InputError(RuntimeError):
    """A required input is missing or does not parse."""


def _read_rows(path: Path, expected_header: str) -> np.ndarray:
    if not path.exists():
        raise InputError(f"missing input file {path}")
    with open(path) as fh:
        header = fh.readline().strip()
        if header != expected_header:
            raise InputError(
                f"{path}: expected header '{expected_header}', got '{header}'"
            )
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise InputError(f"{path}: failed to parse numeric rows: {exc}") from exc
    if data.size == 0:
        raise InputError(f"{path}: no data rows")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{path}: non-finite values")
    return data


def read_long_field(path: Path):
    """Pivot a long-format (t, z, value) table into (times, locations, matrix)."""
    data = _read_rows(path, "t,z,value")
    if data.shape[1] != 3:
        raise InputError(f"{path}: expected 3 columns")
    t = np.unique(data[:, 0])
    z = np.unique(data[:, 1])
    if data.shape[0] != t.size * z.size:
        raise InputError(f"{path}: rows do not form a complete (t, z) grid")
    matrix = np.full((t.size, z.size), np.nan)
    ti = np.searchsorted(t, data[:, 0])
    zi = np.searchsorted(z, data[:, 1])
    matrix[ti, zi] = data[:, 2]
    if np.any(np.isnan(matrix)):
        raise InputError(f"{path}: duplicate or missing grid entries")
    return t, z, matrix


def read_residuals(path: Path):
    data = _read_rows(path, "sweep,y_norm_residual")
    if data.shape[1] != 2:
        raise InputError(f"{path}: expected 2 columns")
    return data[:, 0].astype(int), data[:, 1]


def read_certification(path: Path) -> dict:
    if not path.exists():
        raise InputError(f"missing input file {path}")
    out = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "name,value":
            raise InputError(f"{path}: expected header 'name,value'")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            name, _, value = line.partition(",")
            try:
                out[name] = float(value)
            except ValueError as exc:
                raise InputError(f"{path}: bad value for '{name}'") from exc
    expected = {"fixed_point_sup", "dynamics_sup", "euler_sup"}
    if set(out) != expected:
        raise InputError(f"{path}: expected rows {sorted(expected)}")
    return out


def read_path(path: Path) -> dict:
    data = _read_rows(path, "t,k,c,theta,dynamics_residual,euler_residual")
    if data.shape[1] != 6:
        raise InputError(f"{path}: expected 6 columns")
    names = ("t", "k", "c", "theta", "dynamics_residual", "euler_residual")
    return {name: data[:, i] for i, name in enumerate(names)}


def read_manifest(indir: Path) -> dict:
    path = indir / MANIFEST_FILE
    if not path.exists():
        raise InputError(f"missing input file {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
