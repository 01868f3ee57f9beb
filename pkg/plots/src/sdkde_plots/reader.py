"""CSV readers for the experiment runner's output files.

Inputs are never modified; schema violations raise :class:`SchemaError`
naming the offending column.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

RESULTS_COLUMNS = ("experiment", "method", "target", "n", "seed", "sigma", "mise", "kl", "wall_ms")
RASTER_COLUMNS = ("x0", "x1", "p_true", "p_silverman", "p_sdkde")

_STRING_COLUMNS = {"experiment", "method", "target"}
_INT_COLUMNS = {"n", "seed"}


class SchemaError(ValueError):
    """An input CSV does not match the documented schema."""


def _check_header(header, expected, path):
    if header is None:
        raise SchemaError(f"{path}: file is empty")
    for got, want in zip(header, expected):
        if got != want:
            raise SchemaError(f"{path}: expected column {want!r}, found {got!r}")
    if len(header) < len(expected):
        raise SchemaError(f"{path}: missing column {expected[len(header)]!r}")
    if len(header) > len(expected):
        raise SchemaError(f"{path}: unexpected column {header[len(expected)]!r}")


def _load(path, expected):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, expected, path)
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    columns = {}
    for idx, name in enumerate(expected):
        raw = [row[idx] for row in rows]
        if name in _STRING_COLUMNS:
            columns[name] = np.array(raw)
        elif name in _INT_COLUMNS:
            columns[name] = np.array([int(v) for v in raw])
        else:
            try:
                columns[name] = np.array([float(v) for v in raw])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric value in column {name!r}: {exc}") from None
    return columns


def load_results(path) -> dict:
    """Load a runner results CSV into a column dict."""
    return _load(path, RESULTS_COLUMNS)


def load_raster(path) -> dict:
    """Load a 2D density raster CSV into a column dict."""
    return _load(path, RASTER_COLUMNS)
