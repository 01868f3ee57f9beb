"""Pluggable score-function providers.

A score field maps points to gradient-of-log-density vectors.  Four
providers are available: the exact oracle of a known target, a
noise-corrupted oracle, the gradient of the log of a Gaussian-kernel KDE,
and a tabulated field interpolated from a CSV grid (so externally computed
scores can be injected without any model code).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .rng import substream

__all__ = [
    "ExactScore",
    "NoisySpec",
    "NoisyScore",
    "EmpiricalScore",
    "TabulatedScore",
    "exact_score",
    "noisy_score",
    "empirical_score",
    "load_score_table",
    "write_score_table",
]

_CHUNK = 1 << 22


def _as_points(x, dim):
    arr = np.asarray(x, dtype=float)
    if dim == 1:
        single = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if arr.ndim != 1:
            raise ValueError(f"expected scalar or 1D points, got shape {arr.shape}")
    else:
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        if arr.shape[1] != dim:
            raise ValueError(f"expected points of dimension {dim}, got shape {np.shape(x)}")
    return arr, single


class ExactScore:
    """Analytic score of a known target distribution."""

    def __init__(self, model):
        self.model = model
        self.dim = model.dim

    def __call__(self, x):
        return self.model.score(x)


@dataclass(frozen=True)
class NoisySpec:
    """Base field plus Gaussian perturbation level and the perturbation seed."""

    base: object
    sigma: float
    seed: int

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError(f"noise level must be nonnegative, got {self.sigma}")


class NoisyScore:
    """Score field perturbed by additive Gaussian noise.

    In ``per-point`` mode the perturbation of point index ``i`` is the fixed
    draw ``sigma * z_i`` from the spec's seed, independent of sigma and of
    how many points are queried, so a sweep over noise levels sees the same
    underlying draws.  In ``per-call`` mode fresh noise is drawn on every
    evaluation (not thread-safe; intended for single-threaded studies).
    """

    def __init__(self, spec: NoisySpec, mode: str = "per-point"):
        if mode not in ("per-point", "per-call"):
            raise ValueError(f"unknown noise mode {mode!r}")
        self.base = spec.base
        self.sigma = float(spec.sigma)
        self.seed = spec.seed
        self.mode = mode
        self.dim = spec.base.dim
        self._call_rng = substream(spec.seed, "score-noise-per-call")

    def _per_point_noise(self, indices, coord_shape):
        count = int(np.max(indices)) + 1
        rng = substream(self.seed, "score-noise")
        if len(coord_shape) == 1:
            z = rng.standard_normal(count)
        else:
            z = rng.standard_normal((count, coord_shape[1]))
        return z[indices]

    def __call__(self, x, indices=None):
        x, single = _as_points(x, self.dim)
        base_vals = np.asarray(self.base(x if not single else x[0]), dtype=float)
        base_vals = base_vals.reshape(x.shape)
        if self.sigma == 0.0:
            return base_vals[0] if single else base_vals
        if self.mode == "per-call":
            z = self._call_rng.standard_normal(x.shape)
        else:
            indices = np.arange(len(x)) if indices is None else np.asarray(indices, dtype=np.int64)
            if indices.shape != (len(x),):
                raise ValueError("indices must give one row index per query point")
            z = self._per_point_noise(indices, x.shape)
        out = base_vals + self.sigma * z
        return out[0] if single else out


class EmpiricalScore:
    """Gradient of the log of a Gaussian-kernel KDE on a fixed data set.

    Uses the closed form ``sum_i (x_i - x) w_i / (h^2 sum_i w_i)`` with
    ``w_i = exp(-|x - x_i|^2 / (2 h^2))``.  Where every weight underflows to
    zero the score of the nearest data point's kernel alone,
    ``(x_nearest - x) / h^2``, is returned so far-tail queries stay finite.
    """

    def __init__(self, data, bandwidth: float):
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            self.dim = 1
        elif data.ndim == 2:
            self.dim = data.shape[1]
        else:
            raise ValueError(f"data must be (n,) or (n, d), got shape {data.shape}")
        if len(data) < 2:
            raise ValueError("empirical score requires at least 2 data points")
        if bandwidth <= 0.0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth}")
        self.data = data.copy()
        self.data.flags.writeable = False
        self.bandwidth = float(bandwidth)

    def __call__(self, x):
        x, single = _as_points(x, self.dim)
        pts = self.data if self.dim > 1 else self.data[:, None]
        qry = x if self.dim > 1 else x[:, None]
        if len(qry) == len(pts) and qry.shape == pts.shape and np.array_equal(qry, pts):
            out = self._scores_at_data(pts)
        else:
            out = self._scores_generic(qry, pts)
        if self.dim == 1:
            out = out[:, 0]
        return out[0] if single else out

    def _weights(self, qry, pts, w, tmp):
        """Fill ``w`` with exp(-|q - p|^2 / (2 h^2)) for a query/center block."""
        coef = -0.5 / self.bandwidth**2
        for j in range(pts.shape[1]):
            np.subtract(qry[:, j, None], pts[None, :, j], out=tmp)
            tmp *= tmp
            if j == 0:
                w[:] = tmp
            else:
                w += tmp
        w *= coef
        np.exp(w, out=w)

    def _rescue_dead(self, qry, pts, wsum, numer):
        """Nearest-kernel fallback where every weight underflowed to zero."""
        for i in np.flatnonzero(wsum == 0.0):
            nearest = ((pts - qry[i]) ** 2).sum(axis=1).argmin()
            numer[i] = pts[nearest] - qry[i]
            wsum[i] = 1.0

    def _scores_generic(self, qry, pts):
        h2 = self.bandwidth**2
        n = len(pts)
        wsum = np.empty(len(qry))
        numer = np.empty_like(qry)
        rows = max(1, _CHUNK // n)
        w = np.empty((min(rows, len(qry)), n))
        tmp = np.empty_like(w)
        for lo in range(0, len(qry), rows):
            m = min(rows, len(qry) - lo)
            w_b, tmp_b = w[:m], tmp[:m]
            block = qry[lo:lo + m]
            self._weights(block, pts, w_b, tmp_b)
            wsum[lo:lo + m] = w_b.sum(axis=1)
            for j in range(pts.shape[1]):
                np.subtract(pts[None, :, j], block[:, j, None], out=tmp_b)
                tmp_b *= w_b
                numer[lo:lo + m, j] = tmp_b.sum(axis=1)
        self._rescue_dead(qry, pts, wsum, numer)
        return numer / (wsum[:, None] * h2)

    def _scores_at_data(self, pts):
        # Scores at the data points themselves: the weight matrix is
        # symmetric, so each off-diagonal block is computed once and
        # accumulated into both its row and column sums.
        h2 = self.bandwidth**2
        n = len(pts)
        wsum = np.zeros(n)
        numer = np.zeros_like(pts)
        rows = max(1, int(np.sqrt(_CHUNK)))
        w = np.empty((min(rows, n), min(rows, n)))
        tmp = np.empty_like(w)
        for i0 in range(0, n, rows):
            mi = min(rows, n - i0)
            bi = pts[i0:i0 + mi]
            for j0 in range(0, i0 + mi, rows):
                mj = min(rows, n - j0, i0 + mi - j0)
                bj = pts[j0:j0 + mj]
                w_b, tmp_b = w[:mi, :mj], tmp[:mi, :mj]
                self._weights(bi, bj, w_b, tmp_b)
                diagonal = i0 == j0
                wsum[i0:i0 + mi] += w_b.sum(axis=1)
                if not diagonal:
                    wsum[j0:j0 + mj] += w_b.sum(axis=0)
                for k in range(pts.shape[1]):
                    np.subtract(bj[None, :, k], bi[:, k, None], out=tmp_b)
                    tmp_b *= w_b
                    numer[i0:i0 + mi, k] += tmp_b.sum(axis=1)
                    if not diagonal:
                        numer[j0:j0 + mj, k] -= tmp_b.sum(axis=0)
        self._rescue_dead(pts, pts, wsum, numer)
        return numer / (wsum[:, None] * h2)


class TabulatedScore:
    """Score field interpolated from values on a regular grid.

    1D tables use piecewise-linear interpolation; 2D tables use bilinear
    interpolation.  Queries outside the table extrapolate linearly from the
    boundary cells.
    """

    def __init__(self, axes, values):
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        values = np.asarray(values, dtype=float)
        self.dim = len(axes)
        if self.dim not in (1, 2):
            raise ValueError("tabulated scores support 1 or 2 dimensions")
        for a in axes:
            if a.ndim != 1 or len(a) < 2 or np.any(np.diff(a) <= 0):
                raise ValueError("each grid axis must be strictly increasing with >= 2 nodes")
        expect = tuple(len(a) for a in axes) + (self.dim,)
        if values.shape != expect:
            raise ValueError(f"values must have shape {expect}, got {values.shape}")
        self.axes = axes
        self.values = values
        self._interp = RegularGridInterpolator(
            axes, values, method="linear", bounds_error=False, fill_value=None
        )

    def __call__(self, x):
        x, single = _as_points(x, self.dim)
        qry = x[:, None] if self.dim == 1 else x
        out = self._interp(qry)
        if self.dim == 1:
            out = out[:, 0]
        return out[0] if single else out


def exact_score(model) -> ExactScore:
    """Score field that delegates to the model's analytic score."""
    return ExactScore(model)


def noisy_score(spec: NoisySpec, mode: str = "per-point") -> NoisyScore:
    """Score field perturbed per the given noise specification."""
    return NoisyScore(spec, mode=mode)


def empirical_score(data, bandwidth: float) -> EmpiricalScore:
    """Score field of the Gaussian-kernel KDE built on ``data`` with ``bandwidth``."""
    return EmpiricalScore(data, bandwidth)


def _table_header(dim):
    return ["x0", "s0"] if dim == 1 else ["x0", "x1", "s0", "s1"]


def write_score_table(path, axes, values) -> None:
    """Write a score table as CSV with header ``x0[,x1],s0[,s1]`` in row-major order."""
    table = TabulatedScore(axes, values)  # reuse validation
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_table_header(table.dim))
        if table.dim == 1:
            for x, s in zip(table.axes[0], table.values[:, 0]):
                writer.writerow([repr(float(x)), repr(float(s))])
        else:
            for i, x0 in enumerate(table.axes[0]):
                for j, x1 in enumerate(table.axes[1]):
                    s0, s1 = table.values[i, j]
                    writer.writerow([repr(float(x0)), repr(float(x1)), repr(float(s0)), repr(float(s1))])


def load_score_table(path) -> TabulatedScore:
    """Load a CSV score table written in the ``write_score_table`` format."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == _table_header(1):
            dim = 1
        elif header == _table_header(2):
            dim = 2
        else:
            raise ValueError(f"unrecognized score-table header {header!r} in {path}")
        rows = np.array([[float(v) for v in row] for row in reader])
    if rows.size == 0:
        raise ValueError(f"score table {path} has no data rows")
    if dim == 1:
        return TabulatedScore((rows[:, 0],), rows[:, 1:2])
    x0 = np.unique(rows[:, 0])
    x1 = np.unique(rows[:, 1])
    if len(x0) * len(x1) != len(rows):
        raise ValueError(f"score table {path} is not a complete regular grid")
    values = rows[:, 2:4].reshape(len(x0), len(x1), 2)
    grid0 = rows[:, 0].reshape(len(x0), len(x1))
    grid1 = rows[:, 1].reshape(len(x0), len(x1))
    if not (np.all(grid0 == x0[:, None]) and np.all(grid1 == x1[None, :])):
        raise ValueError(f"score table {path} rows are not in row-major grid order")
    return TabulatedScore((x0, x1), values)
