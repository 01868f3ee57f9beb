"""Density estimators: Silverman-bandwidth KDE, score-debiased KDE, and variants.

The score-debiased estimator moves every sample one step of size
``bandwidth^2 / 2`` along a score field before smoothing; that single step
cancels the leading second-order smoothing bias, leaving a fourth-order
pointwise bias and an integrated squared error decaying like
``n^(-8/(d+8))`` instead of the classical ``n^(-4/(d+4))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import GaussianKernel, gaussian_kernel
from .scores import empirical_score

__all__ = [
    "DegenerateDataError",
    "DensityEstimate",
    "SdkdeParams",
    "silverman_bandwidth",
    "optimal_params",
    "kde",
    "sd_kde",
    "emp_sd_kde",
    "iterated_sd_kde",
]

_CHUNK = 1 << 22


class DegenerateDataError(ValueError):
    """Raised when the data carry no usable spread for bandwidth selection."""


def _as_data(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        return arr, 1
    if arr.ndim == 2 and arr.shape[1] >= 1:
        return arr, arr.shape[1]
    raise ValueError(f"data must be (n,) or (n, d), got shape {arr.shape}")


def _column_scales(data):
    scales = data.std(axis=0, ddof=1)
    if np.any(~np.isfinite(scales)) or np.any(scales <= 0.0):
        raise DegenerateDataError("data have zero spread along some dimension")
    return scales


class DensityEstimate:
    """Gaussian-kernel density estimate over a fixed (possibly shifted) point set.

    For multivariate data the points were standardized to unit sample
    variance per dimension before smoothing; ``scales`` records the
    standardization and evaluation transforms back by its Jacobian.
    Evaluation sums kernel contributions in ascending point-index order, so
    repeat evaluations are bit-reproducible.
    """

    def __init__(self, points, bandwidth: float, kernel: GaussianKernel, scales=None):
        points, dim = _as_data(points)
        if len(points) < 1:
            raise ValueError("estimate requires at least one point")
        if bandwidth <= 0.0 or not math.isfinite(bandwidth):
            raise ValueError(f"bandwidth must be positive and finite, got {bandwidth}")
        if kernel.dim != dim:
            raise ValueError(f"kernel dimension {kernel.dim} does not match data dimension {dim}")
        if scales is not None:
            scales = np.asarray(scales, dtype=float)
            if scales.shape != (dim,) or np.any(scales <= 0.0):
                raise ValueError("scales must be positive with one entry per dimension")
        self.points = points.copy()
        self.points.flags.writeable = False
        self.bandwidth = float(bandwidth)
        self.kernel = kernel
        self.scales = scales
        self.dim = dim
        self.n = len(points)

    def evaluate(self, x):
        """Estimated density at point(s) ``x``."""
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            single = x.ndim == 0
            qry = np.atleast_1d(x)[:, None]
            centers = self.points[:, None]
        else:
            single = x.ndim == 1
            qry = np.atleast_2d(x)
            if qry.shape[1] != self.dim:
                raise ValueError(f"expected points of dimension {self.dim}, got shape {x.shape}")
            centers = self.points
        jac = 1.0
        if self.scales is not None:
            qry = qry / self.scales
            centers = centers / self.scales
            jac = float(np.prod(self.scales))
        inv_h2 = 1.0 / self.bandwidth**2
        const = 1.0 / (self.n * self.bandwidth**self.dim * jac)
        out = np.empty(len(qry))
        rows = max(1, _CHUNK // self.n)
        sq = np.empty((min(rows, len(qry)), self.n))
        tmp = np.empty_like(sq)
        for lo in range(0, len(qry), rows):
            m = min(rows, len(qry) - lo)
            sq_b, tmp_b = sq[:m], tmp[:m]
            for j in range(self.dim):
                np.subtract(qry[lo:lo + m, j, None], centers[None, :, j], out=tmp_b)
                tmp_b *= tmp_b
                if j == 0:
                    sq_b[:] = tmp_b
                else:
                    sq_b += tmp_b
            sq_b *= inv_h2
            self.kernel.profile(sq_b, out=sq_b)
            out[lo:lo + m] = sq_b.sum(axis=1)
        out *= const
        return float(out[0]) if single else out

    __call__ = evaluate


@dataclass(frozen=True)
class SdkdeParams:
    """Bandwidth and score-step size for the debiased estimator.

    ``step_size`` equals ``bandwidth^2 / 2`` when produced by
    :func:`optimal_params`; that is the choice that cancels the leading bias.
    """

    bandwidth: float
    step_size: float
    prefactor: float = 0.45

    def __post_init__(self):
        if self.bandwidth <= 0.0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.step_size < 0.0:
            raise ValueError(f"step size must be nonnegative, got {self.step_size}")


def _spread_factor(data, dim):
    """Data-driven bandwidth prefactor min(sigma, IQR/1.34) in smoothing units.

    1D returns the raw-units factor.  In higher dimensions smoothing happens
    on standardized coordinates, so the factor is computed per dimension,
    divided by the per-dimension scale, and combined by geometric mean.
    """
    if dim == 1:
        sd = data.std(ddof=1)
        if not np.isfinite(sd) or sd <= 0.0:
            raise DegenerateDataError("all data points are identical")
        q75, q25 = np.percentile(data, [75, 25])
        factor = min(sd, (q75 - q25) / 1.34)
    else:
        scales = _column_scales(data)
        q75, q25 = np.percentile(data, [75, 25], axis=0)
        iqr_ratio = (q75 - q25) / scales
        gmean = float(np.exp(np.log(np.maximum(iqr_ratio, 0.0) + 1e-300).mean()))
        factor = min(1.0, gmean / 1.34)
    if factor <= 0.0:
        raise DegenerateDataError("interquartile range is zero; cannot select a bandwidth")
    return factor


def silverman_bandwidth(data) -> float:
    """Silverman's rule-of-thumb bandwidth ``0.9 min(sigma, IQR/1.34) n^(-1/(d+4))``.

    ``sigma`` is the sample standard deviation (divisor ``n - 1``) and the
    IQR uses linearly interpolated percentiles.  For multivariate data the
    returned bandwidth applies to coordinates standardized to unit variance
    per dimension (as :func:`kde` does internally).
    """
    data, dim = _as_data(data)
    n = len(data)
    if n < 2:
        raise ValueError(f"bandwidth selection requires at least 2 points, got {n}")
    return 0.9 * _spread_factor(data, dim) * n ** (-1.0 / (dim + 4))


def optimal_params(n: int, dim: int, data, prefactor: float = 0.45) -> SdkdeParams:
    """Debiased-estimator parameters: ``h ~ n^(-1/(d+8))`` and step ``h^2/2``.

    The rate exponent is fixed by the bias-cancellation analysis; only the
    constant is free.  The bandwidth reuses Silverman's
    ``min(sigma, IQR/1.34)`` spread measure (scale-equivariant,
    parameter-free) at half Silverman's 0.9 coefficient: the score step must
    stay well inside the curvature scale of the narrowest density feature,
    and the calibration studies in the test suite show 0.9 overshoots on
    sharply bimodal targets while 0.45 is reliable across all bundled
    presets.  Pass ``prefactor`` to study sensitivity.
    """
    if n < 2:
        raise ValueError(f"parameter selection requires n >= 2, got {n}")
    data, data_dim = _as_data(data)
    if data_dim != dim:
        raise ValueError(f"data dimension {data_dim} does not match requested dimension {dim}")
    if prefactor <= 0.0:
        raise ValueError(f"prefactor must be positive, got {prefactor}")
    bandwidth = prefactor * _spread_factor(data, dim) * n ** (-1.0 / (dim + 8))
    return SdkdeParams(bandwidth=bandwidth, step_size=bandwidth**2 / 2.0, prefactor=prefactor)


def kde(data, bandwidth: float, kernel: GaussianKernel | None = None, scales=None) -> DensityEstimate:
    """Kernel density estimate ``(1/(n h^d)) sum_i K((x - x_i)/h)``.

    Multivariate data are standardized per dimension to unit sample variance
    before smoothing and the estimate is transformed back; ``scales``
    overrides the standardization (used when smoothing shifted points with
    the original data's scales).
    """
    data, dim = _as_data(data)
    if len(data) < 1:
        raise ValueError("kde requires at least one data point")
    if bandwidth <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if dim > 1 and scales is None:
        scales = _column_scales(data)
    return DensityEstimate(data, bandwidth, kernel or gaussian_kernel(dim), scales=scales)


def _shift(data, dim, score, step_size):
    """One score step per point; multivariate steps follow the standardized metric."""
    raw = np.asarray(score(data), dtype=float)
    if raw.shape != data.shape:
        raise ValueError(f"score field returned shape {raw.shape} for data of shape {data.shape}")
    bad = ~np.isfinite(raw if dim == 1 else raw.sum(axis=1))
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise ValueError(f"score field returned a non-finite value at point index {idx}")
    if dim == 1:
        return data + step_size * raw, None
    scales = _column_scales(data)
    # In standardized coordinates z = x / s the target's score picks up a
    # factor s (chain rule), and mapping the standardized step back to x
    # units contributes another, hence the s^2 weighting.
    return data + step_size * (scales**2 * raw), scales


def sd_kde(data, score, params: SdkdeParams, kernel: GaussianKernel | None = None) -> DensityEstimate:
    """Score-debiased KDE: shift each point by ``step_size * score(x_i)``, then smooth.

    The returned estimate records the shifted points.
    """
    data, dim = _as_data(data)
    if len(data) < 1:
        raise ValueError("sd_kde requires at least one data point")
    shifted, scales = _shift(data, dim, score, params.step_size)
    return kde(shifted, params.bandwidth, kernel=kernel, scales=scales)


class _UnstandardizedScore:
    """Express a score field fitted on standardized coordinates in data units."""

    def __init__(self, field, scales):
        self.field = field
        self.scales = scales
        self.dim = field.dim

    def __call__(self, x):
        return self.field(np.asarray(x, dtype=float) / self.scales) / self.scales


def emp_sd_kde(data, kernel: GaussianKernel | None = None, prefactor: float = 0.45) -> DensityEstimate:
    """Fully data-driven debiased KDE.

    A pilot KDE at the Silverman bandwidth supplies the score estimate, and
    the debiased estimator runs with its own rate-optimal parameters.
    """
    data, dim = _as_data(data)
    if len(data) < 2:
        raise ValueError("emp_sd_kde requires at least 2 data points")
    pilot_bandwidth = silverman_bandwidth(data)
    if dim == 1:
        field = empirical_score(data, pilot_bandwidth)
    else:
        scales = _column_scales(data)
        field = _UnstandardizedScore(empirical_score(data / scales, pilot_bandwidth), scales)
    params = optimal_params(len(data), dim, data, prefactor=prefactor)
    return sd_kde(data, field, params, kernel=kernel)


def iterated_sd_kde(data, bandwidth: float, initial_step: float, decay: float,
                    iterations: int, mode: str = "multiplicative") -> list[DensityEstimate]:
    """Repeated score-correction passes at a fixed bandwidth.

    Each iteration re-estimates the score from the current surrogate points
    with the pilot KDE, shifts the surrogates by the decayed step, and
    records the KDE of the shifted set.  ``decay`` is the per-iteration
    decay rate of the step size: ``multiplicative`` mode uses
    ``initial_step * (1 - decay)^(k-1)``, ``linear`` mode uses
    ``initial_step * max(1 - decay*(k-1), 0)``.  Keeping successive steps
    comparable in size is what lets later passes over-correct once the
    leading bias is gone, so the divergence-versus-pass curve attains its
    minimum after one or two corrections rather than decreasing forever.

    Returns one estimate per iteration (the first entry corresponds to a
    single correction pass).
    """
    data, dim = _as_data(data)
    if iterations < 1:
        raise ValueError(f"iterations must be at least 1, got {iterations}")
    if bandwidth <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if initial_step < 0.0:
        raise ValueError(f"initial step must be nonnegative, got {initial_step}")
    if not 0.0 < decay <= 1.0:
        raise ValueError(f"decay rate must lie in (0, 1], got {decay}")
    if mode not in ("multiplicative", "linear"):
        raise ValueError(f"unknown decay mode {mode!r}")
    surrogate = data.copy()
    estimates = []
    for k in range(1, iterations + 1):
        if mode == "multiplicative":
            step = initial_step * (1.0 - decay) ** (k - 1)
        else:
            step = initial_step * max(1.0 - decay * (k - 1), 0.0)
        if step > 0.0:
            field = empirical_score(surrogate, bandwidth)
            surrogate, _ = _shift(surrogate, dim, field, step)
        estimates.append(kde(surrogate, bandwidth))
    return estimates
