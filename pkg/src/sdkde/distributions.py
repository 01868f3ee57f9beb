"""Ground-truth target distributions with exact pdf, exact score, and sampling.

Provides two-component 1D Gaussian and Laplace mixtures, a 2D Gaussian
mixture, and a 2D spiral whose density is the pushforward of a uniform
angle through the spiral map plus isotropic Gaussian noise.  All models are
immutable; sampling draws from a generator passed in by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp, ndtr

from .rng import substream

__all__ = [
    "GaussianMixture1D",
    "LaplaceMixture1D",
    "GaussianMixture2D",
    "Spiral2D",
    "PRESET_NAMES",
    "preset",
    "preset_names",
    "register_preset",
    "pdf",
    "score",
    "sample",
    "sample_components",
]

_LOG_2PI = math.log(2.0 * math.pi)

# Number of points whose squared-distance matrix is held in memory at once
# when evaluating the spiral's quadrature-based density.
_CHUNK = 1 << 23


def _points_1d(x):
    """Coerce to a finite 1D point array; report whether input was scalar."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.ndim != 1:
        raise ValueError(f"expected scalar or 1D array of points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("evaluation points must be finite")
    return arr, scalar


def _points_2d(x):
    """Coerce to a finite (m, 2) point array; report whether input was a single point."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected points of dimension 2, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("evaluation points must be finite")
    return arr, single


def _check_density_positive(dens, where):
    if np.any(dens == 0.0):
        raise ValueError(f"density underflows to zero at {where}; score is undefined there")


@dataclass(frozen=True)
class GaussianMixture1D:
    """Two-component 1D Gaussian mixture.

    The density is ``weight * N(mu1, sigma1^2) + (1 - weight) * N(mu2, sigma2^2)``.
    """

    weight: float
    mu1: float
    sigma1: float
    mu2: float
    sigma2: float

    def __post_init__(self):
        if not 0.0 < self.weight < 1.0:
            raise ValueError(f"weight must lie in (0, 1), got {self.weight}")
        if self.sigma1 <= 0.0 or self.sigma2 <= 0.0:
            raise ValueError("component scales must be positive")

    @property
    def dim(self) -> int:
        return 1

    def _log_terms(self, x):
        # Stacked log of the weighted component densities, shape (2, m).
        z1 = (x - self.mu1) / self.sigma1
        z2 = (x - self.mu2) / self.sigma2
        l1 = math.log(self.weight) - 0.5 * z1 * z1 - math.log(self.sigma1) - 0.5 * _LOG_2PI
        l2 = math.log(1.0 - self.weight) - 0.5 * z2 * z2 - math.log(self.sigma2) - 0.5 * _LOG_2PI
        return np.stack([l1, l2])

    def pdf(self, x):
        x, scalar = _points_1d(x)
        out = np.exp(logsumexp(self._log_terms(x), axis=0))
        return float(out[0]) if scalar else out

    def cdf(self, x):
        x, scalar = _points_1d(x)
        out = self.weight * ndtr((x - self.mu1) / self.sigma1)
        out += (1.0 - self.weight) * ndtr((x - self.mu2) / self.sigma2)
        return float(out[0]) if scalar else out

    def score(self, x):
        """Gradient of the log-density, computed from component responsibilities."""
        x, scalar = _points_1d(x)
        logs = self._log_terms(x)
        total = logsumexp(logs, axis=0)
        _check_density_positive(np.exp(total), "a query point")
        resp = np.exp(logs - total)
        d1 = -(x - self.mu1) / self.sigma1**2
        d2 = -(x - self.mu2) / self.sigma2**2
        out = resp[0] * d1 + resp[1] * d2
        return float(out[0]) if scalar else out

    def _sample_labeled(self, n, rng):
        labels = (rng.random(n) >= self.weight).astype(np.int64)
        z = rng.standard_normal(n)
        mu = np.where(labels == 0, self.mu1, self.mu2)
        sd = np.where(labels == 0, self.sigma1, self.sigma2)
        return mu + sd * z, labels

    def sample(self, n, rng):
        return self._sample_labeled(n, rng)[0]

    def window(self):
        """Per-axis evaluation window capturing all but ~3e-7 of the mass."""
        s = max(self.sigma1, self.sigma2)
        lo = min(self.mu1, self.mu2) - 5.0 * s
        hi = max(self.mu1, self.mu2) + 5.0 * s
        return ((lo, hi),)


@dataclass(frozen=True)
class LaplaceMixture1D:
    """Two-component 1D Laplace mixture with densities ``exp(-|x-loc|/scale)/(2*scale)``."""

    weight: float
    loc1: float
    scale1: float
    loc2: float
    scale2: float

    def __post_init__(self):
        if not 0.0 < self.weight < 1.0:
            raise ValueError(f"weight must lie in (0, 1), got {self.weight}")
        if self.scale1 <= 0.0 or self.scale2 <= 0.0:
            raise ValueError("component scales must be positive")

    @property
    def dim(self) -> int:
        return 1

    def _log_terms(self, x):
        l1 = math.log(self.weight) - np.abs(x - self.loc1) / self.scale1 - math.log(2.0 * self.scale1)
        l2 = (
            math.log(1.0 - self.weight)
            - np.abs(x - self.loc2) / self.scale2
            - math.log(2.0 * self.scale2)
        )
        return np.stack([l1, l2])

    def pdf(self, x):
        x, scalar = _points_1d(x)
        out = np.exp(logsumexp(self._log_terms(x), axis=0))
        return float(out[0]) if scalar else out

    def cdf(self, x):
        x, scalar = _points_1d(x)
        out = np.zeros_like(x)
        for w, loc, b in ((self.weight, self.loc1, self.scale1), (1.0 - self.weight, self.loc2, self.scale2)):
            z = (x - loc) / b
            comp = np.where(z < 0.0, 0.5 * np.exp(np.minimum(z, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))
            out += w * comp
        return float(out[0]) if scalar else out

    def score(self, x):
        """Gradient of the log-density.

        At a component's location kink the sign convention ``sign(0) = 0``
        yields the average of the left and right one-sided derivatives.
        """
        x, scalar = _points_1d(x)
        logs = self._log_terms(x)
        total = logsumexp(logs, axis=0)
        _check_density_positive(np.exp(total), "a query point")
        resp = np.exp(logs - total)
        d1 = -np.sign(x - self.loc1) / self.scale1
        d2 = -np.sign(x - self.loc2) / self.scale2
        out = resp[0] * d1 + resp[1] * d2
        return float(out[0]) if scalar else out

    def _sample_labeled(self, n, rng):
        labels = (rng.random(n) >= self.weight).astype(np.int64)
        z = rng.laplace(0.0, 1.0, n)
        loc = np.where(labels == 0, self.loc1, self.loc2)
        b = np.where(labels == 0, self.scale1, self.scale2)
        return loc + b * z, labels

    def sample(self, n, rng):
        return self._sample_labeled(n, rng)[0]

    def window(self):
        # 10 scale units keep the out-of-window tail mass below exp(-10)/2
        # per component, comparable to the 5-sigma Gaussian window.
        b = max(self.scale1, self.scale2)
        lo = min(self.loc1, self.loc2) - 10.0 * b
        hi = max(self.loc1, self.loc2) + 10.0 * b
        return ((lo, hi),)


class GaussianMixture2D:
    """Mixture of full-covariance bivariate Gaussians.

    Parameters
    ----------
    components : sequence of (weight, mean, covariance)
        Weights must sum to 1; each covariance must be a symmetric
        positive-definite 2x2 matrix.
    """

    def __init__(self, components):
        if not components:
            raise ValueError("at least one component is required")
        weights, means, covs = [], [], []
        for k, (w, mean, cov) in enumerate(components):
            mean = np.asarray(mean, dtype=float)
            cov = np.asarray(cov, dtype=float)
            if w <= 0.0:
                raise ValueError(f"component {k}: weight must be positive")
            if mean.shape != (2,):
                raise ValueError(f"component {k}: mean must be a 2-vector")
            if cov.shape != (2, 2) or not np.allclose(cov, cov.T, atol=1e-12):
                raise ValueError(f"component {k}: covariance must be symmetric 2x2")
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError(f"component {k}: covariance must be positive-definite") from None
            weights.append(float(w))
            means.append(mean)
            covs.append(cov)
        if not math.isclose(sum(weights), 1.0, rel_tol=0.0, abs_tol=1e-9):
            raise ValueError(f"weights must sum to 1, got {sum(weights)}")
        self.weights = np.array(weights)
        self.means = np.array(means)
        self.covs = np.array(covs)
        for arr in (self.weights, self.means, self.covs):
            arr.flags.writeable = False

    @property
    def dim(self) -> int:
        return 2

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @cached_property
    def _chols(self):
        return np.linalg.cholesky(self.covs)

    @cached_property
    def _inv_covs(self):
        return np.linalg.inv(self.covs)

    @cached_property
    def _log_norms(self):
        sign, logdet = np.linalg.slogdet(self.covs)
        return np.log(self.weights) - _LOG_2PI - 0.5 * logdet

    def _log_terms(self, x):
        # (K, m) log weighted component densities.
        diff = x[None, :, :] - self.means[:, None, :]
        quad = np.einsum("kmi,kij,kmj->km", diff, self._inv_covs, diff)
        return self._log_norms[:, None] - 0.5 * quad

    def pdf(self, x):
        x, single = _points_2d(x)
        out = np.exp(logsumexp(self._log_terms(x), axis=0))
        return float(out[0]) if single else out

    def score(self, x):
        x, single = _points_2d(x)
        logs = self._log_terms(x)
        total = logsumexp(logs, axis=0)
        _check_density_positive(np.exp(total), "a query point")
        resp = np.exp(logs - total)  # (K, m)
        pull = np.einsum("kij,kmj->kmi", self._inv_covs, self.means[:, None, :] - x[None, :, :])
        out = np.einsum("km,kmi->mi", resp, pull)
        return out[0] if single else out

    def _sample_labeled(self, n, rng):
        labels = rng.choice(self.n_components, size=n, p=self.weights)
        z = rng.standard_normal((n, 2))
        pts = self.means[labels] + np.einsum("nij,nj->ni", self._chols[labels], z)
        return pts, labels

    def sample(self, n, rng):
        return self._sample_labeled(n, rng)[0]

    @property
    def max_scale(self) -> float:
        return float(np.sqrt(np.linalg.eigvalsh(self.covs).max()))

    def window(self):
        s = 5.0 * self.max_scale
        lo = self.means.min(axis=0) - s
        hi = self.means.max(axis=0) + s
        return tuple((float(a), float(b)) for a, b in zip(lo, hi))


class Spiral2D:
    """Noisy Archimedean spiral in the plane.

    A point is drawn by sampling an angle uniformly on
    ``[theta_min, theta_max]``, mapping it to
    ``(growth * theta * cos(theta), growth * theta * sin(theta))``, and adding
    isotropic Gaussian noise.  The density integrates the Gaussian slice over
    the angle with a fixed trapezoid rule, and the score differentiates that
    same quadrature sum, so pdf and score are mutually consistent.
    """

    def __init__(self, growth=0.2, noise_sigma=0.1, theta_min=0.5 * math.pi,
                 theta_max=2.5 * math.pi, quad_nodes=2000):
        if growth <= 0.0:
            raise ValueError("growth must be positive")
        if noise_sigma <= 0.0:
            raise ValueError("noise_sigma must be positive")
        if theta_max <= theta_min:
            raise ValueError("angle range must be nonempty")
        if quad_nodes < 16:
            raise ValueError("quad_nodes too small for a stable quadrature")
        self.growth = float(growth)
        self.noise_sigma = float(noise_sigma)
        self.theta_min = float(theta_min)
        self.theta_max = float(theta_max)
        self.quad_nodes = int(quad_nodes)

    @property
    def dim(self) -> int:
        return 2

    @property
    def turns(self) -> float:
        return (self.theta_max - self.theta_min) / (2.0 * math.pi)

    @property
    def max_scale(self) -> float:
        return self.noise_sigma

    def _curve(self, theta):
        r = self.growth * theta
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    @cached_property
    def _quad(self):
        # Trapezoid nodes on the angle interval; weights absorb the uniform
        # angle density 1/(theta_max - theta_min).
        theta = np.linspace(self.theta_min, self.theta_max, self.quad_nodes)
        w = np.full(self.quad_nodes, theta[1] - theta[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        w /= self.theta_max - self.theta_min
        return self._curve(theta), w

    def _accumulate(self, x):
        """Return (pdf values, unnormalized score numerators) for points x."""
        curve, w = self._quad
        var = self.noise_sigma**2
        norm = 1.0 / (2.0 * math.pi * var)
        dens = np.empty(len(x))
        numer = np.empty((len(x), 2))
        step = max(1, _CHUNK // len(curve))
        for lo in range(0, len(x), step):
            chunk = x[lo:lo + step]
            diff = curve[None, :, :] - chunk[:, None, :]
            kv = w * np.exp(-0.5 * (diff**2).sum(axis=2) / var) * norm
            dens[lo:lo + step] = kv.sum(axis=1)
            numer[lo:lo + step] = np.einsum("mq,mqi->mi", kv, diff) / var
        return dens, numer

    def pdf(self, x):
        x, single = _points_2d(x)
        dens, _ = self._accumulate(x)
        return float(dens[0]) if single else dens

    def score(self, x):
        x, single = _points_2d(x)
        dens, numer = self._accumulate(x)
        _check_density_positive(dens, "a query point")
        out = numer / dens[:, None]
        return out[0] if single else out

    def sample(self, n, rng):
        theta = rng.uniform(self.theta_min, self.theta_max, n)
        return self._curve(theta) + self.noise_sigma * rng.standard_normal((n, 2))

    def window(self):
        curve = self._curve(np.linspace(self.theta_min, self.theta_max, 4096))
        pad = 5.0 * self.noise_sigma
        lo = curve.min(axis=0) - pad
        hi = curve.max(axis=0) + pad
        return tuple((float(a), float(b)) for a, b in zip(lo, hi))


def _mog_2d_preset():
    return GaussianMixture2D([
        (0.40, (-2.0, 0.0), ((0.5, 0.2), (0.2, 0.8))),
        (0.35, (2.0, 1.5), ((0.8, -0.3), (-0.3, 0.5))),
        (0.25, (0.0, -2.0), ((0.6, 0.0), (0.0, 0.6))),
    ])


_PRESETS = {
    "gauss-mix-1": lambda: GaussianMixture1D(0.4, -2.0, 0.5, 2.0, 1.0),
    "gauss-mix-2": lambda: GaussianMixture1D(0.3, -2.0, 0.4, 4.0, 1.5),
    "gauss-mix-3": lambda: GaussianMixture1D(0.5, 0.0, 0.4, 1.5, 1.5),
    "gauss-mix-iter": lambda: GaussianMixture1D(0.7, -0.5, 0.2, 0.5, 0.3),
    "laplace-mix-1": lambda: LaplaceMixture1D(0.4, -2.0, 0.5, 2.0, 1.0),
    "laplace-mix-2": lambda: LaplaceMixture1D(0.3, -2.0, 0.4, 4.0, 1.5),
    "laplace-mix-3": lambda: LaplaceMixture1D(0.5, 0.0, 0.4, 1.5, 1.5),
    "spiral": Spiral2D,
    "mog-2d": _mog_2d_preset,
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_names() -> tuple:
    """All currently registered preset names, built-in and custom."""
    return tuple(sorted(_PRESETS))


def preset(name: str):
    """Instantiate a named target distribution from the registry."""
    try:
        return _PRESETS[name]()
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(_PRESETS))}"
        ) from None


def register_preset(name: str, factory) -> None:
    """Make an alternate target layout addressable by name.

    ``factory`` is called with no arguments and must return a distribution;
    registered names work anywhere a built-in preset name does (including
    experiment configs).  Built-in names cannot be overridden.
    """
    if name in _PRESETS:
        raise ValueError(f"preset {name!r} already exists")
    if not callable(factory):
        raise TypeError("factory must be callable")
    _PRESETS[name] = factory


def pdf(model, x):
    """Exact density of ``model`` at point(s) ``x``."""
    return model.pdf(x)


def score(model, x):
    """Exact gradient of the log-density of ``model`` at point(s) ``x``."""
    return model.score(x)


def sample(model, n: int, seed: int):
    """Draw ``n`` points from ``model``, deterministically for a fixed seed."""
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    return model.sample(n, substream(seed, "sample"))


def sample_components(model, n: int, seed: int):
    """Draw ``n`` points plus the mixture-component index each came from."""
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    if not hasattr(model, "_sample_labeled"):
        raise TypeError(f"{type(model).__name__} has no mixture components")
    return model._sample_labeled(n, substream(seed, "sample"))
