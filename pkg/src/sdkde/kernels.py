"""Smoothing kernels: symmetric, zero mean, identity covariance.

Only the Gaussian kernel is provided; it is strictly positive everywhere, so
every density estimate built on it stays positive.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["GaussianKernel", "gaussian_kernel"]


class GaussianKernel:
    """Isotropic standard Gaussian kernel ``(2*pi)^(-d/2) * exp(-|u|^2 / 2)``."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"kernel dimension must be at least 1, got {dim}")
        self.dim = int(dim)
        self.norm_const = (2.0 * math.pi) ** (-self.dim / 2.0)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.dim == 1:
            sq = u * u
        else:
            if u.shape[-1] != self.dim:
                raise ValueError(f"expected points of dimension {self.dim}, got shape {u.shape}")
            sq = (u * u).sum(axis=-1)
        return self.profile(sq)

    def profile(self, sq_radius, out=None):
        """Kernel value as a function of the squared radius ``|u|^2``.

        ``out`` may alias the input to evaluate in place on large buffers.
        """
        sq_radius = np.asarray(sq_radius, dtype=float)
        res = np.asarray(np.multiply(sq_radius, -0.5, out=out))
        np.exp(res, out=res)
        res *= self.norm_const
        return res

    def __repr__(self):
        return f"GaussianKernel(dim={self.dim})"


def gaussian_kernel(dim: int) -> GaussianKernel:
    """Construct the Gaussian kernel in ``dim`` dimensions."""
    return GaussianKernel(dim)
