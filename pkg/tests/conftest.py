"""Shared test helpers: finite-difference and adaptive-quadrature oracles."""

import numpy as np
import pytest
from scipy import integrate

from sdkde import preset


def fd_log_density_grad(model, x, step=1e-5):
    """Central finite difference of log pdf, per coordinate."""
    if model.dim == 1:
        return (np.log(model.pdf(x + step)) - np.log(model.pdf(x - step))) / (2 * step)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    grad = np.empty_like(x)
    for j in range(x.shape[1]):
        hi = x.copy()
        lo = x.copy()
        hi[:, j] += step
        lo[:, j] -= step
        grad[:, j] = (np.log(model.pdf(hi)) - np.log(model.pdf(lo))) / (2 * step)
    return grad


def adaptive_ise_1d(estimate, model, window):
    """Adaptive-quadrature integrated squared error (independent of EvalGrid)."""
    (lo, hi), = window
    value, _ = integrate.quad(
        lambda t: (estimate.evaluate(t) - model.pdf(t)) ** 2, lo, hi, limit=400
    )
    return value


GAUSS_PRESETS = ("gauss-mix-1", "gauss-mix-2", "gauss-mix-3")
LAPLACE_PRESETS = ("laplace-mix-1", "laplace-mix-2", "laplace-mix-3")
ONE_D_PRESETS = GAUSS_PRESETS + LAPLACE_PRESETS + ("gauss-mix-iter",)
TWO_D_PRESETS = ("mog-2d", "spiral")
ALL_PRESETS = ONE_D_PRESETS + TWO_D_PRESETS


@pytest.fixture(scope="session")
def models():
    return {name: preset(name) for name in ALL_PRESETS}
