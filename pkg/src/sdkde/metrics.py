"""Accuracy metrics over regular quadrature grids, plus slope and win-rate stats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalGrid",
    "MetricSummary",
    "mise",
    "kl_divergence",
    "loglog_slope",
    "win_rate",
    "summarize",
]

# Grid nodes where the true density falls below this floor contribute
# nothing to the divergence integral (avoids 0 * log 0).
KL_DENSITY_FLOOR = 1e-12


class EvalGrid:
    """Regular rectangular grid with trapezoid quadrature weights.

    ``axes`` is a sequence of ``(lo, hi, count)`` per dimension.  Nodes are
    flattened in row-major order (first axis outermost) and ``weights`` holds
    the matching product trapezoid weights, so ``integrate(values)`` is the
    trapezoid integral of nodewise values over the whole grid.
    """

    def __init__(self, axes):
        axes = tuple((float(lo), float(hi), int(count)) for lo, hi, count in axes)
        if not 1 <= len(axes) <= 3:
            raise ValueError(f"grids support 1 to 3 dimensions, got {len(axes)}")
        for lo, hi, count in axes:
            if count < 2:
                raise ValueError(f"each axis needs at least 2 nodes, got {count}")
            if not hi > lo:
                raise ValueError(f"axis bounds must satisfy hi > lo, got ({lo}, {hi})")
        self.axes = axes
        self.dim = len(axes)
        self.spacing = np.array([(hi - lo) / (count - 1) for lo, hi, count in axes])
        axis_nodes = [np.linspace(lo, hi, count) for lo, hi, count in axes]
        axis_weights = []
        for (lo, hi, count), delta in zip(axes, self.spacing):
            w = np.full(count, delta)
            w[0] *= 0.5
            w[-1] *= 0.5
            axis_weights.append(w)
        if self.dim == 1:
            self.nodes = axis_nodes[0]
            self.weights = axis_weights[0]
        else:
            mesh = np.meshgrid(*axis_nodes, indexing="ij")
            self.nodes = np.stack([m.ravel() for m in mesh], axis=-1)
            weights = axis_weights[0]
            for w in axis_weights[1:]:
                weights = np.multiply.outer(weights, w)
            self.weights = weights.ravel()
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    @classmethod
    def from_window(cls, window, count) -> "EvalGrid":
        """Build a grid over per-axis ``(lo, hi)`` bounds with ``count`` nodes per axis."""
        counts = [count] * len(window) if np.isscalar(count) else list(count)
        return cls([(lo, hi, c) for (lo, hi), c in zip(window, counts)])

    def __len__(self):
        return len(self.weights)

    def integrate(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if values.shape != self.weights.shape:
            raise ValueError(f"expected {len(self.weights)} nodewise values, got shape {values.shape}")
        return float(self.weights @ values)


def _nodewise(obj, grid, role):
    """Evaluate a model/estimate on the grid, or pass through precomputed values."""
    if isinstance(obj, np.ndarray):
        values = np.asarray(obj, dtype=float)
        if values.shape != (len(grid),):
            raise ValueError(f"{role} values must have one entry per grid node")
        return values
    dim = getattr(obj, "dim", None)
    if dim is not None and dim != grid.dim:
        raise ValueError(f"{role} dimension {dim} does not match grid dimension {grid.dim}")
    if hasattr(obj, "evaluate"):
        return np.asarray(obj.evaluate(grid.nodes), dtype=float)
    return np.asarray(obj.pdf(grid.nodes), dtype=float)


def mise(estimate, truth, grid: EvalGrid) -> float:
    """Integrated squared error of one fitted estimate against the true density.

    Trapezoid quadrature of ``(estimate - truth)^2`` over the grid; averaging
    over seeds (to estimate the expectation) is the caller's job.
    """
    est = _nodewise(estimate, grid, "estimate")
    tru = _nodewise(truth, grid, "truth")
    return grid.integrate((est - tru) ** 2)


def kl_divergence(truth, estimate, grid: EvalGrid) -> float:
    """Trapezoid quadrature of ``p * log(p / p_hat)`` over the grid.

    Nodes where the true density is below ``KL_DENSITY_FLOOR`` contribute 0.
    """
    tru = _nodewise(truth, grid, "truth")
    est = _nodewise(estimate, grid, "estimate")
    live = tru >= KL_DENSITY_FLOOR
    if np.any(est[live] <= 0.0):
        raise ValueError("estimate vanishes on a node carrying true mass; divergence is infinite")
    integrand = np.zeros_like(tru)
    integrand[live] = tru[live] * (np.log(tru[live]) - np.log(est[live]))
    return grid.integrate(integrand)


def loglog_slope(ns, errors) -> tuple[float, float]:
    """Ordinary least squares of log10(error) on log10(n): returns (slope, intercept)."""
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if ns.shape != errors.shape or ns.ndim != 1 or len(ns) < 2:
        raise ValueError("need equal-length 1D inputs with at least 2 entries")
    if np.any(ns <= 0.0) or np.any(errors <= 0.0):
        raise ValueError("sample sizes and errors must be positive")
    x = np.log10(ns)
    y = np.log10(errors)
    xm = x.mean()
    ym = y.mean()
    slope = float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())
    return slope, float(ym - slope * xm)


def win_rate(a, b) -> float:
    """Fraction of matched entries where ``a`` is strictly below ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) == 0:
        raise ValueError("win rate requires two nonempty sequences of equal length")
    return float(np.mean(a < b))


@dataclass(frozen=True)
class MetricSummary:
    """Seed-aggregate of one metric, optionally with wins against a baseline."""

    mean: float
    std: float
    values: tuple
    win_count: int | None = None
    baseline: str = ""


def summarize(values, baseline_values=None, baseline_name: str = "") -> MetricSummary:
    """Mean/std over per-seed values; counts strict wins against a baseline if given."""
    values = np.asarray(values, dtype=float)
    wins = None
    if baseline_values is not None:
        wins = int(np.count_nonzero(values < np.asarray(baseline_values, dtype=float)))
    return MetricSummary(
        mean=float(values.mean()),
        std=float(values.std(ddof=1)) if len(values) > 1 else 0.0,
        values=tuple(float(v) for v in values),
        win_count=wins,
        baseline=baseline_name,
    )
