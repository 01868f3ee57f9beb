"""Figure rendering from experiment CSVs.

Four figure kinds mirror the study outputs: ``scaling`` (log-log error
curves with fitted-slope annotations), ``histogram`` (matched-seed error
differences), ``iterated`` (per-pass divergence/error panels), and
``heatmap`` (true density next to the two fitted rasters).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import SchemaError, load_raster, load_results

KINDS = ("scaling", "histogram", "iterated", "heatmap")


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSV path(s), figure kind, and output image path."""

    kind: str
    inputs: tuple
    out: str
    title: str = ""


@dataclass(frozen=True)
class RenderResult:
    """Rendered file plus the numbers drawn onto the figure."""

    path: str
    annotations: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


def fitted_slope(ns, errors):
    """OLS slope/intercept of log10(error) against log10(n)."""
    coeffs = np.polyfit(np.log10(np.asarray(ns, dtype=float)), np.log10(errors), 1)
    return float(coeffs[0]), float(coeffs[1])


def _single_input(spec):
    if len(spec.inputs) != 1:
        raise SchemaError(f"{spec.kind} figures take exactly one input CSV")
    return spec.inputs[0]


def _new_axes(n_panels=1, wide=False):
    width = 4.2 * n_panels if not wide else 5.5 * n_panels
    fig, axes = plt.subplots(1, n_panels, figsize=(width, 3.6))
    return fig, np.atleast_1d(axes)


def _render_scaling(spec):
    data = load_results(_single_input(spec))
    fig, (ax,) = _new_axes(wide=True)
    annotations = {}
    for method in sorted(set(data["method"])):
        mask = data["method"] == method
        ns = np.array(sorted(set(data["n"][mask])))
        means = np.array([data["mise"][mask & (data["n"] == n)].mean() for n in ns])
        slope, intercept = fitted_slope(ns, means)
        annotations[method] = slope
        line, = ax.plot(ns, means, "o", label=f"{method} (slope {slope:.3f})")
        ax.plot(ns, 10.0**intercept * ns.astype(float) ** slope, "-", color=line.get_color(), alpha=0.6)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("mean integrated squared error")
    ax.set_title(spec.title or f"error scaling: {data['target'][0]}")
    ax.legend(fontsize=8)
    return annotations, {}


def _render_histogram(spec):
    data = load_results(_single_input(spec))
    methods = sorted(set(data["method"]))
    if len(methods) != 2:
        raise SchemaError(f"histogram needs exactly two methods, found {methods}")
    baseline = "silverman" if "silverman" in methods else methods[0]
    other = [m for m in methods if m != baseline][0]
    seeds = np.array(sorted(set(data["seed"])))

    def per_seed(method):
        mask = data["method"] == method
        return np.array([data["mise"][mask & (data["seed"] == s)][0] for s in seeds])

    diffs = per_seed(baseline) - per_seed(other)
    win_fraction = float(np.mean(diffs > 0.0))
    fig, (ax,) = _new_axes()
    ax.hist(diffs, bins=max(10, len(seeds) // 4), color="#4878a8", edgecolor="white")
    ax.axvline(0.0, color="black", lw=1)
    ax.set_xlabel(f"MISE({baseline}) - MISE({other})")
    ax.set_ylabel("seeds")
    ax.set_title(spec.title or f"{other} vs {baseline}: wins {win_fraction:.0%} of seeds")
    return {"win_fraction": win_fraction}, {"diffs": diffs}


def _iteration_index(method):
    head, _, tail = method.rpartition("-")
    if head != "iter" or not tail.isdigit():
        raise SchemaError(f"iterated figures need methods named iter-<k>, found {method!r}")
    return int(tail)


def _render_iterated(spec):
    data = load_results(_single_input(spec))
    iters = sorted(_iteration_index(m) for m in set(data["method"]))
    seeds = sorted(set(data["seed"]))

    def series(metric, seed):
        out = []
        for k in iters:
            mask = (data["method"] == f"iter-{k}") & (data["seed"] == seed)
            out.append(data[metric][mask][0])
        return np.array(out)

    fig, axes = plt.subplots(2, 2, figsize=(9, 6.4))
    extras = {}
    for col, metric in enumerate(("kl", "mise")):
        per_seed = np.array([series(metric, s) for s in seeds])
        mean = per_seed.mean(axis=0)
        std = per_seed.std(axis=0, ddof=1) if len(seeds) > 1 else np.zeros(len(iters))
        extras[f"{metric}_mean"] = mean
        top, bottom = axes[0, col], axes[1, col]
        for row in per_seed:
            top.plot(iters, row, color="#777777", alpha=0.35, lw=0.8)
        top.set_title(f"per-seed {metric.upper()} by correction pass")
        bottom.errorbar(iters, mean, yerr=std, marker="o", color="#b14343", capsize=3)
        bottom.set_title(f"mean {metric.upper()} (argmin at pass {int(np.argmin(mean))})")
        for ax in (top, bottom):
            ax.set_xlabel("correction pass")
            ax.set_xticks(iters)
    if spec.title:
        fig.suptitle(spec.title)
    return {f"{m}_argmin": float(np.argmin(extras[f"{m}_mean"])) for m in ("kl", "mise")}, extras


def _render_heatmap(spec):
    data = load_raster(_single_input(spec))
    x0 = np.unique(data["x0"])
    x1 = np.unique(data["x1"])
    if len(x0) * len(x1) != len(data["x0"]):
        raise SchemaError("raster rows do not form a complete regular grid")
    shape = (len(x0), len(x1))
    layers = [("true density", "p_true"), ("Silverman", "p_silverman"), ("debiased", "p_sdkde")]
    vmax = max(data[col].max() for _, col in layers)
    fig, axes = _new_axes(3)
    for ax, (label, col) in zip(axes, layers):
        img = data[col].reshape(shape).T  # x0 horizontal, x1 vertical
        ax.imshow(
            img,
            origin="lower",
            extent=(x0[0], x0[-1], x1[0], x1[-1]),
            vmin=0.0,
            vmax=vmax,
            cmap="viridis",
            aspect="auto",
        )
        ax.set_title(label)
    if spec.title:
        fig.suptitle(spec.title)
    return {}, {"vmax": vmax}


_RENDERERS = {
    "scaling": _render_scaling,
    "histogram": _render_histogram,
    "iterated": _render_iterated,
    "heatmap": _render_heatmap,
}


def render(spec: PlotSpec) -> RenderResult:
    """Render one figure to ``spec.out``; returns the annotated values."""
    if spec.kind not in _RENDERERS:
        raise SchemaError(f"unknown figure kind {spec.kind!r}; expected one of {', '.join(KINDS)}")
    try:
        annotations, extras = _RENDERERS[spec.kind](spec)
        plt.gcf().tight_layout()
        plt.savefig(spec.out)
    finally:
        plt.close("all")
    return RenderResult(path=str(spec.out), annotations=annotations, extras=extras)
