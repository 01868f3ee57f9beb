"""Config-driven experiment orchestration and CSV persistence.

Four experiment kinds are supported: ``scaling`` (error vs sample size),
``winrate`` (matched-seed method comparison at a fixed sample size),
``grid2d`` (2D density rasters plus error records), and ``iterated``
(repeated score-correction passes).  Every cell derives its random streams
from (seed, cell label), so results are independent of execution order and
of the worker-thread count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import distributions, estimators, metrics, scores
from .rng import derive_seed

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRecord",
    "RESULTS_COLUMNS",
    "RASTER_COLUMNS",
    "parse_method",
    "parse_seeds",
    "run_scaling",
    "run_winrate",
    "run_grid2d",
    "run_iterated",
    "run_experiment",
    "write_results",
    "standard_grid",
    "data_window_2d",
]

RESULTS_COLUMNS = ("experiment", "method", "target", "n", "seed", "sigma", "mise", "kl", "wall_ms")
RASTER_COLUMNS = ("x0", "x1", "p_true", "p_silverman", "p_sdkde")

KINDS = ("scaling", "winrate", "grid2d", "iterated")
NOISE_MODES = ("per-point", "per-call")
_PLAIN_METHODS = ("silverman", "sd-kde-exact", "emp-sd-kde", "sd-kde-table")


class ConfigError(Exception):
    """Invalid experiment configuration."""


def parse_method(name: str):
    """Split a method name into (base method, noise sigma)."""
    if name in _PLAIN_METHODS:
        return name, 0.0
    if name.startswith("sd-kde-noisy:"):
        try:
            sigma = float(name.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"method {name!r}: noise level must be a number") from None
        if sigma < 0.0:
            raise ConfigError(f"method {name!r}: noise level must be nonnegative")
        return "sd-kde-noisy", sigma
    raise ConfigError(
        f"unknown method {name!r}; expected one of {', '.join(_PLAIN_METHODS)} or sd-kde-noisy:<sigma>"
    )


def parse_seeds(spec) -> tuple:
    """Parse a seed list or an inclusive ``a..b`` range string."""
    if isinstance(spec, str):
        try:
            lo, hi = spec.split("..")
            seeds = tuple(range(int(lo), int(hi) + 1))
        except ValueError:
            raise ConfigError(f"seed range must look like 'a..b', got {spec!r}") from None
    else:
        try:
            seeds = tuple(int(s) for s in spec)
        except (TypeError, ValueError):
            raise ConfigError(f"seeds must be integers, got {spec!r}") from None
    if not seeds:
        raise ConfigError("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds must be distinct")
    return seeds


@dataclass
class ExperimentConfig:
    """One experiment: what to run, on which target, and where to write."""

    kind: str = "scaling"
    target: str = "gauss-mix-1"
    methods: tuple = ("silverman", "sd-kde-exact")
    ns: tuple = (500, 1000, 2000, 5000, 10000, 20000, 50000)
    n: int = 100
    seeds: tuple = tuple(range(25))
    noise_mode: str = "per-point"
    workers: int = 1
    out: str = "results"
    nodes_1d: int = 2048
    nodes_2d: int = 256
    prefactor: float = 0.45
    score_table: str | None = None
    bandwidth: float = 0.15
    initial_step: float = 0.015
    decay: float = 0.15
    decay_mode: str = "multiplicative"
    iterations: int = 4

    _SECTIONS = {
        "experiment": ("kind", "target", "methods", "ns", "n", "seeds", "noise_mode", "workers", "out"),
        "grid": ("nodes_1d", "nodes_2d"),
        "sdkde": ("prefactor", "score_table"),
        "iterated": ("bandwidth", "initial_step", "decay", "decay_mode", "iterations"),
    }

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Load a TOML config with sections [experiment], [grid], [sdkde], [iterated]."""
        path = Path(path)
        try:
            with path.open("rb") as fh:
                raw = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid TOML: {exc}") from None
        kwargs = {}
        for section, content in raw.items():
            known = cls._SECTIONS.get(section)
            if known is None:
                raise ConfigError(f"unknown config section [{section}]")
            if not isinstance(content, dict):
                raise ConfigError(f"[{section}] must be a table of key/value settings")
            for key, value in content.items():
                if key not in known:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                kwargs[key] = value
        if "seeds" in kwargs:
            kwargs["seeds"] = parse_seeds(kwargs["seeds"])
        if "methods" in kwargs:
            kwargs["methods"] = tuple(str(m) for m in kwargs["methods"])
        if "ns" in kwargs:
            kwargs["ns"] = tuple(int(v) for v in kwargs["ns"])
        return cls(**kwargs)

    def override(self, **changes) -> "ExperimentConfig":
        """Copy with non-None overrides applied (CLI flags)."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if "seeds" in changes:
            changes["seeds"] = parse_seeds(changes["seeds"])
        return replace(self, **changes)

    def model(self):
        try:
            return distributions.preset(self.target)
        except KeyError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        model = self.model()
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"noise mode must be one of {', '.join(NOISE_MODES)}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            parse_method(m)
        parse_seeds(self.seeds)
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.nodes_1d < 2 or self.nodes_2d < 2:
            raise ConfigError("grids need at least 2 nodes per axis")
        if self.prefactor <= 0.0:
            raise ConfigError("bandwidth prefactor must be positive")
        if any(parse_method(m)[0] == "sd-kde-table" for m in self.methods):
            if not self.score_table:
                raise ConfigError("method sd-kde-table requires the sdkde.score_table path")
            if not Path(self.score_table).is_file():
                raise ConfigError(f"score table not found: {self.score_table}")
        if self.kind == "scaling":
            if model.dim != 1:
                raise ConfigError("scaling experiments require a 1D target")
            if not self.ns or any(n < 2 for n in self.ns):
                raise ConfigError("scaling requires sample sizes of at least 2")
        elif self.kind == "winrate":
            if model.dim != 1:
                raise ConfigError("winrate experiments require a 1D target")
            if len(self.methods) != 2:
                raise ConfigError("winrate requires exactly two methods (baseline first)")
            if self.n < 2:
                raise ConfigError("winrate requires n >= 2")
        elif self.kind == "grid2d":
            if model.dim != 2:
                raise ConfigError("grid2d experiments require a 2D target")
            if len(self.methods) != 2 or self.methods[0] != "silverman" or parse_method(
                self.methods[1]
            )[0] not in ("sd-kde-exact", "sd-kde-table", "sd-kde-noisy"):
                raise ConfigError("grid2d methods must be ('silverman', <sd-kde variant>)")
            if self.n < 2:
                raise ConfigError("grid2d requires n >= 2")
        elif self.kind == "iterated":
            if model.dim != 1:
                raise ConfigError("iterated experiments require a 1D target")
            if self.iterations < 1:
                raise ConfigError("iterations must be at least 1")
            if self.bandwidth <= 0.0 or self.initial_step < 0.0 or self.decay <= 0.0:
                raise ConfigError("iterated requires bandwidth > 0, initial_step >= 0, decay > 0")
            if self.decay_mode not in ("multiplicative", "linear"):
                raise ConfigError("decay_mode must be 'multiplicative' or 'linear'")
            if self.n < 2:
                raise ConfigError("iterated requires n >= 2")


@dataclass(frozen=True)
class ResultRecord:
    """One experiment cell, serialized as one CSV row."""

    experiment: str
    method: str
    target: str
    n: int
    seed: int
    sigma: float
    mise: float
    kl: float
    wall_ms: float

    def row(self):
        return (
            self.experiment,
            self.method,
            self.target,
            str(self.n),
            str(self.seed),
            repr(float(self.sigma)),
            repr(float(self.mise)),
            repr(float(self.kl)),
            f"{max(self.wall_ms, 1e-3):.3f}",
        )


def standard_grid(model, nodes: int) -> metrics.EvalGrid:
    """The model's standard evaluation window at the given per-axis node count."""
    return metrics.EvalGrid.from_window(model.window(), nodes)


def data_window_2d(model, data, prefactor: float):
    """Per-axis 2D window: data bounding box padded for target and kernel tails.

    The pad covers 3 target scale units plus 4 standard deviations of the
    widest smoothing kernel any bundled method would use at this sample
    size, so fitted estimates keep essentially all their mass inside the
    window.
    """
    n = len(data)
    widest = max(0.9 * n ** (-1.0 / 6.0), prefactor * n ** (-0.1))
    kernel_pad = 4.0 * widest * data.std(axis=0, ddof=1)
    pad = 3.0 * model.max_scale + kernel_pad
    lo = data.min(axis=0) - pad
    hi = data.max(axis=0) + pad
    return tuple((float(a), float(b)) for a, b in zip(lo, hi))


def _sample_data(cfg, model, n, seed):
    return distributions.sample(model, n, derive_seed(seed, f"data|{cfg.target}|{n}"))


def _fit(cfg, model, method_name, data, seed):
    """Fit one method on one data set; returns (estimate, sigma)."""
    base, sigma = parse_method(method_name)
    n = len(data)
    if base == "silverman":
        return estimators.kde(data, estimators.silverman_bandwidth(data)), 0.0
    if base == "emp-sd-kde":
        return estimators.emp_sd_kde(data, prefactor=cfg.prefactor), 0.0
    params = estimators.optimal_params(n, model.dim, data, prefactor=cfg.prefactor)
    if base == "sd-kde-exact":
        field = scores.exact_score(model)
    elif base == "sd-kde-table":
        field = scores.load_score_table(cfg.score_table)
        if field.dim != model.dim:
            raise ConfigError(
                f"score table dimension {field.dim} does not match target dimension {model.dim}"
            )
    else:  # sd-kde-noisy
        spec = scores.NoisySpec(
            scores.exact_score(model), sigma, derive_seed(seed, f"noise|{cfg.target}|{n}")
        )
        field = scores.noisy_score(spec, mode=cfg.noise_mode)
    return estimators.sd_kde(data, field, params), sigma


def _map_cells(fn, cells, workers: int):
    if workers <= 1:
        return [fn(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def _metric_record(cfg, method, n, seed, sigma, estimate, truth_values, grid, t0, with_kl=False):
    # KL is recorded only for the iterated experiment: on the wide windows of
    # heavy-tailed targets the estimate can underflow to exact zero where the
    # true density still exceeds the divergence floor.
    m = metrics.mise(estimate, truth_values, grid)
    k = metrics.kl_divergence(truth_values, estimate, grid) if with_kl else float("nan")
    wall = (time.perf_counter() - t0) * 1e3
    return ResultRecord(cfg.kind, method, cfg.target, n, seed, sigma, m, k, wall)


def run_scaling(cfg: ExperimentConfig) -> list[ResultRecord]:
    """Sample/fit/score every (method, n, seed) cell of a scaling study."""
    cfg.validate()
    model = cfg.model()
    grid = standard_grid(model, cfg.nodes_1d)
    truth = model.pdf(grid.nodes)

    def work(cell):
        method, n, seed = cell
        t0 = time.perf_counter()
        data = _sample_data(cfg, model, n, seed)
        estimate, sigma = _fit(cfg, model, method, data, seed)
        return _metric_record(cfg, method, n, seed, sigma, estimate, truth, grid, t0)

    cells = [(m, n, s) for m in cfg.methods for n in sorted(cfg.ns) for s in sorted(cfg.seeds)]
    return _map_cells(work, cells, cfg.workers)


def run_winrate(cfg: ExperimentConfig):
    """Fixed-n matched-seed comparison of two methods; also returns the summary."""
    cfg.validate()
    model = cfg.model()
    grid = standard_grid(model, cfg.nodes_1d)
    truth = model.pdf(grid.nodes)

    def work(cell):
        method, seed = cell
        t0 = time.perf_counter()
        data = _sample_data(cfg, model, cfg.n, seed)
        estimate, sigma = _fit(cfg, model, method, data, seed)
        return _metric_record(cfg, method, cfg.n, seed, sigma, estimate, truth, grid, t0)

    seeds = sorted(cfg.seeds)
    cells = [(m, s) for m in cfg.methods for s in seeds]
    records = _map_cells(work, cells, cfg.workers)
    by_method = {m: [r.mise for r in records if r.method == m] for m in cfg.methods}
    summary = metrics.summarize(
        by_method[cfg.methods[1]], by_method[cfg.methods[0]], baseline_name=cfg.methods[0]
    )
    return records, summary


def run_grid2d(cfg: ExperimentConfig):
    """Per-seed 2D rasters (truth, Silverman, debiased) plus error records."""
    cfg.validate()
    model = cfg.model()

    def work(seed):
        data = _sample_data(cfg, model, cfg.n, seed)
        grid = metrics.EvalGrid.from_window(data_window_2d(model, data, cfg.prefactor), cfg.nodes_2d)
        truth = model.pdf(grid.nodes)
        columns = [grid.nodes[:, 0], grid.nodes[:, 1], truth]
        recs = []
        for method in cfg.methods:
            t0 = time.perf_counter()
            estimate, sigma = _fit(cfg, model, method, data, seed)
            recs.append(_metric_record(cfg, method, cfg.n, seed, sigma, estimate, truth, grid, t0))
            columns.append(estimate.evaluate(grid.nodes))
        return recs, np.stack(columns, axis=1)

    seeds = sorted(cfg.seeds)
    results = _map_cells(work, seeds, cfg.workers)
    records = [r for recs, _ in results for r in recs]
    rasters = {seed: raster for seed, (_, raster) in zip(seeds, results)}
    return records, rasters


def run_iterated(cfg: ExperimentConfig) -> list[ResultRecord]:
    """Vanilla KDE (iteration 0) plus repeated score-correction passes.

    The CSV schema has no iteration column, so the iteration index is
    encoded in the method name: ``iter-0`` (vanilla) through ``iter-K``.
    """
    cfg.validate()
    model = cfg.model()
    grid = standard_grid(model, cfg.nodes_1d)
    truth = model.pdf(grid.nodes)

    def work(seed):
        data = _sample_data(cfg, model, cfg.n, seed)
        t0 = time.perf_counter()
        vanilla = estimators.kde(data, cfg.bandwidth)
        recs = [_metric_record(cfg, "iter-0", cfg.n, seed, 0.0, vanilla, truth, grid, t0, with_kl=True)]
        t0 = time.perf_counter()
        passes = estimators.iterated_sd_kde(
            data, cfg.bandwidth, cfg.initial_step, cfg.decay, cfg.iterations, mode=cfg.decay_mode
        )
        per_pass = (time.perf_counter() - t0) * 1e3 / len(passes)
        for k, estimate in enumerate(passes, start=1):
            m = metrics.mise(estimate, truth, grid)
            kl = metrics.kl_divergence(truth, estimate, grid)
            recs.append(ResultRecord(cfg.kind, f"iter-{k}", cfg.target, cfg.n, seed, 0.0, m, kl, per_pass))
        return recs

    return [r for recs in _map_cells(work, sorted(cfg.seeds), cfg.workers) for r in recs]


def _method_sort_key(method: str):
    head, _, tail = method.rpartition("-")
    return (head, int(tail)) if tail.isdigit() else (method, -1)


def write_results(records, path) -> Path:
    """Write records to CSV with the fixed schema, in deterministic order."""
    path = Path(path)
    ordered = sorted(records, key=lambda r: (r.target, r.n, r.seed, _method_sort_key(r.method), r.sigma))
    with path.open("w", newline="") as fh:
        fh.write(",".join(RESULTS_COLUMNS) + "\n")
        for rec in ordered:
            fh.write(",".join(rec.row()) + "\n")
    return path


def write_raster(raster, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(RASTER_COLUMNS) + "\n")
        for row in raster:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def run_experiment(cfg: ExperimentConfig, out_dir=None):
    """Run the configured experiment and persist its outputs.

    Returns (records, list of written paths).  Winrate runs print their
    summary line to stdout.
    """
    cfg.validate()
    out = Path(out_dir) if out_dir is not None else Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if cfg.kind == "scaling":
        records = run_scaling(cfg)
    elif cfg.kind == "winrate":
        records, summary = run_winrate(cfg)
        rate = summary.win_count / len(summary.values)
        print(
            f"win rate of {cfg.methods[1]} over {cfg.methods[0]}: "
            f"{rate:.3f} ({summary.win_count}/{len(summary.values)} seeds)"
        )
    elif cfg.kind == "grid2d":
        records, rasters = run_grid2d(cfg)
        for seed, raster in rasters.items():
            written.append(write_raster(raster, out / f"raster_seed{seed}.csv"))
    else:
        records = run_iterated(cfg)
    written.insert(0, write_results(records, out / "results.csv"))
    return records, written
