"""Command-line interface: ``sdkde run <config>`` and ``sdkde presets``.

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import sys

from .distributions import preset_names
from .runner import ConfigError, ExperimentConfig, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdkde", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("presets", help="list available target presets")

    run = sub.add_parser("run", help="run an experiment described by a TOML config")
    run.add_argument("config", help="path to the experiment config file")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--seeds", help="seed list '0,1,2' or inclusive range 'a..b'")
    run.add_argument("--noise-mode", choices=("per-point", "per-call"), dest="noise_mode")
    run.add_argument("--kind", choices=("scaling", "winrate", "grid2d", "iterated"))
    run.add_argument("--target", help="target preset name")
    run.add_argument("--methods", help="comma-separated method list")
    run.add_argument("--ns", help="comma-separated sample sizes for scaling runs")
    run.add_argument("--n", type=int, help="sample size for winrate/grid2d/iterated runs")
    run.add_argument("--workers", type=int, help="worker threads for independent cells")
    run.add_argument("--nodes-1d", type=int, dest="nodes_1d", help="1D evaluation-grid nodes")
    run.add_argument("--nodes-2d", type=int, dest="nodes_2d", help="2D evaluation-grid nodes per axis")
    run.add_argument("--prefactor", type=float, help="bandwidth prefactor (default 0.9)")
    run.add_argument("--score-table", dest="score_table", help="CSV score table for sd-kde-table")
    run.add_argument("--bandwidth", type=float, help="fixed bandwidth for iterated runs")
    run.add_argument("--initial-step", type=float, dest="initial_step", help="first score-step size")
    run.add_argument("--decay", type=float, help="per-iteration step decay factor")
    run.add_argument("--decay-mode", choices=("multiplicative", "linear"), dest="decay_mode")
    run.add_argument("--iterations", type=int, help="number of correction passes")
    return parser


def _csv_list(text, cast):
    return tuple(cast(part.strip()) for part in text.split(",") if part.strip())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name in preset_names():
            print(name)
        return 0
    try:
        cfg = ExperimentConfig.from_file(args.config)
        cfg = cfg.override(
            kind=args.kind,
            target=args.target,
            methods=_csv_list(args.methods, str) if args.methods else None,
            ns=_csv_list(args.ns, int) if args.ns else None,
            n=args.n,
            seeds=args.seeds,
            noise_mode=args.noise_mode,
            workers=args.workers,
            out=args.out,
            nodes_1d=args.nodes_1d,
            nodes_2d=args.nodes_2d,
            prefactor=args.prefactor,
            score_table=args.score_table,
            bandwidth=args.bandwidth,
            initial_step=args.initial_step,
            decay=args.decay,
            decay_mode=args.decay_mode,
            iterations=args.iterations,
        )
        cfg.validate()
        records, written = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(records)} records to {written[0]}")
    for extra in written[1:]:
        print(f"wrote {extra}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
