"""Command-line entry point: ``gluedtrees <experiment> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import EXPERIMENTS, ExperimentConfig
from .experiments import run_experiment

# flag -> config key; values are passed through the config text parser
FLAGS = {
    "n": "n",
    "gamma": "gamma",
    "delta": "delta",
    "family": "family",
    "seed": "seed",
    "seeds": "seeds",
    "times": "times",
    "grid_dt": "grid_dt",
    "horizon": "horizon",
    "steps": "steps",
    "quantile": "quantile",
    "out": "out",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gluedtrees",
        description="Quantum walks on glued trees with on-site disorder: reproducible datasets.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    helps = {
        "fig4": "column profiles of the walk for several disorder widths",
        "scaling": "band-centre localization length vs disorder width",
        "hitting": "max probability of reaching the right-most column vs n",
        "crosscheck": "reduced line model against the full graph (n <= 8)",
        "thouless": "tabulate the Lloyd localization length over energy",
    }
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--n", help="tree depth (comma list for hitting/crosscheck)")
        p.add_argument("--gamma", help="hopping rate (default 1)")
        p.add_argument("--delta", help="disorder width(s), comma separated")
        p.add_argument("--family", help="cauchy, gaussian or uniform (comma list for scaling)")
        p.add_argument("--seed", help="master seed")
        p.add_argument("--seeds", help="number of disorder repetitions")
        p.add_argument("--times", help="comma separated output times")
        p.add_argument("--grid-dt", dest="grid_dt", help="time-grid spacing for hitting probabilities")
        p.add_argument("--horizon", help="hitting horizon in units of n/gamma")
        p.add_argument("--steps", help="transfer-matrix steps per chain")
        p.add_argument("--quantile", help="packet-extent quantile")
        p.add_argument("--out", help="output directory")
        p.add_argument("--overwrite", action="store_true", help="replace existing output files")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.defaults(args.experiment)
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_text(fh.read(), base=config)
        if config.experiment != args.experiment:
            raise ValueError(f"config file is for {config.experiment!r}, not {args.experiment!r}")
    overrides = {key: getattr(args, flag) for flag, key in FLAGS.items() if getattr(args, flag) is not None}
    if args.overwrite:
        overrides["overwrite"] = "true"
    return config.with_overrides(overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        result = run_experiment(config)
    except Exception as exc:  # reported as machine-readable JSON
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    manifest = result["manifest"]
    print(json.dumps({"manifest": manifest["path"], "files": sorted(manifest["files"]),
                      "warnings": manifest["warnings"]}))
    return 0
