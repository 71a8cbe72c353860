"""Command-line front end.

Each subcommand resolves a config (file, then --set overrides, then --seed),
runs one experiment, writes its CSV artifacts into --out, and drops a
manifest.json recording the resolved config and a hash of it so a run can
be traced back to its exact inputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from .config import (ConfigError, apply_override, build_dqn_config,
                     build_nsga2_config, build_scenario, validate_config)

_COMMANDS = ("evaluate", "contour", "sweep", "pareto", "dqn", "compare-schemes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nafd-isac",
        description="Cell-free full-duplex ISAC simulator: rates, error "
                    "bounds, and power-allocation optimizers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("evaluate", "score the equal-share baseline allocation"),
        ("contour", "map sensing error bounds over a grid of target positions"),
        ("sweep", "sweep the data/pilot power split"),
        ("pareto", "run the evolutionary search (and optionally the agent)"),
        ("dqn", "train the value-learning agent"),
        ("compare-schemes", "compare duplexing architectures"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file (defaults apply "
                                        "when omitted)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, e.g. dqn.episodes=5")
        p.add_argument("--seed", type=int, help="override the global seed")
        p.add_argument("--out", default="out", help="output directory "
                                                    "(default: ./out)")
        p.add_argument("--threads", type=int,
                       help="cap BLAS/OpenMP threads for this run")
        if name == "pareto":
            p.add_argument("--optimizers", default="nsga2,dqn",
                           help="comma list from {nsga2,dqn}")
    return parser


def _resolve_config(args) -> dict:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"config file {args.config} is not valid JSON: {exc}")
    else:
        raw = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, text = item.partition("=")
        apply_override(raw, key, text)
    cfg = validate_config(raw)
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _write_manifest(out_dir, command, cfg, paths) -> str:
    blob = json.dumps(cfg, sort_keys=True).encode("utf-8")
    manifest = {
        "command": command,
        "config": cfg,
        "config_sha256": hashlib.sha256(blob).hexdigest(),
        "outputs": [os.path.basename(p) for p in paths],
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _run(args) -> list:
    from . import experiments

    cfg = _resolve_config(args)
    exp = cfg["experiment"]
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    scenario = build_scenario(cfg)

    if args.command == "evaluate":
        point, paths = experiments.run_point(scenario, out_dir)
        print(f"f1={point.f1:.6g}  f2={point.f2:.6g}  "
              f"speb={point.speb:.6g}  soeb={point.soeb:.6g}")
    elif args.command == "contour":
        grid = experiments.GridSpec(cells=exp["grid_cells"],
                                    extent=exp["grid_extent"])
        _, paths = experiments.run_contour(
            scenario.layout, scenario.radar,
            pilot_share=1.0 / (scenario.layout.k_dl + 1),
            p_max=scenario.p_max, grid=grid, out_dir=out_dir)
    elif args.command == "sweep":
        _, paths = experiments.run_power_sweeps(
            scenario, variable=exp["sweep_variable"],
            values=exp["sweep_values"],
            antenna_counts=exp["antenna_counts"], out_dir=out_dir)
    elif args.command == "pareto":
        optimizers = tuple(s for s in args.optimizers.split(",") if s)
        unknown = set(optimizers) - {"nsga2", "dqn"}
        if unknown:
            raise ConfigError(f"unknown optimizers: {sorted(unknown)}")
        result = experiments.run_pareto(
            scenario, optimizers=optimizers,
            nsga=build_nsga2_config(cfg), dqn_cfg=build_dqn_config(cfg),
            out_dir=out_dir)
        paths = result.paths
        if result.front is not None:
            print(f"front size {len(result.front.members)} after "
                  f"{result.front.evaluations} evaluations")
    elif args.command == "dqn":
        result, paths = experiments.run_dqn(
            scenario, dqn_cfg=build_dqn_config(cfg), out_dir=out_dir)
        print(f"best reward {result.best_reward:.6g} over {result.steps} steps")
    elif args.command == "compare-schemes":
        _, paths = experiments.compare_schemes(
            scenario, sensing_symbols=exp["sensing_symbols"],
            block_symbols=exp["block_symbols"], out_dir=out_dir)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown command {args.command!r}")

    paths = list(paths)
    paths.append(_write_manifest(out_dir, args.command, cfg, paths))
    for p in paths:
        print(f"wrote {p}")
    return paths


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be a positive integer",
                  file=sys.stderr)
            return 2
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        _run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
