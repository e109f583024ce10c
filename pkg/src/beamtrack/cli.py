"""Command-line entry point for Monte Carlo campaigns."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ConfigError, load_config, preset
from .runner import RunSpec, emit_figures, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="beamtrack",
        description="Seeded Monte Carlo campaigns of predictive beam "
                    "tracking over vehicular radar links.")
    p.add_argument("--config", help="YAML config overlaid on the preset")
    p.add_argument("--preset", default="desk", choices=["desk", "paper", "paper_ns"],
                   help="base scenario preset (default: desk)")
    p.add_argument("--seed", type=int, help="override run.rng_seed")
    p.add_argument("--trackers", default="proposed,ekf",
                   help="comma-separated subset of proposed,ekf,pf,feedback")
    p.add_argument("--trials", type=int, help="override run.n_trials")
    p.add_argument("--slots", type=int, help="override run.n_slots")
    p.add_argument("--antennas", help="NT,NR,M override")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--emit-figures", action="store_true",
                   help="also write plot-ready figure CSVs")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = preset(args.preset)
        if args.config:
            cfg = load_config(args.config, base=cfg)
        overrides = {}
        if args.seed is not None:
            overrides["rng_seed"] = args.seed
        if args.trials is not None:
            overrides["n_trials"] = args.trials
        if args.slots is not None:
            overrides["n_slots"] = args.slots
        if args.antennas:
            parts = args.antennas.split(",")
            if len(parts) != 3:
                raise ConfigError("--antennas expects NT,NR,M")
            overrides.update(Nt=int(parts[0]), Nr=int(parts[1]), M=int(parts[2]))
        if overrides:
            cfg = replace(cfg, **overrides)
        cfg = cfg.validate()
        trackers = tuple(t.strip() for t in args.trackers.split(",") if t.strip())
        spec = RunSpec(config=cfg, trackers=trackers, out_dir=args.out).validate()
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = run(spec)
    print(f"trials: {result.n_trials}  excluded: {result.excluded_trials}")
    print(f"trace:   {result.trace_path}")
    print(f"summary: {result.summary_path}")
    header = ("tracker", "rmse_d", "rmse_theta", "rmse_v",
              "med|th err|", "med rate", "mean pmis")
    print(("{:>10}" + "{:>13}" * 6).format(*header))
    for row in result.summary_rows:
        print("{:>10}".format(row[0])
              + "".join("{:>13.4g}".format(x) for x in row[1:7]))
    if args.emit_figures:
        for path in emit_figures(spec.out_dir):
            print(f"figure:  {path}")
    if result.degenerate:
        print("too many excluded trials", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
