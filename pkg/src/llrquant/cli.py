"""Command-line entry point for the experiment harness.

Subcommands mirror the experiment runners; shared options are a config
file (INI-style key/value with comma-separated lists), a master seed, a
worker count, and an output path. Exit status is nonzero on any error.

Example config:

    [link]
    mt = 2
    mr = 2
    constellation = qam16_gray

    [experiment]
    snr_grid_db = 4, 8, 12, 16
    q_bits = 1, 2, 3, 0
    target_rates = 2, 4
    trials_calibration = 100000
    trials_evaluation = 100000
"""

from __future__ import annotations

import argparse
import configparser
import sys

from .channel import LinkConfig
from .harness import (ExperimentConfig, run_ber, run_boundary_sweep,
                      run_ergodic_capacity, run_level_sweep, run_outage)
from .quant import save_quantizer

_LIST_FIELDS = {"snr_grid_db": float, "q_bits": int, "target_rates": float,
                "i3_grid": float, "level_grid": float, "search_range_db": float}
_INT_FIELDS = ("mt", "mr", "trials_calibration", "trials_evaluation", "n_channels",
               "n_noise", "block_length", "dv", "dc", "max_iterations",
               "min_bit_errors", "max_codewords", "online_budget", "seed")
_STR_FIELDS = ("constellation", "fading", "quantizer_mode", "output_path", "experiment")


def load_config(path: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    cfg = ExperimentConfig()
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key in _LIST_FIELDS:
                conv = _LIST_FIELDS[key]
                setattr(cfg, key, tuple(conv(t.strip()) for t in raw.split(",") if t.strip()))
            elif key in _INT_FIELDS:
                setattr(cfg, key, int(raw))
            elif key in _STR_FIELDS:
                setattr(cfg, key, raw.strip())
            else:
                raise ValueError(f"unknown config key {key!r}")
    return cfg


def _add_common(sub):
    sub.add_argument("--config", required=True, help="INI config file")
    sub.add_argument("--seed", type=int, default=None, help="master seed")
    sub.add_argument("--threads", type=int, default=1, help="worker processes")
    sub.add_argument("--out", default=None, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="llrquant",
                                description="BICM link simulation with quantized LLRs")
    subs = p.add_subparsers(dest="command", required=True)
    for name in ("ergodic", "outage", "sweep-boundary", "ber", "level-sweep",
                 "design-quantizer"):
        sub = subs.add_parser(name)
        _add_common(sub)
        if name == "design-quantizer":
            sub.add_argument("--snr-db", type=float, required=True)
            sub.add_argument("--q", type=int, required=True, help="word length in bits")
            sub.add_argument("--mode", choices=("offline", "online"), default="offline")
    return p


def run_command(args) -> None:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_path = args.out
    if not cfg.output_path and args.command != "design-quantizer":
        raise ValueError("no output path given (config output_path or --out)")

    if args.command == "ergodic":
        run_ergodic_capacity(cfg, threads=args.threads)
    elif args.command == "outage":
        run_outage(cfg, threads=args.threads)
    elif args.command == "sweep-boundary":
        run_boundary_sweep(cfg, threads=args.threads)
    elif args.command == "ber":
        run_ber(cfg, threads=args.threads)
    elif args.command == "level-sweep":
        run_level_sweep(cfg, threads=args.threads)
    elif args.command == "design-quantizer":
        from .harness import design_quantizer_offline, design_quantizer_on_the_fly

        if not cfg.output_path:
            raise ValueError("design-quantizer needs an output path")
        if args.mode == "online":
            qz = design_quantizer_on_the_fly(cfg, args.snr_db, args.q,
                                             threads=args.threads)
        else:
            qz = design_quantizer_offline(cfg, args.snr_db, args.q,
                                          threads=args.threads)
        save_quantizer(qz, cfg.output_path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run_command(args)
    except Exception as exc:  # pragma: no cover - exercised via CLI tests
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
