"""Command-line entry point for the Monte Carlo experiment sweep."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiment import (
    ConfigError,
    ExperimentConfig,
    emit_csv,
    format_summary,
    load_config,
    paper_preset,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="onebit-jce",
        description="Joint CFO/channel estimation Monte Carlo sweep over one-bit measurements",
    )
    p.add_argument("--config", help="path to a key = value config file")
    p.add_argument("--preset", choices=["paper"], help="load a named preset configuration")
    p.add_argument("--snr", help="comma-separated SNR list in dB (overrides config)")
    p.add_argument("--np", dest="n_p", help="comma-separated pilot lengths (overrides config)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per (n_p, snr) cell")
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--threads", type=int, default=1, help="worker threads over trials")
    p.add_argument("--no-timing", action="store_true",
                   help="zero the runtime_ms column for byte-reproducible CSVs")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return p


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.snr is not None:
        updates["snr_db_list"] = [float(v) for v in args.snr.split(",")]
    if args.n_p is not None:
        updates["n_p_list"] = [int(v) for v in args.n_p.split(",")]
    if args.trials is not None:
        updates["n_trials"] = args.trials
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["output_path"] = args.out
    return replace(cfg, **updates) if updates else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        elif args.preset == "paper":
            cfg = paper_preset()
        else:
            cfg = ExperimentConfig()
        cfg = _apply_overrides(cfg, args)

        progress = None
        if not args.quiet:
            total_cells = len(cfg.n_p_list) * len(cfg.snr_db_list) * cfg.n_trials
            print(f"running {total_cells} trials "
                  f"({len(cfg.n_p_list)} pilot lengths x {len(cfg.snr_db_list)} SNRs "
                  f"x {cfg.n_trials} trials, seed {cfg.seed})", file=sys.stderr)
            progress = lambda done, total: print(
                f"\r  {done}/{total}", end="", file=sys.stderr, flush=True)

        records, summaries = run_experiment(
            cfg, threads=args.threads, measure_runtime=not args.no_timing,
            progress=progress,
        )
        if progress is not None:
            print(file=sys.stderr)
        emit_csv(records, cfg.output_path)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 1

    print(format_summary(summaries))
    print(f"wrote {len(records)} records to {cfg.output_path}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
