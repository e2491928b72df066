"""Command line: ``decotrans run|preset|phase``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config
from .presets import PRESETS, preset
from .runner import EXIT_CONFIG, EXIT_DIVERGED, parse_range, phase_csv, run_experiment


def _global_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override engine.seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for the ensemble engine")
    p.add_argument("--dry-run", action="store_true", help="print the resolved plan and exit")
    p.add_argument("--out", default=None, help="override output.directory")
    p.add_argument("--quiet", action="store_true", help="no progress lines")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="decotrans", description="Transport through disordered chains with decoherence.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config (TOML)")
    run.add_argument("config", nargs="?", help="config path (omit when --preset is given)")
    run.add_argument("--preset", choices=sorted(PRESETS), default=None, help="run a built-in config instead")
    _global_flags(run)
    pre = sub.add_parser("preset", help="run a built-in experiment")
    pre.add_argument("name", choices=sorted(PRESETS))
    _global_flags(pre)
    ph = sub.add_parser("phase", help="critical decoherence vs disorder as CSV")
    ph.add_argument("--sigma", default="0:2:0.1", help="start:stop:step or comma list")
    ph.add_argument("--out", default=None, help="write CSV here instead of stdout")
    return ap


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, engine=dataclasses.replace(cfg.engine, seed=args.seed))
    if args.out is not None:
        cfg = dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, directory=args.out))
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "phase":
        try:
            sigmas = parse_range(args.sigma)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if any(s < 0 for s in sigmas):
            print("error: sigma must be >= 0", file=sys.stderr)
            return EXIT_CONFIG
        text = phase_csv(sigmas)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0

    name = args.name if args.command == "preset" else args.preset
    if args.command == "run" and (args.config is None) == (name is None):
        print("error: give exactly one of a config path or --preset", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = preset(name) if name else load_config(args.config)
    except ConfigError as exc:
        where = name or args.config
        if exc.line is not None:
            where += f":{exc.line}:{exc.column}"
        print(f"{where}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = _apply_overrides(cfg, args)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    def progress(msg: str) -> None:
        print(msg, file=sys.stderr, flush=True)

    result = run_experiment(cfg, threads=args.threads, dry_run=args.dry_run, progress=None if args.quiet else progress)
    for f in result.files:
        print(f"wrote {f}")
    for note in result.notes:
        print(f"note: {note}", file=sys.stderr)
    if result.divergences:
        level = "error" if result.exit_code == EXIT_DIVERGED else "info"
        print(f"{level}: {len(result.divergences)} divergent point(s)", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
