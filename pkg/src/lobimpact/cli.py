"""Command line: ``lobimpact run`` drives the pipeline, ``lobimpact generate`` writes flow."""

from __future__ import annotations

import argparse
import json
import sys

from . import io as lio
from .errors import ConfigError, LobImpactError
from .orderflow import FlowConfig, generate_arrays
from .pipeline import EXIT_OK, EXIT_STAGE, EXIT_VALIDATION, STAGES, load_config, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lobimpact",
                                description="Order book price impact analysis pipeline.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the analysis pipeline")
    run.add_argument("--config", help="key=value settings file")
    src = run.add_mutually_exclusive_group()
    src.add_argument("--input", help="event CSV to analyze")
    src.add_argument("--synthetic", action="store_true", default=None,
                     help="generate a synthetic multi-stock flow instead")
    run.add_argument("--meta", help="stock metadata CSV (code,C_tot,C,z,N)")
    run.add_argument("--seed", type=int)
    run.add_argument("--bins", type=int, help="bins per impact curve")
    run.add_argument("--out", help="output directory")
    run.add_argument("--stage", default="all", choices=("all",) + STAGES)
    run.add_argument("--stocks", type=int, help="synthetic stock count")
    run.add_argument("--events", type=int, help="synthetic events per stock")
    run.add_argument("--backend", choices=("auto", "compiled", "python"))
    run.add_argument("--workers", type=int)
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any config key (repeatable)")

    gen = sub.add_parser("generate", help="write a synthetic event CSV for one stock")
    gen.add_argument("--out", required=True, help="event CSV path")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--events", type=int, default=10_000)
    gen.add_argument("--stock", default="000000")
    gen.add_argument("--p-cancel", type=float, default=0.3)
    gen.add_argument("--size-tail", type=float, default=1.5)
    gen.add_argument("--no-lots", action="store_true", help="disable the 100-share buy lot")
    return p


def _run(args) -> int:
    overrides = {k: getattr(args, k) for k in ("input", "synthetic", "meta", "seed", "bins",
                                               "out", "stocks", "events", "backend", "workers")}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value
    cfg = load_config(args.config, **overrides)
    outcome = run_pipeline(cfg, args.stage)
    if outcome.failure is not None:
        print(json.dumps(outcome.failure, sort_keys=True), file=sys.stderr)
    return outcome.exit_code


def _generate(args) -> int:
    cfg = FlowConfig(seed=args.seed, n_events=args.events, stock=args.stock,
                     p_cancel=args.p_cancel, size_tail=args.size_tail,
                     lot_rule=None if args.no_lots else "BuyLots100")
    lio.write_events(args.out, [generate_arrays(cfg)])
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args) if args.command == "run" else _generate(args)
    except ConfigError as exc:
        print(json.dumps({"stage": "config", "type": "ConfigError", "error": str(exc)}),
              file=sys.stderr)
        return EXIT_VALIDATION
    except LobImpactError as exc:
        print(json.dumps({"stage": args.command, "type": type(exc).__name__,
                          "error": str(exc)}), file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
