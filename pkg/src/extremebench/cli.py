"""Command-line entry point.

    extremebench all --config run.json --out results/
    extremebench eva --config run.json --tail high --periods 1,10,100

Exit status: 0 success, 1 validation error, 2 computation error,
3 partial failure (some cases failed, others completed).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import load_config
from .errors import ValidationError
from .pipeline import ExitCode

logger = logging.getLogger("extremebench")

COMMANDS = {
    "synth": pipeline.run_synthesis,
    "eva": pipeline.run_eva,
    "circ": pipeline.run_circumstance,
    "bench": pipeline.run_benchmark,
    "all": pipeline.run_all,
}

# flag -> dotted config key it overrides
FLAG_KEYS = {
    "seed": "seed",
    "percentile": "threshold.percentile",
    "tail": "threshold.tail",
    "periods": "eva.return_periods",
    "boot": "eva.n_boot",
    "ci": "eva.ci_level",
}


def _periods(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("at least one return period is required")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extremebench", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "load, filter and describe each case",
        "eva": "threshold, GPD fit, bootstrap return levels, diagnostics",
        "circ": "extreme-vs-full deltas and correlation-shift classification",
        "bench": "cross-case benchmark scores and comparison",
        "all": "every stage in order",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, type=Path, help="run configuration (JSON)")
        p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int)
        p.add_argument("--percentile", type=float)
        p.add_argument("--tail", choices=("low", "high"))
        p.add_argument("--periods", type=_periods, help="comma-separated return periods in years")
        p.add_argument("--boot", type=int, help="bootstrap replicates")
        p.add_argument("--ci", type=float, help="confidence level, e.g. 0.95")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {key: getattr(args, flag) for flag, key in FLAG_KEYS.items()}
    try:
        cfg = load_config(args.config, overrides)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return int(ExitCode.VALIDATION)
    out = args.out or cfg.output_dir or args.config.resolve().parent / "output"
    result = COMMANDS[args.command](cfg, out)
    for line in result.error_summary():
        print(f"failed: {line}", file=sys.stderr)
    if result.verdict is not None:
        print(result.verdict.message)
    elif result.verdict_message:
        print(result.verdict_message)
    logger.info("wrote %d files under %s", len(result.files), out)
    return int(result.exit_code)


if __name__ == "__main__":
    sys.exit(main())
