"""Command line entry point: one experiment per invocation."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import ovals.definitions as defs
from ovals.config import config_hash, load_config
from ovals.errors import ConfigError, OvalsError
from ovals.experiments import emit_outputs, run_experiment, verify_experiment, write_diagnostic

logger = logging.getLogger(__name__)


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ovals",
        description="Numerical experiments on symmetric ancient ovals of mean curvature flow",
    )
    parser.add_argument("tag", choices=defs.EXPERIMENT_TAGS, help="experiment to run")
    parser.add_argument("--config", type=Path, default=None, help="config file (key = value lines)")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None, help="worker processes for sweeps")
    parser.add_argument("--verify", action="store_true", help="run the built-in oracle checks only")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the experiment and write its outputs.

    :param argv: arguments without the program name
    :return: exit code 0 (checks passed), 1 (checks failed), 2 (invalid
        configuration) or 3 (numerical failure)
    """
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    try:
        cfg = load_config(
            args.config,
            tag=args.tag,
            out=str(args.out) if args.out is not None else None,
            threads=args.threads,
        )
    except ConfigError as err:
        logger.error("[RUN] invalid configuration: %s", err)
        return defs.EXIT_INVALID_CONFIG

    out = Path(cfg.out)
    try:
        record = verify_experiment(cfg) if args.verify else run_experiment(cfg)
    except (OvalsError, ValueError, ArithmeticError) as err:
        logger.error("[RUN] numerical failure: %s: %s", type(err).__name__, err)
        try:
            path = write_diagnostic(out, err, config_hash(cfg))
            logger.error("[RUN] diagnostic written to %s", path)
        except OSError as io_err:
            logger.error("[RUN] %s", io_err)
        return defs.EXIT_NUMERICAL_FAILURE

    try:
        emit_outputs(record, out, cfg)
    except OSError as err:
        logger.error("[RUN] %s", err)
        return defs.EXIT_NUMERICAL_FAILURE

    if not record.passed():
        failed = sorted(name for name, ok in record.checks.items() if not ok)
        logger.warning("[RUN] failed checks: %s", ", ".join(failed))
        return defs.EXIT_CHECKS_FAILED
    return defs.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
