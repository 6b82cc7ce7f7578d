import argparse
import logging
import os
import sys
from pathlib import Path

from towercert.errors import ConfigError
from towercert.verifier.config import CHECK_IDS, load_config
from towercert.verifier.report import emit_report, write_report
from towercert.verifier.suite import run_suite


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2


def _csv(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="verify", description="Certify the tower X_n over Q(lambda) with exact arithmetic.")
    parser.add_argument("--n", type=int, help="top level of the tower (1..5)")
    parser.add_argument("--lambdas", type=_csv, help="three rationals, e.g. 1,2,3 or -1,2,1/2")
    parser.add_argument("--degree-bound", type=int, dest="degree_bound", help="rigidity degree bound")
    parser.add_argument("--check", type=_csv, dest="checks", help=f"comma separated subset of {CHECK_IDS[0]}..{CHECK_IDS[-1]}")
    parser.add_argument("--report", choices=("json", "md"), help="report format")
    parser.add_argument("--out", type=Path, help="write the report here instead of stdout")
    parser.add_argument("--budget", type=int, help="reduction steps allowed per check")
    parser.add_argument("--break", action="append", dest="breaks", metavar="FAULT", help="inject a deliberate fault (repeatable)")
    parser.add_argument("--workers", type=int, help="checks run concurrently")
    parser.add_argument("--modified-parameters", type=_csv, dest="modified_parameters", help="nonzero rationals a for h1^a")
    parser.add_argument("--verbose", action="store_true", default=None, help="dump constructed objects into the report")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=getattr(logging, os.getenv("TOWERCERT_LOG_LEVEL", "INFO").upper(), logging.INFO))
    args = build_parser().parse_args(argv)
    try:
        config = load_config(**vars(args))
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG_ERROR

    report = run_suite(config)
    try:
        if config.out is not None:
            write_report(report, config.report, config.out)
        else:
            sys.stdout.write(emit_report(report, config.report))
    except OSError as e:
        logger.error(f"Could not write report: {e}")
        return EXIT_CHECK_FAILED
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
