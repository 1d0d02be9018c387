"""Argument parsing and subcommand dispatch"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from ..core.config import settings
from ..core.errors import ConfigurationError, KDError, MissingArtifactError
from ..core.models import RunConfig
from .commands import pipeline, studies
from .deps import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def config_schema(args: argparse.Namespace) -> int:
    print(json.dumps(RunConfig.model_json_schema(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kd-landmarks",
        description="Knowledge landmarks as a regularizer for models trained on local data",
    )
    parser.add_argument(
        "--log-level",
        default=settings.log_level,
        type=str.upper,
        choices=LOG_LEVELS,
        help="Logging level (default from KD_LOG_LEVEL)",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="subcommand")
    pipeline.register(subparsers)
    studies.register(subparsers)
    schema = subparsers.add_parser("config-schema", help="Print the JSON schema of the run configuration")
    schema.set_defaults(handler=config_schema)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one subcommand; returns 0 on success, 1 on runtime failure, 2 on usage or config errors"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    # Configure logging
    logging.basicConfig(
        level=args.log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stdout
    )

    try:
        return args.handler(args)
    except (ConfigurationError, MissingArtifactError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except KDError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
