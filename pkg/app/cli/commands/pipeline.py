"""gen-data, build-landmarks and sweep subcommands"""

import argparse
import logging

from ...core.services import DataService, LandmarkService, SweepService
from ..deps import finish, get_storage, load_config, resolve_jobs

logger = logging.getLogger(__name__)


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", help="JSON run configuration (defaults when omitted)")
    parser.add_argument("-o", "--output", help="Run directory (overrides output_dir of the config)")
    parser.add_argument("-j", "--jobs", type=int, help="Worker processes")


def gen_data(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"window": args.window, "alpha": args.alpha, "width_ratio": args.width_ratio, "seed": args.seed})
    storage = get_storage(cfg, args.output)
    logger.info(f"Generating {cfg.benchmark} datasets into {storage.root}")
    return finish(DataService.generate(cfg, storage))


def build_landmarks(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    storage = get_storage(cfg, args.output)
    logger.info(f"Building landmarks in {storage.root}")
    return finish(LandmarkService.build(cfg, storage, resolve_jobs(args.jobs, cfg)))


def sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"grid_step": args.grid_step})
    storage = get_storage(cfg, args.output)
    logger.info(f"Sweeping lambda with step {cfg.grid_step} in {storage.root}")
    return finish(SweepService.run(cfg, storage, resolve_jobs(args.jobs, cfg)))


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen-data", help="Generate local, knowledge, validation and test datasets")
    add_common_arguments(parser)
    parser.add_argument("--window", help="Observation window id")
    parser.add_argument("--alpha", type=float, help="Relative noise level of the training targets")
    parser.add_argument("--width-ratio", type=float, help="Parameter sampling width ratio r")
    parser.add_argument("--seed", type=int)
    parser.set_defaults(handler=gen_data)

    parser = subparsers.add_parser("build-landmarks", help="Build knowledge landmarks from data/knowledge.csv")
    add_common_arguments(parser)
    parser.set_defaults(handler=build_landmarks)

    parser = subparsers.add_parser("sweep", help="Fit one model per lambda and select lambda_opt")
    add_common_arguments(parser)
    parser.add_argument("--grid-step", type=float, help="Lambda grid step")
    parser.set_defaults(handler=sweep)
