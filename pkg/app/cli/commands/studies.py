"""Study and report subcommands"""

import argparse
import logging

from ...core.services import ReportService, StudyService
from ..deps import finish, get_storage, load_config, resolve_jobs
from .pipeline import add_common_arguments

logger = logging.getLogger(__name__)


def study_windows(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"study_windows": args.windows, "repeats": args.repeats, "seed": args.seed})
    return _run_study("windows", cfg, args)


def study_noise(args: argparse.Namespace) -> int:
    cfg = load_config(
        args.config,
        {"alphas": args.alphas, "repeats": args.repeats, "noise_grid_step": args.grid_step, "seed": args.seed},
    )
    return _run_study("noise", cfg, args)


def study_width(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"ratios": args.ratios, "repeats": args.repeats, "seed": args.seed})
    return _run_study("width", cfg, args)


def _run_study(study: str, cfg, args: argparse.Namespace) -> int:
    storage = get_storage(cfg, args.output)
    jobs = resolve_jobs(args.jobs, cfg)
    logger.info(f"Running {study} study on {cfg.benchmark} with {jobs} workers")
    return finish(StudyService.run(study, cfg, storage, jobs))


def report(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    result = ReportService.render(get_storage(cfg, args.output))
    if result["success"]:
        print(result["report"])
    return finish(result)


def register(subparsers) -> None:
    parser = subparsers.add_parser("study-windows", help="Sweep every observation window and tabulate the improvement")
    add_common_arguments(parser)
    parser.add_argument("--windows", nargs="+", help="Window ids")
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--seed", type=int)
    parser.set_defaults(handler=study_windows)

    parser = subparsers.add_parser("study-noise", help="lambda_opt under increasing label noise")
    add_common_arguments(parser)
    parser.add_argument("--alphas", nargs="+", type=float)
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--grid-step", type=float, help="Lambda grid step of the noise study")
    parser.add_argument("--seed", type=int)
    parser.set_defaults(handler=study_noise)

    parser = subparsers.add_parser("study-width", help="lambda_opt across parameter width ratios")
    add_common_arguments(parser)
    parser.add_argument("--ratios", nargs="+", type=float)
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--seed", type=int)
    parser.set_defaults(handler=study_width)

    parser = subparsers.add_parser("report", help="Render improvement and trend tables from stored studies")
    add_common_arguments(parser)
    parser.set_defaults(handler=report)
