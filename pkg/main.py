"""Command-line driver for the tree-expansion laboratory."""

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from models.run_models import RunConfig
from pipeline.orchestrator import LabOrchestrator, run_verify
from pipeline.suites import SUITES
from utils.logger import setup_logger

logger = setup_logger("main")

EXIT_INVALID = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nslab",
        description="Verify the binary-tree expansion of the Navier-Stokes equations numerically.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat KEY=VALUE run configuration file")
    common.add_argument("--out", help="output directory (overrides OUTPUT_DIR in the config)")
    common.add_argument("--jobs", type=int, help="worker threads")
    common.add_argument("--seed", type=int, help="seed for random initial data")

    sub = parser.add_subparsers(dest="command", required=True)

    trees = sub.add_parser("trees", parents=[common], help="write tree and forest catalogs with counts")
    trees.add_argument("--n-max", type=int, default=6)
    trees.add_argument("--k-max", type=int, default=4)

    verify = sub.add_parser("verify", parents=[common], help="run the acceptance suites")
    verify.add_argument("--suite", action="append", choices=sorted(SUITES),
                        help="run only this suite (repeatable)")

    sub.add_parser("series", parents=[common], help="truncated solution series against reference solvers")
    sub.add_parser("kernelcheck", parents=[common], help="frequency-space kernel validation")
    sub.add_parser("solve", parents=[common], help="reference solves with snapshots and trajectories")
    sub.add_parser("scalingcheck", parents=[common], help="dilation invariance via solver and series")
    return parser


def load_config(args: argparse.Namespace) -> dict:
    """The raw configuration: file values overlaid with command-line flags."""
    data = RunConfig.from_file(args.config).model_dump() if args.config else RunConfig().model_dump()
    overrides = {"output_dir": args.out, "jobs": args.jobs, "seed": args.seed}
    data.update({k: v for k, v in overrides.items() if v is not None})
    return data


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args)
        if args.command == "verify":
            return run_verify(raw, args.suite)
        cfg = RunConfig.model_validate(raw)
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_INVALID

    orchestrator = LabOrchestrator(cfg)
    handlers = {
        "trees": lambda: orchestrator.trees(args.n_max, args.k_max),
        "series": orchestrator.series,
        "kernelcheck": orchestrator.kernelcheck,
        "solve": orchestrator.solve,
        "scalingcheck": orchestrator.scalingcheck,
    }
    try:
        return handlers[args.command]()
    except ValueError as exc:
        # LabError subclasses ValueError: caps, small-time guard, refused parameters
        logger.error("%s refused: %s", args.command, exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
