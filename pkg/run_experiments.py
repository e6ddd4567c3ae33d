#!/usr/bin/env python3
"""
SPPA Toolkit: Experiment Runner

Command-line entry point for reproducible experiments:

    run <config>      run SPPA for every seed, write traces and a summary
    compare <config>  run SPPA and the subgradient method on the same draws
    check             run the counted property suite

Exit codes: 0 success, 1 usage/config/build/I-O error, 2 property failure.
"""

import os
import sys
import math
import logging
import argparse

from tabulate import tabulate

# Add project root to Python path
current_file = os.path.abspath(__file__)
project_root = os.path.dirname(current_file)
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from src.data.config_loader import load_config, parse_seeds
from src.experiments.comparison import compare_methods
from src.experiments.property_suite import SUITES, run_property_suite
from src.experiments.runner import run_experiment
from src.utils.exceptions import ConfigError, SPPAError
from src.utils.settings import configure_logging, get_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PROPERTY_FAILURE = 2


class ExperimentArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = ExperimentArgumentParser(description="Stochastic proximal point experiments")
    parser.add_argument("--log-level", help="Log level (default: SPPA_LOG_LEVEL or INFO)")
    parser.add_argument("--log-file", help="Also write log records to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "Run SPPA over every seed of a config"),
        ("compare", "Compare SPPA with the stochastic subgradient method"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("config", help="Path of the INI experiment config")
        sub.add_argument("--seed-override", help="Comma-separated seeds replacing the config's list")
        sub.add_argument("--iterations-override", type=int, help="Iteration budget replacing the config's")
        sub.add_argument("--out", help="Output directory replacing the config's")
        sub.add_argument("--workers", type=int, help="Process count for seed batches")

    check = commands.add_parser("check", help="Run the invariant and property suite")
    check.add_argument("--trials", type=int, help="Base trial count (default: SPPA_CHECK_TRIALS)")
    check.add_argument("--seed", type=int, default=0, help="Seed of the property streams")
    check.add_argument("--only", nargs="+", choices=sorted(SUITES), help="Run only these properties")
    return parser


def load_with_overrides(args):
    """Read the config named on the command line and apply the overrides"""
    config = load_config(args.config)
    seeds = None
    if args.seed_override:
        try:
            seeds = parse_seeds(args.seed_override)
        except ValueError as e:
            raise ConfigError(f"--seed-override: {e}") from e
    try:
        return config.with_overrides(seeds=seeds, iterations=args.iterations_override, output_dir=args.out)
    except ValueError as e:
        logger.error(f"Invalid override: {e}")
        raise ConfigError(f"Invalid override: {e}") from e


def print_summary(result):
    """Print the per-seed summary of a run"""
    frame = result.frame()
    print(f"\nSummary ({result.config.problem.value}, {result.config.iterations} iterations):")
    print(tabulate(frame.values.tolist(), headers=list(frame.columns), tablefmt="pretty", floatfmt=".6g"))
    if not math.isnan(result.median_final_distance):
        print(f"Median final distance: {result.median_final_distance:.6g}")
    print(f"Summary written to {result.summary_path}")


def print_comparison(result):
    """Print the per-seed, per-method comparison"""
    summary = result.summary
    print(f"\nComparison ({result.config.problem.value}, {result.config.iterations} iterations):")
    print(tabulate(summary.values.tolist(), headers=list(summary.columns), tablefmt="pretty", floatfmt=".6g"))
    print(
        f"Subgradient diverged or ended farther than SPPA in "
        f"{result.subgradient_worse_count()}/{len(result.config.seeds)} seed(s)"
    )
    for path in result.paths:
        print(f"Wrote {path}")


def print_properties(results):
    """Print the pass/fail table of the property suite"""
    headers = ["Property", "Result", "Trials", "Worst", "Tolerance", "Measure"]
    print(tabulate([r.as_row() for r in results], headers=headers, tablefmt="pretty", floatfmt=".3e"))
    failed = [r.name for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} properties passed")


def main(argv=None):
    """Run the SPPA experiment command line"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_settings()
    except ValueError as e:
        print(f"Invalid environment: {e}", file=sys.stderr)
        return EXIT_ERROR
    configure_logging(args.log_level or settings.log_level, args.log_file)

    try:
        if args.command == "run":
            config = load_with_overrides(args)
            print_summary(run_experiment(config, workers=args.workers))

        elif args.command == "compare":
            config = load_with_overrides(args)
            print_comparison(compare_methods(config, workers=args.workers))

        elif args.command == "check":
            trials = args.trials if args.trials is not None else settings.check_trials
            if trials < 1:
                parser.error("--trials must be >= 1")
            results = run_property_suite(trials=trials, seed=args.seed, names=args.only)
            print_properties(results)
            if not all(r.passed for r in results):
                return EXIT_PROPERTY_FAILURE

    except SPPAError as e:
        logger.error(f"Error: {e}")
        return EXIT_ERROR

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
