"""
Command-line entry point: `qotto run`, `qotto list-scenarios`, `qotto validate`.

Exit status is 0 on success, 1 for invalid configurations or models and 2 for
numeric failures.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import PRESETS, get_jobs, get_log_level, get_output_dir
from .errors import ConfigError, ModelError, NumericError, SweepError
from .scenario_config import get_config_summary, load_config
from .scenarios import SCENARIO_REGISTRY, run_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERIC = 2


def configure_logging(verbose: int = 0) -> None:
    """Configure the root logger from -v flags or QOTTO_LOG_LEVEL."""
    if verbose >= 2:
        level = "DEBUG"
    elif verbose == 1:
        level = "INFO"
    else:
        level = get_log_level()
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qotto",
        description="Optically pumped qutrit battery and two-stroke engine simulations",
    )
    parser.add_argument("--version", action="version", version=f"qotto {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a scenario file and write its CSV")
    run.add_argument("config", type=Path, help="Scenario file")
    run.add_argument("--out", type=Path, default=None, help="Output directory")
    run.add_argument("--preset", choices=PRESETS, default=None, help="Override the file's preset")
    run.add_argument("--jobs", type=int, default=None, help="Worker processes")

    sub.add_parser("list-scenarios", help="List the available scenarios")

    validate = sub.add_parser("validate", help="Validate a scenario file and print a summary")
    validate.add_argument("config", type=Path, help="Scenario file")
    validate.add_argument("--preset", choices=PRESETS, default=None)
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, preset=args.preset)
    jobs = args.jobs if args.jobs is not None else get_jobs()
    if jobs < 1:
        raise ConfigError(f"--jobs must be at least 1, got {jobs}")
    out_dir = args.out or get_output_dir()
    path = run_scenario(cfg, out_dir, jobs)
    print(f"Wrote {path}")
    return EXIT_OK


def cmd_list_scenarios(args: argparse.Namespace) -> int:
    width = max(len(name) for name in SCENARIO_REGISTRY)
    for name, scenario in SCENARIO_REGISTRY.items():
        print(f"{name:<{width}}  {scenario.description}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, preset=args.preset)
    summary = get_config_summary(cfg)
    grid = summary.pop("grid")
    series = summary.pop("series")
    for key, value in summary.items():
        print(f"{key}: {value}")
    print(f"grid: {grid['size']} points from {grid['first']:g} to {grid['last']:g}")
    if series["axis"]:
        print(f"series: {series['axis']} = {', '.join(f'{v:g}' for v in series['values'])}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "list-scenarios": cmd_list_scenarios,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the qotto command."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.verbose)
        return COMMANDS[args.command](args)
    except (ConfigError, ModelError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericError, SweepError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
