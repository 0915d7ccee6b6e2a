"""
Command-line front door for the Duffin-Schaeffer lab

Usage:
    python cli.py measure --config runs/measure.toml
    python cli.py series --config runs/ds.toml --Q 1000 --out ds.json
"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from checks.lemma_checker import LemmaGrid
from config import Config, load_run_config
from lab import DuffinSchaefferLab
from tools.arith import ConfigError, DomainError, LabError
from tools.report_store import dumps

logger = logging.getLogger(__name__)

COMMANDS = ['measure', 'intersect', 'overlap-scan', 'series', 'window', 'mc', 'counterexample', 'lemmas']


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    grid = LemmaGrid()
    parser = argparse.ArgumentParser(
        description="Exact and Monte Carlo experiments on Duffin-Schaeffer sets",
        epilog=(f"lemmas runs a reduced grid: heights up to {grid.sandwich_d} for the measure sandwich, "
                f"K = {grid.overlap_K} for the overlap audit, N = {grid.counterexample_N} for the counterexample. "
                "The full sizes live in the slow test suite (pytest -m slow)."),
    )
    parser.add_argument('command', choices=COMMANDS, help="Subcommand to run")
    parser.add_argument('--config', help="TOML run configuration")
    parser.add_argument('--n', type=int, help="Number of rows of the matrix")
    parser.add_argument('--m', type=int, help="Number of linear forms")
    parser.add_argument('--Q', type=int, help="Height cutoff")
    parser.add_argument('--seed', type=int, help="Seed for randomized commands")
    parser.add_argument('--out', help="Report file, relative to the outputs directory")
    parser.add_argument('--workers', type=int, help="Worker threads; never changes the report")
    parser.add_argument('--series', help="Series selector for the series command")
    return parser.parse_args(argv)


def error_payload(error: Exception) -> Dict[str, Any]:
    """Machine-readable diagnostic for a failed run"""
    return {'error': {
        'type': type(error).__name__,
        'operation': getattr(error, 'operation', None),
        'message': str(error),
    }}


def main(argv: Optional[List[str]] = None) -> int:
    """Main function for running one lab command"""
    logging.basicConfig(level=Config.LOG_LEVEL, stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    args = parse_args(argv)
    overrides = {
        'command': args.command,
        'n': args.n,
        'm': args.m,
        'Q': args.Q,
        'seed': args.seed,
        'out': args.out,
        'workers': args.workers,
        'series': args.series,
    }

    try:
        config = load_run_config(args.config, overrides)
        lab = DuffinSchaefferLab(Config.OUTPUTS_DIR)
        status, report = lab.run(config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(dumps(error_payload(e)))
        return Config.EXIT_CONFIG_ERROR
    except DomainError as e:
        logger.error(f"Precondition failed in {e.operation}: {e}")
        print(dumps(error_payload(e)))
        return Config.EXIT_PRECONDITION
    except LabError as e:
        logger.error(f"Lab error: {e}")
        print(dumps(error_payload(e)))
        return Config.EXIT_PRECONDITION

    if config.command == 'overlap-scan':
        print(dumps({key: value for key, value in report.items() if key != 'records'}))
    else:
        print(dumps(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
