"""
csmd-lab command-line entry point.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from src.acceptance import AcceptanceSettings, run_acceptance
from src.config import load_config
from src.errors import ConfigError, CsmdError
from src.harness import run_experiment, write_outputs
from src.kinds import NoiseGenerator, Rule, Verdict
from src.noise import NoiseModel, RngStream, validate_noise
from src.schedules import Schedule, dump_schedule

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
EXIT_FAIL = 1
EXIT_CONFIG = 2

logger = logging.getLogger("csmd")


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with its four subcommands.

    Global flags go before the subcommand, e.g. `main.py --jobs 4 accept`.

    Returns:
        argparse.ArgumentParser: The configured parser
    """
    parser = argparse.ArgumentParser(
        prog="csmd-lab",
        description="Composite stochastic mirror descent laboratory")
    parser.add_argument("--seed", type=int, default=None,
                        help="base seed, overrides the config value")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker processes, overrides the config value")
    parser.add_argument("--out-dir", default=None,
                        help="output directory, overrides the config value")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one experiment from a YAML config")
    run.add_argument("config", type=Path)

    noise = commands.add_parser("validate-noise", help="Monte Carlo check of a noise model")
    noise.add_argument("generator", choices=[g.value for g in NoiseGenerator])
    noise.add_argument("--sigma", type=float, default=1.0)
    noise.add_argument("--p", type=float, default=None)
    noise.add_argument("--dim", type=int, default=3)
    noise.add_argument("--samples", type=int, default=1_000_000)

    dump = commands.add_parser("dump-schedule", help="write eta_t, gamma_t and v_t as CSV")
    dump.add_argument("rule", choices=[r.value for r in Rule])
    dump.add_argument("--T", type=int, required=True)
    dump.add_argument("--eta", type=float, default=1.0)
    dump.add_argument("--eta-star", type=float, default=float("inf"))
    dump.add_argument("--L", type=float, default=0.0)
    dump.add_argument("--mu-f", type=float, default=0.0)
    dump.add_argument("--mu-h", type=float, default=0.0)
    dump.add_argument("--p", type=float, default=None)

    accept = commands.add_parser("accept", help="run the acceptance matrix")
    accept.add_argument("--only", type=int, nargs="+", default=None,
                        help="criterion numbers to run")
    return parser


def command_run(args: argparse.Namespace) -> int:
    """Run one experiment and write results.csv and summary.json."""
    config = load_config(args.config).with_overrides(args.seed, args.jobs, args.out_dir)
    result = run_experiment(config)
    write_outputs([result], config.output_dir)
    for report in result.dominance:
        for line in report.lines:
            print(f"T={report.T} {report.kind.value} {line.label}: {line.verdict.value} "
                  f"({line.statistic:.6g} vs {line.bound:.6g})")
    if result.fit is not None:
        print(f"slope={result.fit.slope:.4f} r2={result.fit.r_squared:.4f}")
    return 0 if result.passed else EXIT_FAIL


def command_validate_noise(args: argparse.Namespace) -> int:
    """Print the noise validation report; FAIL exits with 1."""
    try:
        model = NoiseModel(NoiseGenerator(args.generator), args.sigma, args.p)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    report = validate_noise(model, args.samples, RngStream(args.seed or 0, 0), args.dim)
    print(f"{model.generator.value} sigma={model.sigma:g} "
          f"assumption={model.assumption.value if model.assumption else '-'}")
    for check in report.checks:
        print(f"  lambda={check.lam:g} estimate={check.estimate:.6g} se={check.se:.3g} "
              f"bound={check.bound:.6g} {'PASS' if check.passed else 'FAIL'}")
    print(f"  mean_norm={report.mean_norm:.3g} unbiased={report.unbiased}")
    if report.second_moments is not None:
        print("  second moments at n/100, n/10, n: "
              + ", ".join(f"{m:.4g}" for m in report.second_moments))
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else EXIT_FAIL


def command_dump_schedule(args: argparse.Namespace) -> int:
    """Write the schedule audit table to stdout or <out-dir>/schedule_<rule>.csv."""
    try:
        schedule = Schedule(Rule(args.rule), args.eta, args.eta_star, args.L, args.mu_f,
                            args.mu_h, args.p, horizon=args.T)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    table = dump_schedule(schedule, args.T)
    if args.out_dir is None:
        table.to_csv(sys.stdout, index=False, float_format="%.17g", lineterminator="\n")
        return 0
    directory = Path(args.out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"schedule_{args.rule}.csv"
    table.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    logger.info("wrote %s", path)
    return 0


def command_accept(args: argparse.Namespace) -> int:
    """Run the acceptance matrix; any FAIL exits with 1."""
    settings = AcceptanceSettings(args.seed or 0, args.jobs or 1)
    results = run_acceptance(settings, args.out_dir or "results", args.only)
    for result in results:
        print(result.line())
    return EXIT_FAIL if any(r.verdict == Verdict.FAIL for r in results) else 0


COMMANDS = {
    "run": command_run,
    "validate-noise": command_validate_noise,
    "dump-schedule": command_dump_schedule,
    "accept": command_accept,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse the command line, configure logging and dispatch to a subcommand.

    Args:
        argv (Sequence[str], optional): Arguments without the program name

    Returns:
        int: Exit code, 0 on success, 1 on a FAIL verdict, 2 on a configuration error
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as err:
        logger.error("configuration error: %s", err)
        return EXIT_CONFIG
    except CsmdError as err:
        logger.error("%s: %s", type(err).__name__, err)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
