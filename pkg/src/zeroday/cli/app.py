from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from zeroday.cli import commands
from zeroday.cli.config import Command, RunConfig, validate
from zeroday.errors import ConfigError, ZerodayError
from zeroday.parallel import default_threads
from zeroday.seeding import SeedPlan

logger = logging.getLogger(__name__)

COMMAND_HELP = {
    Command.PREPROCESS: "fit the benign-only pipeline and write transformed files",
    Command.TRAIN_AE: "train the autoencoder on benign rows",
    Command.TRAIN_SVM: "fit one One-Class SVM per nu in the sweep",
    Command.EVALUATE: "write per-class detection reports for the configured detector",
    Command.SEARCH: "random search over autoencoder hyperparameters",
    Command.COMPARE: "compare an autoencoder and a One-Class SVM report class by class",
    Command.SYNTH: "write a synthetic labelled dataset",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration (YAML)")
    common.add_argument("--seed", type=int, help="global seed, overrides the config")
    common.add_argument(
        "--threads", type=int, help="worker threads (default: machine parallelism)"
    )
    common.add_argument("--out", type=Path, help="output directory, overrides the config")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="zeroday",
        description="Zero-day intrusion detection with detectors trained on benign traffic.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, help in COMMAND_HELP.items():
        sub = subparsers.add_parser(str(command), parents=[common], help=help)
        if command is Command.COMPARE:
            sub.add_argument("report_a", type=Path, help="autoencoder report (json)")
            sub.add_argument("report_b", type=Path, help="One-Class SVM report (json)")
            sub.add_argument("--threshold", type=float, required=True)
            sub.add_argument("--nu", type=float, required=True)
    return parser


def configure_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def run(args: argparse.Namespace) -> int:
    command = Command(args.command)
    if args.config is not None:
        config = RunConfig.load(args.config)
    elif command is Command.COMPARE:
        config = RunConfig.from_dict({})
    else:
        raise ConfigError(f"{command} needs --config")
    config = validate(config.with_overrides(args.seed, args.threads, args.out), command)

    ctx = commands.RunContext(
        config, command, SeedPlan(config.seed), config.threads or default_threads()
    )
    logger.debug("Running %s with seeds %s", command, ctx.plan.as_dict())
    match command:
        case Command.PREPROCESS:
            commands.cmd_preprocess(ctx)
        case Command.TRAIN_AE:
            commands.cmd_train_ae(ctx)
        case Command.TRAIN_SVM:
            commands.cmd_train_svm(ctx)
        case Command.EVALUATE:
            commands.cmd_evaluate(ctx)
        case Command.SEARCH:
            commands.cmd_search(ctx)
        case Command.COMPARE:
            commands.cmd_compare(ctx, args.report_a, args.report_b, args.threshold, args.nu)
        case Command.SYNTH:
            commands.cmd_synth(ctx)
    ctx.write_metadata()
    return 0


def main(argv: list[str] | None = None) -> int:
    """Exit status: 0 success, 2 configuration, 3 data, 4 numeric failure."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return run(args)
    except ZerodayError as e:
        separator = "\n" if isinstance(e, ConfigError) else " "
        print(f"zeroday {args.command}: error:{separator}{e}", file=sys.stderr)
        return e.exit_code
