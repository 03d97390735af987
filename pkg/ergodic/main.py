import argparse
import asyncio
import logging
import sys
from typing import Optional, Sequence

import coloredlogs

from ergodic.commands import (
    BirkhoffCommand,
    ConvergeCommand,
    CorollaryCommand,
    DecomposeCommand,
    FuzzCommand,
    VerifyCertCommand,
    VerifyMaximalCommand,
)
from ergodic.core import Core, ErgodicError
from ergodic.version import __version__

COMMANDS = {
    "birkhoff": BirkhoffCommand,
    "converge": ConvergeCommand,
    "corollary": CorollaryCommand,
    "decompose": DecomposeCommand,
    "fuzz": FuzzCommand,
    "verify-cert": VerifyCertCommand,
    "verify-maximal": VerifyMaximalCommand,
}


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Exact checks of the maximal ergodic inequality and its proof"
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="increase output verbosity"
    )

    sp = parser.add_subparsers(
        help="Experiments",
        dest="command",
        required=True,
    )
    for name, impl in COMMANDS.items():
        subparser = sp.add_parser(name)
        impl.add_parser(subparser)
    return parser.parse_args(argv)


async def run(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    klass = COMMANDS[args.command]

    core_logger = logging.getLogger("ergodic")
    class_logger = logging.getLogger(klass.__name__)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG

    for logger in [core_logger, class_logger]:
        coloredlogs.install(level=level, logger=logger)

    try:
        command = klass(args, class_logger)
        c = Core(command, core_logger)
        report = await c.run()
    except ErgodicError as e:
        core_logger.error(f"{type(e).__name__}: {e}")
        return 2
    return report.exit_code


def main():
    sys.exit(asyncio.run(run()))


if __name__ == "__main__":
    main()
