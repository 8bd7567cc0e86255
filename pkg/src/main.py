import os
import sys

from loguru import logger

from src.cli import commands
from src.errors import InviscidError
from src.utils import print_json

LOG_LEVEL_ENV = "INVISCID_LOG_LEVEL"


def configure_logging(argv):
    """
    One stderr sink; stdout carries results only. -v / -q anywhere on the command
    line override INVISCID_LOG_LEVEL.
    """
    level = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
    if "-v" in argv:
        level = "DEBUG"
    elif "-q" in argv:
        level = "WARNING"
    logger.remove()
    logger.add(sys.stderr, level=level)
    return [arg for arg in argv if arg not in ("-v", "-q")]


def main(argv=sys.argv[1:]):
    argv = configure_logging(argv)
    if len(argv) < 1:
        print(f"Usage: inviscid <{'|'.join(commands.keys())}> <action> [OPTIONS...] [-v|-q]")
        return 2

    cmd = argv[0]
    try:
        cmd_cls = commands[cmd]
    except KeyError:
        print(f"No such subcommand: {cmd}", file=sys.stderr)
        return 2

    try:
        cmd_cls().run(argv[1:])
    except InviscidError as error:
        logger.error(f"{type(error).__name__}: {error}")
        print_json({"error": error.kind, "message": str(error)})
        return 1
    except SystemExit as exit:
        # argparse reports usage errors with status 2
        return exit.code
    return 0
