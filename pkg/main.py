import json
import logging
import sys
from argparse import ArgumentParser
from importlib import import_module

from requests import RequestException
from scipy.linalg import LinAlgError

from commands import commands
from funreg.errors import ConfigError, DimensionMismatchError, FunRegError, ParseError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Input problems exit with 2, numerical and network failures with 1
INPUT_ERRORS = (ParseError, ConfigError, DimensionMismatchError, FileNotFoundError)
FAILURES = (FunRegError, LinAlgError, RequestException)

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

class CommandParser(ArgumentParser):
    """An ArgumentParser that reports bad flags as a ConfigError
    instead of printing its usage and exiting
    """

    def error(self, message: str):
        raise ConfigError("{}: {}".format(self.prog, message))

def build_parser() -> ArgumentParser:
    """Creates the argument parser with every registered subcommand"""
    parser = CommandParser(prog = "funreg",
        description = "Multiple functional linear regression with group SCAD variable selection")
    parser.add_argument("-v", "--verbose", action = "count", default = 0,
        help = "log progress (-v) or everything (-vv) to stderr")
    subparsers = parser.add_subparsers(dest = "subcommand", metavar = "command", parser_class = CommandParser)
    subparsers.required = True

    for command in commands.values():
        import_module(command["extension"]).setup(subparsers)
    return parser

def report(error: BaseException, code: int) -> int:
    """Writes a single machine-readable error line to stderr and returns the exit code"""
    print(json.dumps({"error": type(error).__name__, "message": str(error)}), file = sys.stderr)
    return code

def main(argv = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as error:
        return report(error, 2)

    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level = level, format = LOG_FORMAT, stream = sys.stderr, force = True)

    try:
        return args.command(args) or 0
    except INPUT_ERRORS as error:
        return report(error, 2)
    except FAILURES as error:
        logging.getLogger(__name__).debug("Command failed", exc_info = True)
        return report(error, 1)

# # # # # # # # # # # # # # # # # # # # # # # # # # # # # #

if __name__ == "__main__":
    sys.exit(main())
