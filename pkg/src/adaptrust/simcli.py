""" adaptrust main function
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import logging
import sys

from adaptrust.cmdbase import Error
from adaptrust.configcmd import ConfigCmd
from adaptrust.fileargparse import FileArgumentParser
from adaptrust.listcmd import ListCmd
from adaptrust.packageinfo import __version__
from adaptrust.runcmd import RunCmd

# list of adaptrust subcommand classes
_ADAPTRUST_CMDS = [RunCmd(), ListCmd(), ConfigCmd()]


def adaptrust(argv) -> int:
    """ cmd line interface for adaptrust"""

    logging.basicConfig(encoding='utf-8', level=logging.WARNING)

    name = "adaptrust"
    about = f"{name} {__version__}: Simulate consumers adapting between pull (FIRE) and push (CA) trust models."

    parser = FileArgumentParser(
        prog=name,
        description=about,
    )

    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument(
        "--verbose", "-v", action='count', default=0,
        help='more log output, -v for progress, -vv for debugging')
    sub_parsers = parser.add_subparsers(
        title="supported sub commands",
        help='additional command specific help')

    # register all sub commands with the arg parser
    for sub_cmd in _ADAPTRUST_CMDS:
        sub_cmd.register(sub_parsers)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else Error.ERROR_INVALID_OPTION.value

    if args.verbose:
        logging.getLogger().setLevel(logging.INFO if args.verbose == 1 else logging.DEBUG)

    if 'func' not in vars(args):
        parser.print_help()
        return Error.ERROR_INVALID_OPTION.value

    return args.func(args)


def adaptrust_cli() -> int:
    """CLI wrapper for adaptrust """

    return adaptrust(sys.argv[1:])


if __name__ == "__main__":
    try:
        sys.exit(adaptrust_cli())
    except Exception as exc:  # pylint: disable=broad-except
        logging.exception(exc)
        sys.exit(Error.ERROR_EXCEPTION.value)
