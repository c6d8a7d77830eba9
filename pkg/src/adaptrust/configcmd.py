""" The config command: show the effective configuration of an experiment
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import logging
import sys
from pathlib import Path

from adaptrust.cmdbase import CmdBase, Error
from adaptrust.config import dump_config, resolve_spec
from adaptrust.errors import ConfigError, ConfigFormatError


class ConfigCmd(CmdBase):
    """config dump: write the flat configuration document of an experiment"""

    def register(self, sub_parsers) -> None:
        """Register config command arguments with the adaptrust CLI"""

        parser = sub_parsers.add_parser('config', help='inspect experiment configurations')
        actions = parser.add_subparsers(title="config actions")

        dump = actions.add_parser(
            'dump', help='print the effective configuration as key = value document')
        dump.add_argument(
            "--experiment", "-e", type=int, metavar="ID",
            help='experiment id 1..18 (default: experiment key of --config)')
        dump.add_argument(
            "--config", "-c", metavar="PATH",
            help='configuration file applied on top of the catalog entry')
        dump.add_argument(
            "--set", nargs=1, action='append', metavar="key=value", dest="assignments",
            help='override one configuration key, may be repeated')
        dump.add_argument(
            "--output", "-o", metavar="filename",
            help='file name of the document (default: <stdout>)')

        dump.set_defaults(func=ConfigCmd._static_run)

    @staticmethod
    def _static_run(args) -> int:
        return ConfigCmd().run(args)

    def run(self, args) -> int:
        """config dump executer"""

        try:
            spec = resolve_spec(
                args.experiment,
                None if args.config is None else Path(args.config),
                [item[0] for item in (args.assignments or [])])
        except FileNotFoundError as err:
            logging.error("file not found: %s", err.filename)
            return Error.ERROR_FILE_NOT_FOUND.value
        except OSError as err:
            logging.error("%s: %s", err.filename, err.strerror)
            return Error.ERROR_IO.value
        except ConfigFormatError as err:
            logging.error("%s", err)
            return Error.ERROR_INVALID_FORMAT.value
        except ConfigError as err:
            logging.error("%s", err)
            return Error.ERROR_INVALID_OPTION.value

        document = dump_config(spec)
        if args.output is None:
            sys.stdout.write(document)
        else:
            try:
                with open(args.output, 'w', encoding='utf-8') as outfile:
                    outfile.write(document)
            except OSError as err:
                logging.error("%s: %s", args.output, err.strerror)
                return Error.ERROR_IO.value

        return Error.ERROR_OK.value
