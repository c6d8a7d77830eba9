""" The run command: execute an experiment and write its artifacts
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import argparse
import logging
import math
import os
from pathlib import Path

from adaptrust.cmdbase import CmdBase, Error
from adaptrust.config import resolve_spec
from adaptrust.datamodel import Group
from adaptrust.errors import ArtifactError, ConfigError, ConfigFormatError, DivergenceError
from adaptrust.experiments import run_experiment
from adaptrust.report import DEFAULT_SMOOTH, write_report


class RunCmd(CmdBase):
    """Run all independent runs of an experiment"""

    def register(self, sub_parsers) -> None:
        """Register run command arguments with the adaptrust CLI"""

        parser = sub_parsers.add_parser(
            'run',
            help='run an experiment and write CSV, SVG and summary files',
            formatter_class=argparse.RawTextHelpFormatter,
            description=
            """Run the independent simulation runs of an experiment, aggregate them and\n"""
            """write series.csv, ug_chart.svg, mode_share.csv/.svg, summary.json and checksums.crc.\n\n"""
            """Example:\n"""
            """    adaptrust run --experiment 4 --runs 10 --seed 7 --out exp4""")

        parser.add_argument(
            "--experiment", "-e", type=int, metavar="ID",
            help='experiment id 1..18 (default: experiment key of --config)')
        parser.add_argument(
            "--runs", "-n", type=int, metavar="N",
            help='number of independent runs (default: the experiment\'s NISR)')
        parser.add_argument(
            "--seed", "-s", type=int, default=0, metavar="S",
            help='seed of the first run, run i uses S + i (default: 0)')
        parser.add_argument(
            "--out", "-o", metavar="DIR",
            help='output directory (default: ./experiment_<ID>)')
        parser.add_argument(
            "--parallel", "-j", type=int, default=os.cpu_count() or 1, metavar="K",
            help='worker processes (default: number of cores)')
        parser.add_argument(
            "--config", "-c", metavar="PATH",
            help='flat key = value configuration file as written by "config dump"')
        parser.add_argument(
            "--set", nargs=1, action='append', metavar="key=value", dest="assignments",
            help='override one configuration key, may be repeated')
        parser.add_argument(
            "--write-log", action='store_true',
            help='also write the interaction log of every run')
        parser.add_argument(
            "--smooth", type=int, default=DEFAULT_SMOOTH, metavar="W",
            help=f'moving average width of the charts (default: {DEFAULT_SMOOTH})')

        parser.set_defaults(func=RunCmd._static_run)

    @staticmethod
    def _static_run(args) -> int:
        return RunCmd().run(args)

    def run(self, args) -> int:
        """run command executer"""

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

        if args.runs is not None and args.runs < 1:
            logging.error("invalid run count %d, expect at least 1.", args.runs)
            return Error.ERROR_INVALID_OPTION.value

        destdir = Path(args.out) if args.out else Path.cwd() / f"experiment_{spec.ident}"
        runs = spec.nisr if args.runs is None else args.runs
        print(f"Running experiment {spec.ident} ({spec.title}): {runs} runs of {spec.rounds} rounds.")

        try:
            result = run_experiment(spec, args.seed, max(1, args.parallel), runs, args.write_log)
            write_report(result, destdir, args.smooth)
        except DivergenceError as err:
            logging.error("%s", err)
            return Error.ERROR_DIVERGENCE.value
        except ArtifactError as err:
            logging.error("%s", err)
            return Error.ERROR_IO.value

        for group in Group:
            means = result.run_means(group)
            overall = sum(means) / len(means) if means else math.nan
            print(f"    {str(group):10} mean UG {overall:8.4f} over {len(means)} runs")

        print("Done.")
        return Error.ERROR_OK.value
