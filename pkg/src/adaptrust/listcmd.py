""" The list command: print the experiment catalog
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from adaptrust.cmdbase import CmdBase, Error
from adaptrust.engine import DYNAMICS_KEYS
from adaptrust.experiments import ExperimentSpec, catalog


def describe(spec: ExperimentSpec) -> str:
    """One catalog line: id, NISR, rounds, title and the non-zero dynamics."""

    env = spec.settings.env
    changes = " ".join(f"{key}={getattr(env, key):g}" for key in DYNAMICS_KEYS if getattr(env, key))
    if spec.settings.schedule:
        changes = f"schedule of {len(spec.settings.schedule)} phases"

    return f"{spec.ident:3d}  {spec.nisr:4d}  {spec.rounds:6d}  {spec.title}" + (f" ({changes})" if changes else "")


class ListCmd(CmdBase):
    """Print the experiment catalog"""

    def register(self, sub_parsers) -> None:
        """Register list command with the adaptrust CLI"""

        parser = sub_parsers.add_parser('list', help='list the experiment catalog')
        parser.set_defaults(func=ListCmd._static_run)

    @staticmethod
    def _static_run(args) -> int:
        return ListCmd().run(args)

    def run(self, args) -> int:
        """list command executer"""

        print(" id  nisr  rounds  experiment")
        for spec in catalog():
            print(describe(spec))

        return Error.ERROR_OK.value
