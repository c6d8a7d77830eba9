""" Argparse subclass with support for @args files
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import argparse

from adaptrust.packageinfo import __author__, __repository__


class FileArgumentParser(argparse.ArgumentParser):
    """Argument parser with support for argument files."""

    def __init__(self, **kwargs):
        kwargs.setdefault(
            "epilog",
            f"Copyright (c) 2026 {__author__}. "
            f"Visit {__repository__} for full documentation and examples.")

        super().__init__(fromfile_prefix_chars='@', **kwargs)

    def convert_arg_line_to_args(self, arg_line):
        """Support multiple arguments on one line (default is one per line), skip # comments."""

        if arg_line.lstrip().startswith("#"):
            return []
        return arg_line.split()
