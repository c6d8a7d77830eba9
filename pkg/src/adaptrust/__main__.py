"""The main module with the program entry point."""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import sys

from .simcli import adaptrust_cli


def main():
    """Entry point if called as "python -m adaptrust ..."
    """
    sys.exit(adaptrust_cli())


if __name__ == '__main__':
    main()
