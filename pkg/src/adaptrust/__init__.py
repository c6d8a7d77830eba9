""" package initialisation"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from .packageinfo import __version__, __author__, __email__, __repository__, __license__
