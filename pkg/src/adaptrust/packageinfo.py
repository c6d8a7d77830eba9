"""Provide packaging information metadata """

# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import importlib.metadata as meta
import pathlib
from typing import Tuple

import toml

_DIST_NAME = "adaptrust"

__version__ = "???"
__author__ = "???"
__email__ = "???"
__repository__ = "???"
__license__ = "???"


def init_from_metadata() -> Tuple[str, str, str, str, str]:
    """Read the dunders from importlib.metadata.

    Raises PackageNotFoundError when adaptrust is not installed.
    """

    my_metadata = meta.metadata(_DIST_NAME)
    return \
        my_metadata['Version'],\
        my_metadata['Author'] or "adaptrust contributors",\
        my_metadata['Author-email'],\
        (my_metadata['Project-URL'] or "").replace("repository, ", ""),\
        my_metadata['License']


def init_from_toml() -> Tuple[str, str, str, str, str]:
    """Read the dunders from the pyproject.toml of a source checkout."""

    dist_dir = pathlib.Path(__file__).resolve().parents[2]
    data = toml.load(dist_dir / "pyproject.toml")
    project = data["project"]

    return \
        project["version"],\
        project["authors"][0]["name"],\
        project["authors"][0]["email"],\
        project["urls"]["repository"],\
        project["license"]["text"]


try:
    __version__, __author__, __email__, __repository__, __license__ = init_from_metadata()

except meta.PackageNotFoundError:
    __version__, __author__, __email__, __repository__, __license__ = init_from_toml()
