"""Exception types raised by the adaptrust library."""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors


class AdaptrustError(Exception):
    """Base class of all adaptrust errors."""


class ConfigError(AdaptrustError):
    """Invalid configuration key, value, schedule or experiment id."""


class ConfigFormatError(ConfigError):
    """A configuration document is not a flat TOML document."""


class SimulationError(AdaptrustError):
    """A population or bookkeeping invariant of the round loop was violated."""


class DivergenceError(AdaptrustError):
    """The Q-network produced a non-finite loss or parameter."""

    def __init__(self, what: str, step: int, owner: int = None):
        self.what = what
        self.step = step
        self.owner = owner
        where = "" if owner is None else f" of consumer {owner}"
        super().__init__(f"non-finite {what} in training step {step}{where}")


class StatisticsError(AdaptrustError, ValueError):
    """Samples are too small or degenerate for the requested test."""


class ArtifactError(AdaptrustError):
    """An output artifact could not be written."""

    def __init__(self, path, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")
