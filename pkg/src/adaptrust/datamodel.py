""" Shared data types of the testbed
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from collections import namedtuple
from enum import Enum
from typing import NamedTuple


class PerformanceLevel(Enum):
    """Service quality constants, value is the utility gained"""

    PERFECT = 10
    GOOD = 5
    OK = 0
    BAD = -5
    WORST = -10

    @property
    def utility(self) -> float:
        """Utility gain (UG) of this level."""
        return float(self.value)

    def __str__(self):
        return f"PL_{self.name}"


# Levels a push-mode consumer requests, best first. WORST is never requested.
REQUEST_LEVELS = (
    PerformanceLevel.PERFECT,
    PerformanceLevel.GOOD,
    PerformanceLevel.OK,
    PerformanceLevel.BAD
)

UG_MIN = PerformanceLevel.WORST.utility
UG_MAX = PerformanceLevel.PERFECT.utility


class ProfileKind(Enum):
    """Provider profiles"""

    GOOD = 1
    ORDINARY = 2
    BAD = 3
    INTERMITTENT = 4


class Group(Enum):
    """Consumer groups, value is the label used in reports"""

    FIRE = "FIRE"
    CA = "CA"
    ADAPTABLE = "Adaptable"

    def __str__(self):
        return self.value


class Mode(Enum):
    """Trust model used for one interaction, value is the Q-network output index"""

    PUSH = 0    # broadcast and let providers volunteer (CA)
    PULL = 1    # evaluate and select a provider (FIRE)

    def __str__(self):
        return self.name.lower()


class Rating(NamedTuple):
    """A consumer's rating of one interaction.

        consumer(int): rating consumer
        provider(int): rated provider
        round(int): round of the interaction
        value(float): UG / 10, within [-1, +1]
    """
    consumer: int
    provider: int
    round: int
    value: float

    @classmethod
    def from_ug(cls, consumer: int, provider: int, round_no: int, ug: float) -> "Rating":
        """Build a rating from a delivered utility gain."""
        return cls(consumer, provider, round_no, ug / UG_MAX)


# Performance table per provider profile
#
# mu_low/mu_high: range of the mean performance mu_p
# sigma: standard deviation of the delivered performance
# Intermittent providers ignore mu/sigma and deliver uniformly in [PL_BAD, PL_GOOD].
ProfileData = namedtuple('ProfileData', ['mu_low', 'mu_high', 'sigma'])

PROFILE_DATA = {
    ProfileKind.GOOD:         ProfileData(PerformanceLevel.GOOD.utility, PerformanceLevel.PERFECT.utility, 1.0),
    ProfileKind.ORDINARY:     ProfileData(PerformanceLevel.OK.utility, PerformanceLevel.GOOD.utility, 2.0),
    ProfileKind.BAD:          ProfileData(PerformanceLevel.WORST.utility, PerformanceLevel.OK.utility, 2.0),
    ProfileKind.INTERMITTENT: ProfileData(PerformanceLevel.BAD.utility, PerformanceLevel.GOOD.utility, None),
}
