"""CA trust model (push)

Consumers broadcast requests for a performance level; every provider in
range decides on its own whether to volunteer by comparing its connection
weight for that level with a threshold. After serving, the provider
strengthens or weakens that connection. No trust information ever leaves
the provider.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from adaptrust.datamodel import REQUEST_LEVELS, PerformanceLevel

if TYPE_CHECKING:
    from adaptrust.population import Consumer, Provider


class CaParams(NamedTuple):
    """CA configuration

        threshold(float): minimal weight to execute a task
        alpha(float): increase factor on success
        beta(float): decrease factor on failure
        initial_weight(float): weight of a connection created by a first request
    """
    threshold: float = 0.5
    alpha: float = 0.1
    beta: float = 0.1
    initial_weight: float = 0.5


class RequestMessage(NamedTuple):
    """Broadcast request of a push-mode consumer"""
    requester: int
    level: PerformanceLevel
    round: int


class ConnectionWeights:
    """A provider's connection weight per requested performance level"""

    def __init__(self, initial_weight: float = 0.5):
        self.initial_weight = initial_weight
        self._weights: Dict[PerformanceLevel, float] = {}

    def weight(self, level: PerformanceLevel) -> float:
        """Weight of a level, creating the connection if needed."""
        return self._weights.setdefault(level, self.initial_weight)

    def set(self, level: PerformanceLevel, value: float) -> None:
        """Store a weight, which must lie within [0, 1]."""

        if not 0.0 <= value <= 1.0:
            raise ValueError(f"connection weight {value} outside [0, 1]")
        self._weights[level] = value

    def items(self):
        """(level, weight) pairs of the existing connections."""
        return self._weights.items()

    def __contains__(self, level):
        return level in self._weights

    def __str__(self):
        return ", ".join(f"{level}={w:.3f}" for level, w in self._weights.items())


class Assignment(NamedTuple):
    """A push-mode consumer served by a provider at a level"""
    provider: "Provider"
    level: PerformanceLevel


def update_weight_success(w: float, alpha: float) -> float:
    """Strengthen a connection after a successful task."""
    return min(1.0, w + alpha * (1.0 - w))


def update_weight_failure(w: float, beta: float) -> float:
    """Weaken a connection after a failed task."""
    return max(0.0, w - beta * (1.0 - w))


def decide_execute(weights: ConnectionWeights, level: PerformanceLevel, threshold: float) -> bool:
    """A provider executes a task only if its weight is not less than the threshold."""
    return weights.weight(level) >= threshold


def _pick_volunteer(
        volunteers: Sequence["Provider"], level: PerformanceLevel, rng: np.random.Generator) -> "Provider":
    """The volunteer with the strongest connection for the level; ties are drawn at random."""

    best = max(provider.weights.weight(level) for provider in volunteers)
    strongest = [provider for provider in volunteers if provider.weights.weight(level) == best]
    return strongest[0] if len(strongest) == 1 else strongest[rng.integers(len(strongest))]


def staged_allocation(
        requesters: Sequence["Consumer"], nearby: Mapping[int, Sequence["Provider"]],
        params: CaParams, rng: np.random.Generator, round_no: int = 0,
        providers: Optional[Iterable["Provider"]] = None) -> Dict[int, Assignment]:
    """Serve push-mode consumers in broadcast stages PERFECT, GOOD, OK, BAD.

    In every stage each unserved consumer broadcasts to its nearby providers,
    each provider stores the request and decides whether to volunteer, and the
    volunteer with the strongest connection serves. Consumers left after the BAD
    stage stay unserved and are absent from the result.

    providers: all providers of the world, their requests of earlier rounds are
    dropped. Defaults to the providers near a requester.
    """

    if providers is None:
        providers = [p for nearby_providers in nearby.values() for p in nearby_providers]
    for provider in providers:
        provider.requests.clear()

    assignments: Dict[int, Assignment] = {}
    waiting: List["Consumer"] = sorted(requesters, key=lambda c: c.ident)
    receivers: Dict[int, "Provider"] = {}

    for level in REQUEST_LEVELS:
        if not waiting:
            break

        still_waiting = []
        for consumer in waiting:
            volunteers = []
            for provider in sorted(nearby.get(consumer.ident, ()), key=lambda p: p.ident):
                provider.requests.append(RequestMessage(consumer.ident, level, round_no))
                receivers[provider.ident] = provider
                if decide_execute(provider.weights, level, params.threshold):
                    volunteers.append(provider)

            if volunteers:
                assignments[consumer.ident] = Assignment(_pick_volunteer(volunteers, level, rng), level)
            else:
                still_waiting.append(consumer)

        logging.debug(
            "round %d stage %s: %d served, %d waiting",
            round_no, level, len(waiting) - len(still_waiting), len(still_waiting))
        waiting = still_waiting

    if receivers:
        logging.debug(
            "round %d: %d providers received %d requests",
            round_no, len(receivers), sum(len(p.requests) for p in receivers.values()))

    return assignments


def settle_task(provider: "Provider", level: PerformanceLevel, delivered_ug: float, params: CaParams) -> bool:
    """Adjust the provider's weight for the level; returns True on success."""

    success = delivered_ug >= level.utility
    w = provider.weights.weight(level)
    if success:
        provider.weights.set(level, update_weight_success(w, params.alpha))
    else:
        provider.weights.set(level, update_weight_failure(w, params.beta))

    return success

