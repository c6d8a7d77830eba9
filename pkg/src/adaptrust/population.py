"""Agents of the testbed and their life cycle

Providers deliver a service whose quality depends on their profile, consumers
use it with a fixed activity level. Between rounds the environment replaces
agents (churn), moves them, lets provider performance drift and occasionally
switches a provider to another profile.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from adaptrust.ca import ConnectionWeights, RequestMessage
from adaptrust.datamodel import PROFILE_DATA, UG_MAX, UG_MIN, Group, ProfileKind
from adaptrust.dqn import DqnLearner, Hyperparams
from adaptrust.features import ObservationCache
from adaptrust.fire import CertifiedStore, LocalRatingDb
from adaptrust.world import PolarCoord, perturb_location, place_uniform

DEFAULT_RADIUS = 0.5
DEFAULT_SLOPE = 5.0
ACTIVITY_RANGE = (0.25, 1.0)


class Provider:
    """A service provider (trustee)

        mu, sigma: mean and standard deviation of the raw performance,
        both None for intermittent providers.
    """

    def __init__(
            self, ident: int, coord: PolarCoord, kind: ProfileKind,
            mu: Optional[float], sigma: Optional[float],
            r_o: float = DEFAULT_RADIUS, h: int = 10, initial_weight: float = 0.5):
        self.ident = ident
        self.coord = coord
        self.r_o = r_o
        self.kind = kind
        self.mu = mu
        self.sigma = sigma
        self.certified = CertifiedStore(h)
        self.weights = ConnectionWeights(initial_weight)
        self.requests: List[RequestMessage] = []

    def __repr__(self):
        return f"Provider({self.ident}, {self.kind.name}, mu={self.mu})"


class Consumer:
    """A service consumer (trustor)"""

    def __init__(
            self, ident: int, coord: PolarCoord, activity: float, group: Group,
            r_o: float = DEFAULT_RADIUS, h: int = 10, learner: Optional[DqnLearner] = None):
        self.ident = ident
        self.coord = coord
        self.r_o = r_o
        self.activity = activity
        self.group = group
        self.ratings = LocalRatingDb(h)
        self.learner = learner
        self.cache = ObservationCache()
        self.interactions = 0   # served interactions so far

    def __repr__(self):
        return f"Consumer({self.ident}, {self.group}, activity={self.activity:.3f})"


def draw_profile(kind: ProfileKind, rng: np.random.Generator) -> Tuple[Optional[float], Optional[float]]:
    """(mu, sigma) of a freshly drawn profile."""

    data = PROFILE_DATA[kind]
    if data.sigma is None:
        return None, None
    return float(rng.uniform(data.mu_low, data.mu_high)), data.sigma


def spawn_provider(
        kind: ProfileKind, rng: np.random.Generator, ident: int,
        r_o: float = DEFAULT_RADIUS, h: int = 10, initial_weight: float = 0.5) -> Provider:
    """New provider of a kind at a volume-uniform location, with empty stores."""

    mu, sigma = draw_profile(kind, rng)
    return Provider(ident, place_uniform(rng), kind, mu, sigma, r_o, h, initial_weight)


def spawn_consumer(
        group: Group, rng: np.random.Generator, ident: int,
        r_o: float = DEFAULT_RADIUS, activity_range: Tuple[float, float] = ACTIVITY_RANGE,
        h: int = 10, hp: Optional[Hyperparams] = None) -> Consumer:
    """New consumer of a group; adaptable consumers get an untrained learner."""

    coord = place_uniform(rng)
    activity = float(rng.uniform(*activity_range))
    learner = None
    if group is Group.ADAPTABLE:
        learner = DqnLearner(hp or Hyperparams(), rng, ident)

    return Consumer(ident, coord, activity, group, r_o, h, learner)


def raw_performance(provider: Provider, rng: np.random.Generator) -> float:
    """Unclamped performance of one service delivery."""

    if provider.kind is ProfileKind.INTERMITTENT:
        data = PROFILE_DATA[ProfileKind.INTERMITTENT]
        return float(rng.uniform(data.mu_low, data.mu_high))

    return float(rng.normal(provider.mu, provider.sigma))


def delivered_quality(raw: float, dist: float, provider_r_o: float, slope: float = DEFAULT_SLOPE) -> float:
    """Quality at the consumer: linear loss beyond the provider's radius, clamped to the UG range."""

    if dist < 0.0:
        raise ValueError(f"negative distance {dist}")

    if dist > provider_r_o:
        raw -= slope * (dist - provider_r_o)

    return min(UG_MAX, max(UG_MIN, raw))


Agent = TypeVar("Agent", Provider, Consumer)


def churn(
        agents: Sequence[Agent], p_limit: float, rng: np.random.Generator,
        renew: Callable[[Agent], Agent]) -> Tuple[List[Agent], int]:
    """Replace a random number of agents, at most floor(p_limit * N).

    Each leaving agent is replaced at its slot by renew(agent), a newcomer of
    the same profile or group, so size and proportions stay exact.
    Returns the new population and the number of replacements.
    """

    if not 0.0 <= p_limit <= 1.0:
        raise ValueError(f"churn limit {p_limit} outside [0, 1]")

    result = list(agents)
    limit = math.floor(p_limit * len(result))
    if limit == 0:
        return result, 0

    count = int(rng.integers(0, limit + 1))
    for slot in sorted(rng.choice(len(result), size=count, replace=False)):
        result[slot] = renew(result[slot])

    return result, count


def drift_performance(provider: Provider, p_mu_c: float, m: float, rng: np.random.Generator) -> bool:
    """With probability p_mu_c shift mu by a uniform amount in [-m, +m]. Returns True if drifted."""

    if m < 0.0:
        raise ValueError(f"negative drift limit {m}")

    if provider.kind is ProfileKind.INTERMITTENT or p_mu_c <= 0.0:
        return False
    if rng.random() >= p_mu_c:
        return False

    provider.mu = min(UG_MAX, max(UG_MIN, provider.mu + rng.uniform(-m, m)))
    return True


def switch_profile(provider: Provider, p_switch: float, rng: np.random.Generator) -> bool:
    """With probability p_switch turn into one of the other three profiles.

    Stores and weights are kept, the agent stays the same.
    """

    if p_switch <= 0.0 or rng.random() >= p_switch:
        return False

    others = [kind for kind in ProfileKind if kind is not provider.kind]
    old = provider.kind
    provider.kind = others[int(rng.integers(len(others)))]
    provider.mu, provider.sigma = draw_profile(provider.kind, rng)

    logging.debug("provider %d switched from %s to %s", provider.ident, old.name, provider.kind.name)
    return True


def maybe_move(agent, p_move: float, delta_phi_max: float, rng: np.random.Generator) -> bool:
    """With probability p_move perturb the agent's angles. Returns True if moved."""

    if p_move <= 0.0 or rng.random() >= p_move:
        return False

    agent.coord = perturb_location(agent.coord, delta_phi_max, rng)
    return True
