"""State features of an adaptable consumer

Nine values in [0, 1], computed from what the consumer can observe itself:
its nearby providers, its own rating database, the FIRE evaluation of the
nearby providers, the answers of queried witnesses and its own location.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

from collections import deque
from typing import AbstractSet, Deque, Iterable, NamedTuple, Optional, Tuple

import numpy as np

from adaptrust.fire import LocalRatingDb
from adaptrust.world import PolarCoord

WINDOW_WIDTH = 10       # n, consecutive rounds of the windowed means
PERF_HISTORY = 10       # N, interactions of the performance change estimate
PERF_CHANGE_MAX = 20.0  # |trust * 10 - actual| <= 10 + 10


class FeatureVector(NamedTuple):
    """Adaptable consumer state, every entry in [0, 1]"""
    providers_direct_change: float
    mean_providers_direct_change: float
    providers_indirect_change: float
    mean_providers_indirect_change: float
    newcomer: float
    consumers_indirect_change: float
    mean_consumers_indirect_change: float
    providers_performance_change: float
    location_change: float

    def as_array(self) -> np.ndarray:
        """The state as float vector in field order."""
        return np.fromiter(self, dtype=float, count=len(self))


class ObservationCache:
    """Per-consumer bookkeeping between rounds"""

    def __init__(self, width: int = WINDOW_WIDTH, history: int = PERF_HISTORY):
        self.prev_nearby: Optional[frozenset] = None
        self.prev_coord: Optional[PolarCoord] = None
        self.direct: float = 0.0
        self.moved: int = 0
        self.direct_window: Deque[float] = deque(maxlen=width)
        self.indirect_window: Deque[float] = deque(maxlen=width)
        self.consumers_window: Deque[float] = deque(maxlen=width)
        self.perf_pairs: Deque[Tuple[float, float]] = deque(maxlen=history)


def _ratio(part: int, whole: int) -> float:
    return part / whole if whole else 0.0


def providers_direct_change(nearby_t: AbstractSet[int], nearby_prev: Optional[AbstractSet[int]]) -> float:
    """Share of nearby providers that were not nearby in the previous round."""

    if nearby_prev is None:
        return 1.0 if nearby_t else 0.0
    return _ratio(len(nearby_t - nearby_prev), len(nearby_t))


def providers_indirect_change(
        no_trust_value: AbstractSet[int], cr_only: AbstractSet[int], nearby_t: AbstractSet[int]) -> float:
    """Share of nearby providers without trust value or with a CR-only trust value."""

    if not (no_trust_value <= nearby_t and cr_only <= nearby_t) or (no_trust_value & cr_only):
        raise ValueError("trust partition is not a disjoint split of the nearby providers")
    return _ratio(len(no_trust_value) + len(cr_only), len(nearby_t))


def newcomer_estimate(rating_db: LocalRatingDb, nearby_t: Iterable[int]) -> int:
    """1 if the consumer holds no rating of any nearby provider, else 0."""

    return 0 if any(rating_db.has_ratings_for(pid) for pid in nearby_t) else 1


def consumers_indirect_change(queried: AbstractSet[int], returned_nothing: AbstractSet[int]) -> float:
    """Share of queried witnesses that returned no rating this round."""

    if not returned_nothing <= queried:
        raise ValueError("silent witnesses must have been queried")
    return _ratio(len(returned_nothing), len(queried))


def providers_performance_change(perf_pairs: Iterable[Tuple[float, float]]) -> float:
    """Mean |trust * 10 - actual performance| over the remembered interactions, in UG."""

    pairs = list(perf_pairs)
    if not pairs:
        return 0.0
    return sum(abs(trust * 10.0 - actual) for trust, actual in pairs) / len(pairs)


def consumers_location_change(coord_t: PolarCoord, coord_prev: Optional[PolarCoord]) -> int:
    """1 if any polar coordinate differs from the previous round."""

    if coord_prev is None:
        return 0
    return int(coord_t.r != coord_prev.r or coord_t.phi != coord_prev.phi or coord_t.theta != coord_prev.theta)


def windowed_mean(window: Iterable[float]) -> float:
    """Mean of the values currently held by a window."""

    values = list(window)
    return sum(values) / len(values) if values else 0.0


def assemble_state(
        direct: float, mean_direct: float, indirect: float, mean_indirect: float, newcomer: float,
        consumers: float, mean_consumers: float, performance: float, location: float) -> FeatureVector:
    """Pack the raw values in state order, scaling the performance change and clamping to [0, 1]."""

    raw = (direct, mean_direct, indirect, mean_indirect, newcomer,
           consumers, mean_consumers, performance / PERF_CHANGE_MAX, location)
    return FeatureVector(*(min(1.0, max(0.0, float(v))) for v in raw))


def track_round(cache: ObservationCache, nearby_t: AbstractSet[int], coord_t: PolarCoord) -> None:
    """Per-round bookkeeping: direct provider change and own movement."""

    cache.direct = providers_direct_change(nearby_t, cache.prev_nearby)
    cache.direct_window.append(cache.direct)
    cache.moved = consumers_location_change(coord_t, cache.prev_coord)
    cache.prev_nearby = frozenset(nearby_t)
    cache.prev_coord = coord_t


def observe(
        cache: ObservationCache, rating_db: LocalRatingDb, nearby_t: AbstractSet[int],
        no_trust_value: AbstractSet[int], cr_only: AbstractSet[int],
        queried: AbstractSet[int], returned_nothing: AbstractSet[int]) -> FeatureVector:
    """State of an activation round; track_round() must have run for this round."""

    indirect = providers_indirect_change(no_trust_value, cr_only, nearby_t)
    cache.indirect_window.append(indirect)
    consumers = consumers_indirect_change(queried, returned_nothing)
    cache.consumers_window.append(consumers)

    return assemble_state(
        cache.direct, windowed_mean(cache.direct_window),
        indirect, windowed_mean(cache.indirect_window),
        newcomer_estimate(rating_db, nearby_t),
        consumers, windowed_mean(cache.consumers_window),
        providers_performance_change(cache.perf_pairs),
        cache.moved)
