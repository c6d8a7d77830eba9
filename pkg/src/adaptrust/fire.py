"""FIRE trust model (pull)

A consumer evaluates every nearby provider from four sources: its own
interactions (IT), ratings of witnesses found by a referral search (WR),
role rules (RT) and certified ratings kept by the provider (CR). It then
selects the provider with the highest overall trust, or explores one it
cannot evaluate yet.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

import bisect
import logging
import math
from collections import deque
from typing import (
    TYPE_CHECKING, AbstractSet, Callable, Deque, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional,
    Sequence, Set, Tuple
)

import numpy as np

from adaptrust.datamodel import Rating

if TYPE_CHECKING:
    from adaptrust.population import Consumer, Provider


_HALF = math.log(0.5)


class FireParams(NamedTuple):
    """FIRE configuration

        h(int): local rating history size, also the certified store size
        lam(float): recency scaling factor
        n_bf(int): witness search branching factor
        n_rl(int): referral length threshold
        w_i, w_r, w_w, w_c(float): component coefficients (IT, RT, WR, CR)
        gamma_i, gamma_r, gamma_w, gamma_c(float): reliability parameters
        p_explore(float): probability to try a provider without trust value
    """
    h: int = 10
    lam: float = -(5.0 / _HALF)
    n_bf: int = 2
    n_rl: int = 5
    w_i: float = 2.0
    w_r: float = 2.0
    w_w: float = 1.0
    w_c: float = 0.5
    gamma_i: float = -_HALF
    gamma_r: float = -_HALF
    gamma_w: float = -_HALF
    gamma_c: float = -_HALF
    p_explore: float = 0.1


class ComponentResult(NamedTuple):
    """Trust estimate of one source; trust/reliability are meaningless if not available"""
    trust: float = 0.0
    reliability: float = 0.0
    available: bool = False


NOT_AVAILABLE = ComponentResult()


class TrustComponents(NamedTuple):
    """The four FIRE components of one provider evaluation"""
    it: ComponentResult = NOT_AVAILABLE
    rt: ComponentResult = NOT_AVAILABLE
    wr: ComponentResult = NOT_AVAILABLE
    cr: ComponentResult = NOT_AVAILABLE

    def cr_only(self) -> bool:
        """True if trust can be determined from certified ratings alone."""
        return self.cr.available and not (self.it.available or self.rt.available or self.wr.available)


class LocalRatingDb:
    """A consumer's own ratings, the h most recent per provider"""

    def __init__(self, h: int = 10):
        if h < 1:
            raise ValueError(f"rating history size {h} must be positive")
        self.h = h
        self._ratings: Dict[int, Deque[Rating]] = {}

    def add(self, rating: Rating) -> None:
        """Store a rating, evicting the oldest one of that provider beyond h."""

        store = self._ratings.get(rating.provider)
        if store is None:
            store = deque(maxlen=self.h)
            self._ratings[rating.provider] = store
        store.append(rating)

    def ratings_for(self, provider: int) -> List[Rating]:
        """Stored ratings of a provider, oldest first."""

        store = self._ratings.get(provider)
        return list(store) if store else []

    def has_ratings_for(self, provider: int) -> bool:
        """True if at least one rating of the provider is stored."""
        return bool(self._ratings.get(provider))

    def rated_providers(self) -> FrozenSet[int]:
        """Providers with at least one rating."""
        return frozenset(pid for pid, store in self._ratings.items() if store)

    def knows_any(self, providers: Iterable[int]) -> bool:
        """True if a rating of any of the providers is stored."""
        return not self._ratings.keys().isdisjoint(providers)

    def __len__(self):
        return sum(len(store) for store in self._ratings.values())


class CertifiedStore:
    """Certified ratings a provider keeps as references, only its best h"""

    def __init__(self, h: int = 10):
        if h < 1:
            raise ValueError(f"certified store size {h} must be positive")
        self.h = h
        self._keys: List[float] = []        # ascending values
        self._ratings: List[Rating] = []
        self._reputation: Optional[Tuple[Tuple[int, float, float], ComponentResult]] = None

    def offer(self, rating: Rating) -> bool:
        """Keep the rating if it is among the best h. Returns True if stored."""

        if len(self._ratings) >= self.h:
            if rating.value <= self._keys[0]:
                return False
            del self._keys[0]
            del self._ratings[0]

        pos = bisect.bisect_left(self._keys, rating.value)
        self._keys.insert(pos, rating.value)
        self._ratings.insert(pos, rating)
        self._reputation = None
        return True

    def ratings(self) -> List[Rating]:
        """Stored ratings, lowest value first."""
        return list(self._ratings)

    def reputation(self, now: int, lam: float, gamma: float) -> ComponentResult:
        """component_trust() of the stored ratings, kept until the store or the round changes."""

        key = (now, lam, gamma)
        if self._reputation is None or self._reputation[0] != key:
            self._reputation = (key, component_trust(self._ratings, now, lam, gamma))
        return self._reputation[1]

    def __len__(self):
        return len(self._ratings)


class WitnessLedger:
    """Which witnesses a consumer queried in one round and which answered with ratings"""

    def __init__(self):
        self.queried: Set[int] = set()
        self.answered: Set[int] = set()

    def silent(self) -> Set[int]:
        """Queried witnesses that returned no rating for any query."""
        return self.queried - self.answered


class WitnessNetwork:
    """Consumers reachable for witness queries in the current round

        consumers: consumer id -> Consumer
        acquaintances: consumer id -> ids of the consumers within its radius of operation
    """

    def __init__(self, consumers: Mapping[int, "Consumer"], acquaintances: Mapping[int, Sequence[int]]):
        self.consumers = consumers
        self.acquaintances = acquaintances

    def acquaintances_of(self, ident: int) -> Sequence[int]:
        """Consumer acquaintances of a consumer (empty if unknown)."""
        return self.acquaintances.get(ident, ())


class Selection(NamedTuple):
    """Outcome of a provider selection

        chosen: selected provider or None
        has_trust: provider id -> overall trust for providers with a trust value
        no_trust: ids of providers without a trust value
        cr_only: ids of providers whose trust value comes from CR alone
    """
    chosen: Optional["Provider"]
    has_trust: Dict[int, ComponentResult]
    no_trust: FrozenSet[int]
    cr_only: FrozenSet[int]


RoleRules = Callable[["Consumer", "Provider"], Optional[ComponentResult]]


def recency_weight(delta_t: float, lam: float) -> float:
    """Weight of a rating delta_t rounds old."""

    if delta_t < 0:
        raise ValueError(f"rating from the future: delta_t={delta_t}")
    return math.exp(-delta_t / lam)


def component_trust(ratings: Sequence[Rating], now: int, lam: float, gamma: float) -> ComponentResult:
    """Recency weighted trust and reliability of a rating set."""

    if not ratings:
        return NOT_AVAILABLE

    weights = [recency_weight(now - rating.round, lam) for rating in ratings]
    total = math.fsum(weights)
    trust = math.fsum(w * rating.value for w, rating in zip(weights, ratings)) / total

    rho_r = 1.0 - math.exp(-gamma * total)
    deviation = math.fsum(w * abs(rating.value - trust) for w, rating in zip(weights, ratings)) / total
    rho_d = 1.0 - deviation / 2.0

    return ComponentResult(trust, rho_r * rho_d, True)


def interaction_trust(db: LocalRatingDb, provider: int, now: int, params: FireParams = FireParams()) -> ComponentResult:
    """IT: trust from the consumer's own ratings of the provider."""

    return component_trust(db.ratings_for(provider), now, params.lam, params.gamma_i)


def _pick_witnesses(
        candidates: Sequence[int], targets: AbstractSet[int], network: WitnessNetwork,
        visited: Set[int], n_bf: int, rng: np.random.Generator) -> List[int]:
    """Pick n_bf unvisited acquaintances, preferring those holding ratings of a target provider."""

    fresh = sorted(cid for cid in candidates if cid not in visited and cid in network.consumers)
    if len(fresh) <= n_bf:
        return fresh

    likely = [cid for cid in fresh if network.consumers[cid].ratings.knows_any(targets)]
    if len(likely) >= n_bf:
        picks = rng.choice(len(likely), size=n_bf, replace=False)
        return [likely[i] for i in sorted(picks)]

    known = set(likely)
    others = [cid for cid in fresh if cid not in known]
    picks = rng.choice(len(others), size=n_bf - len(likely), replace=False)
    return likely + [others[i] for i in sorted(picks)]


def witness_ratings(
        evaluator: "Consumer", targets: AbstractSet[int], network: WitnessNetwork,
        params: FireParams, rng: np.random.Generator,
        ledger: Optional[WitnessLedger] = None) -> Dict[int, List[Rating]]:
    """Breadth limited referral search for witness ratings of the target providers.

    One query carries all targets. A queried witness returns its ratings of every
    target it knows or, if it knows none of them, refers to n_bf of its own
    acquaintances. Chains are at most n_rl hops long.
    """

    collected: Dict[int, Set[Rating]] = {pid: set() for pid in targets}
    if not collected:
        return {}

    order = sorted(collected)
    visited = {evaluator.ident}
    frontier = _pick_witnesses(network.acquaintances_of(evaluator.ident), targets, network, visited, params.n_bf, rng)
    depth = 1

    while frontier and depth <= params.n_rl:
        referrals: List[int] = []
        for cid in frontier:
            if cid in visited:
                continue
            visited.add(cid)

            db = network.consumers[cid].ratings
            known = [pid for pid in order if db.has_ratings_for(pid)]
            if ledger is not None:
                ledger.queried.add(cid)
                if known:
                    ledger.answered.add(cid)

            if known:
                for pid in known:
                    collected[pid].update(r for r in db.ratings_for(pid) if r.consumer != evaluator.ident)
            else:
                referrals.extend(
                    _pick_witnesses(network.acquaintances_of(cid), targets, network, visited, params.n_bf, rng))

        frontier = referrals
        depth += 1

    return {pid: sorted(found) for pid, found in collected.items()}


def witness_reputation(
        evaluator: "Consumer", provider: int, network: WitnessNetwork, now: int,
        params: FireParams, rng: np.random.Generator,
        ledger: Optional[WitnessLedger] = None) -> ComponentResult:
    """WR: trust from the witness ratings of a single provider."""

    found = witness_ratings(evaluator, frozenset((provider,)), network, params, rng, ledger)
    return component_trust(found[provider], now, params.lam, params.gamma_w)


def certified_reputation(provider: "Provider", now: int, params: FireParams = FireParams()) -> ComponentResult:
    """CR: trust from the references the provider presents."""

    return provider.certified.reputation(now, params.lam, params.gamma_c)


def role_based_trust(
        evaluator: "Consumer", provider: "Provider", rules: Optional[RoleRules] = None) -> ComponentResult:
    """RT: no roles exist in the testbed, so only an explicit rule table yields a value."""

    if rules is None:
        return NOT_AVAILABLE

    result = rules(evaluator, provider)
    return NOT_AVAILABLE if result is None else result


def overall_trust(components: TrustComponents, params: FireParams = FireParams()) -> ComponentResult:
    """Reliability weighted combination of the available components."""

    weighted = [
        (coefficient, component)
        for coefficient, component in zip(
            (params.w_i, params.w_r, params.w_w, params.w_c), components)
        if component.available
    ]
    if not weighted:
        return NOT_AVAILABLE

    norm = math.fsum(w * c.reliability for w, c in weighted)
    if norm <= 0.0:
        return NOT_AVAILABLE

    trust = math.fsum(w * c.reliability * c.trust for w, c in weighted) / norm
    reliability = norm / math.fsum(w for w, _ in weighted)

    return ComponentResult(trust, reliability, True)


def evaluate(
        consumer: "Consumer", provider: "Provider", now: int, params: FireParams,
        witnessed: Sequence[Rating] = (), role_rules: Optional[RoleRules] = None) -> TrustComponents:
    """Collect all four components for one provider, WR from already gathered witness ratings."""

    return TrustComponents(
        it=interaction_trust(consumer.ratings, provider.ident, now, params),
        rt=role_based_trust(consumer, provider, role_rules),
        wr=component_trust(witnessed, now, params.lam, params.gamma_w),
        cr=certified_reputation(provider, now, params))


def select_provider(
        consumer: "Consumer", nearby: Iterable["Provider"], now: int, params: FireParams,
        rng: np.random.Generator, network: Optional[WitnessNetwork] = None,
        ledger: Optional[WitnessLedger] = None, role_rules: Optional[RoleRules] = None) -> Selection:
    """Evaluate nearby providers and pick one.

    1. compute the overall trust of every nearby provider
    2. split them into HasTrustValue and NoTrustValue
    3. explore NoTrustValue with probability p_explore, else take the most trusted
    4. no provider nearby: no choice
    """

    if network is None:
        network = WitnessNetwork({}, {})

    providers = sorted(nearby, key=lambda p: p.ident)
    witnessed = witness_ratings(consumer, frozenset(p.ident for p in providers), network, params, rng, ledger)
    has_trust: Dict[int, ComponentResult] = {}
    no_trust = []
    cr_only = []

    for provider in providers:
        components = evaluate(consumer, provider, now, params, witnessed[provider.ident], role_rules)
        trust = overall_trust(components, params)
        if trust.available:
            has_trust[provider.ident] = trust
            if components.cr_only():
                cr_only.append(provider.ident)
        else:
            no_trust.append(provider.ident)

    by_id = {p.ident: p for p in providers}
    chosen = None

    if no_trust and (not has_trust or rng.random() < params.p_explore):
        chosen = by_id[no_trust[rng.integers(len(no_trust))]]
    elif has_trust:
        best = max(result.trust for result in has_trust.values())
        ties = [pid for pid, result in has_trust.items() if result.trust == best]
        chosen = by_id[ties[0] if len(ties) == 1 else ties[rng.integers(len(ties))]]

    logging.debug(
        "consumer %d: %d trusted, %d untrusted, chose %s",
        consumer.ident, len(has_trust), len(no_trust), None if chosen is None else chosen.ident)

    return Selection(chosen, has_trust, frozenset(no_trust), frozenset(cr_only))


def record_interaction(consumer: "Consumer", provider: "Provider", ug: float, round_no: int) -> Rating:
    """Rate an interaction: the consumer stores it, the provider may keep it as reference."""

    if not -10.0 <= ug <= 10.0:
        raise ValueError(f"utility gain {ug} outside [-10, 10]")

    rating = Rating.from_ug(consumer.ident, provider.ident, round_no, ug)
    consumer.ratings.add(rating)
    provider.certified.offer(rating)

    return rating
