"""Round loop of the testbed

Every round consumers become active according to their activity level,
pull-mode consumers (FIRE group and adaptable consumers choosing pull)
evaluate and select providers, push-mode consumers (CA group and adaptable
consumers choosing push) are served by staged allocation, adaptable
consumers learn from the outcome, and finally the environment changes.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

import itertools
import logging
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from adaptrust import features
from adaptrust.ca import CaParams, settle_task, staged_allocation
from adaptrust.datamodel import UG_MAX, UG_MIN, Group, Mode, ProfileKind
from adaptrust.dqn import Hyperparams
from adaptrust.errors import ConfigError, SimulationError
from adaptrust.fire import FireParams, Selection, WitnessLedger, WitnessNetwork, record_interaction, select_provider
from adaptrust.population import (
    Consumer, Provider, churn, delivered_quality, drift_performance, maybe_move, raw_performance,
    spawn_consumer, spawn_provider, switch_profile
)
from adaptrust.world import cartesian_array, distance, within_radius

# Environment parameters that change the world between rounds. Outside of
# any schedule phase they are all zero.
DYNAMICS_KEYS = (
    "p_ppc", "p_cpc", "p_plc", "p_clc", "delta_phi_max", "p_mu_c", "drift_m", "p_profile_switch"
)

_PROBABILITY_KEYS = ("p_ppc", "p_cpc", "p_plc", "p_clc", "p_mu_c", "p_profile_switch")


class EnvironmentConfig(NamedTuple):
    """Experimental variables

        p_ppc, p_cpc(float): provider/consumer churn limits per round
        p_plc, p_clc(float): provider/consumer location change probabilities
        delta_phi_max(float): maximal angular change of a move in radians
        p_mu_c(float): probability of a performance drift per provider and round
        drift_m(float): maximal drift amount in UG
        p_profile_switch(float): probability of a profile switch per provider and round
        rounds(int): simulated rounds
        n_good, n_ordinary, n_intermittent, n_bad(int): provider profile counts
        n_fire, n_ca, n_adaptable(int): consumer group counts
        activity_low, activity_high(float): consumer activity range
        radius(float): radius of operation of every agent
        degradation_slope(float): UG lost per world unit beyond a provider's radius
    """
    p_ppc: float = 0.0
    p_cpc: float = 0.0
    p_plc: float = 0.0
    p_clc: float = 0.0
    delta_phi_max: float = 0.0
    p_mu_c: float = 0.0
    drift_m: float = 0.0
    p_profile_switch: float = 0.0
    rounds: int = 500
    n_good: int = 10
    n_ordinary: int = 40
    n_intermittent: int = 5
    n_bad: int = 45
    n_fire: int = 167
    n_ca: int = 167
    n_adaptable: int = 166
    activity_low: float = 0.25
    activity_high: float = 1.0
    radius: float = 0.5
    degradation_slope: float = 5.0

    def provider_counts(self) -> Tuple[Tuple[ProfileKind, int], ...]:
        """(kind, count) in creation order."""
        return ((ProfileKind.GOOD, self.n_good), (ProfileKind.ORDINARY, self.n_ordinary),
                (ProfileKind.INTERMITTENT, self.n_intermittent), (ProfileKind.BAD, self.n_bad))

    def consumer_counts(self) -> Tuple[Tuple[Group, int], ...]:
        """(group, count) in creation order."""
        return ((Group.FIRE, self.n_fire), (Group.CA, self.n_ca), (Group.ADAPTABLE, self.n_adaptable))


class Phase(NamedTuple):
    """Rounds first..last (inclusive) run with these dynamics overrides"""
    first: int
    last: int
    overrides: Tuple[Tuple[str, float], ...] = ()

    def __str__(self):
        changes = " ".join(f"{key}={value!r}" for key, value in self.overrides)
        return f"{self.first}-{self.last} {changes}".rstrip()


class SimulationSettings(NamedTuple):
    """Everything a simulation run is parameterized with"""
    env: EnvironmentConfig = EnvironmentConfig()
    fire: FireParams = FireParams()
    ca: CaParams = CaParams()
    dqn: Hyperparams = Hyperparams()
    schedule: Tuple[Phase, ...] = ()


class InteractionRecord(NamedTuple):
    """One consumer need of one round

        interaction_index is the consumer's served interaction counter,
        0 for unserved records which also carry ug 0.
    """
    run: int
    round: int
    consumer: int
    group: Group
    interaction_index: int
    model_used: Mode
    ug: float
    served: bool


def validate_environment(env: EnvironmentConfig) -> None:
    """Raise ConfigError on out of range values."""

    for key in _PROBABILITY_KEYS:
        value = getattr(env, key)
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{key}={value} is not a probability")

    for key in ("delta_phi_max", "drift_m", "degradation_slope"):
        if getattr(env, key) < 0.0:
            raise ConfigError(f"{key} must not be negative")

    if env.rounds <= 0:
        raise ConfigError(f"rounds={env.rounds} must be positive")
    if env.radius <= 0.0:
        raise ConfigError(f"radius={env.radius} must be positive")
    if not 0.0 <= env.activity_low <= env.activity_high <= 1.0:
        raise ConfigError(f"activity range [{env.activity_low}, {env.activity_high}] invalid")

    counts = [count for _, count in env.provider_counts()] + [count for _, count in env.consumer_counts()]
    if any(count < 0 for count in counts):
        raise ConfigError("agent counts must not be negative")
    if sum(count for _, count in env.provider_counts()) == 0:
        raise ConfigError("at least one provider is required")
    if sum(count for _, count in env.consumer_counts()) == 0:
        raise ConfigError("at least one consumer is required")


def validate_schedule(schedule: Sequence[Phase]) -> None:
    """Phases must be ordered, non-overlapping and only override dynamics."""

    last = 0
    for phase in schedule:
        if phase.first < 1 or phase.last < phase.first:
            raise ConfigError(f"invalid phase range {phase.first}-{phase.last}")
        if phase.first <= last:
            raise ConfigError(f"phase {phase.first}-{phase.last} overlaps or precedes round {last}")
        for key, value in phase.overrides:
            if key not in DYNAMICS_KEYS:
                raise ConfigError(f"phase {phase.first}-{phase.last}: '{key}' is not a dynamics parameter")
            if key in _PROBABILITY_KEYS and not 0.0 <= value <= 1.0:
                raise ConfigError(f"phase {phase.first}-{phase.last}: {key}={value} is not a probability")
        last = phase.last


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def validate_settings(settings: SimulationSettings) -> None:
    """Raise ConfigError on out of range values of any parameter group."""

    validate_environment(settings.env)
    validate_schedule(settings.schedule)

    fire = settings.fire
    _require(fire.h >= 1, f"fire_h={fire.h} must be at least 1")
    _require(fire.n_bf >= 1, f"fire_n_bf={fire.n_bf} must be at least 1")
    _require(fire.n_rl >= 1, f"fire_n_rl={fire.n_rl} must be at least 1")
    _require(fire.lam > 0.0, f"fire_lam={fire.lam} must be positive")
    for key in ("w_i", "w_r", "w_w", "w_c"):
        _require(getattr(fire, key) >= 0.0, f"fire_{key} must not be negative")
    for key in ("gamma_i", "gamma_r", "gamma_w", "gamma_c"):
        _require(getattr(fire, key) > 0.0, f"fire_{key} must be positive")
    _require(0.0 <= fire.p_explore <= 1.0, f"fire_p_explore={fire.p_explore} is not a probability")

    for key in ("threshold", "alpha", "beta", "initial_weight"):
        value = getattr(settings.ca, key)
        _require(0.0 <= value <= 1.0, f"ca_{key}={value} outside [0, 1]")

    dqn = settings.dqn
    for key in ("epsilon", "alpha_dqn", "gamma"):
        value = getattr(dqn, key)
        _require(0.0 <= value <= 1.0, f"dqn_{key}={value} outside [0, 1]")
    _require(dqn.sgd_rate > 0.0, f"dqn_sgd_rate={dqn.sgd_rate} must be positive")
    _require(dqn.l2_lambda >= 0.0, f"dqn_l2_lambda={dqn.l2_lambda} must not be negative")
    _require(dqn.init_scale >= 0.0, f"dqn_init_scale={dqn.init_scale} must not be negative")
    _require(dqn.memory >= 1, f"dqn_memory={dqn.memory} must be at least 1")
    _require(1 <= dqn.minibatch <= dqn.memory,
             f"dqn_minibatch={dqn.minibatch} must lie within 1..dqn_memory ({dqn.memory})")
    _require(dqn.target_sync_every >= 1, f"dqn_target_sync_every={dqn.target_sync_every} must be at least 1")


def phase_of(schedule: Sequence[Phase], round_no: int) -> Optional[Phase]:
    """The phase containing a round, or None."""

    for phase in schedule:
        if phase.first <= round_no <= phase.last:
            return phase
    return None


def apply_schedule(env: EnvironmentConfig, schedule: Sequence[Phase], round_no: int) -> EnvironmentConfig:
    """Effective configuration of a round.

    Without a schedule env applies unchanged. With one, dynamics are zero
    except for the overrides of the phase containing the round.
    """

    if not schedule:
        return env

    effective = env._replace(**{key: 0.0 for key in DYNAMICS_KEYS})
    phase = phase_of(schedule, round_no)
    if phase is not None:
        effective = effective._replace(**dict(phase.overrides))

    return effective


class SimulationState:
    """Mutable state of one simulation run"""

    def __init__(self, settings: SimulationSettings, seed: int, run: int = 0):
        validate_settings(settings)

        self.settings = settings
        self.seed = seed
        self.run = run
        self.rng = np.random.default_rng(seed)
        self.round_no = 0
        self.records: List[InteractionRecord] = []
        self._ids: Iterator[int] = itertools.count(1)

        env = settings.env
        self.providers: List[Provider] = [
            self.new_provider(kind) for kind, count in env.provider_counts() for _ in range(count)]
        self.consumers: List[Consumer] = [
            self.new_consumer(group) for group, count in env.consumer_counts() for _ in range(count)]

    def new_provider(self, kind: ProfileKind) -> Provider:
        """Spawn a provider with the next identity."""

        return spawn_provider(
            kind, self.rng, next(self._ids), self.settings.env.radius,
            self.settings.fire.h, self.settings.ca.initial_weight)

    def new_consumer(self, group: Group) -> Consumer:
        """Spawn a consumer with the next identity."""

        env = self.settings.env
        return spawn_consumer(
            group, self.rng, next(self._ids), env.radius,
            (env.activity_low, env.activity_high), self.settings.fire.h, self.settings.dqn)


class _Need(NamedTuple):
    """An active consumer's need in the current round"""
    consumer: Consumer
    mode: Mode
    selection: Optional[Selection] = None
    state: Optional[np.ndarray] = None


def _neighborhoods(state: SimulationState) -> Tuple[Dict[int, List[Provider]], Dict[int, List[int]]]:
    """Nearby providers and consumer acquaintances of every consumer."""

    consumers, providers = state.consumers, state.providers
    c_xyz = cartesian_array([c.coord for c in consumers])
    p_xyz = cartesian_array([p.coord for p in providers])
    radii = np.array([c.r_o for c in consumers])

    nearby = {
        c.ident: sorted((providers[i] for i in idx), key=lambda p: p.ident)
        for c, idx in zip(consumers, within_radius(c_xyz, p_xyz, radii))
    }
    acquaintances = {
        c.ident: sorted(consumers[i].ident for i in idx if consumers[i].ident != c.ident)
        for c, idx in zip(consumers, within_radius(c_xyz, c_xyz, radii))
    }
    return nearby, acquaintances


def witness_network(consumers: Sequence[Consumer], acquaintances: Mapping[int, Sequence[int]]) -> WitnessNetwork:
    """Consumers answering witness queries: the FIRE and adaptable groups.

    CA consumers keep their ratings to themselves.
    """
    return WitnessNetwork({c.ident: c for c in consumers if c.group is not Group.CA}, acquaintances)


def _serve(
        state: SimulationState, consumer: Consumer, provider: Provider, round_no: int) -> float:
    """Deliver the service, store the rating and advance the interaction counter."""

    env = state.settings.env
    raw = raw_performance(provider, state.rng)
    ug = delivered_quality(raw, distance(consumer.coord, provider.coord), provider.r_o, env.degradation_slope)
    if not UG_MIN <= ug <= UG_MAX:
        raise SimulationError(f"utility gain {ug} out of range")

    record_interaction(consumer, provider, ug, round_no)
    consumer.interactions += 1
    return ug


def _end_of_round(state: SimulationState, env: EnvironmentConfig) -> None:
    """Environment dynamics: churn, moves, drift and profile switches, in this order."""

    rng = state.rng
    n_consumers, n_providers = len(state.consumers), len(state.providers)

    state.consumers, left_c = churn(state.consumers, env.p_cpc, rng, lambda c: state.new_consumer(c.group))
    state.providers, left_p = churn(state.providers, env.p_ppc, rng, lambda p: state.new_provider(p.kind))

    moved_c = sum(maybe_move(c, env.p_clc, env.delta_phi_max, rng) for c in state.consumers)
    moved_p = sum(maybe_move(p, env.p_plc, env.delta_phi_max, rng) for p in state.providers)
    drifted = sum(drift_performance(p, env.p_mu_c, env.drift_m, rng) for p in state.providers)
    switched = sum(switch_profile(p, env.p_profile_switch, rng) for p in state.providers)

    if len(state.consumers) != n_consumers or len(state.providers) != n_providers:
        raise SimulationError("population size changed during end of round dynamics")

    logging.debug(
        "round %d: churn %d/%d, moves %d/%d, drift %d, switches %d",
        state.round_no, left_c, left_p, moved_c, moved_p, drifted, switched)


def run_round(state: SimulationState) -> List[InteractionRecord]:
    """Simulate the next round and return its interaction records."""

    settings = state.settings
    rng = state.rng
    round_no = state.round_no = state.round_no + 1
    env = apply_schedule(settings.env, settings.schedule, round_no)

    nearby, acquaintances = _neighborhoods(state)
    active = [c for c in state.consumers if rng.random() < c.activity]

    for consumer in state.consumers:
        if consumer.group is Group.ADAPTABLE:
            features.track_round(
                consumer.cache, frozenset(p.ident for p in nearby[consumer.ident]), consumer.coord)

    network = witness_network(state.consumers, acquaintances)
    needs: List[_Need] = []

    for consumer in sorted(active, key=lambda c: c.ident):
        if consumer.group is Group.CA:
            needs.append(_Need(consumer, Mode.PUSH))
            continue

        ledger = WitnessLedger()
        selection = select_provider(
            consumer, nearby[consumer.ident], round_no, settings.fire, rng, network, ledger)
        if consumer.group is Group.FIRE:
            needs.append(_Need(consumer, Mode.PULL, selection))
            continue

        s = features.observe(
            consumer.cache, consumer.ratings, frozenset(p.ident for p in nearby[consumer.ident]),
            selection.no_trust, selection.cr_only, frozenset(ledger.queried), frozenset(ledger.silent())
        ).as_array()
        needs.append(_Need(consumer, consumer.learner.act(s, rng), selection, s))

    outcome: Dict[int, Tuple[bool, float]] = {}

    for need in needs:
        if need.mode is not Mode.PULL:
            continue
        provider = need.selection.chosen
        if provider is None:
            outcome[need.consumer.ident] = (False, 0.0)
            continue

        ug = _serve(state, need.consumer, provider, round_no)
        outcome[need.consumer.ident] = (True, ug)
        trust = need.selection.has_trust.get(provider.ident)
        if need.consumer.group is Group.ADAPTABLE and trust is not None:
            need.consumer.cache.perf_pairs.append((trust.trust, ug))

    requesters = [need.consumer for need in needs if need.mode is Mode.PUSH]
    assignments = staged_allocation(
        requesters, {c.ident: nearby[c.ident] for c in requesters}, settings.ca, rng, round_no, state.providers)

    for consumer in requesters:
        assignment = assignments.get(consumer.ident)
        if assignment is None:
            outcome[consumer.ident] = (False, 0.0)
            continue

        ug = _serve(state, consumer, assignment.provider, round_no)
        settle_task(assignment.provider, assignment.level, ug, settings.ca)
        outcome[consumer.ident] = (True, ug)

    records = []
    for need in needs:
        consumer = need.consumer
        served, ug = outcome[consumer.ident]
        records.append(InteractionRecord(
            state.run, round_no, consumer.ident, consumer.group,
            consumer.interactions if served else 0, need.mode, ug, served))

        if need.state is not None:
            consumer.learner.close_transition(need.state, rng)
            consumer.learner.begin_transition(need.state, need.mode, ug)

    _end_of_round(state, env)
    return records


def run_simulation(
        settings: SimulationSettings, seed: int, run: int = 0,
        rounds: Optional[int] = None) -> List[InteractionRecord]:
    """Build the initial populations and simulate all rounds; deterministic in (settings, seed)."""

    state = SimulationState(settings, seed, run)
    rounds = settings.env.rounds if rounds is None else rounds
    logging.info(
        "run %d: seed %d, %d providers, %d consumers, %d rounds",
        run, seed, len(state.providers), len(state.consumers), rounds)

    for _ in range(rounds):
        phase = phase_of(settings.schedule, state.round_no + 1)
        if phase is not None and phase.first == state.round_no + 1:
            logging.info("run %d: entering phase %s", run, phase)
        state.records.extend(run_round(state))

    logging.info(
        "run %d: done, %d of %d needs served",
        run, sum(1 for r in state.records if r.served), len(state.records))
    return state.records


def group_shares(consumers: Sequence[Consumer]) -> Mapping[Group, int]:
    """Consumer count per group."""

    counts = {group: 0 for group in Group}
    for consumer in consumers:
        counts[consumer.group] += 1
    return counts


def profile_shares(providers: Sequence[Provider]) -> Mapping[ProfileKind, int]:
    """Provider count per profile."""

    counts = {kind: 0 for kind in ProfileKind}
    for provider in providers:
        counts[provider.kind] += 1
    return counts

