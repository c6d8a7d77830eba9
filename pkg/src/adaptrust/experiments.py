"""Experiment catalog and multi-run orchestration

Each of the 18 experiments fixes the environment dynamics and the number of
independent simulation runs. run_experiment() executes the runs (in worker
processes if asked to), reduces every run log to per-index and per-round
sums right away and aggregates them in seed order.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from adaptrust.datamodel import Group, Mode
from adaptrust.engine import (
    EnvironmentConfig, InteractionRecord, Phase, SimulationSettings, run_simulation
)
from adaptrust.errors import ConfigError, StatisticsError
from adaptrust.stats import TTestResult, welch_t_test

EXPERIMENT_IDS = range(1, 19)
_MOVE = math.pi / 20.0


class ExperimentSpec(NamedTuple):
    """A catalog entry"""
    ident: int
    title: str
    nisr: int
    settings: SimulationSettings

    @property
    def rounds(self) -> int:
        """Simulated rounds per run."""
        return self.settings.env.rounds


def _spec(ident: int, title: str, nisr: int, rounds: int = 500,
          schedule: Tuple[Phase, ...] = (), **dynamics) -> ExperimentSpec:
    env = EnvironmentConfig(rounds=rounds, **dynamics)
    return ExperimentSpec(ident, title, nisr, SimulationSettings(env=env, schedule=schedule))


# Environmental changes of the scheduled experiment, by round
CHANGE_SCHEDULE = (
    Phase(1, 200, (("p_ppc", 0.02), ("p_cpc", 0.05))),
    Phase(201, 250, (("p_ppc", 0.02),)),
    Phase(251, 300, (("p_ppc", 0.05),)),
    Phase(301, 350, (("p_ppc", 0.10),)),
    Phase(351, 400, (("p_cpc", 0.02),)),
    Phase(401, 450, (("p_cpc", 0.05),)),
    Phase(451, 500, (("p_cpc", 0.10),)),
)

_CATALOG: Dict[int, ExperimentSpec] = {spec.ident: spec for spec in (
    _spec(1, "static setting", 30),
    _spec(2, "provider population change 2%", 30, p_ppc=0.02),
    _spec(3, "provider population change 5%", 10, p_ppc=0.05),
    _spec(4, "provider population change 10%", 10, p_ppc=0.10),
    _spec(5, "consumer population change 2%", 10, p_cpc=0.02),
    _spec(6, "consumer population change 5%", 30, p_cpc=0.05),
    _spec(7, "consumer population change 10%", 10, rounds=1000, p_cpc=0.10),
    _spec(8, "provider performance drift", 30, p_mu_c=0.10, drift_m=1.0),
    _spec(9, "provider profile switch 2%", 30, p_profile_switch=0.02),
    _spec(10, "consumer movement", 30, p_clc=0.10, delta_phi_max=_MOVE),
    _spec(11, "provider movement", 30, p_plc=0.10, delta_phi_max=_MOVE),
    _spec(12, "provider 2% and consumer 5% population change", 10, p_ppc=0.02, p_cpc=0.05),
    # the prose says 10% for both populations, its parenthetical values disagree
    _spec(13, "provider 10% and consumer 10% population change", 12, rounds=1000, p_ppc=0.10, p_cpc=0.10),
    _spec(14, "population change and consumer movement", 10,
          p_ppc=0.02, p_cpc=0.05, p_clc=0.10, delta_phi_max=_MOVE),
    _spec(15, "population change and movement", 10,
          p_ppc=0.02, p_cpc=0.05, p_clc=0.10, p_plc=0.10, delta_phi_max=_MOVE),
    _spec(16, "population change, movement and drift", 10,
          p_ppc=0.02, p_cpc=0.05, p_clc=0.10, p_plc=0.10, delta_phi_max=_MOVE, p_mu_c=0.10, drift_m=1.0),
    _spec(17, "population change, movement, drift and profile switch", 30,
          p_ppc=0.02, p_cpc=0.05, p_clc=0.10, p_plc=0.10, delta_phi_max=_MOVE, p_mu_c=0.10, drift_m=1.0,
          p_profile_switch=0.02),
    _spec(18, "scheduled population changes", 10, schedule=CHANGE_SCHEDULE),
)}


def experiment_config(ident: int) -> ExperimentSpec:
    """Catalog entry of an experiment id."""

    spec = _CATALOG.get(ident)
    if spec is None:
        raise ConfigError(
            f"unknown experiment {ident}, valid ids are {EXPERIMENT_IDS.start}..{EXPERIMENT_IDS.stop - 1}")
    return spec


def catalog() -> List[ExperimentSpec]:
    """All experiments, ordered by id."""
    return [_CATALOG[ident] for ident in EXPERIMENT_IDS]


class RunSummary(NamedTuple):
    """Reduced log of one run

        index_sum/index_count: per group, UG sum and count of served interactions by interaction index
        round_sum/round_count: per group, UG sum and count of served interactions by round
        push_count/adaptable_needs: per round, adaptable needs using push and all adaptable needs
    """
    run: int
    seed: int
    index_sum: Dict[Group, np.ndarray]
    index_count: Dict[Group, np.ndarray]
    round_sum: Dict[Group, np.ndarray]
    round_count: Dict[Group, np.ndarray]
    push_count: np.ndarray
    adaptable_needs: np.ndarray
    needs: int
    served: int

    def mean_ug(self, group: Group, first: int = 1, last: Optional[int] = None) -> float:
        """Mean UG of the group's served interactions in rounds first..last, NaN if none."""

        total = self.round_count[group][first:None if last is None else last + 1].sum()
        if total == 0:
            return math.nan
        return float(self.round_sum[group][first:None if last is None else last + 1].sum() / total)


class GroupSeries(NamedTuple):
    """Mean UG per interaction index across runs; position i holds index i + 1"""
    group: Group
    means: np.ndarray
    counts: np.ndarray


class ExperimentResult(NamedTuple):
    """Outcome of all runs of an experiment"""
    spec: ExperimentSpec
    base_seed: int
    runs: List[RunSummary]
    series: Dict[Group, GroupSeries]
    push_share: np.ndarray      # per round, position 0 is round 1
    push_share_n: np.ndarray
    logs: Optional[List[List[InteractionRecord]]] = None

    def run_means(self, group: Group, first: int = 1, last: Optional[int] = None) -> List[float]:
        """Per-run mean UG of a group, runs without served interactions skipped."""

        means = (summary.mean_ug(group, first, last) for summary in self.runs)
        return [mean for mean in means if not math.isnan(mean)]


def _bincount(positions: List[int], weights: Optional[List[float]] = None, length: int = 0) -> np.ndarray:
    return np.bincount(
        np.asarray(positions, dtype=int), None if weights is None else np.asarray(weights, dtype=float),
        minlength=length).astype(float)


def summarize_run(records: Sequence[InteractionRecord], run: int, seed: int, rounds: int) -> RunSummary:
    """Reduce a run log to the sums the aggregation needs."""

    index_sum, index_count, round_sum, round_count = {}, {}, {}, {}
    for group in Group:
        served = [r for r in records if r.group is group and r.served]
        ugs = [r.ug for r in served]
        index_sum[group] = _bincount([r.interaction_index for r in served], ugs)
        index_count[group] = _bincount([r.interaction_index for r in served])
        round_sum[group] = _bincount([r.round for r in served], ugs, rounds + 1)
        round_count[group] = _bincount([r.round for r in served], None, rounds + 1)

    adaptable = [r for r in records if r.group is Group.ADAPTABLE]
    push_count = _bincount([r.round for r in adaptable if r.model_used is Mode.PUSH], None, rounds + 1)
    adaptable_needs = _bincount([r.round for r in adaptable], None, rounds + 1)

    return RunSummary(
        run, seed, index_sum, index_count, round_sum, round_count, push_count, adaptable_needs,
        len(records), sum(1 for r in records if r.served))


def _padded_sum(arrays: Sequence[np.ndarray]) -> np.ndarray:
    total = np.zeros(max((len(a) for a in arrays), default=0))
    for array in arrays:
        total[:len(array)] += array
    return total


def _ratio(sums: np.ndarray, counts: np.ndarray) -> np.ndarray:
    result = np.full(len(sums), np.nan)
    np.divide(sums, counts, out=result, where=counts > 0)
    return result


def aggregate(runs: Sequence[RunSummary]) -> Dict[Group, GroupSeries]:
    """Per group, mean UG by interaction index over the served interactions of all runs."""

    ordered = sorted(runs, key=lambda summary: summary.run)
    series = {}
    for group in Group:
        sums = _padded_sum([summary.index_sum[group] for summary in ordered])[1:]
        counts = _padded_sum([summary.index_count[group] for summary in ordered])[1:]
        series[group] = GroupSeries(group, _ratio(sums, counts), counts.astype(int))

    return series


def _simulate(job: Tuple[SimulationSettings, int, int, bool]):
    """Worker: one run, reduced before it leaves the process."""

    settings, seed, run, keep_log = job
    records = run_simulation(settings, seed, run)
    return summarize_run(records, run, seed, settings.env.rounds), (records if keep_log else None)


def run_experiment(
        spec: ExperimentSpec, base_seed: int = 0, parallelism: int = 1,
        runs: Optional[int] = None, keep_logs: bool = False) -> ExperimentResult:
    """Run the experiment's independent runs with seeds base_seed + i and aggregate them.

    Runs are numbered from 1. parallelism > 1 distributes whole runs over
    worker processes; the reduction is always done in run order.
    """

    nisr = spec.nisr if runs is None else runs
    if nisr < 1:
        raise ConfigError(f"at least one run is required, got {nisr}")

    jobs = [(spec.settings, base_seed + i, i + 1, keep_logs) for i in range(nisr)]
    logging.info("experiment %d: %d runs from seed %d, %d workers", spec.ident, nisr, base_seed, parallelism)

    if parallelism > 1 and nisr > 1:
        with ProcessPoolExecutor(max_workers=min(parallelism, nisr)) as pool:
            outcomes = list(pool.map(_simulate, jobs))
    else:
        outcomes = [_simulate(job) for job in jobs]

    summaries = [summary for summary, _ in outcomes]
    push = _padded_sum([summary.push_count for summary in summaries])[1:]
    needs = _padded_sum([summary.adaptable_needs for summary in summaries])[1:]

    return ExperimentResult(
        spec, base_seed, summaries, aggregate(summaries), _ratio(push, needs), needs.astype(int),
        [log for _, log in outcomes] if keep_logs else None)


# Group pairs compared by the significance summary, first against second
COMPARISONS = (
    (Group.FIRE, Group.CA),
    (Group.ADAPTABLE, Group.FIRE),
    (Group.ADAPTABLE, Group.CA),
)


class Comparison(NamedTuple):
    """Welch test of two groups' per-run means, result None if the samples are degenerate"""
    first: Group
    second: Group
    alternative: str
    result: Optional[TTestResult]
    reason: str = ""


def _compare(first: Group, second: Group, a: Sequence[float], b: Sequence[float], alternative: str) -> Comparison:
    try:
        return Comparison(first, second, alternative, welch_t_test(a, b, alternative))
    except StatisticsError as err:
        return Comparison(first, second, alternative, None, str(err))


def group_comparisons(result: ExperimentResult) -> List[Comparison]:
    """Two-sided and one-sided tests of every group pair over whole runs."""

    comparisons = []
    for first, second in COMPARISONS:
        a, b = result.run_means(first), result.run_means(second)
        for alternative in ("two-sided", "greater"):
            comparisons.append(_compare(first, second, a, b, alternative))
    return comparisons


class PhaseComparison(NamedTuple):
    """Adaptable group against the weaker fixed model inside one schedule phase"""
    phase: Phase
    means: Dict[Group, float]
    worst: Group
    comparison: Comparison


def phase_comparisons(result: ExperimentResult) -> List[PhaseComparison]:
    """One-sided test adaptable > worse of FIRE and CA, per schedule phase."""

    comparisons = []
    for phase in result.spec.settings.schedule:
        samples = {group: result.run_means(group, phase.first, phase.last) for group in Group}
        means = {group: float(np.mean(values)) if values else math.nan for group, values in samples.items()}
        worst = Group.FIRE if means[Group.FIRE] <= means[Group.CA] else Group.CA
        comparisons.append(PhaseComparison(
            phase, means, worst,
            _compare(Group.ADAPTABLE, worst, samples[Group.ADAPTABLE], samples[worst], "greater")))

    return comparisons
