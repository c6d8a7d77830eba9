import numpy as np
import pytest

from adaptrust import ca
from adaptrust.ca import CaParams, ConnectionWeights
from adaptrust.datamodel import REQUEST_LEVELS, Group, PerformanceLevel, ProfileKind
from adaptrust.population import Consumer, Provider
from adaptrust.world import PolarCoord

_ORIGIN = PolarCoord(0.0, 0.0, 0.0)


def _provider(ident, weight=0.5):
    return Provider(ident, _ORIGIN, ProfileKind.GOOD, 7.5, 1.0, initial_weight=weight)


def _consumer(ident):
    return Consumer(ident, _ORIGIN, 1.0, Group.CA)


@pytest.mark.parametrize("w, alpha, expected", [
    (1.0, 0.1, 1.0),
    (0.5, 0.1, 0.55),
    (0.0, 0.1, 0.1),
])
def test_update_weight_success(w, alpha, expected):
    assert ca.update_weight_success(w, alpha) == pytest.approx(expected)


@pytest.mark.parametrize("w, beta, expected", [
    (1.0, 0.1, 1.0),
    (0.5, 0.1, 0.45),
    (0.05, 0.9, 0.0),
])
def test_update_weight_failure(w, beta, expected):
    assert ca.update_weight_failure(w, beta) == pytest.approx(expected)


def test_weight_stays_in_range():
    rng = np.random.default_rng(3)
    for w, factor in rng.uniform(0.0, 1.0, size=(500, 2)):
        assert 0.0 <= ca.update_weight_success(w, factor) <= 1.0
        assert 0.0 <= ca.update_weight_failure(w, factor) <= 1.0


def test_repeated_successes():
    """ten successes from 0.5 approach 1 geometrically"""

    w = 0.5
    for _ in range(10):
        w = ca.update_weight_success(w, 0.1)
    assert w == pytest.approx(1.0 - 0.5 * 0.9 ** 10)
    assert w == pytest.approx(0.8257, abs=1e-4)


def test_connection_weights():
    weights = ConnectionWeights(0.5)
    assert PerformanceLevel.GOOD not in weights
    assert weights.weight(PerformanceLevel.GOOD) == 0.5
    assert PerformanceLevel.GOOD in weights

    weights.set(PerformanceLevel.GOOD, 0.7)
    assert dict(weights.items()) == {PerformanceLevel.GOOD: 0.7}

    with pytest.raises(ValueError):
        weights.set(PerformanceLevel.OK, 1.2)


def test_decide_execute():
    weights = ConnectionWeights(0.5)
    assert ca.decide_execute(weights, PerformanceLevel.PERFECT, 0.5)

    weights.set(PerformanceLevel.GOOD, 0.4)
    assert ca.decide_execute(weights, PerformanceLevel.GOOD, 0.4)
    assert not ca.decide_execute(weights, PerformanceLevel.GOOD, 0.4 + 1e-9)


def test_staged_allocation_no_provider():
    rng = np.random.default_rng(0)
    consumer = _consumer(1)
    assert ca.staged_allocation([consumer], {1: []}, CaParams(), rng) == {}
    assert ca.staged_allocation([consumer], {}, CaParams(), rng) == {}


def test_staged_allocation_first_stage():
    rng = np.random.default_rng(0)
    consumer, provider = _consumer(1), _provider(10)

    assignments = ca.staged_allocation([consumer], {1: [provider]}, CaParams(), rng, round_no=4)
    assert assignments[1] == ca.Assignment(provider, PerformanceLevel.PERFECT)
    assert provider.requests == [ca.RequestMessage(1, PerformanceLevel.PERFECT, 4)]


def test_staged_allocation_exhausted():
    """providers below the threshold at every level leave the consumer unserved"""

    rng = np.random.default_rng(0)
    consumer, provider = _consumer(1), _provider(10, weight=0.2)

    assert ca.staged_allocation([consumer], {1: [provider]}, CaParams(), rng) == {}
    assert [msg.level for msg in provider.requests] == list(REQUEST_LEVELS)
    assert PerformanceLevel.WORST not in provider.weights


def test_staged_allocation_lower_stage():
    rng = np.random.default_rng(0)
    consumer, provider = _consumer(1), _provider(10, weight=0.2)
    provider.weights.set(PerformanceLevel.OK, 0.9)

    assignments = ca.staged_allocation([consumer], {1: [provider]}, CaParams(), rng)
    assert assignments[1].level is PerformanceLevel.OK


def test_staged_allocation_volunteers():
    """one volunteer per consumer, equally strong volunteers share the consumers"""

    rng = np.random.default_rng(0)
    providers = [_provider(10), _provider(11)]
    consumers = [_consumer(i) for i in range(1, 41)]
    nearby = {c.ident: providers for c in consumers}

    assignments = ca.staged_allocation(consumers, nearby, CaParams(), rng)
    assert set(assignments) == {c.ident for c in consumers}
    assert {a.provider.ident for a in assignments.values()} == {10, 11}


def test_staged_allocation_strongest_volunteer():
    rng = np.random.default_rng(0)
    weak, strong = _provider(10), _provider(11)
    weak.weights.set(PerformanceLevel.PERFECT, 0.6)
    strong.weights.set(PerformanceLevel.PERFECT, 0.9)
    consumers = [_consumer(i) for i in range(1, 11)]

    assignments = ca.staged_allocation(consumers, {c.ident: [weak, strong] for c in consumers}, CaParams(), rng)
    assert all(a == ca.Assignment(strong, PerformanceLevel.PERFECT) for a in assignments.values())


def test_staged_allocation_drops_old_requests():
    rng = np.random.default_rng(0)
    consumer, near, far = _consumer(1), _provider(10), _provider(11)
    far.requests.append(ca.RequestMessage(7, PerformanceLevel.GOOD, 1))

    ca.staged_allocation([consumer], {1: [near]}, CaParams(), rng, 2, [near, far])
    assert far.requests == []
    assert near.requests == [ca.RequestMessage(1, PerformanceLevel.PERFECT, 2)]


@pytest.mark.parametrize("level, delivered, success", [
    (PerformanceLevel.GOOD, 6.2, True),
    (PerformanceLevel.GOOD, 4.9, False),
    (PerformanceLevel.BAD, -5.0, True),
])
def test_settle_task(level, delivered, success):
    provider = _provider(10)
    params = CaParams()

    assert ca.settle_task(provider, level, delivered, params) is success
    if success:
        assert provider.weights.weight(level) > 0.5
    else:
        assert provider.weights.weight(level) < 0.5


def test_weight_algebra_grid():
    """both updates equal the closed form on a grid of weights and factors"""

    for step in range(21):
        w = step * 0.05
        for factor in (0.05, 0.1, 0.5):
            assert ca.update_weight_success(w, factor) == pytest.approx(min(1.0, w + factor * (1.0 - w)), abs=1e-12)
            assert ca.update_weight_failure(w, factor) == pytest.approx(max(0.0, w - factor * (1.0 - w)), abs=1e-12)
