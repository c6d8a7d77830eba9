import math

import numpy as np
import pytest

from adaptrust import fire
from adaptrust.datamodel import Group, ProfileKind, Rating
from adaptrust.fire import ComponentResult, FireParams, TrustComponents
from adaptrust.population import Consumer, Provider
from adaptrust.world import PolarCoord

_ORIGIN = PolarCoord(0.0, 0.0, 0.0)


def _consumer(ident):
    return Consumer(ident, _ORIGIN, 1.0, Group.FIRE)


def _provider(ident):
    return Provider(ident, _ORIGIN, ProfileKind.GOOD, 7.5, 1.0)


def test_recency_weight():
    lam = FireParams().lam
    assert lam == pytest.approx(-5.0 / math.log(0.5))
    assert fire.recency_weight(0, lam) == 1.0
    assert fire.recency_weight(5, lam) == pytest.approx(0.5, abs=1e-12)
    assert fire.recency_weight(10, lam) == pytest.approx(0.25, abs=1e-12)

    with pytest.raises(ValueError):
        fire.recency_weight(-1, lam)


def test_component_trust():
    params = FireParams()

    assert fire.component_trust([], 3, params.lam, params.gamma_i) == fire.NOT_AVAILABLE

    single = fire.component_trust([Rating(1, 2, 7, 1.0)], 7, params.lam, params.gamma_i)
    assert single.available
    assert single.trust == pytest.approx(1.0)
    assert single.reliability == pytest.approx(0.5)

    same = fire.component_trust([Rating(1, 2, r, 0.4) for r in range(5)], 5, params.lam, params.gamma_i)
    assert same.trust == pytest.approx(0.4)

    mixed = fire.component_trust([Rating(1, 2, 7, 1.0), Rating(3, 2, 7, -1.0)], 7, params.lam, params.gamma_i)
    assert mixed.trust == pytest.approx(0.0)
    rho_r = 1.0 - math.exp(-params.gamma_i * 2.0)
    assert mixed.reliability == pytest.approx(rho_r * 0.5)


def test_local_rating_db():
    """the h most recent ratings per provider are kept"""

    db = fire.LocalRatingDb(10)
    for round_no in range(1, 12):
        db.add(Rating(1, 5, round_no, 0.1))
    db.add(Rating(1, 6, 3, 0.2))

    ratings = db.ratings_for(5)
    assert len(ratings) == 10
    assert ratings[0].round == 2
    assert db.has_ratings_for(6)
    assert not db.has_ratings_for(7)
    assert db.rated_providers() == frozenset({5, 6})
    assert len(db) == 11


def test_interaction_trust():
    params = FireParams()
    db = fire.LocalRatingDb(params.h)
    assert not fire.interaction_trust(db, 5, 1, params).available

    for round_no in range(1, 4):
        db.add(Rating(1, 5, round_no, 0.5))
    expected = fire.component_trust(db.ratings_for(5), 4, params.lam, params.gamma_i)
    assert fire.interaction_trust(db, 5, 4, params) == expected


def test_certified_store():
    """only the best h ratings are retained"""

    store = fire.CertifiedStore(10)
    for value in range(11):
        store.offer(Rating(value, 9, 1, value / 10.0))

    values = [r.value for r in store.ratings()]
    assert len(values) == 10
    assert min(values) == pytest.approx(0.1)

    full = fire.CertifiedStore(10)
    for consumer in range(10):
        full.offer(Rating(consumer, 9, 1, 1.0))
    assert not full.offer(Rating(99, 9, 2, 0.2))
    assert all(r.value == 1.0 for r in full.ratings())


def test_certified_reputation():
    params = FireParams()
    provider = _provider(9)
    assert not fire.certified_reputation(provider, 1, params).available

    for consumer in range(4):
        provider.certified.offer(Rating(consumer, 9, 1, 0.6))
    assert fire.certified_reputation(provider, 2, params).trust == pytest.approx(0.6)


def test_role_based_trust():
    consumer, provider = _consumer(1), _provider(2)
    assert not fire.role_based_trust(consumer, provider).available

    rule = lambda c, p: ComponentResult(0.9, 1.0, True)  # noqa: E731
    assert fire.role_based_trust(consumer, provider, rule).trust == 0.9
    assert not fire.role_based_trust(consumer, provider, lambda c, p: None).available

    # the rule flows into the overall value with W_R
    components = TrustComponents(
        it=ComponentResult(0.0, 1.0, True), rt=fire.role_based_trust(consumer, provider, rule))
    assert fire.overall_trust(components).trust == pytest.approx(0.45)


def test_overall_trust():
    assert not fire.overall_trust(TrustComponents()).available

    only_it = fire.overall_trust(TrustComponents(it=ComponentResult(0.8, 0.5, True)))
    assert only_it.trust == pytest.approx(0.8)

    it_and_cr = fire.overall_trust(TrustComponents(
        it=ComponentResult(1.0, 1.0, True), cr=ComponentResult(0.0, 1.0, True)))
    assert it_and_cr.trust == pytest.approx(0.8)
    assert it_and_cr.reliability == pytest.approx(1.0)

    assert TrustComponents(cr=ComponentResult(0.0, 1.0, True)).cr_only()
    assert not TrustComponents(it=ComponentResult(0.0, 1.0, True), cr=ComponentResult(0.0, 1.0, True)).cr_only()


def _network(consumers, links):
    return fire.WitnessNetwork({c.ident: c for c in consumers}, links)


def test_witness_reputation():
    params = FireParams()
    rng = np.random.default_rng(0)
    evaluator = _consumer(1)

    alone = _network([evaluator], {})
    assert not fire.witness_reputation(evaluator, 50, alone, 5, params, rng).available

    # newcomers only refer, nobody holds ratings
    newcomers = [_consumer(i) for i in range(2, 6)]
    network = _network([evaluator] + newcomers, {1: [2, 3], 2: [4], 3: [5]})
    ledger = fire.WitnessLedger()
    assert not fire.witness_reputation(evaluator, 50, network, 5, params, rng, ledger).available
    assert ledger.queried == {2, 3, 4, 5}
    assert ledger.silent() == {2, 3, 4, 5}

    # a witness at the end of a referral chain answers
    newcomers[3].ratings.add(Rating(5, 50, 4, 0.8))
    ledger = fire.WitnessLedger()
    result = fire.witness_reputation(evaluator, 50, network, 5, params, rng, ledger)
    assert result.available
    assert result.trust == pytest.approx(0.8)
    assert ledger.answered == {5}


def test_witness_chain_length():
    """a witness more than n_rl hops away is never queried"""

    params = FireParams(n_rl=3)
    rng = np.random.default_rng(0)
    chain = [_consumer(i) for i in range(1, 8)]
    links = {i: [i + 1] for i in range(1, 7)}
    chain[-1].ratings.add(Rating(7, 50, 1, 1.0))

    ledger = fire.WitnessLedger()
    result = fire.witness_reputation(chain[0], 50, _network(chain, links), 2, params, rng, ledger)
    assert not result.available
    assert ledger.queried == {2, 3, 4}


def test_select_provider():
    params = FireParams(p_explore=0.0)
    rng = np.random.default_rng(0)
    consumer = _consumer(1)

    nothing = fire.select_provider(consumer, [], 1, params, rng)
    assert nothing.chosen is None
    assert not nothing.has_trust and not nothing.no_trust

    good, poor, unknown = _provider(10), _provider(11), _provider(12)
    consumer.ratings.add(Rating(1, 10, 1, 0.9))
    consumer.ratings.add(Rating(1, 11, 1, 0.2))

    selection = fire.select_provider(consumer, [poor, unknown, good], 2, params, rng)
    assert selection.chosen is good
    assert set(selection.has_trust) == {10, 11}
    assert selection.no_trust == frozenset({12})
    assert selection.cr_only == frozenset()

    explore = FireParams(p_explore=1.0)
    for _ in range(20):
        assert fire.select_provider(consumer, [poor, unknown, good], 2, explore, rng).chosen is unknown


def test_select_provider_cr_only():
    """trust from certified ratings alone is reported separately"""

    rng = np.random.default_rng(0)
    consumer = _consumer(1)
    provider = _provider(10)
    provider.certified.offer(Rating(2, 10, 1, 0.5))

    selection = fire.select_provider(consumer, [provider], 2, FireParams(), rng)
    assert selection.chosen is provider
    assert selection.cr_only == frozenset({10})


def test_record_interaction():
    consumer, provider = _consumer(1), _provider(2)

    rating = fire.record_interaction(consumer, provider, 7.0, 3)
    assert rating.value == pytest.approx(0.7)
    assert consumer.ratings.ratings_for(2) == [rating]
    assert provider.certified.ratings() == [rating]

    for round_no in range(4, 14):
        fire.record_interaction(consumer, provider, 1.0, round_no)
    assert len(consumer.ratings.ratings_for(2)) == 10

    with pytest.raises(ValueError):
        fire.record_interaction(consumer, provider, 10.5, 20)


def test_component_trust_bounds():
    """trust lies between the extreme rating values, reliability within [0, 1]"""

    params = FireParams()
    rng = np.random.default_rng(11)
    for _ in range(500):
        count = int(rng.integers(1, 15))
        ratings = [Rating(c, 2, int(rng.integers(0, 30)), float(rng.uniform(-1, 1))) for c in range(count)]
        result = fire.component_trust(ratings, 30, params.lam, params.gamma_w)

        values = [r.value for r in ratings]
        assert min(values) - 1e-12 <= result.trust <= max(values) + 1e-12
        assert 0.0 <= result.reliability <= 1.0


def test_recency_weight_monotone():
    lam = FireParams().lam
    weights = [fire.recency_weight(delta_t, lam) for delta_t in np.linspace(0, 100, 401)]
    assert all(later <= earlier for earlier, later in zip(weights, weights[1:]))
    assert all(0.0 < w <= 1.0 for w in weights)


def _brute_force_overall(components, coefficients):
    numerator = denominator = total = 0.0
    for coefficient, component in zip(coefficients, components):
        if component.available:
            numerator += coefficient * component.reliability * component.trust
            denominator += coefficient * component.reliability
            total += coefficient
    if denominator == 0.0:
        return None
    return numerator / denominator, denominator / total


def test_overall_trust_weighted_mean():
    params = FireParams()
    coefficients = (params.w_i, params.w_r, params.w_w, params.w_c)
    rng = np.random.default_rng(12)

    for _ in range(500):
        components = TrustComponents(*(
            ComponentResult(float(rng.uniform(-1, 1)), float(rng.uniform(0, 1)), bool(rng.random() < 0.6))
            for _ in range(4)))
        expected = _brute_force_overall(components, coefficients)
        result = fire.overall_trust(components, params)

        if expected is None:
            assert not result.available
        else:
            assert result.available
            assert result.trust == pytest.approx(expected[0])
            assert result.reliability == pytest.approx(expected[1])


def test_select_provider_increasing_transform():
    """the choice only depends on the order of the trust values"""

    params = FireParams(p_explore=0.0)
    rng = np.random.default_rng(13)
    consumer = _consumer(1)
    providers = [_provider(ident) for ident in range(10, 18)]

    for _ in range(50):
        values = dict(zip((p.ident for p in providers), rng.uniform(-1, 1, len(providers))))
        plain = fire.select_provider(
            consumer, providers, 1, params, rng,
            role_rules=lambda c, p: ComponentResult(values[p.ident], 1.0, True))
        cubed = fire.select_provider(
            consumer, providers, 1, params, rng,
            role_rules=lambda c, p: ComponentResult(values[p.ident] ** 3, 1.0, True))

        assert plain.chosen is cubed.chosen
        assert plain.chosen.ident == max(values, key=values.get)


def test_witness_ratings_single_search():
    """one query collects the ratings of all targets a witness knows"""

    params = FireParams()
    rng = np.random.default_rng(0)
    evaluator, knowing, referring, distant = (_consumer(i) for i in range(1, 5))
    knowing.ratings.add(Rating(2, 50, 3, 0.6))
    knowing.ratings.add(Rating(2, 51, 3, -0.2))
    distant.ratings.add(Rating(4, 52, 4, 0.9))
    network = _network([evaluator, knowing, referring, distant], {1: [2, 3], 3: [4]})

    ledger = fire.WitnessLedger()
    found = fire.witness_ratings(evaluator, frozenset({50, 51, 52, 53}), network, params, rng, ledger)

    assert [r.value for r in found[50]] == [0.6]
    assert [r.value for r in found[51]] == [-0.2]
    assert [r.value for r in found[52]] == [0.9]
    assert found[53] == []
    assert ledger.queried == {2, 3, 4}
    assert ledger.silent() == {3}

    assert fire.witness_ratings(evaluator, frozenset(), network, params, rng) == {}


def test_select_provider_uses_witnesses():
    params = FireParams(p_explore=0.0)
    rng = np.random.default_rng(0)
    evaluator, witness = _consumer(1), _consumer(2)
    witness.ratings.add(Rating(2, 10, 1, -0.8))
    witness.ratings.add(Rating(2, 11, 1, 0.7))
    network = _network([evaluator, witness], {1: [2]})

    ledger = fire.WitnessLedger()
    selection = fire.select_provider(evaluator, [_provider(10), _provider(11)], 2, params, rng, network, ledger)
    assert selection.chosen.ident == 11
    assert ledger.queried == {2}
    assert selection.has_trust[10].trust == pytest.approx(-0.8)


def test_certified_reputation_follows_store():
    params = FireParams()
    provider = _provider(9)
    provider.certified.offer(Rating(1, 9, 1, 0.2))
    assert fire.certified_reputation(provider, 2, params).trust == pytest.approx(0.2)

    provider.certified.offer(Rating(2, 9, 2, 0.8))
    assert fire.certified_reputation(provider, 2, params).trust == pytest.approx(
        fire.component_trust(provider.certified.ratings(), 2, params.lam, params.gamma_c).trust)
    assert fire.certified_reputation(provider, 2, params).trust > 0.2


@pytest.mark.parametrize("store", [fire.LocalRatingDb, fire.CertifiedStore])
def test_empty_history_rejected(store):
    with pytest.raises(ValueError):
        store(0)
