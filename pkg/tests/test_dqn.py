import io

import numpy as np
import pytest
from scipy.special import expit

from adaptrust import dqn
from adaptrust.datamodel import Mode
from adaptrust.dqn import Experience, Hyperparams, QNetwork, ReplayMemory
from adaptrust.errors import DivergenceError


def _experience(rng, reward=None):
    action = Mode(int(rng.integers(2)))
    return Experience(rng.uniform(0, 1, 9), action, float(rng.uniform(-10, 10)) if reward is None else reward,
                      rng.uniform(0, 1, 9))


def _filled_memory(rng, size=5, capacity=50):
    memory = ReplayMemory(capacity)
    for _ in range(size):
        memory.append(_experience(rng))
    return memory


def test_forward_zero_network():
    q_values = dqn.forward(QNetwork.zeros(), np.linspace(0, 1, 9))
    assert q_values.shape == (2,)
    assert list(q_values) == [0.0, 0.0]


def test_forward_by_hand():
    net = QNetwork(np.ones((6, 9)), np.zeros(6), np.ones((2, 6)), [1.0, -1.0])

    hidden = expit(9 * expit(0.0))
    expected = [6 * hidden + 1.0, 6 * hidden - 1.0]
    assert dqn.forward(net, np.zeros(9)) == pytest.approx(expected)

    plain = [6 * expit(0.0) + 1.0, 6 * expit(0.0) - 1.0]
    assert dqn.forward(net, np.zeros(9), input_sigmoid=False) == pytest.approx(plain)


def test_select_action():
    rng = np.random.default_rng(1)
    assert dqn.select_action([3.0, 1.0], 0.0, rng) is Mode.PUSH
    assert dqn.select_action([1.0, 3.0], 0.0, rng) is Mode.PULL

    picks = [dqn.select_action([3.0, 1.0], 1.0, rng) for _ in range(10000)]
    assert picks.count(Mode.PUSH) / len(picks) == pytest.approx(0.5, abs=0.02)

    ties = {dqn.select_action([2.0, 2.0], 0.0, rng) for _ in range(100)}
    assert ties == {Mode.PUSH, Mode.PULL}


def test_replay_memory():
    rng = np.random.default_rng(2)
    memory = ReplayMemory(50)
    first = _experience(rng)
    dqn.remember(memory, first)
    assert len(memory) == 1

    for _ in range(50):
        dqn.remember(memory, _experience(rng))
    assert len(memory) == 50
    assert all(exp is not first for exp in memory)

    sample = memory.sample(5, rng)
    assert len({id(exp) for exp in sample}) == 5


@pytest.mark.parametrize("input_sigmoid", [True, False])
def test_gradients(input_sigmoid):
    """analytic gradients match central differences"""

    rng = np.random.default_rng(5)
    eps = 1e-5

    for _ in range(20):
        net = QNetwork.random(rng, 1.0)
        net.b1[:] = rng.uniform(-1, 1, 6)
        net.b2[:] = rng.uniform(-1, 1, 2)
        states = rng.uniform(0, 1, (5, 9))
        actions = rng.integers(0, 2, 5)
        targets = rng.uniform(-1, 1, 5)

        grads = dqn.minibatch_gradients(net, states, actions, targets, 0.01, input_sigmoid)
        for param, grad in zip(net.parameters(), grads):
            numeric = np.zeros_like(param)
            for index in np.ndindex(param.shape):
                saved = param[index]
                param[index] = saved + eps
                upper = dqn.minibatch_loss(net, states, actions, targets, 0.01, input_sigmoid)
                param[index] = saved - eps
                lower = dqn.minibatch_loss(net, states, actions, targets, 0.01, input_sigmoid)
                param[index] = saved
                numeric[index] = (upper - lower) / (2 * eps)

            error = np.abs(grad - numeric) / np.maximum(np.abs(grad) + np.abs(numeric), 1e-8)
            assert np.all(error < 1e-4), f"worst entry {np.unravel_index(np.argmax(error), error.shape)}"


def test_train_step_small_memory():
    rng = np.random.default_rng(6)
    online = QNetwork.random(rng)
    target = online.copy()
    before = online.copy()

    assert dqn.train_step(online, target, _filled_memory(rng, 3), Hyperparams(), rng) == 0
    for param, old in zip(online.parameters(), before.parameters()):
        assert np.array_equal(param, old)


def test_train_step_without_td():
    """alpha_dqn 0 leaves only the L2 shrinkage of the weights"""

    rng = np.random.default_rng(7)
    hp = Hyperparams(alpha_dqn=0.0)
    online = QNetwork.random(rng)
    online.b1[:] = 0.3
    before = online.copy()

    dqn.train_step(online, online.copy(), _filled_memory(rng), hp, rng)

    shrink = 1.0 - hp.sgd_rate * 2.0 * hp.l2_lambda
    assert online.w1 == pytest.approx(before.w1 * shrink)
    assert online.w2 == pytest.approx(before.w2 * shrink)
    assert online.b1 == pytest.approx(before.b1)
    assert online.b2 == pytest.approx(before.b2)


def test_target_sync():
    rng = np.random.default_rng(8)
    hp = Hyperparams()
    online = QNetwork.random(rng)
    target = online.copy()
    memory = _filled_memory(rng, 20)

    steps = 0
    for _ in range(10):
        steps = dqn.train_step(online, target, memory, hp, rng, steps)
        synced = all(np.array_equal(a, b) for a, b in zip(online.parameters(), target.parameters()))
        assert synced == (steps % hp.target_sync_every == 0)
    assert steps == 10


def test_divergence():
    rng = np.random.default_rng(9)
    memory = ReplayMemory(50)
    for _ in range(5):
        memory.append(_experience(rng, reward=np.inf))
    online = QNetwork.random(rng)

    with pytest.raises(DivergenceError, match="consumer 17"):
        dqn.train_step(online, online.copy(), memory, Hyperparams(), rng, owner=17)


def test_dump_load():
    rng = np.random.default_rng(10)
    net = QNetwork.random(rng)
    stream = io.StringIO()
    net.dump(stream)

    lines = stream.getvalue().splitlines()
    assert len(lines) == 6 * 9 + 6 + 2 * 6 + 2

    loaded = QNetwork.load(lines)
    for a, b in zip(net.parameters(), loaded.parameters()):
        assert np.array_equal(a, b)

    with pytest.raises(ValueError):
        QNetwork.load(lines[:-1])


def test_learner_transitions():
    rng = np.random.default_rng(12)
    learner = dqn.DqnLearner(Hyperparams(), rng, owner=3)

    learner.close_transition(np.zeros(9), rng)
    assert len(learner.memory) == 0

    for round_no in range(7):
        state = rng.uniform(0, 1, 9)
        learner.close_transition(state, rng)
        mode = learner.act(state, rng)
        learner.begin_transition(state, mode, 5.0)

    assert len(learner.memory) == 6
    assert learner.steps == 2
    assert learner.pending is not None


def test_hidden_activations():
    """hidden units are sigmoids, strictly inside (0, 1)"""

    rng = np.random.default_rng(13)
    for _ in range(50):
        net = QNetwork.random(rng, 1.0)
        net.b1[:] = rng.uniform(-1, 1, 6)
        states = rng.uniform(0, 1, (20, 9))
        for input_sigmoid in (True, False):
            _, hidden, _ = dqn._forward_batch(net, states, input_sigmoid)
            assert np.all((hidden > 0.0) & (hidden < 1.0))


def _learner_run(seed, rounds=60):
    rng = np.random.default_rng(seed)
    learner = dqn.DqnLearner(Hyperparams(), rng, owner=1)
    modes = []
    for _ in range(rounds):
        state = rng.uniform(0, 1, 9)
        learner.close_transition(state, rng)
        mode = learner.act(state, rng)
        modes.append(mode)
        learner.begin_transition(state, mode, float(rng.uniform(-10, 10)))
    return learner, modes


def test_learner_reproducible():
    """same seed, same decisions and parameters"""

    first, first_modes = _learner_run(21)
    second, second_modes = _learner_run(21)

    assert first_modes == second_modes
    assert first.steps == second.steps > 0
    for a, b in zip(first.online.parameters(), second.online.parameters()):
        assert np.array_equal(a, b)
    for a, b in zip(first.target.parameters(), second.target.parameters()):
        assert np.array_equal(a, b)


@pytest.mark.slow
def test_long_training_stays_finite():
    rng = np.random.default_rng(22)
    hp = Hyperparams()
    online = QNetwork.random(rng, hp.init_scale)
    target = online.copy()
    memory = ReplayMemory(hp.memory)

    steps = 0
    for _ in range(100000):
        dqn.remember(memory, _experience(rng))
        steps = dqn.train_step(online, target, memory, hp, rng, steps)

    assert steps == 100000 - hp.minibatch + 1
    assert online.is_finite() and target.is_finite()
    assert np.all(np.isfinite(dqn.forward(online, rng.uniform(0, 1, 9))))
