"""Deep Q-learning for the push/pull decision

A 9-6-2 fully connected network (sigmoid input and hidden layer, linear
output) estimates the value of push and pull for a feature state. Training
follows DQN: experiences go to a small replay memory, minibatches are drawn
at random and the TD target is computed with a target network that is
synchronized every few steps.
"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

from __future__ import annotations

import logging
from collections import deque
from typing import Deque, Iterable, List, NamedTuple, Optional, TextIO, Tuple

import numpy as np
from scipy.special import expit

from adaptrust.datamodel import Mode
from adaptrust.errors import DivergenceError

N_FEATURES = 9
N_HIDDEN = 6
N_ACTIONS = len(Mode)


class Hyperparams(NamedTuple):
    """Learner configuration

        epsilon(float): exploration probability of the epsilon-greedy policy
        l2_lambda(float): L2 regularization of the weights (not the biases)
        alpha_dqn(float): learning rate blending the TD error into the target
        sgd_rate(float): gradient descent step size
        gamma(float): discount factor
        memory(int): replay memory capacity
        minibatch(int): experiences per training step
        target_sync_every(int): training steps between target network syncs
        input_sigmoid(bool): apply the sigmoid to the input layer
        init_scale(float): weights start uniform in [-init_scale, +init_scale]
    """
    epsilon: float = 0.05
    l2_lambda: float = 0.01
    alpha_dqn: float = 0.3
    sgd_rate: float = 0.15
    gamma: float = 0.95
    memory: int = 50
    minibatch: int = 5
    target_sync_every: int = 5
    input_sigmoid: bool = True
    init_scale: float = 0.5


class QNetwork:
    """Parameters of the 9-6-2 network

        w1 (6x9), b1 (6): input to hidden layer
        w2 (2x6), b2 (2): hidden to output layer, row i is the value of Mode(i)
    """

    def __init__(self, w1: np.ndarray, b1: np.ndarray, w2: np.ndarray, b2: np.ndarray):
        self.w1 = np.array(w1, dtype=float).reshape(N_HIDDEN, N_FEATURES)
        self.b1 = np.array(b1, dtype=float).reshape(N_HIDDEN)
        self.w2 = np.array(w2, dtype=float).reshape(N_ACTIONS, N_HIDDEN)
        self.b2 = np.array(b2, dtype=float).reshape(N_ACTIONS)

    @classmethod
    def zeros(cls) -> "QNetwork":
        """All weights and biases zero."""
        return cls(np.zeros((N_HIDDEN, N_FEATURES)), np.zeros(N_HIDDEN),
                   np.zeros((N_ACTIONS, N_HIDDEN)), np.zeros(N_ACTIONS))

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 0.5) -> "QNetwork":
        """Weights uniform in [-scale, +scale], biases zero."""
        return cls(rng.uniform(-scale, scale, (N_HIDDEN, N_FEATURES)), np.zeros(N_HIDDEN),
                   rng.uniform(-scale, scale, (N_ACTIONS, N_HIDDEN)), np.zeros(N_ACTIONS))

    @classmethod
    def load(cls, lines: Iterable[str]) -> "QNetwork":
        """Inverse of dump()."""

        values = np.array([float(line) for line in lines if line.strip()])
        sizes = np.cumsum([N_HIDDEN * N_FEATURES, N_HIDDEN, N_ACTIONS * N_HIDDEN])
        if len(values) != sizes[-1] + N_ACTIONS:
            raise ValueError(f"expected {sizes[-1] + N_ACTIONS} parameters, got {len(values)}")
        w1, b1, w2, b2 = np.split(values, sizes)
        return cls(w1, b1, w2, b2)

    def parameters(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(w1, b1, w2, b2)"""
        return self.w1, self.b1, self.w2, self.b2

    def copy(self) -> "QNetwork":
        """Value copy."""
        return QNetwork(*(p.copy() for p in self.parameters()))

    def is_finite(self) -> bool:
        """True if no parameter is NaN or infinite."""
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def dump(self, stream: TextIO) -> None:
        """One parameter per line, layer-major, row-major."""

        for param in self.parameters():
            for value in param.ravel():
                stream.write(f"{float(value)!r}\n")


class Experience(NamedTuple):
    """One transition <s, a, r, s'>"""
    s: np.ndarray
    a: Mode
    r: float
    s_next: np.ndarray


class ReplayMemory:
    """Ring buffer of experiences, the oldest is evicted first"""

    def __init__(self, capacity: int = 50):
        self.capacity = capacity
        self._items: Deque[Experience] = deque(maxlen=capacity)

    def append(self, exp: Experience) -> None:
        """Store an experience."""
        self._items.append(exp)

    def sample(self, size: int, rng: np.random.Generator) -> List[Experience]:
        """Uniform sample without replacement."""
        picks = rng.choice(len(self._items), size=size, replace=False)
        return [self._items[i] for i in picks]

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


def _forward_batch(net: QNetwork, states: np.ndarray, input_sigmoid: bool = True):
    """Forward pass of a (B, 9) batch, returns (inputs, hidden, q) activations."""

    x_in = expit(states) if input_sigmoid else states
    hidden = expit(x_in @ net.w1.T + net.b1)
    q_values = hidden @ net.w2.T + net.b2
    return x_in, hidden, q_values


def forward(net: QNetwork, state, input_sigmoid: bool = True) -> np.ndarray:
    """Q-values (push, pull) of one state."""

    state = np.asarray(state, dtype=float).reshape(1, N_FEATURES)
    return _forward_batch(net, state, input_sigmoid)[2][0]


def select_action(q_values, epsilon: float, rng: np.random.Generator) -> Mode:
    """Epsilon-greedy choice; ties of the greedy choice are broken at random."""

    if rng.random() < epsilon:
        return Mode(int(rng.integers(N_ACTIONS)))

    q_values = np.asarray(q_values)
    best = np.flatnonzero(q_values == q_values.max())
    return Mode(int(best[0] if len(best) == 1 else best[rng.integers(len(best))]))


def remember(memory: ReplayMemory, exp: Experience) -> None:
    """Add an experience to the replay memory."""
    memory.append(exp)


def sync_target(online: QNetwork, target: QNetwork) -> None:
    """Copy the online parameters into the target network."""

    for dst, src in zip(target.parameters(), online.parameters()):
        np.copyto(dst, src)


def _batch_arrays(batch: List[Experience]):
    states = np.array([np.asarray(exp.s, dtype=float) for exp in batch])
    actions = np.array([exp.a.value for exp in batch], dtype=int)
    rewards = np.array([exp.r for exp in batch], dtype=float)
    next_states = np.array([np.asarray(exp.s_next, dtype=float) for exp in batch])
    return states, actions, rewards, next_states


def td_targets(
        online: QNetwork, target: QNetwork, batch: List[Experience], hp: Hyperparams) -> np.ndarray:
    """y = Q(s,a) + alpha_dqn * (r + gamma * max Q'(s',.) - Q(s,a))"""

    states, actions, rewards, next_states = _batch_arrays(batch)
    q_sa = _forward_batch(online, states, hp.input_sigmoid)[2][np.arange(len(batch)), actions]
    q_next = _forward_batch(target, next_states, hp.input_sigmoid)[2].max(axis=1)

    return q_sa + hp.alpha_dqn * (rewards + hp.gamma * q_next - q_sa)


def minibatch_loss(
        net: QNetwork, states: np.ndarray, actions: np.ndarray, targets: np.ndarray,
        l2_lambda: float, input_sigmoid: bool = True) -> float:
    """Mean squared TD error plus L2 penalty of the weights."""

    q_sa = _forward_batch(net, states, input_sigmoid)[2][np.arange(len(actions)), actions]
    penalty = l2_lambda * (np.sum(net.w1 ** 2) + np.sum(net.w2 ** 2))
    return float(np.mean((targets - q_sa) ** 2) + penalty)


def minibatch_gradients(
        net: QNetwork, states: np.ndarray, actions: np.ndarray, targets: np.ndarray,
        l2_lambda: float, input_sigmoid: bool = True) -> Tuple[np.ndarray, ...]:
    """Gradients (dw1, db1, dw2, db2) of minibatch_loss(), targets held constant."""

    batch = len(actions)
    x_in, hidden, q_values = _forward_batch(net, states, input_sigmoid)

    d_q = np.zeros_like(q_values)
    rows = np.arange(batch)
    d_q[rows, actions] = -2.0 * (targets - q_values[rows, actions]) / batch

    d_w2 = d_q.T @ hidden + 2.0 * l2_lambda * net.w2
    d_b2 = d_q.sum(axis=0)
    d_z1 = (d_q @ net.w2) * hidden * (1.0 - hidden)
    d_w1 = d_z1.T @ x_in + 2.0 * l2_lambda * net.w1
    d_b1 = d_z1.sum(axis=0)

    return d_w1, d_b1, d_w2, d_b2


def train_step(
        online: QNetwork, target: QNetwork, memory: ReplayMemory, hp: Hyperparams,
        rng: np.random.Generator, steps_done: int = 0, owner: Optional[int] = None) -> int:
    """One gradient step on a random minibatch; returns the new step count.

    Does nothing while the memory holds fewer experiences than a minibatch.
    The target network is synchronized every target_sync_every steps.
    """

    if len(memory) < hp.minibatch:
        return steps_done

    step = steps_done + 1
    batch = memory.sample(hp.minibatch, rng)
    targets = td_targets(online, target, batch, hp)
    states, actions, _, _ = _batch_arrays(batch)

    loss = minibatch_loss(online, states, actions, targets, hp.l2_lambda, hp.input_sigmoid)
    if not np.isfinite(loss):
        raise DivergenceError("loss", step, owner)

    grads = minibatch_gradients(online, states, actions, targets, hp.l2_lambda, hp.input_sigmoid)
    for param, grad in zip(online.parameters(), grads):
        param -= hp.sgd_rate * grad

    if not online.is_finite():
        raise DivergenceError("parameter", step, owner)

    if step % hp.target_sync_every == 0:
        sync_target(online, target)
        logging.debug("learner %s: target synced at step %d, loss %.6f", owner, step, loss)

    return step


class DqnLearner:
    """Private learner of one adaptable consumer"""

    def __init__(self, hp: Hyperparams, rng: np.random.Generator, owner: Optional[int] = None):
        self.hp = hp
        self.owner = owner
        self.online = QNetwork.random(rng, hp.init_scale)
        self.target = self.online.copy()
        self.memory = ReplayMemory(hp.memory)
        self.steps = 0
        # (state, action, reward) of the last decision, waiting for its next state
        self.pending: Optional[Tuple[np.ndarray, Mode, float]] = None

    def act(self, state, rng: np.random.Generator) -> Mode:
        """Choose push or pull for a state."""
        return select_action(forward(self.online, state, self.hp.input_sigmoid), self.hp.epsilon, rng)

    def close_transition(self, next_state, rng: np.random.Generator) -> None:
        """Complete the pending experience with its next state and train once."""

        if self.pending is None:
            return

        state, action, reward = self.pending
        remember(self.memory, Experience(state, action, reward, np.asarray(next_state, dtype=float)))
        self.pending = None
        self.steps = train_step(self.online, self.target, self.memory, self.hp, rng, self.steps, self.owner)

    def begin_transition(self, state, action: Mode, reward: float) -> None:
        """Remember the decision just taken and the reward it earned."""
        self.pending = (np.asarray(state, dtype=float), action, float(reward))
