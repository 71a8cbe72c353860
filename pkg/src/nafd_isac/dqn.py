"""Deep Q-learning over discretized power factors.

A single centralized agent edits the requested power-factor vector one entry
at a time: an action picks one (RRU, stream-or-pilot) slot and one of L grid
levels on [0, 1]. Every visited vector is repaired against the reference
beams before scoring, so the agent never evaluates an infeasible allocation.
The per-step reward is f1 + b * f2 with b calibrated so both objectives
contribute equally at the equal-share baseline.

The value network is a small dense net implemented here with numpy (two
rectified hidden layers, Adam updates, periodic target-network sync); no
external learning framework is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import AllocationEvaluator

CONSTRAINT_TOLERANCE = 1e-9


class DqnDivergenceError(RuntimeError):
    """Q-values left the finite guard band; reward trace attached."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = np.asarray(trace)


@dataclass
class DqnConfig:
    episodes: int = 40
    steps_per_episode: int = 50
    levels: int = 10
    hidden: tuple = (128, 128)
    learning_rate: float = 1e-3
    discount: float = 0.9
    buffer_capacity: int = 10_000
    batch_size: int = 64
    target_sync: int = 200
    exploit_start: float = 0.1   # probability of taking the greedy action
    exploit_end: float = 0.95
    anneal_steps: int = 1500
    q_bound: float = 1e6
    seed: int = 0


def epsilon_schedule(step: int, config: DqnConfig) -> float:
    """Exploitation probability: ramps linearly and then saturates."""
    if config.anneal_steps <= 0:
        return config.exploit_end
    frac = min(1.0, max(0.0, step / config.anneal_steps))
    return config.exploit_start + (config.exploit_end - config.exploit_start) * frac


def reward(alloc, evaluator: AllocationEvaluator, scale: float) -> float:
    """f1 + scale * f2 for a feasible allocation.

    Raises if the allocation violates the reference power constraint; callers
    must repair candidate vectors first.
    """
    violation = evaluator.constraint_violation(alloc)
    if violation > CONSTRAINT_TOLERANCE:
        raise ValueError(
            f"allocation violates the power constraint by {violation:.3e}; "
            "repair it before scoring"
        )
    return evaluator.f1(alloc) + scale * evaluator.f2(alloc)


def calibrate_reward_scale(evaluator: AllocationEvaluator) -> float:
    """b such that f1 and b * f2 match at the equal-share baseline."""
    f1, f2 = evaluator.objectives(evaluator.epa())
    if f2 <= 0.0:
        return 1.0
    return f1 / f2


class ReplayBuffer:
    """Fixed-capacity FIFO of transitions with uniform sampling."""

    def __init__(self, capacity: int, state_dim: int):
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=int)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.size = 0
        self._cursor = 0

    def push(self, state, action, rew, next_state):
        i = self._cursor
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = rew
        self.next_states[i] = next_state
        self._cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch: int):
        idx = rng.integers(0, self.size, size=batch)
        return (self.states[idx], self.actions[idx], self.rewards[idx],
                self.next_states[idx])

    def __len__(self):
        return self.size


class QNetwork:
    """Dense rectifier network with Adam, written against plain numpy."""

    def __init__(self, sizes, rng: np.random.Generator | None = None,
                 learning_rate: float = 1e-3):
        self.sizes = list(sizes)
        self.learning_rate = learning_rate
        self.weights = []
        self.biases = []
        rng = rng or np.random.default_rng(0)
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)
            self.weights.append(scale * rng.standard_normal((fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self._adam_m = [np.zeros_like(w) for w in self.weights] \
            + [np.zeros_like(b) for b in self.biases]
        self._adam_v = [np.zeros_like(w) for w in self.weights] \
            + [np.zeros_like(b) for b in self.biases]
        self._adam_t = 0

    def forward(self, x: np.ndarray):
        """Q-values (batch, n_actions) and the activation cache."""
        x = np.atleast_2d(x)
        activations = [x]
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
            activations.append(h)
        out = h @ self.weights[-1] + self.biases[-1]
        return out, activations

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def td_loss(self, states, actions, targets) -> float:
        q, _ = self.forward(states)
        err = q[np.arange(len(actions)), actions] - targets
        return float(np.mean(err ** 2))

    def train_step(self, states, actions, targets) -> float:
        """One Adam step on the squared TD error of the chosen actions."""
        batch = len(actions)
        q, acts = self.forward(states)
        err = q[np.arange(batch), actions] - targets
        loss = float(np.mean(err ** 2))

        d_out = np.zeros_like(q)
        d_out[np.arange(batch), actions] = 2.0 * err / batch
        grads_w, grads_b = [], []
        delta = d_out
        for layer in range(len(self.weights) - 1, -1, -1):
            grads_w.append(acts[layer].T @ delta)
            grads_b.append(delta.sum(axis=0))
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (acts[layer] > 0.0)
        grads = list(reversed(grads_w)) + list(reversed(grads_b))
        params = self.weights + self.biases
        self._adam_t += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        for p, g, m, v in zip(params, grads, self._adam_m, self._adam_v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g ** 2
            m_hat = m / (1.0 - b1 ** self._adam_t)
            v_hat = v / (1.0 - b2 ** self._adam_t)
            p -= self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        return loss

    def clone(self) -> "QNetwork":
        other = QNetwork(self.sizes, learning_rate=self.learning_rate)
        other.load_params([w.copy() for w in self.weights],
                          [b.copy() for b in self.biases])
        return other

    def load_params(self, weights, biases):
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]

    def sync_from(self, other: "QNetwork"):
        self.load_params([w.copy() for w in other.weights],
                         [b.copy() for b in other.biases])


def save_checkpoint(net: QNetwork, path) -> None:
    """Plain-text checkpoint: layer sizes, then one line per parameter array."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(str(s) for s in net.sizes) + "\n")
        for arr in net.weights + net.biases:
            fh.write(" ".join(repr(float(v)) for v in arr.ravel()) + "\n")


def load_checkpoint(path) -> QNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        sizes = [int(s) for s in fh.readline().split()]
        net = QNetwork(sizes)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            vals = np.array(fh.readline().split(), dtype=float)
            weights.append(vals.reshape(fan_in, fan_out))
        for fan_out in sizes[1:]:
            biases.append(np.array(fh.readline().split(), dtype=float))
        net.load_params(weights, biases)
    return net


@dataclass
class DqnResult:
    best_allocation: object
    best_genes: np.ndarray
    best_reward: float
    episode_rewards: np.ndarray       # mean step reward per episode
    best_reward_history: np.ndarray   # best-so-far after each episode
    reward_scale: float
    max_constraint_violation: float
    steps: int
    updates: int
    network: QNetwork


class AllocationEnv:
    """Grid-level edits of the requested power-factor vector."""

    def __init__(self, evaluator: AllocationEvaluator, config: DqnConfig,
                 reward_scale: float):
        self.evaluator = evaluator
        self.levels = np.linspace(0.0, 1.0, config.levels) if config.levels > 1 \
            else np.zeros(1)
        self.n_slots = evaluator.n_genes
        self.n_actions = self.n_slots * len(self.levels)
        self.scale = reward_scale
        self._csi = evaluator.csi_features()
        share = 1.0 / (evaluator.scenario.layout.k_dl + 1)
        # Episode start: the grid level closest to the equal-share factor.
        start_level = self.levels[np.argmin(np.abs(self.levels - share))]
        self.reset_genes = np.full(self.n_slots, start_level)

    @property
    def state_dim(self) -> int:
        return self.n_slots + self._csi.size

    def observe(self, genes: np.ndarray) -> np.ndarray:
        return np.concatenate([genes, self._csi])

    def apply(self, genes: np.ndarray, action: int):
        """New genes, repaired allocation and reward after one edit."""
        slot, level = divmod(int(action), len(self.levels))
        out = genes.copy()
        out[slot] = self.levels[level]
        alloc = self.evaluator.repair(out)
        return out, alloc, reward(alloc, self.evaluator, self.scale)


def train_dqn(evaluator: AllocationEvaluator, config: DqnConfig) -> DqnResult:
    """Train the agent and return the best allocation it visited.

    Fully deterministic for a fixed config seed: network init, exploration
    draws and replay sampling all consume one generator.
    """
    rng = np.random.default_rng(config.seed)
    scale = calibrate_reward_scale(evaluator)
    env = AllocationEnv(evaluator, config, scale)
    sizes = [env.state_dim, *config.hidden, env.n_actions]
    net = QNetwork(sizes, rng=rng, learning_rate=config.learning_rate)
    target = net.clone()
    buffer = ReplayBuffer(config.buffer_capacity, env.state_dim)

    best_reward = -np.inf
    best_genes = env.reset_genes.copy()
    best_alloc = evaluator.repair(best_genes)
    worst_violation = -np.inf
    episode_rewards, best_history = [], []
    step_count = 0
    updates = 0

    for _ in range(config.episodes):
        genes = env.reset_genes.copy()
        state = env.observe(genes)
        rewards_this_episode = []
        for _ in range(config.steps_per_episode):
            if rng.random() < epsilon_schedule(step_count, config):
                action = int(np.argmax(net.predict(state)[0]))
            else:
                action = int(rng.integers(env.n_actions))
            genes, alloc, r = env.apply(genes, action)
            next_state = env.observe(genes)
            buffer.push(state, action, r, next_state)
            worst_violation = max(worst_violation,
                                  evaluator.constraint_violation(alloc))
            if r > best_reward:
                best_reward = r
                best_genes = genes.copy()
                best_alloc = alloc
            rewards_this_episode.append(r)
            state = next_state
            step_count += 1

            if len(buffer) >= config.batch_size:
                s, a, rew, s_next = buffer.sample(rng, config.batch_size)
                bootstrap = target.predict(s_next).max(axis=1)
                net.train_step(s, a, rew + config.discount * bootstrap)
                updates += 1
                if updates % config.target_sync == 0:
                    target.sync_from(net)
                q_peak = float(np.max(np.abs(net.predict(s))))
                if not np.isfinite(q_peak) or q_peak > config.q_bound:
                    raise DqnDivergenceError(
                        f"Q-values reached {q_peak:.3e}, beyond the "
                        f"{config.q_bound:.1e} guard", episode_rewards)
        episode_rewards.append(float(np.mean(rewards_this_episode)))
        best_history.append(best_reward)

    return DqnResult(
        best_allocation=best_alloc,
        best_genes=best_genes,
        best_reward=best_reward,
        episode_rewards=np.asarray(episode_rewards),
        best_reward_history=np.asarray(best_history),
        reward_scale=scale,
        max_constraint_violation=worst_violation,
        steps=step_count,
        updates=updates,
        network=net,
    )
