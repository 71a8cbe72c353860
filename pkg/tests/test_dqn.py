import numpy as np
import pytest

from nafd_isac.dqn import (AllocationEnv, DqnConfig, DqnDivergenceError,
                           QNetwork, ReplayBuffer, calibrate_reward_scale,
                           epsilon_schedule, load_checkpoint, reward,
                           save_checkpoint, train_dqn)

QUICK = DqnConfig(episodes=4, steps_per_episode=30, anneal_steps=80,
                  batch_size=16, seed=11)


def test_epsilon_schedule_anneals_linearly():
    cfg = DqnConfig(exploit_start=0.1, exploit_end=0.9, anneal_steps=100)
    assert epsilon_schedule(0, cfg) == pytest.approx(0.1)
    assert epsilon_schedule(50, cfg) == pytest.approx(0.5)
    assert epsilon_schedule(100, cfg) == pytest.approx(0.9)
    assert epsilon_schedule(10_000, cfg) == pytest.approx(0.9)


def test_reward_scale_balances_objectives(evaluator20):
    b = calibrate_reward_scale(evaluator20)
    epa = evaluator20.epa()
    assert b * evaluator20.f2(epa) == pytest.approx(evaluator20.f1(epa),
                                                    rel=1e-9)
    assert reward(epa, evaluator20, b) == pytest.approx(
        2.0 * evaluator20.f1(epa), rel=1e-9)


def test_reward_rejects_infeasible_allocation(evaluator20):
    from dataclasses import replace

    bad = replace(evaluator20.epa(), beta=np.full(8, 2.0))
    with pytest.raises(ValueError, match="constraint"):
        reward(bad, evaluator20, 1.0)


def test_replay_buffer_fifo_wraparound(rng):
    buf = ReplayBuffer(capacity=4, state_dim=2)
    for i in range(6):
        buf.push(np.full(2, i), i, float(i), np.full(2, i + 10))
    assert len(buf) == 4
    s, a, r, s2 = buf.sample(rng, 32)
    # only the last four transitions survive
    assert set(a.tolist()) <= {2, 3, 4, 5}
    assert s.shape == (32, 2) and r.shape == (32,) and s2.shape == (32, 2)


def test_qnetwork_fits_a_small_batch(rng):
    net = QNetwork([3, 16, 5], rng=rng, learning_rate=3e-3)
    states = rng.standard_normal((12, 3))
    actions = rng.integers(0, 5, 12)
    targets = rng.standard_normal(12)
    first = net.td_loss(states, actions, targets)
    for _ in range(400):
        net.train_step(states, actions, targets)
    assert net.td_loss(states, actions, targets) < min(1e-3, first * 1e-2)


def test_first_update_moves_against_the_gradient(rng):
    """With fresh Adam state the first step is lr * sign(grad); compare the
    movement direction with central differences on the loss."""
    net = QNetwork([2, 8, 3], rng=rng, learning_rate=1e-4)
    states = rng.standard_normal((6, 2))
    actions = rng.integers(0, 3, 6)
    targets = rng.standard_normal(6)

    before = [w.copy() for w in net.weights]
    probe = []
    h = 1e-6
    for (layer, i, j) in [(0, 0, 0), (0, 1, 3), (1, 2, 1), (1, 5, 2)]:
        w = net.weights[layer]
        keep = w[i, j]
        w[i, j] = keep + h
        up = net.td_loss(states, actions, targets)
        w[i, j] = keep - h
        down = net.td_loss(states, actions, targets)
        w[i, j] = keep
        probe.append((layer, i, j, (up - down) / (2 * h)))

    net.train_step(states, actions, targets)
    for layer, i, j, grad in probe:
        if abs(grad) < 1e-8:
            continue
        moved = net.weights[layer][i, j] - before[layer][i, j]
        assert np.sign(moved) == -np.sign(grad)


def test_clone_and_sync(rng):
    net = QNetwork([4, 8, 2], rng=rng)
    twin = net.clone()
    x = rng.standard_normal((5, 4))
    np.testing.assert_array_equal(net.predict(x), twin.predict(x))
    net.train_step(x, rng.integers(0, 2, 5), rng.standard_normal(5))
    assert not np.array_equal(net.predict(x), twin.predict(x))
    twin.sync_from(net)
    np.testing.assert_array_equal(net.predict(x), twin.predict(x))


def test_checkpoint_roundtrip(tmp_path, rng):
    net = QNetwork([3, 6, 4], rng=rng)
    path = tmp_path / "q.txt"
    save_checkpoint(net, path)
    back = load_checkpoint(path)
    x = rng.standard_normal((7, 3))
    np.testing.assert_array_equal(net.predict(x), back.predict(x))


def test_env_reset_and_single_slot_edits(evaluator20):
    cfg = DqnConfig(levels=10)
    env = AllocationEnv(evaluator20, cfg, reward_scale=1.0)
    # grid level nearest the equal-share factor 1/4 on linspace(0, 1, 10)
    np.testing.assert_allclose(env.reset_genes, 2.0 / 9.0, rtol=1e-12)
    assert env.n_actions == evaluator20.n_genes * 10

    genes = env.reset_genes.copy()
    action = 3 * 10 + 7  # slot 3 to level 7/9
    out, alloc, r = env.apply(genes, action)
    assert out[3] == pytest.approx(7.0 / 9.0)
    changed = np.flatnonzero(out != genes)
    np.testing.assert_array_equal(changed, [3])
    assert np.isfinite(r)
    assert evaluator20.constraint_violation(alloc) <= 1e-9


def test_env_single_level_degenerates_to_zero_power(evaluator20):
    env = AllocationEnv(evaluator20, DqnConfig(levels=1), reward_scale=1.0)
    assert env.n_actions == evaluator20.n_genes
    out, alloc, r = env.apply(env.reset_genes.copy(), 5)
    assert np.all(out == 0.0)
    assert np.all(alloc.beta == 0.0)
    assert np.isfinite(r)  # sensing contributes nothing, rates still defined


def test_training_is_deterministic_and_feasible(evaluator20):
    a = train_dqn(evaluator20, QUICK)
    b = train_dqn(evaluator20, QUICK)
    np.testing.assert_array_equal(a.episode_rewards, b.episode_rewards)
    np.testing.assert_array_equal(a.best_reward_history, b.best_reward_history)
    assert a.best_reward == b.best_reward
    assert a.max_constraint_violation <= 1e-9
    assert a.steps == QUICK.episodes * QUICK.steps_per_episode
    # best-so-far trace never decreases
    assert np.all(np.diff(a.best_reward_history) >= 0.0)


def test_training_beats_the_equal_share_start(evaluator20):
    res = train_dqn(evaluator20, QUICK)
    b = res.reward_scale
    epa_reward = reward(evaluator20.epa(), evaluator20, b)
    assert res.best_reward >= epa_reward


def test_divergence_guard_raises_with_trace(evaluator20):
    cfg = DqnConfig(episodes=2, steps_per_episode=40, batch_size=8,
                    q_bound=1e-12, seed=0)
    with pytest.raises(DqnDivergenceError) as exc_info:
        train_dqn(evaluator20, cfg)
    assert np.asarray(exc_info.value.trace).ndim == 1
