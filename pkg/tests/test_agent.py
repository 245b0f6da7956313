import numpy as np
import pytest

from shared.core.exceptions import (CheckpointError, DomainError,
                                    PreconditionError)
from shared.schemas.v1 import AgentConfig, TransmissionMode
from shared.services.v1.agent import (N_ACTIONS, DDQNAgent, QNetwork,
                                      ReplayBuffer, Transition,
                                      ddqn_target, decode_checkpoint,
                                      encode_checkpoint, encode_state,
                                      epsilon_at, forward, load_checkpoint,
                                      loss_and_gradients, save_checkpoint,
                                      select_action, sync_target,
                                      task_reward, train_step)
from shared.services.v1.system_model import Task


def toy_net(w2, b2=(0.0, 0.0)):
    return QNetwork(np.ones((1, 1)), np.zeros(1), np.array(w2, dtype=float), np.array(b2, dtype=float))


def transition(rng, n_inputs=3, terminal=False):
    return Transition(rng.normal(size=n_inputs), int(rng.integers(2)), float(rng.normal()), rng.normal(size=n_inputs), terminal)


class TestNetwork:
    def test_hand_computed_forward(self):
        net = QNetwork(
            np.array([[1.0, -1.0], [0.5, 0.5]]), np.array([0.0, 1.0]), np.array([[1.0, 2.0], [-1.0, 0.0]]), np.array([0.5, 0.0])
        )
        # скрытый слой relu([1 − 2, 0.5 + 1 + 1]) = [0, 2.5]
        np.testing.assert_allclose(forward(net, np.array([1.0, 2.0])), [5.5, 0.0])

    def test_batch_forward(self, rng):
        net = QNetwork.xavier(4, 8, 2, rng)
        states = rng.normal(size=(5, 4))
        np.testing.assert_allclose(forward(net, states)[2], forward(net, states[2]))

    def test_non_finite_input(self, rng):
        net = QNetwork.xavier(2, 3, 2, rng)
        with pytest.raises(DomainError):
            forward(net, np.array([np.nan, 0.0]))

    def test_gradients_match_finite_differences(self, rng):
        net = QNetwork.xavier(3, 5, 2, rng)
        states, actions, targets = rng.normal(size=(4, 3)), rng.integers(0, 2, 4), rng.normal(size=4)
        _, grads = loss_and_gradients(net, states, actions, targets)
        step = 1e-6
        for name, param in net.parameters().items():
            for index in np.ndindex(param.shape):
                saved = param[index]
                param[index] = saved + step
                plus, _ = loss_and_gradients(net, states, actions, targets)
                param[index] = saved - step
                minus, _ = loss_and_gradients(net, states, actions, targets)
                param[index] = saved
                assert grads[name][index] == pytest.approx((plus - minus) / (2 * step), rel=1e-4, abs=1e-8)


class TestTargets:
    def test_double_q_uses_online_argmax(self):
        online, target = toy_net([[2.0], [1.0]]), toy_net([[1.0], [9.0]])
        assert ddqn_target(0.0, np.array([1.0]), online, target, 1.0, False) == pytest.approx(1.0)
        assert forward(target, np.array([1.0])).max() == pytest.approx(9.0)

    def test_terminal(self):
        net = toy_net([[2.0], [1.0]])
        assert ddqn_target(-3.0, np.array([1.0]), net, net, 0.9, True) == -3.0

    def test_gamma_zero(self):
        net = toy_net([[2.0], [1.0]])
        assert ddqn_target(0.5, np.array([1.0]), net, net, 0.0, False) == pytest.approx(0.5)


class TestTraining:
    def test_small_batch(self, rng):
        net = QNetwork.xavier(3, 4, 2, rng)
        cfg = AgentConfig(minibatch=8)
        with pytest.raises(PreconditionError):
            train_step(net, net.copy(), [transition(rng) for _ in range(7)], cfg)

    def test_zero_error_keeps_parameters(self, rng):
        net = QNetwork.xavier(3, 4, 2, rng)
        states, actions = rng.normal(size=(6, 3)), rng.integers(0, 2, 6)
        targets = forward(net, states)[np.arange(6), actions]
        before = net.copy()
        loss, grads = loss_and_gradients(net, states, actions, targets)
        assert loss == pytest.approx(0.0)
        assert all(np.allclose(g, 0.0) for g in grads.values())
        np.testing.assert_array_equal(before.w1, net.w1)

    def test_loss_decreases_on_fixed_batch(self, rng):
        cfg = AgentConfig(minibatch=64, learn_rate=1e-2, discount_gamma=0.0)
        online = QNetwork.xavier(3, 16, 2, rng)
        target = online.copy()
        batch = [transition(rng, terminal=True) for _ in range(64)]
        losses = [train_step(online, target, batch, cfg) for _ in range(201)]
        assert losses[200] < losses[0]

    def test_sync_copies_parameters(self, rng):
        online, target = QNetwork.xavier(3, 4, 2, rng), QNetwork.xavier(3, 4, 2, rng)
        sync_target(online, target)
        for name, value in online.parameters().items():
            np.testing.assert_array_equal(getattr(target, name), value)
        online.w1 += 1.0
        assert not np.allclose(online.w1, target.w1)

    def test_sync_shape_mismatch(self, rng):
        with pytest.raises(PreconditionError) as info:
            sync_target(QNetwork.xavier(3, 4, 2, rng), QNetwork.xavier(3, 5, 2, rng))
        assert info.value.extra["param"] in QNetwork.xavier(3, 4, 2, rng).parameters()


class TestReplay:
    def test_capacity(self, rng):
        buffer = ReplayBuffer(1000)
        for i in range(1500):
            buffer.push(Transition(np.array([float(i)]), 0, 0.0, np.zeros(1), False))
        assert len(buffer) == 1000
        assert next(iter(buffer)).state[0] == 500.0

    def test_sample_without_replacement(self, rng):
        buffer = ReplayBuffer(10)
        for i in range(10):
            buffer.push(Transition(np.array([float(i)]), 0, 0.0, np.zeros(1), False))
        batch = buffer.sample(rng, 10)
        assert sorted(t.state[0] for t in batch) == list(range(10))

    def test_sample_too_large(self, rng):
        with pytest.raises(PreconditionError):
            ReplayBuffer(10).sample(rng, 1)


class TestPolicyHelpers:
    def test_greedy_when_epsilon_zero(self, rng):
        net = toy_net([[1.0], [3.0]])
        assert select_action(net, np.array([1.0]), 0.0, rng) == TransmissionMode.CT

    def test_tie_goes_to_dt(self, rng):
        net = toy_net([[1.0], [1.0]])
        assert select_action(net, np.array([1.0]), 0.0, rng) == TransmissionMode.DT

    def test_uniform_when_epsilon_one(self, rng):
        net = toy_net([[1.0], [3.0]])
        counts = np.bincount(
            [int(select_action(net, np.array([1.0]), 1.0, rng)) for _ in range(10_000)], minlength=2
        )
        expected = 5000.0
        chi_square = float(np.sum((counts - expected) ** 2 / expected))
        # критическое значение χ² с одной степенью свободы при α = 0.001
        assert chi_square < 10.83

    def test_epsilon_schedule(self):
        cfg = AgentConfig(eps_start=1.0, eps_end=0.05, eps_decay=0.5)
        assert epsilon_at(0, 100, cfg) == pytest.approx(1.0)
        assert epsilon_at(25, 100, cfg) == pytest.approx(0.525)
        assert epsilon_at(50, 100, cfg) == pytest.approx(0.05)
        assert epsilon_at(99, 100, cfg) == pytest.approx(0.05)

    def test_state_encoding(self, params):
        tasks = [
            Task(id=i, arrive_t=0, mode=TransmissionMode.DT, payload=params.raw_bits_s, deadline=params.deadline_c)
            for i in range(3)
        ]
        s = encode_state(tasks, 5, params.batt_cap_emax / 2, params, max_tasks=2)
        assert s.shape == (5,)
        np.testing.assert_allclose(s[:2], [1.0, 2.0])
        np.testing.assert_allclose(s[2:4], [0.5, 1.0])
        assert s[4] == pytest.approx(0.5)

    def test_empty_state(self, params):
        s = encode_state([], 0, 0.0, params, max_tasks=4)
        np.testing.assert_array_equal(s, np.zeros(9))

    def test_task_reward(self, params):
        cfg = AgentConfig(deadline_penalty=None, success_bonus=0.1)
        assert task_reward([1.0, 2.0], True, cfg, params) == pytest.approx(-2.9)
        assert task_reward([1.0], False, cfg, params) == pytest.approx(-params.default_deadline_penalty)


class TestAgent:
    def test_no_updates_below_minibatch(self, params, rng):
        agent = DDQNAgent(params, AgentConfig(minibatch=4, buffer_capacity=10, max_tasks=1), rng)
        for _ in range(3):
            assert agent.observe(transition(rng)) is None
        assert agent.updates == 0
        assert agent.observe(transition(rng)) is not None
        assert agent.updates == 1

    def test_target_sync_cadence(self, params, rng):
        cfg = AgentConfig(minibatch=2, buffer_capacity=10, target_sync_every=3, max_tasks=1)
        agent = DDQNAgent(params, cfg, rng)
        for _ in range(3):
            agent.observe(transition(rng))
        # два обновления: целевая сеть еще не синхронизирована
        assert any(
            not np.array_equal(value, getattr(agent.target, name))
            for name, value in agent.online.parameters().items()
        )
        agent.observe(transition(rng))
        np.testing.assert_array_equal(agent.online.w1, agent.target.w1)
        assert agent.since_sync == 0

    def test_default_reward_scale(self, params, rng):
        agent = DDQNAgent(params, AgentConfig(), rng)
        assert agent.reward_scale == pytest.approx(1 / (params.slot_tau * params.deadline_c * params.p_max))


class TestCheckpoint:
    def test_round_trip(self, tmp_path, rng):
        net = QNetwork.xavier(17, 32, N_ACTIONS, rng)
        path = tmp_path / "agent.trlq"
        save_checkpoint(net, path)
        loaded = load_checkpoint(path, (17, 32, N_ACTIONS))
        for name, value in net.parameters().items():
            np.testing.assert_array_equal(getattr(loaded, name), value)

    def test_header(self, rng):
        data = encode_checkpoint(QNetwork.xavier(3, 4, 2, rng))
        assert data[:4] == b"TRLQ"
        assert len(data) == 20 + 8 * (4 * 3 + 4 + 2 * 4 + 2)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: b"XXXX" + d[4:],
            lambda d: d[:4] + (2).to_bytes(4, "little") + d[8:],
            lambda d: d[:-8],
            lambda d: d[:10],
        ],
    )
    def test_rejects_corrupt(self, rng, mutate):
        data = encode_checkpoint(QNetwork.xavier(3, 4, 2, rng))
        with pytest.raises(CheckpointError):
            decode_checkpoint(mutate(data))

    def test_rejects_wrong_dims(self, rng):
        data = encode_checkpoint(QNetwork.xavier(3, 4, 2, rng))
        with pytest.raises(CheckpointError):
            decode_checkpoint(data, expected_dims=(5, 4, 2))

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.trlq")
