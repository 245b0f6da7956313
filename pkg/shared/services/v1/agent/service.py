"""
Агент DDQN выбора режима передачи.

Онлайн-сеть выбирает действие, целевая сеть оценивает его
(правило double Q). Обучение - SGD по среднеквадратичной ошибке
на мини-батчах из памяти воспроизведения.
"""

from typing import Optional, Sequence

import numpy as np

from shared.core.exceptions import PreconditionError
from shared.schemas.v1 import AgentConfig, SystemParams, TransmissionMode
from shared.services.v1.base import BaseService
from shared.services.v1.system_model import Task

from .network import QNetwork, forward, loss_and_gradients, sgd_update
from .replay import ReplayBuffer, Transition

N_ACTIONS = len(TransmissionMode)


def encode_state(
    tasks: Sequence[Task],
    now: int,
    battery: float,
    params: SystemParams,
    max_tasks: int,
) -> np.ndarray:
    """
    Вектор состояния [биты в очереди / S, слоты до дедлайна / C, заряд / E_max].

    Задачи сверх max_tasks суммируются в последний элемент обоих векторов;
    пустые позиции равны 0.
    """
    bits = np.zeros(max_tasks)
    slots = np.zeros(max_tasks)
    for i, task in enumerate(tasks):
        k = min(i, max_tasks - 1)
        bits[k] += task.remaining / params.raw_bits_s
        slots[k] += max(0, task.deadline - now) / params.deadline_c
    energy = battery / params.batt_cap_emax if params.batt_cap_emax > 0 else 0.0
    return np.concatenate([bits, slots, [energy]])


def epsilon_at(episode: int, episodes: int, cfg: AgentConfig) -> float:
    """Линейное убывание ε от eps_start до eps_end за долю eps_decay эпизодов."""
    decay_episodes = cfg.eps_decay * episodes
    fraction = min(1.0, episode / decay_episodes) if decay_episodes > 0 else 1.0
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * fraction


def select_action(
    net: QNetwork, s: np.ndarray, eps: float, rng: np.random.Generator
) -> TransmissionMode:
    """ε-жадный выбор; при равенстве Q выбирается DT."""
    if eps > 0 and rng.random() < eps:
        return TransmissionMode(int(rng.integers(N_ACTIONS)))
    # argmax возвращает первый максимум, то есть DT при равенстве
    return TransmissionMode(int(np.argmax(forward(net, s))))


def ddqn_targets(
    rewards: np.ndarray,
    next_states: np.ndarray,
    terminals: np.ndarray,
    online: QNetwork,
    target: QNetwork,
    gamma: float,
) -> np.ndarray:
    """y = r + γ·Q_target(s', argmax_a Q_online(s', a)); y = r для терминальных."""
    next_states = np.atleast_2d(next_states)
    best = np.argmax(forward(online, next_states), axis=1)
    values = forward(target, next_states)[np.arange(len(best)), best]
    return np.where(terminals, rewards, rewards + gamma * values)


def ddqn_target(
    r: float,
    s_next: np.ndarray,
    online: QNetwork,
    target: QNetwork,
    gamma: float,
    terminal: bool,
) -> float:
    if terminal:
        return float(r)
    return float(
        ddqn_targets(np.array([r]), s_next, np.array([False]), online, target, gamma)[0]
    )


def train_step(
    online: QNetwork, target: QNetwork, batch: Sequence[Transition], cfg: AgentConfig
) -> float:
    """
    Один шаг SGD по мини-батчу; возвращает потерю до обновления.

    Raises:
        PreconditionError: Батч меньше cfg.minibatch.
    """
    if len(batch) < cfg.minibatch:
        raise PreconditionError(
            "батч меньше размера мини-батча",
            extra={"batch": len(batch), "minibatch": cfg.minibatch},
        )
    states = np.stack([t.state for t in batch])
    actions = np.array([t.action for t in batch], dtype=int)
    rewards = np.array([t.reward for t in batch], dtype=float)
    next_states = np.stack([t.next_state for t in batch])
    terminals = np.array([t.terminal for t in batch], dtype=bool)

    targets = ddqn_targets(rewards, next_states, terminals, online, target, cfg.discount_gamma)
    loss, grads = loss_and_gradients(online, states, actions, targets)
    sgd_update(online, grads, cfg.learn_rate)
    return loss


def sync_target(online: QNetwork, target: QNetwork) -> None:
    """Копирует параметры онлайн-сети в целевую."""
    for name, value in online.parameters().items():
        target_value = getattr(target, name)
        if target_value.shape != value.shape:
            raise PreconditionError(
                "формы параметров сетей не совпадают",
                extra={"param": name, "online": value.shape, "target": target_value.shape},
            )
        target_value[...] = value


def task_reward(
    energy_trace: Sequence[float],
    deadline_met: bool,
    cfg: AgentConfig,
    params: SystemParams,
) -> float:
    """
    Награда за задачу: −энергия за время ее жизни (+ бонус) или −штраф за пропуск.
    """
    if not deadline_met:
        penalty = (
            cfg.deadline_penalty
            if cfg.deadline_penalty is not None
            else params.default_deadline_penalty
        )
        return -penalty
    return -float(np.sum(energy_trace)) + cfg.success_bonus


class DDQNAgent(BaseService):
    """
    Агент: онлайн и целевая сети, память воспроизведения и счетчики.

    Attributes:
        online: Обучаемая сеть.
        target: Целевая сеть (меняется только при синхронизации).
        buffer: Память воспроизведения.
        updates: Выполнено шагов обучения.
        losses: Потери по шагам обучения.
    """

    def __init__(
        self,
        params: SystemParams,
        config: AgentConfig,
        rng: np.random.Generator,
        online: Optional[QNetwork] = None,
    ):
        super().__init__(params)
        self.config = config
        self.rng = rng
        self.online = online or QNetwork.xavier(
            config.n_inputs, config.hidden, N_ACTIONS, rng
        )
        self.target = self.online.copy()
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.updates = 0
        self.since_sync = 0
        self.losses: list[float] = []

    @property
    def reward_scale(self) -> float:
        if self.config.reward_scale is not None:
            return self.config.reward_scale
        return 1.0 / (self.params.slot_tau * self.params.deadline_c * self.params.p_max)

    def encode(self, tasks: Sequence[Task], now: int, battery: float) -> np.ndarray:
        return encode_state(tasks, now, battery, self.params, self.config.max_tasks)

    def act(self, state: np.ndarray, eps: float) -> TransmissionMode:
        return select_action(self.online, state, eps, self.rng)

    def observe(self, transition: Transition) -> Optional[float]:
        """
        Сохраняет переход и выполняет шаг обучения, когда памяти хватает на мини-батч.

        Returns:
            Optional[float]: Потеря шага или None без обучения.
        """
        self.buffer.push(transition)
        if len(self.buffer) < self.config.minibatch:
            return None

        batch = self.buffer.sample(self.rng, self.config.minibatch)
        loss = train_step(self.online, self.target, batch, self.config)
        self.updates += 1
        self.since_sync += 1
        self.losses.append(loss)

        if self.since_sync >= self.config.target_sync_every:
            sync_target(self.online, self.target)
            self.since_sync = 0
            self.logger.debug("Целевая сеть синхронизирована", extra={"updates": self.updates})
        return loss
