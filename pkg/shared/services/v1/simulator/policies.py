"""
Политики управления: OPETRL и две базовые (одно-задачная и жадная).

Каждая политика решает две вещи: режим поступившей задачи (и частоту
вычислений для CT) и мощность передачи головы очереди в текущем слоте.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import numpy as np

from shared.core.exceptions import PreconditionError
from shared.core.settings import SimSettings
from shared.schemas.v1 import (ModeRule, Policy, SystemParams,
                               TransmissionMode)
from shared.services.v1.agent import DDQNAgent, Transition, task_reward
from shared.services.v1.power_opt import (PowerOptimizer, PowerSchedule,
                                          QueueEntry)
from shared.services.v1.system_model import (Task, TaskStatus,
                                             compute_energy, compute_slots,
                                             power_for_bits)

from .state import EpisodeState

logger = logging.getLogger(__name__)

SPEED_FRACTIONS = (0.125, 0.25, 0.5, 1.0)


def choose_compute_speed(
    params: SystemParams,
    optimizer: PowerOptimizer,
    arrive_t: int,
    queue_comp: int,
) -> float:
    """
    Частота вычислений CT из сетки f_max·{1/8, 1/4, 1/2, 1}.

    Минимизирует энергию вычислений плюс энергию передачи карты признаков
    на среднем канале в оставшемся окне. Если ни одна частота не оставляет
    окна, выбирается f_max.
    """
    deadline = arrive_t + params.deadline_c
    best_speed, best_energy = params.f_max, math.inf
    for fraction in SPEED_FRACTIONS:
        speed = params.f_max * fraction
        window = deadline - (arrive_t + queue_comp + compute_slots(speed, params))
        if window < 1:
            continue
        e_trans = optimizer.mean_channel_energy(params.feature_bits, window)
        if e_trans is None:
            continue
        total = compute_energy(speed, params) + e_trans
        if total < best_energy:
            best_speed, best_energy = speed, total
    return best_speed


def greedy_energy_estimate(bits: float, slots: int, h: float, params: SystemParams) -> float:
    """Энергия равномерной доставки `bits` за `slots` слотов при текущем h."""
    if slots <= 0:
        return math.inf
    return params.slot_tau * slots * power_for_bits(bits, h, slots, params)


def greedy_mode(h: float, params: SystemParams) -> TransmissionMode:
    """CT, если вычисления на f_max плюс передача признаков дешевле передачи сырых данных."""
    comp_slots = compute_slots(params.f_max, params)
    e_ct = compute_energy(params.f_max, params) + greedy_energy_estimate(
        params.feature_bits, params.deadline_c - comp_slots, h, params
    )
    e_dt = greedy_energy_estimate(params.raw_bits_s, params.deadline_c, h, params)
    return TransmissionMode.CT if e_ct < e_dt else TransmissionMode.DT


def greedy_power(residual: float, remaining_slots: int, h: float, params: SystemParams) -> float:
    """Мощность равномерной доставки остатка до дедлайна, не выше p_max."""
    if remaining_slots <= 0:
        return params.p_max
    return min(power_for_bits(residual, h, remaining_slots, params), params.p_max)


def one_task_mode(params: SystemParams) -> TransmissionMode:
    """CT, если карта признаков меньше сырых данных."""
    if params.feature_bits < params.raw_bits_s:
        return TransmissionMode.CT
    return TransmissionMode.DT


def _apply_rule(rule: ModeRule, default: TransmissionMode) -> TransmissionMode:
    if rule == ModeRule.CT:
        return TransmissionMode.CT
    if rule == ModeRule.DT:
        return TransmissionMode.DT
    return default


class BasePolicy(ABC):
    """
    Базовая политика.

    Хуки вызываются средой в порядке слота: choose_mode → choose_speed →
    on_arrival → slot_power → on_resolved → on_slot_end.
    """

    name: Policy

    def __init__(
        self, params: SystemParams, optimizer: PowerOptimizer, saa_rng: np.random.Generator
    ):
        self.params = params
        self.optimizer = optimizer
        self.saa_rng = saa_rng
        self.episode_reward = 0.0

    def next_seed(self) -> int:
        return int(self.saa_rng.integers(2**63 - 1))

    @abstractmethod
    def choose_mode(self, state: EpisodeState, h: float) -> TransmissionMode: ...

    def choose_speed(self, state: EpisodeState, arrive_t: int, queue_comp: int) -> float:
        return choose_compute_speed(self.params, self.optimizer, arrive_t, queue_comp)

    def on_arrival(self, state: EpisodeState, task: Task) -> None:
        pass

    @abstractmethod
    def slot_power(self, state: EpisodeState, head: Task, h: float) -> float: ...

    def on_resolved(self, state: EpisodeState, task: Task, energy: np.ndarray) -> None:
        pass

    def on_slot_end(self, state: EpisodeState) -> None:
        pass


class OpetrlPolicy(BasePolicy):
    """
    Режим выбирает агент DDQN, мощность задает встроенная оптимизация мощности очереди.

    План пересчитывается при поступлении задачи, пропуске дедлайна,
    исчерпании плана, простое из-за батареи и при отставании доставки
    от плана больше чем на один слот ожидаемой скорости.
    """

    name = Policy.OPETRL

    def __init__(
        self,
        params: SystemParams,
        optimizer: PowerOptimizer,
        saa_rng: np.random.Generator,
        agent: DDQNAgent,
        epsilon: float = 0.0,
        learn: bool = False,
    ):
        super().__init__(params, optimizer, saa_rng)
        self.agent = agent
        self.epsilon = epsilon
        self.learn = learn
        self.plan: Optional[PowerSchedule] = None
        self.replan = True
        self.delivered_since_plan = 0.0
        self.transitions = 0
        self.plans_made = 0
        self._decision: Optional[Tuple[np.ndarray, TransmissionMode]] = None
        self._memory: Dict[int, Tuple[np.ndarray, int]] = {}

    def choose_mode(self, state: EpisodeState, h: float) -> TransmissionMode:
        probe = Task(
            id=-1,
            arrive_t=state.now,
            mode=TransmissionMode.DT,
            payload=self.params.raw_bits_s,
            deadline=state.now + self.params.deadline_c,
        )
        s = self.agent.encode([*state.pending, probe], state.now, state.battery)
        action = self.agent.act(s, self.epsilon)
        self._decision = (s, action)
        return action

    def on_arrival(self, state: EpisodeState, task: Task) -> None:
        if self._decision is not None:
            s, action = self._decision
            self._memory[task.id] = (s, int(action))
            self._decision = None
        self.replan = True

    def _behind_plan(self, now: int) -> bool:
        if self.plan is None or self.plan.expected_bits is None or now <= self.plan.start:
            return False
        expected = float(np.sum(self.plan.expected_bits[: now - self.plan.start]))
        return self.delivered_since_plan < expected - self.plan.expected_at(now)

    def _make_plan(self, state: EpisodeState) -> None:
        entries = state.plannable_entries()
        self.plan = (
            self.optimizer.plan(entries, state.now, seed=self.next_seed()) if entries else None
        )
        self.plans_made += 1
        self.delivered_since_plan = 0.0
        self.replan = False

    def slot_power(self, state: EpisodeState, head: Task, h: float) -> float:
        if (
            self.replan
            or self.plan is None
            or state.now >= self.plan.end
            or self._behind_plan(state.now)
        ):
            self._make_plan(state)
        if self.plan is None:
            return 0.0
        return self.plan.power_at(state.now)

    def on_resolved(self, state: EpisodeState, task: Task, energy: np.ndarray) -> None:
        if task.status == TaskStatus.MISSED:
            self.replan = True
        memory = self._memory.pop(task.id, None)
        if memory is None:
            return
        s, action = memory

        terminal = task.status == TaskStatus.CENSORED
        if terminal:
            reward = -float(np.sum(energy))
        else:
            reward = task_reward(
                energy, task.status == TaskStatus.MET, self.agent.config, self.params
            )
        self.episode_reward += reward
        self.transitions += 1

        if self.learn:
            s_next = self.agent.encode(state.pending, state.now, state.battery)
            self.agent.observe(
                Transition(s, action, reward * self.agent.reward_scale, s_next, terminal)
            )

    def on_slot_end(self, state: EpisodeState) -> None:
        self.delivered_since_plan += state.delivered_bits
        if state.stalled:
            self.replan = True


class OneTaskPolicy(BasePolicy):
    """
    Базовая политика «одна задача»: каждая задача оптимизируется отдельно,
    без учета очереди. Отстающая от своего плана задача передается на p_max.
    """

    name = Policy.ONE_TASK

    def __init__(
        self,
        params: SystemParams,
        optimizer: PowerOptimizer,
        saa_rng: np.random.Generator,
        rule: ModeRule = ModeRule.AUTO,
    ):
        super().__init__(params, optimizer, saa_rng)
        self.rule = rule
        self.plans: Dict[int, PowerSchedule] = {}

    def choose_mode(self, state: EpisodeState, h: float) -> TransmissionMode:
        return _apply_rule(self.rule, one_task_mode(self.params))

    def on_arrival(self, state: EpisodeState, task: Task) -> None:
        if task.ready_t >= task.deadline:
            return
        entry = QueueEntry(task.id, task.payload, task.ready_t, task.deadline)
        self.plans[task.id] = self.optimizer.plan([entry], task.arrive_t, seed=self.next_seed())

    def slot_power(self, state: EpisodeState, head: Task, h: float) -> float:
        plan = self.plans.get(head.id)
        if plan is None or plan.expected_bits is None:
            return self.params.p_max
        offset = max(0, state.now - plan.start)
        planned_remaining = float(np.sum(plan.expected_bits[offset:]))
        if planned_remaining >= head.remaining * (1 - 1e-9):
            return plan.power_at(state.now)
        return self.params.p_max

    def on_resolved(self, state: EpisodeState, task: Task, energy: np.ndarray) -> None:
        self.plans.pop(task.id, None)


class GreedyPolicy(BasePolicy):
    """
    Жадная базовая политика: решения только по текущему каналу.
    Вычисления всегда на f_max.
    """

    name = Policy.GREEDY

    def __init__(
        self,
        params: SystemParams,
        optimizer: PowerOptimizer,
        saa_rng: np.random.Generator,
        rule: ModeRule = ModeRule.AUTO,
    ):
        super().__init__(params, optimizer, saa_rng)
        self.rule = rule

    def choose_mode(self, state: EpisodeState, h: float) -> TransmissionMode:
        if self.rule != ModeRule.AUTO:
            return _apply_rule(self.rule, TransmissionMode.DT)
        return greedy_mode(h, self.params)

    def choose_speed(self, state: EpisodeState, arrive_t: int, queue_comp: int) -> float:
        return self.params.f_max

    def slot_power(self, state: EpisodeState, head: Task, h: float) -> float:
        return greedy_power(head.remaining, head.deadline - state.now, h, self.params)


def make_policy(
    name: Policy,
    settings: SimSettings,
    optimizer: PowerOptimizer,
    saa_rng: np.random.Generator,
    agent: Optional[DDQNAgent] = None,
    epsilon: float = 0.0,
    learn: bool = False,
) -> BasePolicy:
    """
    Raises:
        PreconditionError: OPETRL запрошена без агента.
    """
    params = settings.system
    if name == Policy.OPETRL:
        if agent is None:
            raise PreconditionError("для политики OPETRL нужна Q-сеть (чекпоинт)")
        return OpetrlPolicy(params, optimizer, saa_rng, agent, epsilon, learn)
    if name == Policy.ONE_TASK:
        return OneTaskPolicy(params, optimizer, saa_rng, settings.run.one_task_mode)
    return GreedyPolicy(params, optimizer, saa_rng, settings.run.greedy_mode)
