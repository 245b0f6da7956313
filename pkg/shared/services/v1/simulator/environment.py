"""
Пошаговая среда эпизода.

Порядок слота: канал → истечение дедлайнов → поступление задачи →
вычисления → передача головы очереди → батарея → завершения → запись.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from shared.core.exceptions import BatteryDepletedError
from shared.core.settings import SimSettings
from shared.schemas.v1 import MetricsSchema, Policy, TransmissionMode
from shared.services.v1.agent import DDQNAgent, QNetwork
from shared.services.v1.power_opt import PowerOptimizer
from shared.services.v1.system_model import (BatteryState, ChannelSample,
                                             ChannelSampler, Task, TaskStatus,
                                             battery_step, compute_energy,
                                             compute_slots, harvest_per_slot,
                                             make_sampler, power_for_bits,
                                             slot_bits, task_payload,
                                             update_queue_delays)

from .metrics import compute_metrics
from .policies import BasePolicy, make_policy
from .state import EpisodeState, EpisodeStreams, EpisodeTrace, SlotRecord

logger = logging.getLogger(__name__)


class EpisodeRunner:
    """
    Прогон одного эпизода заданной политики.

    Инварианты: батарея в [0, E_max] после каждого слота, передача задачи
    не раньше готовности данных, обслуживание очереди передачи FIFO.

    Usage:
        runner = EpisodeRunner(settings, policy, sampler, EpisodeStreams.from_seed(7))
        metrics, trace = runner.run()
    """

    def __init__(
        self,
        settings: SimSettings,
        policy: BasePolicy,
        sampler: ChannelSampler,
        streams: EpisodeStreams,
    ):
        self.settings = settings
        self.params = settings.system
        self.policy = policy
        self.sampler = sampler
        self.streams = streams
        self.horizon = settings.run.horizon_slots
        self.harvest = harvest_per_slot(self.params)
        self.state = EpisodeState(params=self.params, battery=self.params.batt_init_e0)
        self.trace = EpisodeTrace(tasks=self.state.tasks)
        self.slot_energy = np.zeros(self.horizon)

    def _admit(self, t: int, h: float) -> Task:
        mode = self.policy.choose_mode(self.state, h)
        task = Task(
            id=len(self.state.tasks),
            arrive_t=t,
            mode=mode,
            payload=task_payload(mode, self.params),
            deadline=t + self.params.deadline_c,
        )
        task.queue_comp, _ = update_queue_delays(self.state.last_task, task)
        if mode == TransmissionMode.CT:
            task.comp_speed = self.policy.choose_speed(self.state, t, task.queue_comp)
            task.comp_time = compute_slots(task.comp_speed, self.params)
        self.state.tasks.append(task)
        self.state.pending.append(task)
        self.policy.on_arrival(self.state, task)
        return task

    def _computing_task(self, t: int) -> Optional[Task]:
        for task in self.state.pending:
            if task.mode != TransmissionMode.CT:
                continue
            if task.comp_done < compute_slots(task.comp_speed, self.params):
                return task if task.arrive_t + task.queue_comp <= t else None
        return None

    def _reflow(self, stalled: Task, t: int) -> None:
        """Сдвигает QC задач, чья обработка еще не началась, после простоя вычислений."""
        tasks = self.state.tasks
        for i in range(stalled.id + 1, len(tasks)):
            task = tasks[i]
            if task.arrive_t + task.queue_comp <= t:
                continue
            task.queue_comp, _ = update_queue_delays(tasks[i - 1], task)

    def _resolve(self, task: Task, status: TaskStatus, t: int, energy_end: int) -> None:
        task.status = status
        task.finish_t = t if status != TaskStatus.CENSORED else None
        self.state.pending.remove(task)
        self.policy.on_resolved(self.state, task, self.slot_energy[task.arrive_t : energy_end])

    def _battery(self, e_trans: float, e_comp: float) -> Optional[BatteryState]:
        try:
            return battery_step(
                BatteryState(self.state.battery),
                self.harvest,
                e_trans,
                e_comp,
                self.params.batt_cap_emax,
            )
        except BatteryDepletedError:
            return None

    def step(self, t: int, g: float) -> SlotRecord:
        state, params = self.state, self.params
        state.now = t
        channel = ChannelSample.from_gain(g, params)
        h = channel.effective_h

        for task in list(state.pending):
            if task.deadline <= t:
                self._resolve(task, TaskStatus.MISSED, t, t)

        if self.streams.arrivals.random() < params.arrival_prob_q:
            self._admit(t, h)

        computing = self._computing_task(t)
        e_comp = 0.0
        if computing is not None:
            nominal = compute_slots(computing.comp_speed, params)
            e_comp = compute_energy(computing.comp_speed, params) / nominal

        head = state.head()
        power, bits = 0.0, 0.0
        if head is not None and head.ready_t <= t:
            power = float(np.clip(self.policy.slot_power(state, head, h), 0.0, params.p_max))
            bits = float(slot_bits(np.array([power]), np.array([h]), params)[0])
            if bits >= head.remaining:
                power = min(power_for_bits(head.remaining, h, 1, params), params.p_max)
                bits = head.remaining
        e_trans = params.slot_tau * power

        stalled = comp_stalled = False
        battery = self._battery(e_trans, e_comp)
        if battery is None:
            stalled = power > 0
            power, bits, e_trans = 0.0, 0.0, 0.0
            battery = self._battery(0.0, e_comp)
            if battery is None:
                stalled = comp_stalled = True
                e_comp = 0.0
                battery = self._battery(0.0, 0.0) or BatteryState(
                    min(state.battery + self.harvest, params.batt_cap_emax)
                )

        if computing is not None:
            if not comp_stalled:
                computing.comp_done += 1
            else:
                computing.comp_time += 1
                self._reflow(computing, t)

        if bits > 0 and head is not None:
            if head.start_t is None:
                head.start_t = t
                _, head.queue_trans = update_queue_delays(
                    state.tasks[head.id - 1] if head.id > 0 else None, head
                )
            head.delivered += bits

        self.slot_energy[t] = e_trans + e_comp
        state.battery = battery.energy
        state.delivered_bits = bits
        state.stalled = stalled

        if head is not None and head.is_pending and head.start_t is not None:
            if head.remaining <= head.payload * 1e-12:
                head.delivered = float(head.payload)
                head.trans_time = t - head.start_t + 1
                self._resolve(head, TaskStatus.MET, t, t + 1)

        self.policy.on_slot_end(state)
        return SlotRecord(
            slot=t,
            channel_g=channel.small_scale_g,
            gain_h=channel.effective_h,
            power_watts=power,
            bits=bits,
            battery_J=state.battery,
            harvest_J=self.harvest,
            e_trans_J=e_trans,
            e_comp_J=e_comp,
            queue_len=len(state.pending),
            head_task=-1 if head is None else head.id,
            computing_task=-1 if computing is None else computing.id,
            stalled=stalled,
        )

    def run(self) -> Tuple[MetricsSchema, EpisodeTrace]:
        gains = self.sampler.sample(self.streams.channel, self.horizon)
        for t in range(self.horizon):
            self.trace.slots.append(self.step(t, float(gains[t])))

        self.state.now = self.horizon
        for task in list(self.state.pending):
            if task.start_t is not None:
                task.trans_time = self.horizon - task.start_t
            self._resolve(task, TaskStatus.CENSORED, self.horizon, self.horizon)

        metrics = compute_metrics(self.trace)
        logger.debug(
            "Эпизод завершен",
            extra={"policy": self.policy.name.value, **metrics.to_dict()},
        )
        return metrics, self.trace


def run_episode(
    settings: SimSettings,
    nets: Optional[QNetwork],
    seed: int,
    policy: Optional[Policy] = None,
    optimizer: Optional[PowerOptimizer] = None,
) -> Tuple[MetricsSchema, EpisodeTrace]:
    """
    Прогон одного эпизода оценки без обучения.

    Args:
        settings: Настройки симулятора.
        nets: Онлайн Q-сеть; обязательна для OPETRL.
        seed: Зерно эпизода; одно зерно дает одинаковые поступления и канал
            для всех политик.
        policy: Политика; по умолчанию settings.run.policy.
        optimizer: Готовый оптимизатор мощности; иначе создается на эпизод.

    Raises:
        PreconditionError: OPETRL без Q-сети.
    """
    name = policy or settings.run.policy
    streams = EpisodeStreams.from_seed(seed)
    sampler = make_sampler(settings.system.channel_model)

    agent = None
    if nets is not None and name == Policy.OPETRL:
        agent = DDQNAgent(settings.system, settings.agent, np.random.default_rng(seed), nets)

    own_optimizer = optimizer is None
    optimizer = optimizer or PowerOptimizer(settings.system, settings.saa, sampler)
    try:
        runner_policy = make_policy(name, settings, optimizer, streams.saa, agent=agent)
        return EpisodeRunner(settings, runner_policy, sampler, streams).run()
    finally:
        if own_optimizer:
            optimizer.close()
