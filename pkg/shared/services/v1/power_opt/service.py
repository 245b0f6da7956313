from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from shared.schemas.v1 import SaaConfig, SystemParams
from shared.services.v1.base import BaseService
from shared.services.v1.system_model import ChannelSampler, channel_mean_gain

from .allocation import QueueEntry
from .saa import SeedLike, solve_queue_power
from .waterfilling import (ChannelTrace, PowerSchedule,
                           optimal_power_single_task, schedule_energy)


class PowerOptimizer(BaseService):
    """
    Сервис встроенной оптимизации мощности.

    Держит параметры SAA, распределение канала и, при saa.workers > 1,
    пул потоков для параллельного решения подзадач.

    Usage:
        with PowerOptimizer(params, saa, RayleighSampler()) as optimizer:
            plan = optimizer.plan(queue, now_t=0, seed=7)
    """

    def __init__(self, params: SystemParams, saa: SaaConfig, sampler: ChannelSampler):
        super().__init__(params)
        self.saa = saa
        self.sampler = sampler
        self._executor: Optional[ThreadPoolExecutor] = (
            ThreadPoolExecutor(max_workers=saa.workers, thread_name_prefix="saa")
            if saa.workers > 1
            else None
        )

    def plan(self, tasks: Sequence[QueueEntry], now_t: int, seed: SeedLike) -> PowerSchedule:
        schedule = solve_queue_power(
            tasks, now_t, self.saa, self.sampler, seed, self.params, executor=self._executor
        )
        if schedule.chance_infeasible:
            self.logger.debug(
                "План с нарушением вероятностного ограничения",
                extra={"now_t": now_t, "tasks": [t.task_id for t in tasks]},
            )
        return schedule

    def mean_channel_energy(self, payload: float, window: int) -> Optional[float]:
        """
        Энергия передачи `payload` бит за `window` слотов на среднем канале.

        Returns:
            Optional[float]: None, если даже p_max не доставляет данные.
        """
        trace = ChannelTrace.flat(0, window, channel_mean_gain(self.params))
        sched = optimal_power_single_task(
            payload,
            window,
            trace,
            self.params.p_max,
            self.params.slot_tau,
            self.params.bandwidth_w,
        )
        if sched.infeasible:
            return None
        return schedule_energy(sched, self.params.slot_tau)

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "PowerOptimizer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
