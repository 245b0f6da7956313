"""
Состояние эпизода, записи трассы и потоки случайных чисел.
"""

from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from shared.schemas.v1 import SystemParams
from shared.services.v1.power_opt import QueueEntry
from shared.services.v1.system_model import Task

SLOT_COLUMNS = [
    "slot",
    "channel_g",
    "gain_h",
    "power_watts",
    "bits",
    "battery_J",
    "harvest_J",
    "e_trans_J",
    "e_comp_J",
    "queue_len",
    "head_task",
    "computing_task",
    "stalled",
]

TASK_COLUMNS = [
    "id",
    "arrive_t",
    "mode",
    "payload",
    "deadline",
    "comp_speed",
    "comp_time",
    "queue_comp",
    "queue_trans",
    "start_t",
    "trans_time",
    "finish_t",
    "delivered",
    "status",
]


@dataclass(frozen=True)
class EpisodeStreams:
    """Независимые потоки: поступления, живой канал, зерна SAA."""

    arrivals: np.random.Generator
    channel: np.random.Generator
    saa: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "EpisodeStreams":
        arrivals, channel, saa = np.random.SeedSequence(seed).spawn(3)
        return cls(
            np.random.default_rng(arrivals),
            np.random.default_rng(channel),
            np.random.default_rng(saa),
        )


@dataclass(slots=True)
class SlotRecord:
    slot: int
    channel_g: float
    gain_h: float
    power_watts: float
    bits: float
    battery_J: float
    harvest_J: float
    e_trans_J: float
    e_comp_J: float
    queue_len: int
    head_task: int
    computing_task: int
    stalled: bool


@dataclass
class EpisodeTrace:
    """Пошаговые записи и итоговые записи задач одного эпизода."""

    slots: List[SlotRecord] = field(default_factory=list)
    tasks: List[Task] = field(default_factory=list)

    def slots_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.slots], columns=SLOT_COLUMNS)

    def tasks_frame(self) -> pd.DataFrame:
        rows = [
            {
                "id": t.id,
                "arrive_t": t.arrive_t,
                "mode": t.mode.name,
                "payload": t.payload,
                "deadline": t.deadline,
                "comp_speed": t.comp_speed,
                "comp_time": t.comp_time,
                "queue_comp": t.queue_comp,
                "queue_trans": t.queue_trans,
                "start_t": -1 if t.start_t is None else t.start_t,
                "trans_time": t.trans_time,
                "finish_t": -1 if t.finish_t is None else t.finish_t,
                "delivered": t.delivered,
                "status": t.status.value,
            }
            for t in self.tasks
        ]
        return pd.DataFrame(rows, columns=TASK_COLUMNS)


@dataclass
class EpisodeState:
    """
    Изменяемое состояние эпизода, доступное политикам.

    Attributes:
        params: Параметры системы.
        now: Текущий слот.
        battery: Заряд батареи на начало слота, Дж.
        tasks: Все поступившие задачи в порядке поступления.
        pending: Неразрешенные задачи в порядке поступления.
        delivered_bits: Биты, доставленные в последнем слоте.
        stalled: Был ли простой из-за батареи в последнем слоте.
    """

    params: SystemParams
    battery: float
    now: int = 0
    tasks: List[Task] = field(default_factory=list)
    pending: List[Task] = field(default_factory=list)
    delivered_bits: float = 0.0
    stalled: bool = False

    @property
    def last_task(self) -> Optional[Task]:
        return self.tasks[-1] if self.tasks else None

    def head(self) -> Optional[Task]:
        """Голова очереди передачи: первая задача, которая еще может передавать."""
        for task in self.pending:
            if task.ready_t < task.deadline:
                return task
        return None

    def plannable_entries(self) -> List[QueueEntry]:
        """
        Очередь для планировщика: задачи, которые при обслуживании FIFO
        еще могут получить хотя бы один слот до дедлайна.
        """
        entries: List[QueueEntry] = []
        boundary = self.now
        for task in self.pending:
            if task.remaining <= 0:
                continue
            ready = max(task.ready_t, self.now)
            start = max(boundary, ready)
            if start >= task.deadline:
                continue
            entries.append(QueueEntry(task.id, task.remaining, ready, task.deadline))
            boundary = start + 1
        return entries
