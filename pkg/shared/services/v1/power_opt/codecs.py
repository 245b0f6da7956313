"""
CSV-представление расписаний мощности и распределений времени.
"""

from pathlib import Path

import pandas as pd

from shared.core.exceptions import OutputError

from .allocation import TaskWindow, TimeAllocation
from .waterfilling import PowerSchedule

FLOAT_FORMAT = "%.12g"


def schedule_to_frame(schedule: PowerSchedule) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "slot": range(schedule.start, schedule.end),
            "power_watts": schedule.powers,
        }
    )


def schedule_from_frame(frame: pd.DataFrame) -> PowerSchedule:
    frame = frame.sort_values("slot")
    start = int(frame["slot"].iloc[0]) if len(frame) else 0
    return PowerSchedule(start, frame["power_watts"].to_numpy(dtype=float))


def allocation_to_frame(alloc: TimeAllocation) -> pd.DataFrame:
    return pd.DataFrame(
        [(w.task_id, w.start_slot, w.len_slots) for w in alloc],
        columns=["task_id", "start_slot", "len_slots"],
    )


def allocation_from_frame(frame: pd.DataFrame) -> TimeAllocation:
    return TimeAllocation(
        tuple(
            TaskWindow(int(row.task_id), int(row.start_slot), int(row.len_slots))
            for row in frame.itertuples(index=False)
        )
    )


def write_csv(frame: pd.DataFrame, path: Path) -> None:
    """
    Записывает таблицу с фиксированным форматом чисел.

    Raises:
        OutputError: Путь недоступен для записи.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise OutputError(str(path), str(e)) from e
