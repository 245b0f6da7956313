"""
Задачи и задержки в очередях вычислений и передачи.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from shared.core.exceptions import PreconditionError
from shared.schemas.v1 import TransmissionMode


class TaskStatus(str, Enum):
    PENDING = "pending"
    MET = "met"
    MISSED = "missed"
    CENSORED = "censored"


@dataclass(slots=True)
class Task:
    """
    Задача классификации.

    Attributes:
        id: Номер задачи в эпизоде.
        arrive_t: Слот поступления A.
        mode: Режим передачи.
        payload: Размер передаваемых данных D, бит.
        deadline: Первый слот после окна, A + C (исключительно).
        comp_speed: Частота вычислений f, Гц (0 для DT).
        comp_time: Слотов вычислений (с учетом простоев из-за батареи).
        queue_comp: Ожидание в очереди вычислений QC, слоты.
        queue_trans: Ожидание в очереди передачи QT, слоты.
        start_t: Слот первой передачи S (None до начала).
        trans_time: Слотов передачи T.
        delivered: Доставлено бит.
        comp_done: Выполнено слотов вычислений.
        finish_t: Слот завершения (выполнение или пропуск).
        status: Состояние задачи.
    """

    id: int
    arrive_t: int
    mode: TransmissionMode
    payload: int
    deadline: int
    comp_speed: float = 0.0
    comp_time: int = 0
    queue_comp: int = 0
    queue_trans: int = 0
    start_t: Optional[int] = None
    trans_time: int = 0
    delivered: float = 0.0
    comp_done: int = 0
    finish_t: Optional[int] = None
    status: TaskStatus = TaskStatus.PENDING

    @property
    def ready_t(self) -> int:
        """Первый слот, в котором данные задачи готовы к передаче."""
        return self.arrive_t + self.queue_comp + self.comp_time

    @property
    def remaining(self) -> float:
        return max(0.0, self.payload - self.delivered)

    @property
    def is_pending(self) -> bool:
        return self.status == TaskStatus.PENDING


def update_queue_delays(prev_task: Optional[Task], cur_task: Task) -> Tuple[int, int]:
    """
    Задержки в очередях вычислений и передачи для текущей задачи.

    QC_i = max{0, A_{i−1} + QC_{i−1} + c_{i−1}·[CT] − A_i};
    QT_i = max{0, S_i − (A_i + QC_i + c_i)}.

    Если слот начала передачи S_i уже известен, используется он; иначе S_i
    выводится из конца передачи предшественника S_{i−1} + T_{i−1}.

    Args:
        prev_task: Предыдущая по поступлению задача или None.
        cur_task: Текущая задача.

    Returns:
        Tuple[int, int]: (QC, QT) в слотах.

    Raises:
        PreconditionError: Задачи не упорядочены по поступлению.
    """
    if prev_task is None:
        queue_comp = 0
        derived_start = None
    else:
        if prev_task.arrive_t > cur_task.arrive_t:
            raise PreconditionError(
                "задачи не упорядочены по времени поступления",
                extra={"prev": prev_task.id, "cur": cur_task.id},
            )
        prev_comp = prev_task.comp_time if prev_task.mode == TransmissionMode.CT else 0
        queue_comp = max(
            0, prev_task.arrive_t + prev_task.queue_comp + prev_comp - cur_task.arrive_t
        )
        derived_start = (
            prev_task.start_t + prev_task.trans_time
            if prev_task.start_t is not None
            else None
        )

    ready = cur_task.arrive_t + queue_comp + cur_task.comp_time
    start = cur_task.start_t if cur_task.start_t is not None else derived_start
    queue_trans = 0 if start is None else max(0, start - ready)
    return queue_comp, queue_trans
