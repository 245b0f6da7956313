from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from shared.schemas.v1 import MetricsSchema, SummaryRowSchema
from shared.services.v1.system_model import TaskStatus

from .state import EpisodeTrace

SUMMARY_COLUMNS = list(SummaryRowSchema.model_fields)


def compute_metrics(trace: EpisodeTrace) -> MetricsSchema:
    """
    Метрики эпизода.

    Вероятность успеха считается по разрешенным задачам (выполненным или
    пропущенным); задачи, не разрешенные к концу горизонта, не учитываются.
    """
    statuses = [t.status for t in trace.tasks]
    met = statuses.count(TaskStatus.MET)
    missed = statuses.count(TaskStatus.MISSED)
    resolved = met + missed

    e_trans = float(sum(r.e_trans_J for r in trace.slots))
    e_comp = float(sum(r.e_comp_J for r in trace.slots))
    return MetricsSchema(
        success_prob=met / resolved if resolved else 1.0,
        total_energy=e_trans + e_comp,
        transmit_energy=e_trans,
        compute_energy=e_comp,
        tasks_total=len(statuses),
        tasks_met=met,
        tasks_missed=missed,
        tasks_censored=statuses.count(TaskStatus.CENSORED),
        stalled_slots=sum(1 for r in trace.slots if r.stalled),
    )


def aggregate(rows: Iterable[Mapping], seed: int) -> pd.DataFrame:
    """
    Сводка по эпизодам: среднее и стандартная ошибка на пару (политика, точка).

    Args:
        rows: Строки с ключами policy, sweep_var, sweep_value, success_prob,
            total_energy.
        seed: Главное зерно запуска.
    """
    frame = pd.DataFrame(list(rows))
    if frame.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)

    grouped = frame.groupby(["policy", "sweep_var", "sweep_value"], sort=False)
    summary = grouped.agg(
        success_prob_mean=("success_prob", "mean"),
        success_prob_se=("success_prob", "sem"),
        energy_J_mean=("total_energy", "mean"),
        energy_J_se=("total_energy", "sem"),
        episodes=("success_prob", "size"),
    ).reset_index()
    # sem не определена для одного эпизода
    summary[["success_prob_se", "energy_J_se"]] = summary[
        ["success_prob_se", "energy_J_se"]
    ].fillna(0.0)
    summary["seed"] = seed
    summary["episodes"] = summary["episodes"].astype(np.int64)
    return summary[SUMMARY_COLUMNS]
