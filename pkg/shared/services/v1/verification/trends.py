"""
Проверка качественных трендов разверток.

Агент обучается с бюджетом из секции verify, затем OPETRL и одно-задачная
политика оцениваются на общих зернах по развертке размера сырых данных S
и предельной мощности p_max.
"""

import tempfile
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from shared.core.dependencies import build_container
from shared.core.settings import SimSettings
from shared.schemas.v1 import Policy
from shared.services.v1.simulator import ExperimentService

from .registry import register_check

RAW_BITS_POINTS = (5000, 10000, 15000, 20000, 25000, 30000)
# После 20 кбит одно-задачная политика уходит в каскад пропусков
COLLAPSE_FROM = 20000
COLLAPSE_POINTS = (25000, 30000)
P_MAX_POINTS = (2.5e-6, 5e-6, 7.5e-6, 1e-5, 1.25e-5)
TREND_POLICIES = (Policy.OPETRL, Policy.ONE_TASK)


def trend_settings(settings: SimSettings) -> SimSettings:
    """Настройки запуска трендов: бюджет и зерно из секции verify."""
    cfg = settings.verify
    run = settings.run.model_copy(
        update={
            "seed": cfg.seed,
            "episodes": cfg.trend_train_episodes,
            "horizon_slots": cfg.trend_horizon_slots,
            "eval_episodes": cfg.trend_eval_episodes,
            "write_traces": False,
            "checkpoint": None,
        }
    )
    saa = settings.saa.model_copy(update={"k_samples": cfg.trend_k_samples})
    return settings.model_copy(update={"run": run, "saa": saa})


def _series(summary: pd.DataFrame, policy: Policy, column: str) -> pd.Series:
    rows = summary[summary["policy"] == policy.value]
    return rows.set_index("sweep_value")[column].sort_index()


def raw_size_trend_failures(summary: pd.DataFrame, slack: float, noise_z: float) -> List[str]:
    """
    Нарушения тренда по S.

    OPETRL не хуже одно-задачной политики по доле успеха в каждой точке,
    теряет после 20 кбит не больше нее и тратит не больше энергии
    в точках каскада.
    """
    failures = []
    ours = _series(summary, Policy.OPETRL, "success_prob_mean")
    theirs = _series(summary, Policy.ONE_TASK, "success_prob_mean")
    for value in ours.index:
        if ours[value] < theirs[value] - slack:
            failures.append(f"успех при S={value:g}: {ours[value]:.3f} < {theirs[value]:.3f}")

    last = ours.index.max()
    our_drop = ours[COLLAPSE_FROM] - ours[last]
    their_drop = theirs[COLLAPSE_FROM] - theirs[last]
    if our_drop > their_drop + slack:
        failures.append(f"падение успеха после S={COLLAPSE_FROM}: {our_drop:.3f} > {their_drop:.3f}")

    energy = _series(summary, Policy.OPETRL, "energy_J_mean")
    energy_se = _series(summary, Policy.OPETRL, "energy_J_se")
    base = _series(summary, Policy.ONE_TASK, "energy_J_mean")
    base_se = _series(summary, Policy.ONE_TASK, "energy_J_se")
    for value in COLLAPSE_POINTS:
        noise = noise_z * float(np.hypot(energy_se[value], base_se[value]))
        if energy[value] > base[value] + noise:
            failures.append(
                f"энергия при S={value:g}: {energy[value]:.3e} > {base[value]:.3e} Дж"
            )
    return failures


def p_max_trend_failures(summary: pd.DataFrame, noise_z: float) -> List[str]:
    """
    Нарушения тренда по p_max на равномерной сетке.

    Энергия одно-задачной политики растет не медленнее линейной
    (вторые разности ≥ 0), энергия OPETRL вогнута (вторые разности ≤ 0).
    Допуск: noise_z стандартных ошибок второй разности.
    """
    failures = []
    for policy, sign in ((Policy.ONE_TASK, 1.0), (Policy.OPETRL, -1.0)):
        energy = _series(summary, policy, "energy_J_mean").to_numpy()
        se = _series(summary, policy, "energy_J_se").to_numpy()
        second = energy[:-2] - 2.0 * energy[1:-1] + energy[2:]
        noise = noise_z * np.sqrt(se[:-2] ** 2 + 4.0 * se[1:-1] ** 2 + se[2:] ** 2)
        if np.any(sign * second < -noise):
            failures.append(f"вторые разности энергии {policy.value}: {np.array2string(second, precision=3)}")
        if policy == Policy.ONE_TASK and energy[-1] < energy[0] - noise_z * np.hypot(se[0], se[-1]):
            failures.append(f"энергия {policy.value} убывает по p_max")
    return failures


def run_trend_sweeps(settings: SimSettings) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Обучает агента и возвращает сводки разверток по S и по p_max."""
    container = build_container(settings)
    try:
        service = container.get(ExperimentService)
        with tempfile.TemporaryDirectory(prefix="opetrl-trends-") as tmp:
            out_dir = Path(tmp)
            trained = service.train(out_dir)
            checkpoint = str(trained.checkpoint)
            raw = service.sweep("raw_bits_s", RAW_BITS_POINTS, out_dir, TREND_POLICIES, checkpoint)
            power = service.sweep("p_max", P_MAX_POINTS, out_dir, TREND_POLICIES, checkpoint)
    finally:
        container.close()
    return raw, power


@register_check
def sweep_trends_match_baselines(settings: SimSettings) -> Tuple[bool, str]:
    """Обученный агент сохраняет тренды разверток по S и p_max относительно одно-задачной политики."""
    cfg = settings.verify
    raw, power = run_trend_sweeps(trend_settings(settings))
    failures = raw_size_trend_failures(raw, cfg.trend_slack, cfg.trend_noise_z)
    failures += p_max_trend_failures(power, cfg.trend_noise_z)
    if failures:
        return False, "; ".join(failures)
    return True, (
        f"S: {len(RAW_BITS_POINTS)} точек, p_max: {len(P_MAX_POINTS)} точек, "
        f"зерен {cfg.trend_eval_episodes}"
    )
