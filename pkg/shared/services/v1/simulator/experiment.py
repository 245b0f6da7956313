"""
Сервис экспериментов: обучение агента, оценка политик и развертки.
"""

import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from shared.core.exceptions import ConfigError, PreconditionError
from shared.core.settings import SimSettings, dump_config
from shared.schemas.v1 import MetricsSchema, Policy, SystemParams
from shared.services.v1.agent import (N_ACTIONS, DDQNAgent, QNetwork,
                                      epsilon_at, load_checkpoint,
                                      save_checkpoint)
from shared.services.v1.base import BaseService
from shared.services.v1.power_opt import PowerOptimizer, write_csv
from shared.services.v1.system_model import ChannelSampler

from .environment import EpisodeRunner, run_episode
from .metrics import aggregate
from .policies import OpetrlPolicy
from .state import EpisodeStreams, EpisodeTrace

SWEEP_VARIABLES = ("raw_bits_s", "p_max")

# ключи независимых потоков главного зерна
AGENT_STREAM = 0
TRAIN_STREAM = 1
EVAL_STREAM = 2

LEARNING_COLUMNS = [
    "episode",
    "epsilon",
    "reward_sum",
    "success_prob",
    "total_energy",
    "transitions",
    "updates",
    "mean_loss",
]


def resolve_seed(seed: Optional[int]) -> int:
    """Главное зерно; при None берется случайное (его нужно записать в отчет)."""
    if seed is not None:
        return seed
    return int(np.random.SeedSequence().entropy % 2**63)


def stream(seed: int, key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(key,))


def episode_seeds(seed: int, key: int, count: int) -> List[int]:
    """Зерна эпизодов; одинаковы для всех политик и точек развертки."""
    return [
        int(child.generate_state(1, dtype=np.uint64)[0])
        for child in stream(seed, key).spawn(count)
    ]


@dataclass(frozen=True)
class EpisodeJob:
    settings: SimSettings
    policy: Policy
    seed: int
    episode: int
    online: Optional[QNetwork] = None
    sweep_var: str = "none"
    sweep_value: float = 0.0


def run_job(job: EpisodeJob) -> Tuple[EpisodeJob, MetricsSchema, EpisodeTrace]:
    """Точка входа процесса пула: эпизод с собственным оптимизатором."""
    metrics, trace = run_episode(job.settings, job.online, job.seed, job.policy)
    return job, metrics, trace


@dataclass
class TrainResult:
    seed: int
    checkpoint: Path
    learning_curve: pd.DataFrame
    losses: pd.DataFrame


class ExperimentService(BaseService):
    """
    Запуск экспериментов по настройкам.

    Эпизоды оценки используют общие зерна для всех политик и значений
    развертки, поэтому политики сравниваются на одних и тех же
    поступлениях и реализациях канала. При run.workers > 1 эпизоды
    выполняются в пуле процессов, CSV пишет только родительский процесс.
    """

    def __init__(
        self,
        settings: SimSettings,
        optimizer: PowerOptimizer,
        sampler: ChannelSampler,
    ):
        super().__init__(settings.system)
        self.settings = settings
        self.optimizer = optimizer
        self.sampler = sampler

    def train(self, out_dir: Path) -> TrainResult:
        """
        Обучает агента OPETRL и пишет checkpoint.trlq, learning_curve.csv, loss.csv.
        """
        settings = self.settings
        seed = resolve_seed(settings.run.seed)
        episodes = settings.run.episodes
        agent = DDQNAgent(
            settings.system, settings.agent, np.random.default_rng(stream(seed, AGENT_STREAM))
        )

        rows = []
        for episode, episode_seed in enumerate(episode_seeds(seed, TRAIN_STREAM, episodes)):
            epsilon = epsilon_at(episode, episodes, settings.agent)
            streams = EpisodeStreams.from_seed(episode_seed)
            policy = OpetrlPolicy(
                settings.system, self.optimizer, streams.saa, agent, epsilon, learn=True
            )
            losses_before = len(agent.losses)
            metrics, _ = EpisodeRunner(settings, policy, self.sampler, streams).run()
            new_losses = agent.losses[losses_before:]
            rows.append(
                {
                    "episode": episode,
                    "epsilon": epsilon,
                    "reward_sum": policy.episode_reward,
                    "success_prob": metrics.success_prob,
                    "total_energy": metrics.total_energy,
                    "transitions": policy.transitions,
                    "updates": agent.updates,
                    "mean_loss": float(np.mean(new_losses)) if new_losses else np.nan,
                }
            )
            self.logger.info(
                "Эпизод обучения %d/%d: успех %.3f, энергия %.3e Дж",
                episode + 1,
                episodes,
                metrics.success_prob,
                metrics.total_energy,
                extra={"epsilon": round(epsilon, 4), "updates": agent.updates},
            )

        checkpoint = out_dir / "checkpoint.trlq"
        save_checkpoint(agent.online, checkpoint)
        curve = pd.DataFrame(rows, columns=LEARNING_COLUMNS)
        losses = pd.DataFrame(
            {"update": np.arange(1, len(agent.losses) + 1), "loss": agent.losses},
            columns=["update", "loss"],
        )
        write_csv(curve, out_dir / "learning_curve.csv")
        write_csv(losses, out_dir / "loss.csv")
        self._dump(out_dir, seed)
        return TrainResult(seed, checkpoint, curve, losses)

    def load_network(self, checkpoint: Optional[str]) -> QNetwork:
        """
        Raises:
            PreconditionError: Путь к чекпоинту не задан.
            CheckpointError: Файл поврежден или не той размерности.
        """
        path = checkpoint or self.settings.run.checkpoint
        if not path:
            raise PreconditionError("для политики OPETRL нужен чекпоинт (--checkpoint)")
        cfg = self.settings.agent
        return load_checkpoint(Path(path), (cfg.n_inputs, cfg.hidden, N_ACTIONS))

    def _network_for(
        self, policies: Sequence[Policy], checkpoint: Optional[str]
    ) -> Optional[QNetwork]:
        if Policy.OPETRL in policies:
            return self.load_network(checkpoint)
        return None

    def _run_jobs(
        self, jobs: List[EpisodeJob]
    ) -> Iterator[Tuple[EpisodeJob, MetricsSchema, EpisodeTrace]]:
        workers = self.settings.run.workers
        if workers > 1 and len(jobs) > 1:
            with multiprocessing.Pool(processes=workers) as pool:
                yield from pool.imap(run_job, jobs)
            return
        for job in jobs:
            optimizer = self.optimizer if job.settings.system == self.params else None
            metrics, trace = run_episode(
                job.settings, job.online, job.seed, job.policy, optimizer=optimizer
            )
            yield job, metrics, trace

    def _collect(
        self,
        jobs: List[EpisodeJob],
        seed: int,
        traces_dir: Optional[Path],
    ) -> pd.DataFrame:
        rows = []
        for job, metrics, trace in self._run_jobs(jobs):
            rows.append(
                {
                    "policy": job.policy.value,
                    "sweep_var": job.sweep_var,
                    "sweep_value": job.sweep_value,
                    "success_prob": metrics.success_prob,
                    "total_energy": metrics.total_energy,
                }
            )
            if traces_dir is not None:
                stem = f"{job.policy.value}_ep{job.episode:03d}"
                write_csv(trace.slots_frame(), traces_dir / f"{stem}_slots.csv")
                write_csv(trace.tasks_frame(), traces_dir / f"{stem}_tasks.csv")
            self.logger.debug(
                "Эпизод оценки завершен",
                extra={"policy": job.policy.value, "episode": job.episode, **metrics.to_dict()},
            )
        return aggregate(rows, seed)

    def evaluate(
        self,
        out_dir: Path,
        policies: Sequence[Policy],
        checkpoint: Optional[str] = None,
    ) -> pd.DataFrame:
        """
        Оценивает политики на eval_episodes эпизодах; пишет summary.csv и трассы.

        Raises:
            PreconditionError: OPETRL без чекпоинта.
        """
        settings = self.settings
        seed = resolve_seed(settings.run.seed)
        online = self._network_for(policies, checkpoint)
        seeds = episode_seeds(seed, EVAL_STREAM, settings.run.eval_episodes)
        jobs = [
            EpisodeJob(settings, policy, episode_seed, episode, online)
            for policy in policies
            for episode, episode_seed in enumerate(seeds)
        ]
        traces_dir = out_dir / "traces" if settings.run.write_traces else None
        summary = self._collect(jobs, seed, traces_dir)
        write_csv(summary, out_dir / "summary.csv")
        self._dump(out_dir, seed)
        self.logger.info("Оценка завершена", extra={"seed": seed, "jobs": len(jobs)})
        return summary

    def sweep(
        self,
        variable: str,
        values: Iterable[float],
        out_dir: Path,
        policies: Sequence[Policy],
        checkpoint: Optional[str] = None,
    ) -> pd.DataFrame:
        """
        Развертка по raw_bits_s или p_max; пишет sweep_<variable>.csv.

        Raises:
            ConfigError: Переменная не поддерживается или значение недопустимо.
            PreconditionError: OPETRL без чекпоинта.
        """
        variable = variable.lower()
        if variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"переменная развертки должна быть одной из {SWEEP_VARIABLES}: {variable!r}"
            )
        settings = self.settings
        seed = resolve_seed(settings.run.seed)
        online = self._network_for(policies, checkpoint)
        seeds = episode_seeds(seed, EVAL_STREAM, settings.run.eval_episodes)

        jobs = []
        for value in values:
            point = self._with_system(variable, value)
            jobs.extend(
                EpisodeJob(point, policy, episode_seed, episode, online, variable, float(value))
                for policy in policies
                for episode, episode_seed in enumerate(seeds)
            )
        summary = self._collect(jobs, seed, None)
        write_csv(summary, out_dir / f"sweep_{variable}.csv")
        self._dump(out_dir, seed)
        self.logger.info(
            "Развертка завершена", extra={"variable": variable, "points": len(summary)}
        )
        return summary

    def _dump(self, out_dir: Path, seed: int) -> None:
        """Сохраняет фактические настройки запуска вместе с зерном."""
        run = self.settings.run.model_copy(update={"seed": seed})
        dump_config(self.settings.model_copy(update={"run": run}), out_dir / "config.conf")

    def _with_system(self, variable: str, value: float) -> SimSettings:
        raw = self.settings.system.model_dump()
        raw[variable] = int(value) if variable == "raw_bits_s" else float(value)
        try:
            system = SystemParams.model_validate(raw)
        except ValueError as e:
            raise ConfigError(
                f"недопустимое значение {variable}={value}", extra={"error": str(e)}
            ) from e
        return self.settings.model_copy(update={"system": system})
