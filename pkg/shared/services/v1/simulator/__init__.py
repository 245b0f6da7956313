from .environment import EpisodeRunner, run_episode
from .experiment import (SWEEP_VARIABLES, EpisodeJob, ExperimentService,
                         TrainResult, episode_seeds, resolve_seed, run_job)
from .metrics import SUMMARY_COLUMNS, aggregate, compute_metrics
from .policies import (BasePolicy, GreedyPolicy, OneTaskPolicy, OpetrlPolicy,
                       choose_compute_speed, greedy_energy_estimate,
                       greedy_mode, greedy_power, make_policy, one_task_mode)
from .state import (SLOT_COLUMNS, TASK_COLUMNS, EpisodeState, EpisodeStreams,
                    EpisodeTrace, SlotRecord)

__all__ = [
    "SLOT_COLUMNS",
    "SUMMARY_COLUMNS",
    "SWEEP_VARIABLES",
    "TASK_COLUMNS",
    "BasePolicy",
    "EpisodeJob",
    "EpisodeRunner",
    "EpisodeState",
    "EpisodeStreams",
    "EpisodeTrace",
    "ExperimentService",
    "GreedyPolicy",
    "OneTaskPolicy",
    "OpetrlPolicy",
    "SlotRecord",
    "TrainResult",
    "aggregate",
    "choose_compute_speed",
    "compute_metrics",
    "episode_seeds",
    "greedy_energy_estimate",
    "greedy_mode",
    "greedy_power",
    "make_policy",
    "one_task_mode",
    "resolve_seed",
    "run_episode",
    "run_job",
]
