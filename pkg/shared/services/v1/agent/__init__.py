from .checkpoint import (decode_checkpoint, encode_checkpoint,
                         load_checkpoint, save_checkpoint)
from .network import QNetwork, forward, loss_and_gradients, sgd_update
from .replay import ReplayBuffer, Transition
from .service import (N_ACTIONS, DDQNAgent, ddqn_target, ddqn_targets,
                      encode_state, epsilon_at, select_action, sync_target,
                      task_reward, train_step)

__all__ = [
    "N_ACTIONS",
    "DDQNAgent",
    "QNetwork",
    "ReplayBuffer",
    "Transition",
    "ddqn_target",
    "ddqn_targets",
    "decode_checkpoint",
    "encode_checkpoint",
    "encode_state",
    "epsilon_at",
    "forward",
    "load_checkpoint",
    "loss_and_gradients",
    "save_checkpoint",
    "select_action",
    "sgd_update",
    "sync_target",
    "task_reward",
    "train_step",
]
