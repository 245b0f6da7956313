from .agent import AgentConfig
from .optimization import SaaConfig
from .simulation import (MetricsSchema, ModeRule, Policy, RunConfig,
                         SummaryRowSchema, VerifyConfig)
from .system import ChannelModel, SystemParams, TransmissionMode

__all__ = [
    "AgentConfig",
    "ChannelModel",
    "MetricsSchema",
    "ModeRule",
    "Policy",
    "RunConfig",
    "SaaConfig",
    "SummaryRowSchema",
    "SystemParams",
    "TransmissionMode",
    "VerifyConfig",
]
