import numpy as np
import pytest

from shared.core.settings import SimSettings
from shared.schemas.v1 import SaaConfig, SystemParams
from shared.services.v1.power_opt import PowerOptimizer
from shared.services.v1.system_model import (DeterministicSampler,
                                             RayleighSampler)


@pytest.fixture
def params() -> SystemParams:
    return SystemParams()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def saa() -> SaaConfig:
    return SaaConfig(k_samples=8)


@pytest.fixture
def small_settings() -> SimSettings:
    """Короткие эпизоды и мало выборок SAA для быстрых тестов среды."""
    return SimSettings(
        saa={"k_samples": 4},
        run={"horizon_slots": 60, "episodes": 2, "eval_episodes": 2, "seed": 7},
        agent={"minibatch": 4, "buffer_capacity": 50, "target_sync_every": 2},
    )


@pytest.fixture
def optimizer(small_settings: SimSettings):
    with PowerOptimizer(small_settings.system, small_settings.saa, RayleighSampler()) as opt:
        yield opt


@pytest.fixture
def flat_sampler() -> DeterministicSampler:
    return DeterministicSampler()
