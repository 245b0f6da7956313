from typing import Iterator

from dishka import Provider, Scope, from_context, provide

from shared.core.settings import SimSettings
from shared.schemas.v1 import SystemParams
from shared.services.v1.power_opt import PowerOptimizer
from shared.services.v1.simulator import ExperimentService
from shared.services.v1.system_model import ChannelSampler, make_sampler


class SimulationProvider(Provider):
    settings = from_context(provides=SimSettings, scope=Scope.APP)

    @provide(scope=Scope.APP)
    def system_params(self, settings: SimSettings) -> SystemParams:
        return settings.system

    @provide(scope=Scope.APP)
    def channel_sampler(self, params: SystemParams) -> ChannelSampler:
        return make_sampler(params.channel_model)

    @provide(scope=Scope.APP)
    def power_optimizer(
        self, settings: SimSettings, sampler: ChannelSampler
    ) -> Iterator[PowerOptimizer]:
        optimizer = PowerOptimizer(settings.system, settings.saa, sampler)
        yield optimizer
        optimizer.close()

    @provide(scope=Scope.APP)
    def experiment_service(
        self, settings: SimSettings, optimizer: PowerOptimizer, sampler: ChannelSampler
    ) -> ExperimentService:
        return ExperimentService(settings, optimizer, sampler)
