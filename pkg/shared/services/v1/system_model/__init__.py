from .channel import (ChannelSample, ChannelSampler, DeterministicSampler,
                      RayleighSampler, channel_mean_gain, effective_gain,
                      make_sampler)
from .physics import (LN2, MAX_EXPONENT, BatteryState, achievable_rate,
                      battery_step, cloud_attenuation, compute_energy,
                      compute_slots, compute_time, harvest_per_slot,
                      power_for_bits, slot_bits, solar_power, task_payload)
from .queueing import Task, TaskStatus, update_queue_delays

__all__ = [
    "LN2",
    "MAX_EXPONENT",
    "BatteryState",
    "ChannelSample",
    "ChannelSampler",
    "DeterministicSampler",
    "RayleighSampler",
    "Task",
    "TaskStatus",
    "achievable_rate",
    "battery_step",
    "channel_mean_gain",
    "cloud_attenuation",
    "compute_energy",
    "compute_slots",
    "compute_time",
    "effective_gain",
    "harvest_per_slot",
    "make_sampler",
    "power_for_bits",
    "slot_bits",
    "solar_power",
    "task_payload",
    "update_queue_delays",
]
