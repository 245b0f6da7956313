from .allocation import (QueueEntry, TaskWindow, TimeAllocation,
                         allocate_times, allocation_cost, allocation_energy,
                         enumerate_allocations, time_split_residual)
from .codecs import (allocation_from_frame, allocation_to_frame,
                     schedule_from_frame, schedule_to_frame, write_csv)
from .saa import (deadline_violations, draw_traces, fifo_deadlines_met,
                  restore_power, saa_sample_count, solve_queue_power,
                  solve_subproblem)
from .service import PowerOptimizer
from .waterfilling import (ChannelTrace, PowerSchedule, WaterFillingResult,
                           optimal_power_single_task, schedule_energy,
                           water_filling)

__all__ = [
    "ChannelTrace",
    "PowerOptimizer",
    "PowerSchedule",
    "QueueEntry",
    "TaskWindow",
    "TimeAllocation",
    "WaterFillingResult",
    "allocate_times",
    "allocation_cost",
    "allocation_energy",
    "allocation_from_frame",
    "allocation_to_frame",
    "deadline_violations",
    "draw_traces",
    "enumerate_allocations",
    "fifo_deadlines_met",
    "optimal_power_single_task",
    "restore_power",
    "saa_sample_count",
    "schedule_energy",
    "schedule_from_frame",
    "schedule_to_frame",
    "solve_queue_power",
    "solve_subproblem",
    "time_split_residual",
    "water_filling",
    "write_csv",
]
