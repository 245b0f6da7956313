import math

import numpy as np
import pytest
from scipy.optimize import brentq

from shared.core.exceptions import DomainError
from shared.services.v1.power_opt import (ChannelTrace, PowerSchedule,
                                          optimal_power_single_task,
                                          schedule_energy, water_filling)
from shared.services.v1.power_opt import waterfilling as waterfilling_module
from shared.services.v1.system_model import LN2, effective_gain, slot_bits

TAU, W = 0.1, 2e6


def bisection_powers(payload, gains, p_max):
    target = payload * LN2 / (TAU * W)
    inverse = 1.0 / gains

    def excess(level):
        return np.sum(np.log1p(np.clip(level - inverse, 0, p_max) * gains)) - target

    high = inverse.max() + p_max
    level = brentq(excess, inverse.min(), high, xtol=1e-15 * high)
    return np.clip(level - inverse, 0, p_max)


class TestWaterFilling:
    def test_single_slot_closed_form(self):
        result = water_filling(TAU * W, np.array([1.0]), p_max=10.0, tau=TAU, bandwidth=W)
        assert result.powers[0] == pytest.approx(1.0, rel=1e-12)

    def test_flat_channel_is_uniform(self):
        h, slots, payload = 2.0, 4, 3e5
        result = water_filling(payload, np.full(slots, h), p_max=100.0, tau=TAU, bandwidth=W)
        expected = (2 ** (payload / (TAU * W * slots)) - 1) / h
        np.testing.assert_allclose(result.powers, expected, rtol=1e-12)

    def test_matches_bisection_oracle(self, params, rng):
        for _ in range(50):
            gains = effective_gain(rng.exponential(size=3) + 1e-3, params)
            payload = 0.5 * float(np.sum(slot_bits(np.full(3, params.p_max), gains, params)))
            ours = water_filling(payload, gains, params.p_max, TAU, W).powers
            np.testing.assert_allclose(
                ours, bisection_powers(payload, gains, params.p_max), rtol=1e-9, atol=1e-9 * params.p_max
            )

    def test_rate_is_tight(self, params, rng):
        gains = effective_gain(rng.exponential(size=8) + 1e-3, params)
        payload = 0.7 * float(np.sum(slot_bits(np.full(8, params.p_max), gains, params)))
        result = water_filling(payload, gains, params.p_max, TAU, W)
        delivered = float(np.sum(slot_bits(result.powers, gains, params)))
        assert delivered == pytest.approx(payload, rel=1e-9)

    def test_water_level_constant_on_free_slots(self):
        gains = np.array([0.5, 1.0, 2.0, 4.0])
        result = water_filling(2e5, gains, p_max=100.0, tau=TAU, bandwidth=W)
        free = result.powers > 0
        np.testing.assert_allclose(result.powers[free] + 1 / gains[free], result.level, rtol=1e-9)

    def test_clipped_at_p_max(self):
        gains = np.array([10.0, 0.01])
        result = water_filling(6.93e5, gains, p_max=1.0, tau=TAU, bandwidth=W)
        assert result.powers[0] == pytest.approx(1.0)
        delivered = TAU * W * float(np.sum(np.log2(1 + result.powers * gains)))
        assert delivered == pytest.approx(6.93e5, rel=1e-9)

    def test_infeasible_returns_p_max(self):
        result = water_filling(1e9, np.array([1.0, 1.0]), p_max=1.0, tau=TAU, bandwidth=W)
        assert result.infeasible
        np.testing.assert_array_equal(result.powers, [1.0, 1.0])

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            water_filling(1.0, np.array([]), 1.0, TAU, W)
        with pytest.raises(DomainError):
            water_filling(0.0, np.array([1.0]), 1.0, TAU, W)

    def test_free_level_closed_form_is_used(self, monkeypatch):
        calls = []
        original = waterfilling_module._free_water_level

        def spy(target, log_gains):
            calls.append(log_gains.size)
            return original(target, log_gains)

        monkeypatch.setattr(waterfilling_module, "_free_water_level", spy)
        # 2·ln2 нат: уровень √2 выше обеих точек излома 1/h
        result = water_filling(4e5, np.array([1.0, 2.0]), p_max=100.0, tau=TAU, bandwidth=W)
        assert calls == [2]
        assert result.level == pytest.approx(math.sqrt(2.0), rel=1e-12)
        np.testing.assert_allclose(result.powers, [math.sqrt(2.0) - 1.0, math.sqrt(2.0) - 0.5])

    def test_level_on_breakpoint(self):
        result = water_filling(2e5, np.array([1.0, 2.0]), p_max=100.0, tau=TAU, bandwidth=W)
        assert result.level == pytest.approx(1.0, rel=1e-12)
        np.testing.assert_allclose(result.powers, [0.0, 0.5], atol=1e-12)


class TestSingleTask:
    def test_window_from_trace_start(self):
        trace = ChannelTrace(5, np.array([1.0, 1.0, 1.0]))
        sched = optimal_power_single_task(TAU * W, 1, trace, 10.0, TAU, W)
        assert sched.start == 5
        assert sched.powers[0] == pytest.approx(1.0)

    def test_zero_window(self):
        trace = ChannelTrace(0, np.ones(3))
        with pytest.raises(DomainError):
            optimal_power_single_task(1.0, 0, trace, 1.0, TAU, W)

    def test_window_outside_trace(self):
        trace = ChannelTrace(0, np.ones(3))
        with pytest.raises(DomainError):
            optimal_power_single_task(1.0, 2, trace, 1.0, TAU, W, start=2)

    def test_energy_not_above_uniform(self, rng):
        gains = rng.exponential(size=5) + 0.05
        payload = 3e5
        sched = optimal_power_single_task(payload, 5, ChannelTrace(0, gains), 1e3, TAU, W)
        # равномерная мощность, доставляющая те же D
        level = brentq(
            lambda p: TAU * W * np.sum(np.log2(1 + p * gains)) - payload, 0.0, 1e3
        )
        assert schedule_energy(sched, TAU) <= TAU * 5 * level * (1 + 1e-12)

    def test_energy_monotone_in_window(self, rng):
        gains = rng.exponential(size=10) + 0.05
        trace = ChannelTrace(0, gains)
        energies = [
            schedule_energy(optimal_power_single_task(4e5, t, trace, 1e3, TAU, W), TAU)
            for t in range(1, 11)
        ]
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


class TestSchedule:
    def test_energy_arithmetic(self):
        assert schedule_energy(PowerSchedule(0, np.array([1.0, 2.0, 3.0])), 0.1) == pytest.approx(0.6)
        assert schedule_energy(PowerSchedule.zeros(0, 4), 0.1) == 0.0

    def test_rejects_negative_power(self):
        with pytest.raises(DomainError):
            PowerSchedule(0, np.array([-1.0]))

    def test_trace_rejects_non_positive_gain(self):
        with pytest.raises(DomainError):
            ChannelTrace(0, np.array([1.0, 0.0]))

    def test_power_at_outside(self):
        sched = PowerSchedule(3, np.array([1.0]))
        assert sched.power_at(3) == 1.0
        assert sched.power_at(4) == 0.0
        assert sched.end == 4
