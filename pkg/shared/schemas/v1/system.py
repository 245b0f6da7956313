"""
Параметры физической модели БПЛА: канал, солнечная панель, вычисления,
трафик и ограничения.

Значения по умолчанию: d = 100 м, τ = 0.1 с, σ² = −110 дБм, ρ = −60 дБ,
W = 2 МГц; остальные подобраны так, чтобы компромиссы DT/CT, мощности
и батареи попадали в рабочий диапазон.
"""

from enum import Enum, IntEnum

from pydantic import Field, model_validator

from .base import BaseConfigSchema


class TransmissionMode(IntEnum):
    """
    Режим передачи задачи. Индекс совпадает с номером действия агента.

    DT: передача сырых данных (S бит).
    CT: вычисление карты признаков на борту, затем передача L_h·L_w·Q бит.
    """

    DT = 0
    CT = 1


class ChannelModel(str, Enum):
    RAYLEIGH = "rayleigh"
    DETERMINISTIC = "deterministic"


class SystemParams(BaseConfigSchema):
    """
    Все физические и модельные константы.

    Attributes:
        bandwidth_w: Полоса W, Гц.
        slot_tau: Длительность слота τ, с.
        distance_d: Расстояние до сервера d, м.
        noise_var_dbm: Мощность шума σ², дБм (линейное значение: noise_var).
        ref_gain_db: Усиление на опорном расстоянии ρ, дБ (линейное: ref_gain_rho).
        p_max: Предельная мощность передачи, Вт.
        deadline_c: Порог времени выполнения C, слоты.
        raw_bits_s: Размер сырых данных S, бит.
        feat_h_lh, feat_w_lw: Размеры карты признаков.
        quant_q: Бит на элемент карты признаков.
        batt_cap_emax, batt_init_e0: Емкость и начальный заряд батареи, Дж.
        arrival_prob_q: Вероятность поступления задачи в слоте.
        solar_eff, panel_area, irradiance_g: КПД, площадь (м²), освещенность (Вт/м²).
        absorb_beta, cloud_thickness: Поглощение облаков (1/м) и толщина (м).
        chip_k: Коэффициент мощности чипа k.
        f_max: Максимальная частота, Гц.
        flops_nt: Число операций для карты признаков.
        cores_nc, vec_bits_nv, os_bits_ns: Ядра, ширина вектора и разрядность ОС.
        channel_model: Распределение мелкомасштабного замирания.
    """

    bandwidth_w: float = Field(default=2e6, gt=0)
    slot_tau: float = Field(default=0.1, gt=0)
    distance_d: float = Field(default=100.0, gt=0)
    noise_var_dbm: float = -110.0
    ref_gain_db: float = -60.0
    p_max: float = Field(default=5e-6, gt=0)
    deadline_c: int = Field(default=10, ge=1)
    raw_bits_s: int = Field(default=20000, ge=1)
    feat_h_lh: int = Field(default=32, ge=1)
    feat_w_lw: int = Field(default=48, ge=1)
    quant_q: int = Field(default=16, ge=1)
    batt_cap_emax: float = Field(default=2e-5, ge=0)
    batt_init_e0: float = Field(default=1e-5, ge=0)
    arrival_prob_q: float = Field(default=0.3, ge=0, le=1)
    solar_eff: float = Field(default=0.2, ge=0)
    panel_area: float = Field(default=5e-8, ge=0)
    irradiance_g: float = Field(default=1000.0, ge=0)
    absorb_beta: float = Field(default=0.05, ge=0)
    cloud_thickness: float = Field(default=20.0, ge=0)
    chip_k: float = Field(default=1e-28, ge=0)
    f_max: float = Field(default=1e8, gt=0)
    flops_nt: float = Field(default=1e8, ge=0)
    cores_nc: int = Field(default=4, ge=1)
    vec_bits_nv: int = Field(default=256, ge=1)
    os_bits_ns: int = Field(default=64, ge=1)
    channel_model: ChannelModel = ChannelModel.RAYLEIGH

    @model_validator(mode="after")
    def _check_battery(self) -> "SystemParams":
        if self.batt_init_e0 > self.batt_cap_emax:
            raise ValueError(
                f"batt_init_e0 ({self.batt_init_e0}) больше batt_cap_emax ({self.batt_cap_emax})"
            )
        return self

    @property
    def noise_var(self) -> float:
        """Мощность шума в ваттах."""
        return 10.0 ** ((self.noise_var_dbm - 30.0) / 10.0)

    @property
    def ref_gain_rho(self) -> float:
        """Усиление на опорном расстоянии в линейных единицах."""
        return 10.0 ** (self.ref_gain_db / 10.0)

    @property
    def feature_bits(self) -> int:
        return self.feat_h_lh * self.feat_w_lw * self.quant_q

    @property
    def default_deadline_penalty(self) -> float:
        """Штраф за пропуск дедлайна: 10 × энергия передачи на p_max в течение C слотов."""
        return 10.0 * self.slot_tau * self.deadline_c * self.p_max
