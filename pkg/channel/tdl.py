"""
AG-канал холмистой пригородной местности: линия задержки с прерывистыми лучами

Луч 1 (LOS) и луч 2 (отражение от земли) присутствуют всегда, лучи 3-6
включаются и выключаются по геометрическим длительностям в символах.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from channel.fading import complex_gaussian, ricean_gains
from chirp.errors import ChirpDomainError, ProfileError
from chirp.waveform import Signal

logger = logging.getLogger(__name__)


MAX_TAPS = 6
FIRST_INTERMITTENT_TAP = 3
PROBABILITY_TOLERANCE = 1e-6


class TapFading(str, Enum):
    """Тип замираний луча"""
    LOS_RICEAN = "los_ricean"
    RAYLEIGH = "rayleigh"
    FIXED = "fixed"
    # Постоянная амплитуда, равномерная фаза на реализацию (отражение от земли)
    SPECULAR = "specular"


@dataclass(frozen=True)
class TapSpec:
    """
    Параметры одного луча

    Args:
        delay: Задержка в секундах
        power_db: Средняя мощность в дБ относительно LOS-луча
        fading: Тип замираний
        intermittent: Луч включается и выключается
        on_probability: Доля символов, на которых луч включён
        mean_on_symbols: Средняя длительность включённого состояния в символах
        mean_off_symbols: Средняя длительность выключенного состояния (выводится из p, если не задана)
    """
    delay: float
    power_db: float
    fading: TapFading = TapFading.FIXED
    intermittent: bool = False
    on_probability: float = 1.0
    mean_on_symbols: Optional[float] = None
    mean_off_symbols: Optional[float] = None

    @property
    def amplitude(self) -> float:
        return 10 ** (self.power_db / 20)

    @property
    def power(self) -> float:
        return 10 ** (self.power_db / 10)

    @property
    def mean_on_power(self) -> float:
        """Средняя мощность с учётом доли включённого состояния"""
        return self.power * (self.on_probability if self.intermittent else 1.0)

    def validated(self, index: int) -> "TapSpec":
        """
        Проверка луча с номером index (с единицы), возвращает луч с выведенным mean_off

        Raises:
            ProfileError: С ключом вида 'tap3.on_probability'
        """
        prefix = f"tap{index}"
        if not math.isfinite(self.delay) or self.delay < 0:
            raise ProfileError(f"{prefix}.delay_us", f"задержка должна быть >= 0, получено {self.delay}")
        if not math.isfinite(self.power_db):
            raise ProfileError(f"{prefix}.power_db", f"мощность должна быть конечной, получено {self.power_db}")
        try:
            fading = TapFading(self.fading)
        except ValueError:
            raise ProfileError(f"{prefix}.fading", f"неизвестный тип замираний '{self.fading}'")

        if not self.intermittent:
            if self.on_probability != 1.0 or self.mean_on_symbols is not None or self.mean_off_symbols is not None:
                raise ProfileError(
                    f"{prefix}.on_probability", "параметры прерывистости заданы для постоянного луча"
                )
            return TapSpec(self.delay, self.power_db, fading)

        if index < FIRST_INTERMITTENT_TAP:
            raise ProfileError(
                f"{prefix}.on_probability", f"прерывистыми могут быть только лучи {FIRST_INTERMITTENT_TAP}-{MAX_TAPS}"
            )
        p = self.on_probability
        if not (math.isfinite(p) and 0 <= p <= 1):
            raise ProfileError(f"{prefix}.on_probability", f"вероятность вне [0, 1]: {p}")

        mean_on, mean_off = self.mean_on_symbols, self.mean_off_symbols
        if 0 < p < 1:
            if mean_on is None:
                raise ProfileError(f"{prefix}.mean_on_symbols", "не задана средняя длительность включения")
            if not (math.isfinite(mean_on) and mean_on >= 1):
                raise ProfileError(f"{prefix}.mean_on_symbols", f"должна быть >= 1 символа, получено {mean_on}")
            derived_off = mean_on * (1 - p) / p
            if mean_off is None:
                mean_off = derived_off
            elif abs(mean_on / (mean_on + mean_off) - p) > PROBABILITY_TOLERANCE:
                raise ProfileError(
                    f"{prefix}.mean_off_symbols",
                    f"mean_on/(mean_on+mean_off) = {mean_on / (mean_on + mean_off):.6f} не равно p = {p}",
                )
            if mean_off < 1:
                raise ProfileError(
                    f"{prefix}.mean_off_symbols", f"средняя длительность выключения {mean_off:.3f} < 1 символа"
                )
        return TapSpec(self.delay, self.power_db, fading, True, p, mean_on, mean_off)

    def transition_probabilities(self) -> Tuple[float, float]:
        """Вероятности переходов (вкл -> выкл, выкл -> вкл) за один символ"""
        if not self.intermittent or self.on_probability == 1.0:
            return 0.0, 1.0
        if self.on_probability == 0.0:
            return 1.0, 0.0
        return 1 / self.mean_on_symbols, 1 / self.mean_off_symbols


@dataclass(frozen=True)
class TapProfileSet:
    """
    Профиль AG-канала: упорядоченный набор лучей

    Raises:
        ProfileError: Нарушены ограничения профиля
    """
    name: str
    taps: Tuple[TapSpec, ...]

    def __post_init__(self):
        taps = tuple(self.taps)
        if not 1 <= len(taps) <= MAX_TAPS:
            raise ProfileError("taps", f"число лучей должно быть от 1 до {MAX_TAPS}, получено {len(taps)}")
        checked = tuple(tap.validated(index) for index, tap in enumerate(taps, start=1))
        if checked[0].delay != 0:
            raise ProfileError("tap1.delay_us", "задержка LOS-луча должна быть 0")
        if checked[0].power_db != 0:
            raise ProfileError("tap1.power_db", "мощность LOS-луча должна быть 0 дБ")
        for index in range(1, len(checked)):
            if checked[index].delay <= checked[index - 1].delay:
                raise ProfileError(f"tap{index + 1}.delay_us", "задержки должны строго возрастать")
        object.__setattr__(self, 'taps', checked)

    @property
    def delays(self) -> np.ndarray:
        return np.array([tap.delay for tap in self.taps])

    @property
    def max_delay(self) -> float:
        return float(self.taps[-1].delay)

    @property
    def mean_powers(self) -> np.ndarray:
        """Средние мощности лучей с учётом прерывистости (линейные)"""
        return np.array([tap.mean_on_power for tap in self.taps])

    @property
    def total_mean_power(self) -> float:
        return float(self.mean_powers.sum())

    def rms_delay_spread(self) -> float:
        """RMS-разброс задержек среднего профиля"""
        return _rms_spread(self.mean_powers, self.delays)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """
    Реализация AG-канала на n_symbols символов

    Args:
        delays: Задержки лучей в секундах, форма (L,)
        gains: Комплексные коэффициенты, форма (..., n_symbols, L)
        states: Состояния вкл/выкл, форма как у gains
        profile_name: Имя профиля
    """
    delays: np.ndarray
    gains: np.ndarray
    states: np.ndarray
    profile_name: str = "custom"

    def __post_init__(self):
        if self.gains.shape != self.states.shape:
            raise ChirpDomainError("Формы gains и states не совпадают")
        if self.gains.shape[-1] != self.delays.size:
            raise ChirpDomainError("Число лучей в gains не совпадает с числом задержек")
        if not np.all(np.isfinite(self.gains)):
            raise ChirpDomainError("Коэффициенты лучей должны быть конечными")
        if np.any(self.gains[~self.states] != 0):
            raise ChirpDomainError("Выключенные лучи должны иметь нулевой коэффициент")

    @property
    def n_symbols(self) -> int:
        return self.gains.shape[-2]

    def delay_samples(self, sample_interval: float) -> np.ndarray:
        """Задержки лучей, округлённые до ближайшего отсчёта"""
        return np.rint(self.delays / sample_interval).astype(int)


def _draw_states(tap: TapSpec, shape: Tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Цепочка Маркова вкл/выкл по последней оси, начальное состояние стационарное"""
    if not tap.intermittent:
        return np.ones(shape, dtype=bool)
    off_rate, on_rate = tap.transition_probabilities()
    uniforms = rng.random(shape)
    states = np.empty(shape, dtype=bool)
    states[..., 0] = uniforms[..., 0] < tap.on_probability
    for symbol in range(1, shape[-1]):
        previous = states[..., symbol - 1]
        states[..., symbol] = np.where(
            previous, uniforms[..., symbol] >= off_rate, uniforms[..., symbol] < on_rate
        )
    return states


def ag_realization(
    profile: TapProfileSet,
    k_db: float,
    n_symbols: int,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> ChannelRealization:
    """
    Реализация AG-канала по профилю

    LOS-луч получает коэффициенты Райса(k_db) на каждый символ, рэлеевские лучи
    свежие коэффициенты CN(0, 1), фиксированные лучи постоянный коэффициент 1,
    зеркальные лучи одну случайную фазу на всю реализацию.
    Все коэффициенты масштабируются на среднюю мощность луча, выключенные
    лучи обнуляются.

    Args:
        profile: Профиль лучей
        k_db: K-фактор LOS-луча в дБ
        n_symbols: Число символов
        rng: Генератор случайных чисел
        size: Число независимых реализаций (ведущая ось), None для одной

    Returns:
        ChannelRealization: Коэффициенты формы ([size,] n_symbols, L)
    """
    if int(n_symbols) != n_symbols or n_symbols < 1:
        raise ChirpDomainError(f"n_symbols должно быть >= 1, получено {n_symbols}")
    shape = (n_symbols,) if size is None else (size, n_symbols)
    columns: List[np.ndarray] = []
    state_columns: List[np.ndarray] = []
    for tap in profile.taps:
        if tap.fading is TapFading.LOS_RICEAN:
            gains = ricean_gains(k_db, rng, shape)
        elif tap.fading is TapFading.RAYLEIGH:
            gains = complex_gaussian(rng, shape)
        elif tap.fading is TapFading.SPECULAR:
            phase = rng.uniform(0.0, 2 * np.pi, shape[:-1])
            gains = np.repeat(np.exp(1j * phase)[..., None], int(n_symbols), axis=-1)
        else:
            gains = np.ones(shape, dtype=complex)
        states = _draw_states(tap, shape, rng)
        columns.append(np.where(states, tap.amplitude * gains, 0.0))
        state_columns.append(states)
    return ChannelRealization(
        delays=profile.delays,
        gains=np.stack(columns, axis=-1),
        states=np.stack(state_columns, axis=-1),
        profile_name=profile.name,
    )


def apply_tdl(sig: Signal, realization: ChannelRealization, symbol_index: int) -> Signal:
    """
    Свёртка одного символа с лучами реализации

    Задержки округляются до ближайшего отсчёта. Длина выхода равна длине входа
    плюс максимальная задержка в отсчётах; хвост относится к следующему окну.

    Raises:
        ChirpDomainError: Если задержка луча >= длительности символа
    """
    if realization.gains.ndim != 2:
        raise ChirpDomainError("apply_tdl ожидает одну реализацию формы (n_symbols, L)")
    if not 0 <= symbol_index < realization.n_symbols:
        raise ChirpDomainError(f"Номер символа {symbol_index} вне [0, {realization.n_symbols})")
    length = len(sig)
    if np.any(realization.delays >= sig.duration):
        raise ChirpDomainError("Задержка луча должна быть меньше длительности символа")
    shifts = realization.delay_samples(sig.sample_interval)
    output = np.zeros(length + int(shifts.max()), dtype=complex)
    for shift, gain in zip(shifts, realization.gains[symbol_index]):
        if gain != 0:
            output[shift:shift + length] += gain * sig.samples
    return Signal(output, sig.sample_interval)


def _rms_spread(powers: np.ndarray, delays: np.ndarray) -> float:
    total = float(np.sum(powers))
    if total <= 0:
        raise ChirpDomainError("Профиль задержек нулевой")
    mean_delay = float(np.sum(powers * delays)) / total
    second_moment = float(np.sum(powers * delays ** 2)) / total
    return math.sqrt(max(0.0, second_moment - mean_delay ** 2))


def delay_spread(realization: ChannelRealization) -> float:
    """
    RMS-разброс задержек усреднённого по времени профиля мощности

    Raises:
        ChirpDomainError: Если все лучи всегда выключены
    """
    powers = np.abs(realization.gains) ** 2
    mean_pdp = powers.reshape(-1, realization.delays.size).mean(axis=0)
    return _rms_spread(mean_pdp, realization.delays)


def pdp_rows(realization: ChannelRealization) -> List[Tuple[int, float, float]]:
    """Строки PDP (номер символа, задержка луча в секундах, мощность в дБ) для включённых лучей"""
    if realization.gains.ndim != 2:
        raise ChirpDomainError("pdp_rows ожидает одну реализацию формы (n_symbols, L)")
    rows = []
    powers = np.abs(realization.gains) ** 2
    for symbol in range(realization.n_symbols):
        for tap, delay in enumerate(realization.delays):
            if realization.states[symbol, tap] and powers[symbol, tap] > 0:
                rows.append((symbol, float(delay), float(10 * np.log10(powers[symbol, tap]))))
    return rows
