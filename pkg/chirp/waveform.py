"""Синтез линейных и квартичных chirp-сигналов, их задержанных версий и TF-трасс"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from chirp.errors import ChirpDomainError

logger = logging.getLogger(__name__)


DEFAULT_OVERSAMPLING = 4
# Полоса квартичного семейства при γ = 1.5 около [-1.05B, 1.71B], уже f_s при OSF = 4
DEFAULT_NONLINEARITY_GAIN = 1.5

# Начальная фаза e^{jπ/4} сохраняется как есть
PHASE_ORIGIN = math.pi / 4

ArrayLike = Union[float, np.ndarray]


class ChirpFamily(str, Enum):
    """Семейство сигналов: линейное или квартичное нелинейное"""
    LINEAR = "linear"
    QUARTIC = "quartic"


class ChirpDirection(str, Enum):
    """Наклон chirp: вверх (бит 1) или вниз (бит 0)"""
    UP = "up"
    DOWN = "down"

    @property
    def sign(self) -> int:
        """Знак второй экспоненты: +1 для up, -1 для down"""
        return 1 if self is ChirpDirection.UP else -1

    @classmethod
    def from_bit(cls, bit: bool) -> "ChirpDirection":
        return cls.UP if bit else cls.DOWN


@dataclass(frozen=True)
class ChirpSet:
    """
    Параметры семейства из N chirp-сигналов

    Args:
        n_signals: Число ортогональных сигналов N (максимум пользователей)
        symbol_duration: Длительность символа T в секундах
        oversampling: Коэффициент передискретизации OSF, f_s = OSF * B
        family: Линейное или квартичное семейство
        nonlinearity_gain: Коэффициент γ квартичной нелинейности
    """
    n_signals: int
    symbol_duration: float
    oversampling: int = DEFAULT_OVERSAMPLING
    family: ChirpFamily = ChirpFamily.LINEAR
    nonlinearity_gain: float = DEFAULT_NONLINEARITY_GAIN

    def __post_init__(self):
        if isinstance(self.family, str) and not isinstance(self.family, ChirpFamily):
            try:
                object.__setattr__(self, 'family', ChirpFamily(self.family.lower()))
            except ValueError:
                raise ChirpDomainError(f"Неизвестное семейство chirp: {self.family}")
        if int(self.n_signals) != self.n_signals or self.n_signals < 1:
            raise ChirpDomainError(f"n_signals должно быть целым >= 1, получено {self.n_signals}")
        if not (math.isfinite(self.symbol_duration) and self.symbol_duration > 0):
            raise ChirpDomainError(f"symbol_duration должна быть > 0, получено {self.symbol_duration}")
        if int(self.oversampling) != self.oversampling or self.oversampling < 1:
            raise ChirpDomainError(f"oversampling должен быть целым >= 1, получено {self.oversampling}")
        if not (math.isfinite(self.nonlinearity_gain) and self.nonlinearity_gain >= 0):
            raise ChirpDomainError(
                f"nonlinearity_gain должен быть >= 0, получено {self.nonlinearity_gain}"
            )

    @property
    def bandwidth(self) -> float:
        """Полная полоса B = 2N/T"""
        return 2 * self.n_signals / self.symbol_duration

    @property
    def samples_per_symbol(self) -> int:
        return self.oversampling * 2 * self.n_signals

    @property
    def sample_rate(self) -> float:
        return self.oversampling * self.bandwidth

    @property
    def sample_interval(self) -> float:
        return self.symbol_duration / self.samples_per_symbol

    @property
    def effective_gain(self) -> float:
        """γ, действующий на фазу: для линейного семейства всегда 0"""
        if self.family is ChirpFamily.LINEAR:
            return 0.0
        return float(self.nonlinearity_gain)

    def check_user(self, m: int) -> None:
        """Проверка индекса пользователя 0 <= m < N"""
        if int(m) != m or not 0 <= m < self.n_signals:
            raise ChirpDomainError(
                f"Индекс пользователя {m} вне диапазона [0, {self.n_signals})"
            )

    def user_coefficient(self, m: ArrayLike) -> ArrayLike:
        """
        Коэффициент разнесения c_m = (2m - (N-1)) / (N-1) в [-1, 1]

        Для N = 1 коэффициент равен 0.
        """
        if self.n_signals == 1:
            return np.zeros_like(np.asarray(m, dtype=float))
        return (2 * np.asarray(m, dtype=float) - (self.n_signals - 1)) / (self.n_signals - 1)

    def normalized_grid(self) -> np.ndarray:
        """Моменты отсчётов t_i / T = i / S, i = 0..S-1"""
        return np.arange(self.samples_per_symbol) / self.samples_per_symbol

    def with_family(self, family: ChirpFamily) -> "ChirpSet":
        return ChirpSet(
            n_signals=self.n_signals,
            symbol_duration=self.symbol_duration,
            oversampling=self.oversampling,
            family=family,
            nonlinearity_gain=self.nonlinearity_gain,
        )


@dataclass(frozen=True, eq=False)
class Signal:
    """
    Конечная последовательность комплексных отсчётов с шагом дискретизации

    Args:
        samples: Комплексные отсчёты в основной полосе
        sample_interval: Шаг дискретизации 1/f_s в секундах
    """
    samples: np.ndarray
    sample_interval: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size == 0:
            raise ChirpDomainError("Сигнал должен быть непустым одномерным массивом")
        if not (math.isfinite(self.sample_interval) and self.sample_interval > 0):
            raise ChirpDomainError(f"sample_interval должен быть > 0, получено {self.sample_interval}")
        object.__setattr__(self, 'samples', samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def energy(self) -> float:
        """Энергия Σ|s[i]|² · dt"""
        return float(np.sum(np.abs(self.samples) ** 2) * self.sample_interval)

    @property
    def duration(self) -> float:
        return self.samples.size * self.sample_interval

    def scaled(self, factor: complex) -> "Signal":
        return Signal(self.samples * factor, self.sample_interval)


@dataclass(frozen=True, eq=False)
class TfTrace:
    """Кривая мгновенной частоты пользователя m во TF-плоскости"""
    m: int
    times: np.ndarray
    frequencies: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.frequencies.shape:
            raise ChirpDomainError("Длины times и frequencies не совпадают")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ChirpDomainError("Моменты времени TF-трассы должны строго возрастать")

    @property
    def points(self):
        return list(zip(self.times.tolist(), self.frequencies.tolist()))


def _quartic_shape(x: np.ndarray) -> np.ndarray:
    # g(x) = 16 x²(1-x)²: g(0) = g(1) = 0, g'(0) = g'(1) = 0, g(1/2) = 1
    return 16.0 * x ** 2 * (1.0 - x) ** 2


def _quartic_shape_derivative(x: np.ndarray) -> np.ndarray:
    return 32.0 * x * (1.0 - x) * (1.0 - 2.0 * x)


def chirp_phase(chirp_set: ChirpSet, m: ArrayLike, x: ArrayLike, sign: ArrayLike = 1) -> np.ndarray:
    """
    Аналитическая фаза сигнала пользователя m в нормированные моменты x = t/T

    φ = π/4 ± πN [(x + m/N)² + γ c_m g(x)], что совпадает с πN/T² [(t + mT/N)² + Ψ_m(t)]
    при Ψ_m(t) = γ c_m T² g(t/T).

    Args:
        chirp_set: Параметры семейства
        m: Индекс пользователя (скаляр или массив, совместимый по форме с x)
        x: Нормированное время внутри символа, [0, 1)
        sign: +1 для up-chirp, -1 для down-chirp (скаляр или массив)

    Returns:
        np.ndarray: Фаза в радианах
    """
    n = chirp_set.n_signals
    x = np.asarray(x, dtype=float)
    m = np.asarray(m)
    psi = chirp_set.effective_gain * chirp_set.user_coefficient(m) * _quartic_shape(x)
    return PHASE_ORIGIN + np.asarray(sign) * (math.pi * n) * ((x + m / n) ** 2 + psi)


def gen_chirp(chirp_set: ChirpSet, m: int, direction: ChirpDirection = ChirpDirection.UP) -> Signal:
    """
    Генерация chirp-сигнала пользователя m на одном символе

    Args:
        chirp_set: Параметры семейства
        m: Индекс пользователя
        direction: Наклон chirp

    Returns:
        Signal: S = OSF·2N отсчётов с единичной огибающей

    Raises:
        ChirpDomainError: Если m вне [0, N)
    """
    chirp_set.check_user(m)
    direction = ChirpDirection(direction)
    phase = chirp_phase(chirp_set, m, chirp_set.normalized_grid(), direction.sign)
    logger.debug(
        f"Сгенерирован chirp | семейство: {chirp_set.family.value} | m={m} | "
        f"направление: {direction.value} | отсчётов: {phase.size}"
    )
    return Signal(np.exp(1j * phase), chirp_set.sample_interval)


def instantaneous_frequency(
    chirp_set: ChirpSet,
    m: int,
    t: ArrayLike,
    direction: ChirpDirection = ChirpDirection.UP,
) -> ArrayLike:
    """
    Мгновенная частота пользователя m в момент t

    Линейное семейство: (N/T²) t + m/T.
    Квартичное: (N/T²)(t + mT/N) + (N/(2T²)) Ψ_m'(t).
    Для down-chirp частота меняет знак.

    Args:
        chirp_set: Параметры семейства
        m: Индекс пользователя
        t: Момент времени в секундах, 0 <= t < T (скаляр или массив)
        direction: Наклон chirp

    Returns:
        Частота в Гц (float для скаляра, np.ndarray для массива)

    Raises:
        ChirpDomainError: Если t вне [0, T) или m вне [0, N)
    """
    chirp_set.check_user(m)
    period = chirp_set.symbol_duration
    n = chirp_set.n_signals
    t_arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t_arr)) or np.any(t_arr < 0) or np.any(t_arr >= period):
        raise ChirpDomainError(f"Момент времени вне [0, T): T={period}")

    frequency = n * t_arr / period ** 2 + m / period
    gain = chirp_set.effective_gain
    if gain:
        # Ψ'(t) = γ c_m T g'(t/T)
        psi_derivative = gain * chirp_set.user_coefficient(m) * period * _quartic_shape_derivative(t_arr / period)
        frequency = frequency + n / (2 * period ** 2) * psi_derivative
    frequency = ChirpDirection(direction).sign * frequency
    if np.ndim(t) == 0:
        return float(frequency)
    return frequency


def stream_symbol_index(x: ArrayLike, delta: ArrayLike, n_symbols: int) -> np.ndarray:
    """
    Номер символа потока (0 текущий, -1 предыдущий, ...) для каждого момента x

    Raises:
        ChirpDomainError: Если моменты выходят за n_symbols символов
    """
    index = np.floor(np.asarray(x, dtype=float) - np.asarray(delta, dtype=float)).astype(int)
    if index.size and (index.min() < -(n_symbols - 1) or index.max() > 0):
        raise ChirpDomainError(
            f"Моменты выходят за {n_symbols} переданных символов потока"
        )
    return index


def gen_stream(
    chirp_set: ChirpSet,
    m: ArrayLike,
    x: ArrayLike,
    delta: ArrayLike,
    signs: ArrayLike,
) -> np.ndarray:
    """
    Поток символов пользователя m, задержанный на delta·T, в нормированные моменты x

    Символ j занимает интервал [delta + j, delta + j + 1) в единицах T; последний
    элемент signs относится к текущему символу (j = 0), предыдущие к j = -1, -2, ...
    Значения вычисляются аналитически, без интерполяции.

    Args:
        chirp_set: Параметры семейства
        m: Индекс пользователя (скаляр или массив)
        x: Нормированные моменты t/T, последняя ось отсчётов
        delta: Нормированная задержка eps/T (совместима с x[..., :1])
        signs: Наклоны символов (+1/-1), последняя ось от старого к текущему

    Returns:
        np.ndarray: Комплексные отсчёты формы broadcast(x, delta)

    Raises:
        ChirpDomainError: Если моменты выходят за покрытые символы
    """
    signs = np.asarray(signs)
    n_symbols = signs.shape[-1]

    relative = np.asarray(x, dtype=float) - np.asarray(delta, dtype=float)
    index = stream_symbol_index(x, delta, n_symbols)
    local = relative - index
    signs = np.broadcast_to(signs, relative.shape[:-1] + (n_symbols,))
    sign = np.take_along_axis(signs, index + n_symbols - 1, axis=-1)
    return np.exp(1j * chirp_phase(chirp_set, m, local, sign))


def gen_delayed_chirp(
    chirp_set: ChirpSet,
    k: int,
    eps_k: float,
    direction: ChirpDirection = ChirpDirection.UP,
    previous_direction: Optional[ChirpDirection] = None,
) -> Signal:
    """
    Сигнал пользователя k, задержанный на eps_k, в окне наблюдения [0, T)

    На [eps_k, T) звучит текущий символ в момент (t - eps_k), на [0, eps_k)
    хвост предыдущего символа в момент (t - eps_k + T).

    Args:
        chirp_set: Параметры семейства
        k: Индекс пользователя
        eps_k: Задержка в секундах, 0 <= eps_k < T
        direction: Наклон текущего символа
        previous_direction: Наклон предыдущего символа (по умолчанию как у текущего)

    Returns:
        Signal: Отсчёты окна наблюдения

    Raises:
        ChirpDomainError: Если eps_k вне [0, T) или k вне [0, N)
    """
    chirp_set.check_user(k)
    if not (math.isfinite(eps_k) and 0 <= eps_k < chirp_set.symbol_duration):
        raise ChirpDomainError(
            f"Задержка {eps_k} вне [0, T), T={chirp_set.symbol_duration}"
        )
    direction = ChirpDirection(direction)
    previous = direction if previous_direction is None else ChirpDirection(previous_direction)
    samples = gen_stream(
        chirp_set,
        k,
        chirp_set.normalized_grid(),
        eps_k / chirp_set.symbol_duration,
        np.array([previous.sign, direction.sign]),
    )
    return Signal(samples, chirp_set.sample_interval)


def tf_trace(
    chirp_set: ChirpSet,
    m: int,
    n_points: int,
    direction: ChirpDirection = ChirpDirection.UP,
) -> TfTrace:
    """
    TF-трасса пользователя m на равномерной сетке из n_points моментов в [0, T)

    Raises:
        ChirpDomainError: Если n_points < 2
    """
    if int(n_points) != n_points or n_points < 2:
        raise ChirpDomainError(f"n_points должно быть >= 2, получено {n_points}")
    times = np.arange(n_points) / n_points * chirp_set.symbol_duration
    frequencies = instantaneous_frequency(chirp_set, m, times, direction)
    return TfTrace(m=int(m), times=times, frequencies=np.asarray(frequencies))


def frequency_extent(chirp_set: ChirpSet, n_points: int = 2048) -> Tuple[float, float]:
    """Минимум и максимум мгновенной частоты по всем пользователям и моментам"""
    lows, highs = [], []
    for m in range(chirp_set.n_signals):
        trace = tf_trace(chirp_set, m, n_points)
        lows.append(trace.frequencies.min())
        highs.append(trace.frequencies.max())
    return float(min(lows)), float(max(highs))
