"""
Monte Carlo оценка BER chirp-сигнализации при квазисинхронном доступе

Испытания объединяются в блоки. Каждый блок получает собственный генератор,
выведенный из (seed, номер точки, номер блока), поэтому результат не зависит
от числа потоков. Порядок розыгрыша в блоке: задержки, биты, шум, канал.
"""

import asyncio
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from channel.fading import complex_gaussian, fast_fading_process, noise_variance, ricean_gains
from channel.models import ChannelKind, ChannelSpec
from channel.tdl import ag_realization
from chirp.errors import ChirpDomainError
from chirp.receiver import DetectorMode, decide_bits
from chirp.waveform import ChirpSet, Signal, gen_stream, stream_symbol_index

logger = logging.getLogger(__name__)


# Два значения σ/T для серий в AG-канале
SIGMA_PRESETS = (0.05, 0.1)
DEFAULT_SIGMA_FRAC = 0.1
DEFAULT_EBN0_GRID = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
DEFAULT_MIN_BIT_ERRORS = 200
MIN_ALLOWED_BIT_ERRORS = 100
DEFAULT_MAX_BITS = 20_000_000
DEFAULT_BLOCK_SIZE = 2048
# Символы потока j = -2, -1, 0: задержка пользователя плюс задержка луча < 2T
STREAM_SYMBOLS = 3
WILSON_Z = float(stats.norm.ppf(0.975))


@dataclass(frozen=True)
class SimConfig:
    """
    Параметры BER-эксперимента

    Args:
        chirp_set: Семейство сигналов
        n_active_users: Число активных пользователей K (индексы 0..K-1, 0 желаемый)
        offset_sigma_frac: σ/T нормального распределения задержек
        channel: Конфигурация канала
        mode: Режим детектора
        ebn0_grid: Сетка Eb/N0 в дБ
        min_bit_errors: Остановка точки после стольких ошибок
        max_bits: Предельное число бит на точку
        block_size: Испытаний в одном блоке
        seed: 64-битное зерно эксперимента
    """
    chirp_set: ChirpSet
    n_active_users: int
    offset_sigma_frac: float = DEFAULT_SIGMA_FRAC
    channel: ChannelSpec = field(default_factory=ChannelSpec.awgn)
    mode: DetectorMode = DetectorMode.NONCOHERENT
    ebn0_grid: Tuple[float, ...] = DEFAULT_EBN0_GRID
    min_bit_errors: int = DEFAULT_MIN_BIT_ERRORS
    max_bits: int = DEFAULT_MAX_BITS
    block_size: int = DEFAULT_BLOCK_SIZE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'mode', DetectorMode(self.mode))
        object.__setattr__(self, 'ebn0_grid', tuple(float(v) for v in self.ebn0_grid))
        n = self.chirp_set.n_signals
        if int(self.n_active_users) != self.n_active_users or not 1 <= self.n_active_users <= n:
            raise ChirpDomainError(f"Число пользователей K={self.n_active_users} вне [1, {n}]")
        if not (math.isfinite(self.offset_sigma_frac) and self.offset_sigma_frac >= 0):
            raise ChirpDomainError(f"offset_sigma_frac должно быть >= 0, получено {self.offset_sigma_frac}")
        if not self.ebn0_grid:
            raise ChirpDomainError("Сетка Eb/N0 пуста")
        for value in self.ebn0_grid:
            if math.isnan(value) or value == -math.inf:
                raise ChirpDomainError(f"Недопустимое значение Eb/N0: {value}")
        if self.min_bit_errors < MIN_ALLOWED_BIT_ERRORS:
            raise ChirpDomainError(
                f"min_bit_errors должно быть >= {MIN_ALLOWED_BIT_ERRORS}, получено {self.min_bit_errors}"
            )
        if self.max_bits < 1 or self.block_size < 1:
            raise ChirpDomainError("max_bits и block_size должны быть >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ChirpDomainError(f"seed должно быть 64-битным неотрицательным, получено {self.seed}")
        if self.channel.kind is ChannelKind.AG_TDL and self.channel.profile.max_delay >= self.chirp_set.symbol_duration:
            raise ChirpDomainError("Задержки лучей должны быть меньше длительности символа")

    @property
    def reference_energy(self) -> float:
        """Средняя принятая энергия бита желаемого пользователя"""
        return self.chirp_set.symbol_duration * self.channel.mean_power

    def describe(self) -> Dict[str, Any]:
        """Все параметры эксперимента для манифеста"""
        return {
            "n_signals": self.chirp_set.n_signals,
            "symbol_duration": self.chirp_set.symbol_duration,
            "oversampling": self.chirp_set.oversampling,
            "family": self.chirp_set.family.value,
            "nonlinearity_gain": self.chirp_set.nonlinearity_gain,
            "users": self.n_active_users,
            "sigma_frac": self.offset_sigma_frac,
            "channel": self.channel.describe(),
            "mode": self.mode.value,
            "ebn0_grid": list(self.ebn0_grid),
            "min_bit_errors": self.min_bit_errors,
            "max_bits": self.max_bits,
            "block_size": self.block_size,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class BerPoint:
    """
    Результат одной точки сетки Eb/N0

    Args:
        ebn0_db: Eb/N0 в дБ
        bits_simulated: Число переданных бит
        bit_errors: Число ошибок
        min_bit_errors: Целевое число ошибок точки
    """
    ebn0_db: float
    bits_simulated: int
    bit_errors: int
    min_bit_errors: int = DEFAULT_MIN_BIT_ERRORS

    def __post_init__(self):
        if self.bits_simulated < 1 or not 0 <= self.bit_errors <= self.bits_simulated:
            raise ChirpDomainError(
                f"Некорректная точка BER: {self.bit_errors} ошибок на {self.bits_simulated} бит"
            )

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_simulated

    @property
    def standard_error(self) -> float:
        """Биномиальная стандартная ошибка оценки BER"""
        p = self.ber
        return math.sqrt(p * (1 - p) / self.bits_simulated)

    @property
    def wilson_95_halfwidth(self) -> float:
        """Полуширина 95% интервала Вилсона"""
        n = self.bits_simulated
        p = self.ber
        z2 = WILSON_Z ** 2
        return WILSON_Z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)

    @property
    def wilson_95_interval(self) -> Tuple[float, float]:
        n = self.bits_simulated
        z2 = WILSON_Z ** 2
        center = (self.ber + z2 / (2 * n)) / (1 + z2 / n)
        half = self.wilson_95_halfwidth
        return max(0.0, center - half), min(1.0, center + half)

    @property
    def reached_min_errors(self) -> bool:
        """False, если точка остановлена по max_bits"""
        return self.bit_errors >= self.min_bit_errors


@dataclass(frozen=True, eq=False)
class ChannelState:
    """
    Состояние канала для блока испытаний (ведущая ось - номер испытания)

    Args:
        symbol_gains: Плоские коэффициенты (B, K, STREAM_SYMBOLS) по символам потока
        sample_gains: Поотсчётные коэффициенты быстрых замираний (B, K, S) или None
        tap_gains: Коэффициенты лучей AG-канала (B, K, STREAM_SYMBOLS, L) или None
        tap_shifts: Задержки лучей в отсчётах (L,) или None
    """
    symbol_gains: np.ndarray
    sample_gains: Optional[np.ndarray] = None
    tap_gains: Optional[np.ndarray] = None
    tap_shifts: Optional[np.ndarray] = None

    @property
    def n_trials(self) -> int:
        return self.symbol_gains.shape[0]

    def desired_gains(self) -> np.ndarray:
        """Коэффициент канала желаемого пользователя на текущем символе, форма (B,)"""
        if self.tap_gains is not None:
            return self.tap_gains[:, 0, -1, 0]
        gains = self.symbol_gains[:, 0, -1]
        if self.sample_gains is not None:
            gains = gains * self.sample_gains[:, 0, :].mean(axis=-1)
        return gains


def draw_offsets(
    n_users: int,
    sigma_frac: float,
    symbol_duration: float,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> np.ndarray:
    """
    Квазисинхронные задержки пользователей

    Желаемый пользователь 0 получает 0, остальные (x mod T) при x ~ N(0, (σ·T)²).

    Args:
        n_users: Число активных пользователей K
        sigma_frac: σ/T, >= 0
        symbol_duration: T в секундах
        rng: Генератор случайных чисел
        size: Число испытаний (ведущая ось), None для одного

    Returns:
        np.ndarray: Задержки в [0, T), форма (K,) или (size, K)
    """
    if not (math.isfinite(sigma_frac) and sigma_frac >= 0):
        raise ChirpDomainError(f"sigma_frac должно быть >= 0, получено {sigma_frac}")
    shape = (n_users - 1,) if size is None else (size, n_users - 1)
    raw = rng.normal(0.0, sigma_frac * symbol_duration, shape)
    wrapped = np.mod(raw, symbol_duration)
    # Округление mod может дать ровно T
    wrapped[wrapped >= symbol_duration] = 0.0
    desired = np.zeros(shape[:-1] + (1,))
    return np.concatenate([desired, np.abs(wrapped)], axis=-1)


def _user_phases(n_users: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Случайные фазы несущей мешающих пользователей, у желаемого фаза 0"""
    phases = np.exp(1j * rng.uniform(-math.pi, math.pi, (size, n_users)))
    phases[:, 0] = 1.0
    return phases


def draw_channel_state(config: SimConfig, rng: np.random.Generator, size: int = 1) -> ChannelState:
    """
    Розыгрыш состояния канала для size испытаний

    Плоские каналы дают каждому пользователю независимые коэффициенты на каждый
    символ потока, мешающие пользователи получают случайную фазу несущей.
    AG-канал использует одну реализацию лучей на испытание для всех
    пользователей, с независимой фазой LOS-луча у каждого мешающего.
    """
    users = config.n_active_users
    channel = config.channel
    ones = np.ones((size, users, STREAM_SYMBOLS), dtype=complex)

    if channel.kind is ChannelKind.AWGN:
        return ChannelState(symbol_gains=ones)

    if channel.kind is ChannelKind.RICEAN_MEMORYLESS:
        gains = ricean_gains(channel.k_db, rng, (size, users, STREAM_SYMBOLS))
        phases = _user_phases(users, rng, size)
        return ChannelState(symbol_gains=gains * phases[..., None])

    if channel.kind is ChannelKind.RICEAN_FAST:
        grid = config.chirp_set.normalized_grid()
        series = fast_fading_process(channel.k_db, channel.fd_t, grid, rng, size=(size, users))
        phases = _user_phases(users, rng, size)
        return ChannelState(symbol_gains=ones, sample_gains=series * phases[..., None])

    realization = ag_realization(channel.profile, channel.k_db, STREAM_SYMBOLS, rng, size=size)
    phases = _user_phases(users, rng, size)
    tap_gains = np.repeat(realization.gains[:, None, :, :], users, axis=1)
    tap_gains[..., 0] = tap_gains[..., 0] * phases[..., None]
    return ChannelState(
        symbol_gains=ones,
        tap_gains=tap_gains,
        tap_shifts=realization.delay_samples(config.chirp_set.sample_interval),
    )


def _superpose(
    chirp_set: ChirpSet,
    offsets: np.ndarray,
    signs: np.ndarray,
    state: ChannelState,
) -> np.ndarray:
    """Сумма задержанных потоков пользователей через канал, форма (B, S)"""
    period = chirp_set.symbol_duration
    samples = chirp_set.samples_per_symbol
    users = np.arange(offsets.shape[-1])[None, :, None]
    grid = chirp_set.normalized_grid()
    delta = offsets[..., None] / period

    if state.tap_gains is None:
        waves = gen_stream(chirp_set, users, grid, delta, signs)
        index = stream_symbol_index(grid, delta, STREAM_SYMBOLS)
        index = np.broadcast_to(index, waves.shape)
        gains = np.take_along_axis(state.symbol_gains, index + STREAM_SYMBOLS - 1, axis=-1)
        if state.sample_gains is not None:
            gains = gains * state.sample_gains
        return np.sum(waves * gains, axis=1)

    rx = np.zeros((offsets.shape[0], samples), dtype=complex)
    for tap, shift in enumerate(state.tap_shifts):
        tap_delta = delta + shift / samples
        waves = gen_stream(chirp_set, users, grid, tap_delta, signs)
        index = np.broadcast_to(stream_symbol_index(grid, tap_delta, STREAM_SYMBOLS), waves.shape)
        gains = np.take_along_axis(state.tap_gains[..., tap], index + STREAM_SYMBOLS - 1, axis=-1)
        rx += np.sum(waves * gains, axis=1)
    return rx


def _bits_to_signs(bits: np.ndarray) -> np.ndarray:
    return np.where(bits, 1, -1)


def compose_rx_symbol(
    config: SimConfig,
    bits: Sequence[Sequence[int]],
    offsets: Sequence[float],
    channel_state: Optional[ChannelState] = None,
    rng: Optional[np.random.Generator] = None,
    ebn0_db: float = math.inf,
) -> Signal:
    """
    Принятое окно наблюдения [0, T) для одного испытания

    Args:
        config: Параметры эксперимента
        bits: Биты пользователей формы (K, n), n <= 3, от старого символа к текущему;
            недостающие старые символы повторяют самый старый из переданных
        offsets: Задержки пользователей в секундах, форма (K,)
        channel_state: Состояние канала для одного испытания (по умолчанию единичные коэффициенты)
        rng: Генератор шума (обязателен при конечном Eb/N0)
        ebn0_db: Eb/N0 в дБ, +inf для режима без шума

    Returns:
        Signal: Окно из S отсчётов

    Raises:
        ChirpDomainError: Несогласованные размерности
    """
    users = config.n_active_users
    period = config.chirp_set.symbol_duration
    bits = np.asarray(bits, dtype=bool)
    offsets = np.asarray(offsets, dtype=float)
    if bits.ndim != 2 or bits.shape[0] != users or not 1 <= bits.shape[1] <= STREAM_SYMBOLS:
        raise ChirpDomainError(f"bits должен иметь форму ({users}, 1..{STREAM_SYMBOLS}), получено {bits.shape}")
    if offsets.shape != (users,):
        raise ChirpDomainError(f"offsets должен иметь форму ({users},), получено {offsets.shape}")
    if np.any(offsets < 0) or np.any(offsets >= period):
        raise ChirpDomainError("Задержки должны лежать в [0, T)")
    if bits.shape[1] < STREAM_SYMBOLS:
        pad = np.repeat(bits[:, :1], STREAM_SYMBOLS - bits.shape[1], axis=1)
        bits = np.concatenate([pad, bits], axis=1)

    state = channel_state if channel_state is not None else ChannelState(
        symbol_gains=np.ones((1, users, STREAM_SYMBOLS), dtype=complex)
    )
    if state.n_trials != 1 or state.symbol_gains.shape[1] != users:
        raise ChirpDomainError("Состояние канала должно описывать одно испытание с K пользователями")

    rx = _superpose(config.chirp_set, offsets[None, :], _bits_to_signs(bits)[None], state)[0]
    variance = noise_variance(config.reference_energy, ebn0_db, 1, config.chirp_set.sample_interval)
    if variance > 0:
        if rng is None:
            raise ChirpDomainError("Для добавления шума нужен генератор")
        rx = rx + complex_gaussian(rng, rx.shape, variance)
    return Signal(rx, config.chirp_set.sample_interval)


def block_rng(seed: int, point_index: int, block_index: int) -> np.random.Generator:
    """Генератор блока, выведенный из зерна и номеров точки и блока"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point_index, block_index)))


def run_block(config: SimConfig, point_index: int, block_index: int, n_trials: int) -> int:
    """
    Один блок испытаний точки сетки

    Returns:
        int: Число ошибочных бит желаемого пользователя
    """
    chirp_set = config.chirp_set
    users = config.n_active_users
    ebn0_db = config.ebn0_grid[point_index]
    rng = block_rng(config.seed, point_index, block_index)

    offsets = draw_offsets(users, config.offset_sigma_frac, chirp_set.symbol_duration, rng, n_trials)
    bits = rng.integers(0, 2, size=(n_trials, users, STREAM_SYMBOLS)).astype(bool)
    noise = complex_gaussian(rng, (n_trials, chirp_set.samples_per_symbol))
    state = draw_channel_state(config, rng, n_trials)

    rx = _superpose(chirp_set, offsets, _bits_to_signs(bits), state)
    variance = noise_variance(config.reference_energy, ebn0_db, 1, chirp_set.sample_interval)
    rx = rx + math.sqrt(variance) * noise

    gains = state.desired_gains() if config.mode is DetectorMode.COHERENT else None
    decisions = decide_bits(rx, chirp_set, 0, config.mode, gains)
    return int(np.count_nonzero(decisions != bits[:, 0, -1]))


def _block_length(config: SimConfig, block_index: int) -> int:
    return min(config.block_size, config.max_bits - block_index * config.block_size)


async def _simulate_point(
    loop: asyncio.AbstractEventLoop,
    executor: ThreadPoolExecutor,
    config: SimConfig,
    point_index: int,
    workers: int,
) -> BerPoint:
    """Блоки точки запускаются волнами по workers, итог определяется в порядке блоков"""
    ebn0_db = config.ebn0_grid[point_index]
    n_blocks = math.ceil(config.max_bits / config.block_size)
    bits = errors = 0
    block = 0
    while block < n_blocks:
        wave = list(range(block, min(block + workers, n_blocks)))
        futures = [
            loop.run_in_executor(executor, run_block, config, point_index, b, _block_length(config, b))
            for b in wave
        ]
        results = await asyncio.gather(*futures)
        for b, block_errors in zip(wave, results):
            bits += _block_length(config, b)
            errors += block_errors
            logger.debug(
                f"Блок {b} | Eb/N0={ebn0_db} дБ | бит: {bits} | ошибок: {errors}"
            )
            if errors >= config.min_bit_errors or bits >= config.max_bits:
                return BerPoint(ebn0_db, bits, errors, config.min_bit_errors)
        block += len(wave)
    return BerPoint(ebn0_db, bits, errors, config.min_bit_errors)


async def run_ber_async(config: SimConfig, workers: int = 1) -> List[BerPoint]:
    """
    BER по сетке Eb/N0 с параллельным расчётом блоков

    Args:
        config: Параметры эксперимента
        workers: Число потоков

    Returns:
        List[BerPoint]: Точки в порядке сетки
    """
    if workers < 1:
        raise ChirpDomainError(f"workers должно быть >= 1, получено {workers}")
    loop = asyncio.get_running_loop()
    logger.info(
        f"Запуск BER | семейство: {config.chirp_set.family.value} | канал: {config.channel.kind.value} | "
        f"K={config.n_active_users} | σ={config.offset_sigma_frac}T | режим: {config.mode.value} | "
        f"точек: {len(config.ebn0_grid)} | seed={config.seed} | потоков: {workers}"
    )
    points: List[BerPoint] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for point_index in range(len(config.ebn0_grid)):
            point = await _simulate_point(loop, executor, config, point_index, workers)
            if point.reached_min_errors:
                logger.info(
                    f"Eb/N0={point.ebn0_db} дБ | BER={point.ber:.3e} | ошибок: {point.bit_errors} | бит: {point.bits_simulated}"
                )
            else:
                logger.warning(
                    f"Eb/N0={point.ebn0_db} дБ остановлена по max_bits | "
                    f"ошибок: {point.bit_errors} из {point.min_bit_errors} | бит: {point.bits_simulated}"
                )
            points.append(point)
    return points


def run_ber(config: SimConfig, workers: int = 1) -> List[BerPoint]:
    """Синхронная обёртка над run_ber_async"""
    return asyncio.run(run_ber_async(config, workers))
