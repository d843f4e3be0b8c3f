"""Аддитивный шум и плоские замирания Райса (без памяти и быстрые)"""

import logging
import math
from typing import Optional, Tuple, Union

import numpy as np

from chirp.errors import ChirpDomainError
from chirp.waveform import Signal

logger = logging.getLogger(__name__)


# При K >= 100 дБ канал считается чистым LOS
PURE_LOS_K_DB = 100.0
DEFAULT_SINUSOIDS = 32

Shape = Union[int, Tuple[int, ...], None]


def complex_gaussian(rng: np.random.Generator, shape: Shape, variance: float = 1.0) -> np.ndarray:
    """Круговой комплексный гауссов шум CN(0, variance)"""
    scale = math.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def noise_variance(energy: float, ebn0_db: float, bits_per_symbol: int, sample_interval: float) -> float:
    """
    Дисперсия шума на отсчёт для заданного Eb/N0

    Eb = energy / bits_per_symbol, N0 = Eb / 10^(Eb/N0 / 10), σ² = N0 / dt.
    """
    if math.isnan(ebn0_db) or ebn0_db == -math.inf:
        raise ChirpDomainError(f"Недопустимое значение Eb/N0: {ebn0_db}")
    if ebn0_db == math.inf:
        return 0.0
    if bits_per_symbol < 1:
        raise ChirpDomainError(f"bits_per_symbol должно быть >= 1, получено {bits_per_symbol}")
    eb = energy / bits_per_symbol
    n0 = eb / 10 ** (ebn0_db / 10)
    return n0 / sample_interval


def awgn(
    sig: Signal,
    ebn0_db: float,
    bits_per_symbol: int = 1,
    rng: Optional[np.random.Generator] = None,
    ref_energy: Optional[float] = None,
) -> Signal:
    """
    Добавление белого гауссова шума с заданным Eb/N0

    Args:
        sig: Входной сигнал
        ebn0_db: Eb/N0 в дБ; +inf означает режим без шума
        bits_per_symbol: Бит на символ
        rng: Генератор случайных чисел
        ref_energy: Опорная энергия символа (по умолчанию энергия sig)

    Returns:
        Signal: Зашумлённый сигнал

    Raises:
        ChirpDomainError: Если ebn0_db равно NaN или -inf
    """
    energy = sig.energy if ref_energy is None else ref_energy
    variance = noise_variance(energy, ebn0_db, bits_per_symbol, sig.sample_interval)
    if variance == 0.0:
        return Signal(sig.samples.copy(), sig.sample_interval)
    rng = rng if rng is not None else np.random.default_rng()
    noise = complex_gaussian(rng, sig.samples.shape, variance)
    return Signal(sig.samples + noise, sig.sample_interval)


def _ricean_split(k_db: float) -> Tuple[float, float]:
    """Амплитуды LOS и рассеянной компоненты при единичной средней мощности"""
    if math.isnan(k_db):
        raise ChirpDomainError("K-фактор не может быть NaN")
    if k_db >= PURE_LOS_K_DB:
        return 1.0, 0.0
    if k_db == -math.inf:
        return 0.0, 1.0
    k = 10 ** (k_db / 10)
    return math.sqrt(k / (k + 1)), math.sqrt(1 / (k + 1))


def ricean_gains(k_db: float, rng: np.random.Generator, size: Shape = None) -> np.ndarray:
    """Массив независимых коэффициентов Райса с E|g|² = 1"""
    los, diffuse = _ricean_split(k_db)
    if diffuse == 0.0:
        return np.ones(() if size is None else size, dtype=complex)
    return los + diffuse * complex_gaussian(rng, size)


def ricean_gain(k_db: float, rng: np.random.Generator) -> complex:
    """
    Один коэффициент Райса g = sqrt(K/(K+1)) + sqrt(1/(K+1))·CN(0, 1)

    k_db >= 100 даёт ровно 1, k_db = -inf даёт рэлеевские замирания.
    """
    return complex(ricean_gains(k_db, rng))


def sum_of_sinusoids(
    fd_t: float,
    x: np.ndarray,
    rng: np.random.Generator,
    size: Shape = None,
    n_sinusoids: int = DEFAULT_SINUSOIDS,
) -> np.ndarray:
    """
    Рассеянная компонента с доплеровским спектром Джейкса (сумма синусоид)

    Углы прихода α_n = (2πn - π + θ) / (4M), n = 1..M, фазы φ_n и ψ_n независимы
    и равномерны. Синфазная и квадратурная части нормированы на мощность ½.

    Args:
        fd_t: Нормированный доплеровский сдвиг f_D·T
        x: Моменты времени в долях T (последняя ось)
        rng: Генератор случайных чисел
        size: Форма набора независимых реализаций
        n_sinusoids: Число синусоид M

    Returns:
        np.ndarray: Комплексный процесс формы size + x.shape с E|h|² = 1
    """
    batch = () if size is None else ((size,) if isinstance(size, int) else tuple(size))
    theta = rng.uniform(-math.pi, math.pi, batch + (1,))
    phi = rng.uniform(-math.pi, math.pi, batch + (n_sinusoids,))
    psi = rng.uniform(-math.pi, math.pi, batch + (n_sinusoids,))
    n = np.arange(1, n_sinusoids + 1)
    alpha = (2 * math.pi * n - math.pi + theta) / (4 * n_sinusoids)

    omega = 2 * math.pi * fd_t
    x = np.asarray(x, dtype=float)
    expand = (...,) + (None,) * x.ndim
    shape = batch + x.shape
    in_phase = np.zeros(shape)
    quadrature = np.zeros(shape)
    # Накопление по синусоидам без массива batch × M × x
    for n_index in range(n_sinusoids):
        a = alpha[..., n_index]
        in_phase += np.cos(omega * np.cos(a)[expand] * x + phi[..., n_index][expand])
        quadrature += np.cos(omega * np.sin(a)[expand] * x + psi[..., n_index][expand])
    scale = math.sqrt(1 / n_sinusoids)
    return scale * (in_phase + 1j * quadrature)


def fast_fading_process(
    k_db: float,
    fd_t: float,
    x: np.ndarray,
    rng: np.random.Generator,
    size: Shape = None,
    n_sinusoids: int = DEFAULT_SINUSOIDS,
) -> np.ndarray:
    """Коэффициенты быстрых замираний Райса в моменты x (в долях T)"""
    if not (math.isfinite(fd_t) and fd_t > 0):
        raise ChirpDomainError(f"fd_t должно быть > 0, получено {fd_t}")
    los, diffuse = _ricean_split(k_db)
    if diffuse == 0.0:
        shape = (() if size is None else ((size,) if isinstance(size, int) else tuple(size))) + np.shape(x)
        return np.ones(shape, dtype=complex)
    return los + diffuse * sum_of_sinusoids(fd_t, x, rng, size, n_sinusoids)


def fast_fading_series(
    k_db: float,
    fd_t: float,
    n_symbols: int,
    samples_per_symbol: int,
    rng: np.random.Generator,
    n_sinusoids: int = DEFAULT_SINUSOIDS,
) -> np.ndarray:
    """
    Поотсчётные коэффициенты быстрых замираний на n_symbols символов

    Args:
        k_db: K-фактор в дБ
        fd_t: Нормированный доплеровский сдвиг f_D·T, > 0
        n_symbols: Число символов
        samples_per_symbol: Отсчётов на символ
        rng: Генератор случайных чисел
        n_sinusoids: Число синусоид (не меньше 32)

    Returns:
        np.ndarray: Комплексные коэффициенты формы (n_symbols, samples_per_symbol)
    """
    if n_sinusoids < DEFAULT_SINUSOIDS:
        raise ChirpDomainError(f"Нужно не меньше {DEFAULT_SINUSOIDS} синусоид, получено {n_sinusoids}")
    x = np.arange(n_symbols * samples_per_symbol) / samples_per_symbol
    gains = fast_fading_process(k_db, fd_t, x, rng, n_sinusoids=n_sinusoids)
    logger.debug(
        f"Быстрые замирания | K={k_db} дБ | fd_t={fd_t} | символов: {n_symbols}"
    )
    return gains.reshape(n_symbols, samples_per_symbol)
