"""Взаимная корреляция chirp-сигналов в зависимости от временного сдвига"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from chirp.errors import ChirpDomainError
from chirp.waveform import (
    ChirpDirection,
    ChirpFamily,
    ChirpSet,
    Signal,
    chirp_phase,
    gen_chirp,
    gen_delayed_chirp,
    gen_stream,
)

logger = logging.getLogger(__name__)


DEFAULT_GRID_POINTS = 256
# Перебор всех подмножеств загрузки допустим до этого количества
MAX_ENUMERATED_SUBSETS = 1000
RANDOM_SUBSETS = 500
CORRELATION_TOLERANCE = 1e-9


class LoadNormalization(str, Enum):
    """Нормировка средней корреляции при загрузке K < N"""
    # Среднее |ρ| по упорядоченным парам активных сигналов
    PAIR_MEAN = "pair_mean"
    # Суммарная MAI жертвы, делённая на N - 1
    AGGREGATE = "aggregate"


@dataclass(frozen=True, eq=False)
class CorrCurve:
    """
    Нормированная средняя взаимная корреляция как функция задержки

    Args:
        delays: Задержки в секундах
        values: Средние |ρ| в [0, 1]
        family: Семейство сигналов
        n_signals: Размер семейства N
        loading: Число одновременно активных сигналов K
        symbol_duration: Длительность символа T
        normalization: Нормировка при частичной загрузке
    """
    delays: np.ndarray
    values: np.ndarray
    family: ChirpFamily
    n_signals: int
    loading: int
    symbol_duration: float
    normalization: LoadNormalization = LoadNormalization.PAIR_MEAN

    def __post_init__(self):
        if self.delays.shape != self.values.shape:
            raise ChirpDomainError("Длины delays и values не совпадают")
        if np.any(self.values < 0) or np.any(self.values > 1 + CORRELATION_TOLERANCE):
            raise ChirpDomainError("Значения корреляции вне [0, 1]")
        if np.any(self.delays < 0) or np.any(self.delays > self.symbol_duration):
            raise ChirpDomainError("Задержки вне [0, T]")

    @property
    def delay_fractions(self) -> np.ndarray:
        """Задержки в долях T"""
        return self.delays / self.symbol_duration

    def mean_over(self, low_frac: float, high_frac: float) -> float:
        """Среднее значение кривой на отрезке [low, high] в долях T"""
        fractions = self.delay_fractions
        mask = (fractions >= low_frac - 1e-12) & (fractions <= high_frac + 1e-12)
        if not mask.any():
            raise ChirpDomainError(f"На отрезке [{low_frac}, {high_frac}] нет точек сетки")
        return float(self.values[mask].mean())


def inner_product(a: Signal, b: Signal) -> complex:
    """
    Дискретное скалярное произведение Σ a[i]·conj(b[i])·dt

    Raises:
        ChirpDomainError: Если различаются длины или шаг дискретизации
    """
    if len(a) != len(b):
        raise ChirpDomainError(f"Длины сигналов не совпадают: {len(a)} и {len(b)}")
    if not math.isclose(a.sample_interval, b.sample_interval, rel_tol=1e-12):
        raise ChirpDomainError(
            f"Шаги дискретизации не совпадают: {a.sample_interval} и {b.sample_interval}"
        )
    return complex(np.vdot(b.samples, a.samples) * a.sample_interval)


def _check_delay(chirp_set: ChirpSet, eps: float) -> float:
    period = chirp_set.symbol_duration
    if not (math.isfinite(eps) and 0 <= eps <= period):
        raise ChirpDomainError(f"Задержка {eps} вне [0, T], T={period}")
    # Сдвиг на целый символ эквивалентен нулевому
    return 0.0 if eps >= period else float(eps)


def pair_crosscorr(chirp_set: ChirpSet, m: int, n: int, eps: float) -> float:
    """
    |<задержанный up-chirp пользователя n, up-chirp пользователя m>| / T

    Оба фрагмента задержанного сигнала (хвост предыдущего символа и текущий
    символ) имеют наклон up.

    Args:
        chirp_set: Параметры семейства
        m: Пользователь-жертва (опорный сигнал без задержки)
        n: Мешающий пользователь
        eps: Задержка мешающего пользователя, 0 <= eps <= T

    Returns:
        float: Нормированная корреляция в [0, 1]
    """
    chirp_set.check_user(m)
    eps = _check_delay(chirp_set, eps)
    delayed = gen_delayed_chirp(chirp_set, n, eps, ChirpDirection.UP, ChirpDirection.UP)
    reference = gen_chirp(chirp_set, m, ChirpDirection.UP)
    return abs(inner_product(delayed, reference)) / chirp_set.symbol_duration


def crosscorr_matrix(chirp_set: ChirpSet, eps: float) -> np.ndarray:
    """
    Матрица |ρ_mn(eps)| для всех пар: строка m (жертва), столбец n (задержанный)

    Returns:
        np.ndarray: Матрица N×N, диагональ содержит автокорреляции
    """
    eps = _check_delay(chirp_set, eps)
    users = np.arange(chirp_set.n_signals)
    grid = chirp_set.normalized_grid()
    references = np.exp(1j * chirp_phase(chirp_set, users[:, None], grid[None, :], 1))
    delayed = gen_stream(
        chirp_set,
        users[:, None],
        grid[None, :],
        np.full((chirp_set.n_signals, 1), eps / chirp_set.symbol_duration),
        np.ones((chirp_set.n_signals, 2)),
    )
    # Σ dt / T = 1 / S
    products = references.conj() @ delayed.T / chirp_set.samples_per_symbol
    return np.abs(products)


def _loaded_subsets(n_signals: int, loading: int, seed: int) -> np.ndarray:
    """Индикаторы подмножеств активных сигналов, форма (число подмножеств, N)"""
    total = math.comb(n_signals, loading)
    if total <= MAX_ENUMERATED_SUBSETS:
        subsets = list(itertools.combinations(range(n_signals), loading))
    else:
        rng = np.random.default_rng(seed)
        subsets = [
            rng.choice(n_signals, size=loading, replace=False)
            for _ in range(RANDOM_SUBSETS)
        ]
    indicators = np.zeros((len(subsets), n_signals))
    for row, subset in enumerate(subsets):
        indicators[row, list(subset)] = 1.0
    return indicators


def _average_at_delay(
    chirp_set: ChirpSet,
    eps: float,
    indicators: np.ndarray,
    loading: int,
    normalization: LoadNormalization,
) -> float:
    n = chirp_set.n_signals
    if n == 1 or loading == 1:
        return 0.0
    matrix = crosscorr_matrix(chirp_set, eps)
    np.fill_diagonal(matrix, 0.0)
    # Сумма |ρ| по упорядоченным парам активных сигналов каждого подмножества
    aggregate = np.einsum('si,ij,sj->s', indicators, matrix, indicators)
    partners = loading - 1 if normalization is LoadNormalization.PAIR_MEAN else n - 1
    return float(np.mean(aggregate) / (loading * partners))


def average_crosscorr_vs_delay(
    chirp_set: ChirpSet,
    delays: Optional[Sequence[float]] = None,
    loading: Optional[int] = None,
    seed: int = 0,
    workers: int = 1,
    normalization: LoadNormalization = LoadNormalization.PAIR_MEAN,
) -> CorrCurve:
    """
    Средняя нормированная взаимная корреляция семейства по сетке задержек

    Общая задержка применяется ко всем мешающим сигналам. При полной загрузке
    (K = N) значение равно среднему |ρ| по всем упорядоченным парам. При
    частичной загрузке по умолчанию берётся среднее |ρ| по парам активных
    сигналов, усреднённое по подмножествам; AGGREGATE вместо этого делит
    суммарную корреляцию жертвы на N - 1.

    Args:
        chirp_set: Параметры семейства
        delays: Сетка задержек в секундах (по умолчанию 256 точек на [0, T/2])
        loading: Число активных сигналов K (по умолчанию N)
        seed: Зерно выбора случайных подмножеств при большом C(N, K)
        workers: Число потоков для расчёта точек сетки
        normalization: Нормировка при частичной загрузке

    Returns:
        CorrCurve: Кривая, упорядоченная как сетка задержек

    Raises:
        ChirpDomainError: Пустая сетка, задержки вне [0, T] или K вне [1, N]
    """
    period = chirp_set.symbol_duration
    if delays is None:
        grid = np.linspace(0.0, period / 2, DEFAULT_GRID_POINTS)
    else:
        grid = np.asarray(delays, dtype=float).ravel()
    if grid.size == 0:
        raise ChirpDomainError("Сетка задержек пуста")
    if np.any(~np.isfinite(grid)) or np.any(grid < 0) or np.any(grid > period):
        raise ChirpDomainError("Задержки сетки должны лежать в [0, T]")

    loading = chirp_set.n_signals if loading is None else int(loading)
    normalization = LoadNormalization(normalization)
    if not 1 <= loading <= chirp_set.n_signals:
        raise ChirpDomainError(
            f"Загрузка K={loading} вне [1, {chirp_set.n_signals}]"
        )

    indicators = _loaded_subsets(chirp_set.n_signals, loading, seed)
    logger.info(
        f"Расчёт средней корреляции | семейство: {chirp_set.family.value} | "
        f"N={chirp_set.n_signals} | K={loading} | нормировка: {normalization.value} | "
        f"точек: {grid.size} | подмножеств: {len(indicators)}"
    )

    def evaluate(eps: float) -> float:
        return _average_at_delay(chirp_set, float(eps), indicators, loading, normalization)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(evaluate, grid))
    else:
        values = [evaluate(eps) for eps in grid]

    return CorrCurve(
        delays=grid,
        values=np.clip(np.asarray(values), 0.0, None),
        family=chirp_set.family,
        n_signals=chirp_set.n_signals,
        loading=loading,
        symbol_duration=period,
        normalization=normalization,
    )
