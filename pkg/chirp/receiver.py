"""Корреляционный приём бинарных up/down chirp-символов"""

import logging
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import special, stats

from chirp.correlation import inner_product
from chirp.errors import ChirpDomainError
from chirp.waveform import ChirpDirection, ChirpSet, Signal, chirp_phase, gen_chirp

logger = logging.getLogger(__name__)


class DetectorMode(str, Enum):
    """Режим детектора: когерентный (известен канал) или некогерентный (по модулю)"""
    COHERENT = "coherent"
    NONCOHERENT = "noncoherent"


def chirp_templates(chirp_set: ChirpSet, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Опорные up- и down-сигналы пользователя m"""
    chirp_set.check_user(m)
    grid = chirp_set.normalized_grid()
    up = np.exp(1j * chirp_phase(chirp_set, m, grid, 1))
    down = np.exp(1j * chirp_phase(chirp_set, m, grid, -1))
    return up, down


def decide_bits(
    rx: np.ndarray,
    chirp_set: ChirpSet,
    m: int,
    mode: DetectorMode,
    channel_gains: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Векторное решение по блоку окон наблюдения

    Args:
        rx: Принятые окна формы (..., S)
        chirp_set: Параметры семейства
        m: Пользователь, для которого принимается решение
        mode: Режим детектора
        channel_gains: Комплексные коэффициенты канала формы (...), обязательны для COHERENT

    Returns:
        np.ndarray: Булев массив решений (True = up, бит 1)
    """
    rx = np.asarray(rx)
    if rx.shape[-1] != chirp_set.samples_per_symbol:
        raise ChirpDomainError(
            f"Окно должно содержать {chirp_set.samples_per_symbol} отсчётов, получено {rx.shape[-1]}"
        )
    up, down = chirp_templates(chirp_set, m)
    dt = chirp_set.sample_interval
    z_up = rx @ up.conj() * dt
    z_down = rx @ down.conj() * dt

    mode = DetectorMode(mode)
    if mode is DetectorMode.NONCOHERENT:
        return np.abs(z_up) >= np.abs(z_down)
    if channel_gains is None:
        raise ChirpDomainError("Для когерентного приёма нужен коэффициент канала")
    gains = np.conj(np.asarray(channel_gains))
    return np.real(gains * z_up) >= np.real(gains * z_down)


def detect_bit(
    rx: Signal,
    chirp_set: ChirpSet,
    m: int,
    mode: DetectorMode = DetectorMode.NONCOHERENT,
    channel_gain: Optional[complex] = None,
) -> int:
    """
    Решение о бите пользователя m по одному окну наблюдения

    z_up = <rx, up_m>, z_dn = <rx, dn_m>. Некогерентно: up, если |z_up| >= |z_dn|.
    Когерентно: up, если Re(conj(g)·z_up) >= Re(conj(g)·z_dn). Равенство даёт up.

    Args:
        rx: Принятое окно длиной в один символ
        chirp_set: Параметры семейства
        m: Индекс пользователя
        mode: Режим детектора
        channel_gain: Коэффициент канала (обязателен для COHERENT)

    Returns:
        int: 1 для up, 0 для down

    Raises:
        ChirpDomainError: Нет коэффициента канала в когерентном режиме или неверная длина окна
    """
    if not math.isclose(rx.sample_interval, chirp_set.sample_interval, rel_tol=1e-12):
        raise ChirpDomainError("Шаг дискретизации окна не совпадает с семейством")
    decision = decide_bits(rx.samples, chirp_set, m, mode, channel_gain)
    return int(bool(decision))


def up_down_correlation(chirp_set: ChirpSet, m: int) -> complex:
    """Нормированная корреляция <up_m, dn_m> / T"""
    up = gen_chirp(chirp_set, m, ChirpDirection.UP)
    down = gen_chirp(chirp_set, m, ChirpDirection.DOWN)
    return inner_product(up, down) / chirp_set.symbol_duration


def up_down_crosstalk(chirp_set: ChirpSet, m: int) -> float:
    """Модуль нормированной корреляции между up- и down-сигналами пользователя m"""
    return abs(up_down_correlation(chirp_set, m))


def marcum_q1(a, b):
    """Функция Маркума первого порядка Q1(a, b)"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    positive = a > 0
    # При a = 0 распределение центральное: Q1(0, b) = exp(-b²/2)
    central = np.exp(-b ** 2 / 2)
    noncentral = stats.ncx2.sf(b ** 2, 2, np.where(positive, a ** 2, 1.0))
    return np.where(positive, noncentral, central)


def theoretical_ber(mode: DetectorMode, ebn0_db, correlation: complex = 0.0):
    """
    Теоретическая BER бинарной передачи с неортогональным алфавитом

    Когерентно: Q(sqrt(Eb/N0·(1 - Re ρ))).
    Некогерентно: Q1(a, b) - ½·exp(-(a² + b²)/2)·I0(ab),
    a, b = sqrt(Eb/(2N0)·(1 ∓ sqrt(1 - |ρ|²))).
    При ρ = 0 формулы сводятся к Q(sqrt(Eb/N0)) и ½·exp(-Eb/(2N0)).

    Args:
        mode: Режим детектора
        ebn0_db: Eb/N0 в дБ (скаляр или массив)
        correlation: Корреляция ρ между up- и down-сигналами

    Returns:
        BER (float для скаляра, np.ndarray для массива)
    """
    snr = 10 ** (np.asarray(ebn0_db, dtype=float) / 10)
    mode = DetectorMode(mode)
    if mode is DetectorMode.COHERENT:
        ber = stats.norm.sf(np.sqrt(snr * (1 - np.real(correlation))))
    else:
        root = math.sqrt(max(0.0, 1 - abs(correlation) ** 2))
        a = np.sqrt(snr / 2 * (1 - root))
        b = np.sqrt(snr / 2 * (1 + root))
        # exp(-(a²+b²)/2)·I0(ab) = i0e(ab)·exp(-(b-a)²/2)
        ber = marcum_q1(a, b) - 0.5 * special.i0e(a * b) * np.exp(-(b - a) ** 2 / 2)
    if np.ndim(ebn0_db) == 0:
        return float(ber)
    return ber
