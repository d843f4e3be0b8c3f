"""Описание канала для Monte Carlo экспериментов"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from channel.tdl import TapProfileSet
from chirp.errors import ChirpDomainError


DEFAULT_K_DB = 12.0
DEFAULT_FD_T = 0.01


class ChannelKind(str, Enum):
    """Тип канала"""
    AWGN = "awgn"
    RICEAN_MEMORYLESS = "ricean-mem"
    RICEAN_FAST = "ricean-fast"
    AG_TDL = "ag-tdl"


@dataclass(frozen=True)
class ChannelSpec:
    """
    Конфигурация канала: AWGN, Райс без памяти, быстрый Райс или AG-линия задержки

    Args:
        kind: Тип канала
        k_db: K-фактор Райса в дБ (для AG-канала относится к LOS-лучу)
        fd_t: Нормированный доплеровский сдвиг f_D·T для быстрых замираний
        profile: Профиль лучей для AG-канала
    """
    kind: ChannelKind = ChannelKind.AWGN
    k_db: float = DEFAULT_K_DB
    fd_t: float = 0.0
    profile: Optional[TapProfileSet] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, 'kind', ChannelKind(self.kind))
        except ValueError:
            raise ChirpDomainError(f"Неизвестный тип канала: {self.kind}")
        # k_db = +inf допустим как чистый LOS, -inf как рэлеевский канал
        if math.isnan(self.k_db):
            raise ChirpDomainError("k_db не может быть NaN")
        if not (math.isfinite(self.fd_t) and self.fd_t >= 0):
            raise ChirpDomainError(f"fd_t должно быть >= 0, получено {self.fd_t}")
        if self.kind is ChannelKind.RICEAN_FAST and self.fd_t <= 0:
            raise ChirpDomainError("Для быстрых замираний fd_t должно быть > 0")
        if self.kind is ChannelKind.AG_TDL and self.profile is None:
            raise ChirpDomainError("Для AG-канала нужен профиль лучей")

    @classmethod
    def awgn(cls) -> "ChannelSpec":
        return cls(ChannelKind.AWGN)

    @classmethod
    def ricean_memoryless(cls, k_db: float = DEFAULT_K_DB) -> "ChannelSpec":
        return cls(ChannelKind.RICEAN_MEMORYLESS, k_db=k_db)

    @classmethod
    def ricean_fast(cls, k_db: float = DEFAULT_K_DB, fd_t: float = DEFAULT_FD_T) -> "ChannelSpec":
        return cls(ChannelKind.RICEAN_FAST, k_db=k_db, fd_t=fd_t)

    @classmethod
    def ag_tdl(cls, profile: TapProfileSet, k_db: float = DEFAULT_K_DB) -> "ChannelSpec":
        return cls(ChannelKind.AG_TDL, k_db=k_db, profile=profile)

    @property
    def is_fading(self) -> bool:
        return self.kind is not ChannelKind.AWGN

    @property
    def profile_name(self) -> str:
        return self.profile.name if self.profile is not None else ""

    @property
    def mean_power(self) -> float:
        """Средняя мощность канала желаемого пользователя"""
        if self.kind is ChannelKind.AG_TDL:
            return self.profile.total_mean_power
        return 1.0

    def describe(self) -> Dict[str, Any]:
        """Параметры канала для манифеста запуска"""
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.is_fading:
            data["k_db"] = self.k_db
        if self.kind is ChannelKind.RICEAN_FAST:
            data["fd_t"] = self.fd_t
        if self.kind is ChannelKind.AG_TDL:
            data["profile"] = self.profile.name
        return data
