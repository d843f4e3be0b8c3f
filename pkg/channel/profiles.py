"""Чтение и запись профилей AG-канала в текстовом формате key = value"""

import configparser
import logging
import math
import re
from pathlib import Path
from typing import Dict, List, Union

from channel.tdl import MAX_TAPS, TapFading, TapProfileSet, TapSpec
from chirp.errors import ProfileError

logger = logging.getLogger(__name__)


DATA_DIR = Path(__file__).parent / "data"
BUILTIN_PROFILES = {
    "mean": "hilly_suburban_mean",
    "worst": "hilly_suburban_worst",
}

TAP_SECTION = re.compile(r"^tap([1-9][0-9]*)$")
TAP_KEYS = {"delay_us", "power_db", "fading", "on_probability", "mean_on_symbols", "mean_off_symbols"}
PROFILE_KEYS = {"name"}
MICROSECOND = 1e-6


def _parse_float(section: configparser.SectionProxy, key: str, full_key: str) -> float:
    raw = section.get(key)
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ProfileError(full_key, f"ожидалось число, получено '{raw}'")
    if not math.isfinite(value):
        raise ProfileError(full_key, f"значение должно быть конечным, получено '{raw}'")
    return value


def _parse_tap(name: str, section: configparser.SectionProxy) -> TapSpec:
    for key in section:
        if key not in TAP_KEYS:
            raise ProfileError(f"{name}.{key}", "неизвестный ключ")
    for key in ("delay_us", "power_db", "fading"):
        if key not in section:
            raise ProfileError(f"{name}.{key}", "обязательный ключ отсутствует")

    fading_raw = section.get("fading").strip().lower()
    try:
        fading = TapFading(fading_raw)
    except ValueError:
        raise ProfileError(f"{name}.fading", f"неизвестный тип замираний '{fading_raw}'")

    intermittent = "on_probability" in section
    optional = {}
    for key in ("mean_on_symbols", "mean_off_symbols"):
        if key in section:
            if not intermittent:
                raise ProfileError(f"{name}.{key}", "задан без on_probability")
            optional[key] = _parse_float(section, key, f"{name}.{key}")

    return TapSpec(
        delay=_parse_float(section, "delay_us", f"{name}.delay_us") * MICROSECOND,
        power_db=_parse_float(section, "power_db", f"{name}.power_db"),
        fading=fading,
        intermittent=intermittent,
        on_probability=_parse_float(section, "on_probability", f"{name}.on_probability") if intermittent else 1.0,
        **optional,
    )


def parse_profile(text: str, default_name: str = "custom") -> TapProfileSet:
    """
    Разбор профиля из текста

    Формат: секция [profile] с ключом name и секции [tap1] ... [tap6] с ключами
    delay_us, power_db, fading, on_probability, mean_on_symbols, mean_off_symbols.
    Наличие on_probability делает луч прерывистым.

    Raises:
        ProfileError: С ключом, вызвавшим ошибку
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ProfileError("file", f"синтаксическая ошибка: {e}")

    name = default_name
    taps: Dict[int, TapSpec] = {}
    for section_name in parser.sections():
        section = parser[section_name]
        if section_name == "profile":
            for key in section:
                if key not in PROFILE_KEYS:
                    raise ProfileError(f"profile.{key}", "неизвестный ключ")
            name = section.get("name", default_name).strip() or default_name
            continue
        match = TAP_SECTION.match(section_name)
        if not match:
            raise ProfileError(section_name, "неизвестная секция")
        index = int(match.group(1))
        if index > MAX_TAPS:
            raise ProfileError(section_name, f"допускается не более {MAX_TAPS} лучей")
        taps[index] = _parse_tap(section_name, section)

    if not taps:
        raise ProfileError("tap1", "профиль не содержит лучей")
    expected = list(range(1, len(taps) + 1))
    if sorted(taps) != expected:
        missing = next(i for i in expected if i not in taps)
        raise ProfileError(f"tap{missing}", "лучи должны идти подряд начиная с tap1")
    return TapProfileSet(name=name, taps=tuple(taps[i] for i in expected))


def load_profile(path: Union[str, Path]) -> TapProfileSet:
    """
    Загрузка профиля из файла

    Raises:
        ProfileError: Файл не найден или содержит ошибки
    """
    path = Path(path)
    if not path.is_file():
        raise ProfileError("file", f"файл профиля не найден: {path}")
    profile = parse_profile(path.read_text(encoding="utf-8"), default_name=path.stem)
    logger.info(f"Загружен профиль '{profile.name}' из {path}: {len(profile.taps)} лучей")
    return profile


def builtin_profile(name: str) -> TapProfileSet:
    """Встроенный профиль: 'mean', 'worst' или полное имя hilly_suburban_*"""
    stem = BUILTIN_PROFILES.get(name, name)
    if stem not in BUILTIN_PROFILES.values():
        raise ProfileError("profile", f"неизвестный встроенный профиль '{name}'")
    return load_profile(DATA_DIR / f"{stem}.txt")


def resolve_profile(reference: str) -> TapProfileSet:
    """Профиль по имени встроенного профиля или пути к файлу"""
    if reference in BUILTIN_PROFILES or reference in BUILTIN_PROFILES.values():
        return builtin_profile(reference)
    return load_profile(reference)


def profile_to_text(profile: TapProfileSet) -> str:
    """Сериализация профиля в текстовый формат, обратная parse_profile"""
    lines: List[str] = ["[profile]", f"name = {profile.name}", ""]
    for index, tap in enumerate(profile.taps, start=1):
        lines.append(f"[tap{index}]")
        lines.append(f"delay_us = {tap.delay / MICROSECOND:.9g}")
        lines.append(f"power_db = {tap.power_db:.9g}")
        lines.append(f"fading = {tap.fading.value}")
        if tap.intermittent:
            lines.append(f"on_probability = {tap.on_probability:.9g}")
            if tap.mean_on_symbols is not None:
                lines.append(f"mean_on_symbols = {tap.mean_on_symbols:.9g}")
            if tap.mean_off_symbols is not None:
                lines.append(f"mean_off_symbols = {tap.mean_off_symbols:.9g}")
        lines.append("")
    return "\n".join(lines)
