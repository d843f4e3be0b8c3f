"""Главный модуль командной строки симулятора chirp-сигнализации"""

import argparse
import asyncio
import logging
import math
import os
import secrets
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from dotenv import load_dotenv

from channel.models import ChannelKind, ChannelSpec
from channel.profiles import resolve_profile
from channel.tdl import ag_realization, delay_spread, pdp_rows
from chirp.correlation import LoadNormalization, average_crosscorr_vs_delay
from chirp.errors import ChirpDomainError, ProfileError
from chirp.receiver import DetectorMode
from chirp.waveform import (
    DEFAULT_NONLINEARITY_GAIN,
    DEFAULT_OVERSAMPLING,
    ChirpDirection,
    ChirpFamily,
    ChirpSet,
    gen_chirp,
    tf_trace,
)
from sim.montecarlo import (
    DEFAULT_BLOCK_SIZE,
    DEFAULT_MAX_BITS,
    DEFAULT_MIN_BIT_ERRORS,
    SIGMA_PRESETS,
    BerPoint,
    SimConfig,
    run_ber_async,
)
from sim.results import (
    BER_COLUMNS,
    PDP_COLUMNS,
    TF_TRACE_COLUMNS,
    WAVEFORM_COLUMNS,
    XCORR_COLUMNS,
    ResultsStore,
    RunManifest,
    ber_rows,
    read_manifest,
    write_csv,
    write_manifest,
)


# Загрузка переменных окружения из .env файла
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
MICROSECOND = 1e-6


class UsageError(ValueError):
    """Недопустимое сочетание флагов командной строки"""


def setup_logging():
    """Настройка логирования приложения"""
    log_level = os.getenv('LOG_LEVEL', 'INFO')
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def parse_grid(text: str) -> List[float]:
    """
    Сетка Eb/N0: 'start:step:stop' (включительно), список через запятую или одно число

    Raises:
        UsageError: Некорректная запись сетки
    """
    try:
        if ":" in text:
            start, step, stop = (float(part) for part in text.split(":"))
            if step <= 0 or stop < start:
                raise UsageError(f"Сетка '{text}': нужен шаг > 0 и stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 9) for i in range(count)]
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        if isinstance(e, UsageError):
            raise
        raise UsageError(f"Некорректная сетка Eb/N0 '{text}'")


def parse_families(text: str) -> List[ChirpFamily]:
    try:
        return [ChirpFamily(part.strip().lower()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"Неизвестное семейство в '{text}', допустимо: linear, quartic")


def parse_users(text: Optional[str], n_signals: int) -> List[int]:
    if text is None:
        return list(range(n_signals))
    try:
        users = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"Некорректный список пользователей '{text}'")
    for m in users:
        if not 0 <= m < n_signals:
            raise UsageError(f"Пользователь {m} вне [0, {n_signals})")
    return users


def parse_sigmas(text: str) -> List[float]:
    if text == "presets":
        return list(SIGMA_PRESETS)
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"Некорректное значение --sigma '{text}'")
    if not values or any(v < 0 for v in values):
        raise UsageError("--sigma должно быть неотрицательным или 'presets'")
    return values


def parse_count(text: str) -> int:
    """Целое число, допускается запись вида 2e7"""
    value = float(text)
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"ожидалось целое >= 1, получено '{text}'")
    return int(value)


def chirp_set_from_args(args: argparse.Namespace, family: ChirpFamily) -> ChirpSet:
    if args.t_us <= 0:
        raise UsageError("--t-us должно быть > 0")
    return ChirpSet(
        n_signals=args.n,
        symbol_duration=args.t_us * MICROSECOND,
        oversampling=args.osf,
        family=family,
        nonlinearity_gain=args.gamma,
    )


def channel_from_args(args: argparse.Namespace) -> ChannelSpec:
    kind = ChannelKind(args.channel)
    if kind is ChannelKind.AWGN:
        return ChannelSpec.awgn()
    if kind is ChannelKind.RICEAN_MEMORYLESS:
        return ChannelSpec.ricean_memoryless(args.k_db)
    if kind is ChannelKind.RICEAN_FAST:
        return ChannelSpec.ricean_fast(args.k_db, args.fd_t)
    return ChannelSpec.ag_tdl(resolve_profile(args.profile), args.k_db)


def resolve_seed(args: argparse.Namespace, argv: List[str]) -> List[str]:
    """Выбирает seed, если он не задан, и дописывает его в argv для манифеста"""
    if args.seed is None:
        args.seed = secrets.randbits(63)
        logger.info(f"seed не задан, выбран случайно: {args.seed}")
        return list(argv) + ["--seed", str(args.seed)]
    return list(argv)


def cmd_gen(args: argparse.Namespace, argv: List[str]) -> int:
    """Отсчёты сигналов и TF-трассы выбранных пользователей"""
    out_dir = Path(args.out)
    direction = ChirpDirection(args.direction)
    users = parse_users(args.m, args.n)
    outputs = []
    for family in parse_families(args.family):
        chirp_set = chirp_set_from_args(args, family)

        sample_rows = []
        trace_rows = []
        for m in users:
            signal = gen_chirp(chirp_set, m, direction)
            times = np.arange(len(signal)) * signal.sample_interval
            for t, value in zip(times, signal.samples):
                sample_rows.append([m, float(t), float(value.real), float(value.imag)])
            trace = tf_trace(chirp_set, m, args.points, direction)
            for t, f in zip(trace.times, trace.frequencies):
                trace_rows.append([m, float(t), float(f)])

        outputs.append(str(write_csv(out_dir / f"waveform_{family.value}.csv", "waveform", WAVEFORM_COLUMNS, sample_rows)))
        outputs.append(str(write_csv(out_dir / f"tf_trace_{family.value}.csv", "tf_trace", TF_TRACE_COLUMNS, trace_rows)))

    parameters = {
        "n_signals": args.n, "t_us": args.t_us, "oversampling": args.osf, "gamma": args.gamma,
        "families": args.family, "users": users, "points": args.points, "direction": args.direction,
        "out": str(out_dir),
    }
    write_manifest(out_dir, RunManifest("gen", list(argv), parameters, None, outputs))
    return EXIT_OK


def cmd_xcorr(args: argparse.Namespace, argv: List[str]) -> int:
    """Средняя взаимная корреляция семейств по сетке задержек"""
    if args.points < 2:
        raise UsageError("--points должно быть >= 2")
    if not 0 < args.max_delay_frac <= 1:
        raise UsageError("--max-delay-frac должно лежать в (0, 1]")
    out_dir = Path(args.out)
    rows = []
    curves = {}
    for family in parse_families(args.families):
        chirp_set = chirp_set_from_args(args, family)
        delays = np.linspace(0.0, args.max_delay_frac * chirp_set.symbol_duration, args.points)
        curve = average_crosscorr_vs_delay(
            chirp_set, delays, args.loading, args.seed, args.workers, LoadNormalization(args.normalization)
        )
        curves[family] = curve
        for fraction, value in zip(curve.delay_fractions, curve.values):
            rows.append([float(fraction), family.value, curve.n_signals, curve.loading, float(value)])

    if ChirpFamily.LINEAR in curves and ChirpFamily.QUARTIC in curves:
        fractions = curves[ChirpFamily.LINEAR].delay_fractions
        window = (fractions >= 0.05) & (fractions <= 0.5)
        below = np.sum(curves[ChirpFamily.QUARTIC].values[window] < curves[ChirpFamily.LINEAR].values[window])
        logger.info(f"Квартичная кривая ниже линейной в {below} из {int(window.sum())} точек на [0.05T, 0.5T]")

    csv_path = write_csv(out_dir / "xcorr.csv", "xcorr", XCORR_COLUMNS, rows)
    parameters = {
        "n_signals": args.n, "t_us": args.t_us, "oversampling": args.osf, "gamma": args.gamma,
        "families": args.families, "loading": args.loading or args.n, "normalization": args.normalization,
        "points": args.points, "max_delay_frac": args.max_delay_frac, "workers": args.workers, "out": str(out_dir),
    }
    write_manifest(out_dir, RunManifest("xcorr", list(argv), parameters, args.seed, [str(csv_path)]))
    return EXIT_OK


async def run_experiments(configs: Sequence[SimConfig], workers: int) -> List[List[BerPoint]]:
    """Последовательный запуск экспериментов, блоки каждого считаются параллельно"""
    results = []
    for config in configs:
        results.append(await run_ber_async(config, workers))
    return results


def cmd_ber(args: argparse.Namespace, argv: List[str]) -> int:
    """BER по сетке Eb/N0 для выбранных семейств и σ"""
    argv = resolve_seed(args, argv)
    out_dir = Path(args.out)
    grid = parse_grid(args.ebn0)
    if not grid:
        raise UsageError("Сетка Eb/N0 пуста")
    if args.channel != ChannelKind.AG_TDL.value and args.profile_given:
        raise UsageError("--profile используется только с --channel ag-tdl")
    channel = channel_from_args(args)

    configs = []
    for family in parse_families(args.family):
        chirp_set = chirp_set_from_args(args, family)
        for sigma in parse_sigmas(args.sigma):
            configs.append(SimConfig(
                chirp_set=chirp_set,
                n_active_users=args.users if args.users is not None else args.n,
                offset_sigma_frac=sigma,
                channel=channel,
                mode=DetectorMode(args.mode),
                ebn0_grid=tuple(grid),
                min_bit_errors=args.min_errors,
                max_bits=args.max_bits,
                block_size=args.block_size,
                seed=args.seed,
            ))

    results = asyncio.run(run_experiments(configs, args.workers))
    rows = []
    for config, points in zip(configs, results):
        rows.extend(ber_rows(config, points))

    csv_path = write_csv(out_dir / "ber.csv", "ber", BER_COLUMNS, rows)
    parameters = {
        "experiments": [config.describe() for config in configs],
        "workers": args.workers,
        "out": str(out_dir),
        "db": args.db,
    }
    manifest = RunManifest("ber", argv, parameters, args.seed, [str(csv_path)])
    write_manifest(out_dir, manifest)
    if args.db:
        ResultsStore(args.db).save_run(manifest, rows, str(csv_path))
    return EXIT_OK


def cmd_pdp(args: argparse.Namespace, argv: List[str]) -> int:
    """PDP во времени и RMS-разброс задержек для профиля AG-канала"""
    argv = resolve_seed(args, argv)
    profile = resolve_profile(args.profile)
    rng = np.random.default_rng(args.seed)
    realization = ag_realization(profile, args.k_db, args.symbols, rng)
    spread = delay_spread(realization)
    logger.info(
        f"Профиль '{profile.name}': RMS-разброс реализации {spread / MICROSECOND:.4f} мкс, "
        f"среднего профиля {profile.rms_delay_spread() / MICROSECOND:.4f} мкс"
    )
    out_dir = Path(args.out)
    csv_path = write_csv(out_dir / f"pdp_{profile.name}.csv", "pdp", PDP_COLUMNS, pdp_rows(realization))
    parameters = {
        "profile": profile.name, "k_db": args.k_db, "symbols": args.symbols,
        "rms_delay_spread_s": spread, "profile_rms_delay_spread_s": profile.rms_delay_spread(),
        "out": str(out_dir),
    }
    write_manifest(out_dir, RunManifest("pdp", argv, parameters, args.seed, [str(csv_path)]))
    print(f"{profile.name}: rms_delay_spread_s={spread:.9g}")
    return EXIT_OK


def cmd_runs(args: argparse.Namespace, argv: List[str]) -> int:
    """Список сохранённых запусков или точки одного запуска"""
    if not args.db:
        raise UsageError("Укажите --db или переменную CHIRP_RESULTS_DB")
    store = ResultsStore(args.db)
    if args.run_id is not None:
        points = store.get_points(args.run_id)
        if not points:
            raise UsageError(f"Запуск {args.run_id} не найден")
        print(",".join(BER_COLUMNS))
        for point in points:
            print(",".join(str(point[column]) for column in BER_COLUMNS))
        return EXIT_OK
    for record in store.list_runs(args.limit):
        print(f"{record.id}\t{record.created_at}\t{record.command}\tseed={record.seed}\t{record.csv_path}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace, argv: List[str]) -> int:
    """Повторный запуск команды из манифеста"""
    path = Path(args.manifest)
    if not path.is_file():
        raise UsageError(f"Манифест не найден: {path}")
    manifest = read_manifest(path)
    if manifest.command == "replay":
        raise UsageError("Манифест replay нельзя воспроизвести")
    replay_argv = list(manifest.argv)
    if args.out:
        replay_argv += ["--out", args.out]
    logger.info(f"Воспроизведение '{manifest.command}' от {manifest.created_at} версии {manifest.version}")
    return main(replay_argv)


def add_set_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--n", type=int, default=10, help="число сигналов N")
    parser.add_argument("--t-us", type=float, default=10.0, help="длительность символа T, мкс")
    parser.add_argument("--osf", type=int, default=DEFAULT_OVERSAMPLING, help="передискретизация")
    parser.add_argument("--gamma", type=float, default=DEFAULT_NONLINEARITY_GAIN, help="γ квартичной нелинейности")


def add_output_argument(parser: argparse.ArgumentParser):
    parser.add_argument("--out", default=os.getenv('CHIRP_OUTPUT_DIR', 'results'), help="каталог результатов")


def default_workers() -> int:
    try:
        return max(1, int(os.getenv('CHIRP_WORKERS', '1')))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chirpsim",
        description="Симулятор многопользовательской chirp-сигнализации при квазисинхронном доступе",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="отсчёты сигналов и TF-трассы")
    add_set_arguments(gen)
    gen.add_argument("--family", default="linear", help="linear, quartic или список через запятую")
    gen.add_argument("--m", default=None, help="пользователи через запятую (по умолчанию все)")
    gen.add_argument("--points", type=int, default=256, help="точек TF-трассы")
    gen.add_argument("--direction", choices=[d.value for d in ChirpDirection], default="up")
    add_output_argument(gen)
    gen.set_defaults(handler=cmd_gen)

    xcorr = subparsers.add_parser("xcorr", help="средняя взаимная корреляция от задержки")
    add_set_arguments(xcorr)
    xcorr.add_argument("--families", default="linear,quartic")
    xcorr.add_argument("--loading", type=int, default=None, help="число активных сигналов K (по умолчанию N)")
    xcorr.add_argument(
        "--normalization",
        choices=[n.value for n in LoadNormalization],
        default=LoadNormalization.PAIR_MEAN.value,
        help="нормировка при K < N: среднее по парам или суммарная MAI на N - 1",
    )
    xcorr.add_argument("--points", type=int, default=256)
    xcorr.add_argument("--max-delay-frac", type=float, default=0.5)
    xcorr.add_argument("--seed", type=int, default=0, help="зерно выбора подмножеств загрузки")
    xcorr.add_argument("--workers", type=int, default=default_workers())
    add_output_argument(xcorr)
    xcorr.set_defaults(handler=cmd_xcorr)

    ber = subparsers.add_parser("ber", help="BER в зависимости от Eb/N0")
    add_set_arguments(ber)
    ber.add_argument("--family", default="linear", help="linear, quartic или список через запятую")
    ber.add_argument("--channel", choices=[k.value for k in ChannelKind], default=ChannelKind.AWGN.value)
    ber.add_argument("--k-db", type=float, default=12.0, help="K-фактор Райса, дБ")
    ber.add_argument("--fd-t", type=float, default=0.01, help="нормированный доплеровский сдвиг f_D·T")
    ber.add_argument("--profile", default=None, help="mean, worst или путь к файлу профиля")
    ber.add_argument("--users", type=int, default=None, help="число активных пользователей K (по умолчанию N)")
    ber.add_argument("--sigma", default="0.1", help="σ/T задержек, список через запятую или 'presets'")
    ber.add_argument("--mode", choices=[m.value for m in DetectorMode], default=DetectorMode.NONCOHERENT.value)
    ber.add_argument("--ebn0", default="0:2:12", help="сетка Eb/N0 в дБ: start:step:stop (отрицательные через --ebn0=)")
    ber.add_argument("--min-errors", type=parse_count, default=DEFAULT_MIN_BIT_ERRORS)
    ber.add_argument("--max-bits", type=parse_count, default=DEFAULT_MAX_BITS)
    ber.add_argument("--block-size", type=parse_count, default=DEFAULT_BLOCK_SIZE)
    ber.add_argument("--seed", type=int, default=None, help="зерно (по умолчанию случайное, пишется в манифест)")
    ber.add_argument("--workers", type=int, default=default_workers())
    ber.add_argument("--db", default=os.getenv('CHIRP_RESULTS_DB'), help="архив запусков SQLite")
    add_output_argument(ber)
    ber.set_defaults(handler=cmd_ber)

    pdp = subparsers.add_parser("pdp", help="PDP AG-канала во времени")
    pdp.add_argument("--profile", default="mean", help="mean, worst или путь к файлу профиля")
    pdp.add_argument("--k-db", type=float, default=12.0)
    pdp.add_argument("--symbols", type=parse_count, default=200)
    pdp.add_argument("--seed", type=int, default=None)
    add_output_argument(pdp)
    pdp.set_defaults(handler=cmd_pdp)

    runs = subparsers.add_parser("runs", help="архив BER-запусков")
    runs.add_argument("--db", default=os.getenv('CHIRP_RESULTS_DB'))
    runs.add_argument("--limit", type=int, default=20)
    runs.add_argument("--run-id", type=int, default=None)
    runs.set_defaults(handler=cmd_runs)

    replay = subparsers.add_parser("replay", help="повтор запуска по манифесту")
    replay.add_argument("manifest")
    replay.add_argument("--out", default=None, help="каталог для результатов повтора")
    replay.set_defaults(handler=cmd_replay)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Точка входа командной строки

    Args:
        argv: Аргументы без имени программы (по умолчанию sys.argv[1:])

    Returns:
        int: Код выхода: 0 успех, 1 ошибка выполнения, 2 ошибка конфигурации
    """
    setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "ber":
        args.profile_given = args.profile is not None
        if args.profile is None:
            args.profile = "mean"

    try:
        return args.handler(args, argv)
    except ProfileError as e:
        logger.error(f"Ошибка профиля канала, ключ '{e.key}': {e}")
        print(f"error: invalid profile key '{e.key}': {e}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as e:
        logger.error(f"Ошибка параметров: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ChirpDomainError as e:
        logger.error(f"Ошибка области определения: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"Ошибка выполнения команды {args.command}: {e}")
        return EXIT_RUNTIME


def run():
    """Точка входа консольного скрипта"""
    sys.exit(main())


if __name__ == '__main__':
    run()
