"""
Сохранение результатов: CSV с версионированной схемой, манифест запуска и архив запусков в SQLite
"""
import csv
import json
import logging
import sqlite3
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from sim import __version__
from sim.montecarlo import BerPoint, SimConfig

logger = logging.getLogger(__name__)


SCHEMA_VERSION = "v1"
MANIFEST_SUFFIX = "_manifest.json"

WAVEFORM_COLUMNS = ["m", "t", "re", "im"]
TF_TRACE_COLUMNS = ["m", "t", "f"]
XCORR_COLUMNS = ["delay_frac", "family", "n_signals", "loading", "avg_abs_corr"]
BER_COLUMNS = [
    "ebn0_db", "family", "channel", "profile", "sigma_frac", "users",
    "mode", "bits", "errors", "ber", "ci95",
]
PDP_COLUMNS = ["symbol_index", "tap_delay_s", "power_db"]


def format_value(value: Any) -> str:
    """Вещественные числа с 9 значащими цифрами, остальное как есть"""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_csv(path: Path, schema: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """
    Запись CSV: строка '#schema=<name>/v1', строка заголовков, строки данных

    Args:
        path: Путь к файлу
        schema: Имя схемы
        columns: Имена колонок
        rows: Строки данных

    Returns:
        Path: Путь к записанному файлу
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        f.write(f"#schema={schema}/{SCHEMA_VERSION}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
            count += 1
    logger.info(f"Записан CSV {path} | схема: {schema} | строк: {count}")
    return path


def read_csv(path: Path) -> Dict[str, Any]:
    """Чтение CSV, записанного write_csv: схема, колонки и строки-словари"""
    with Path(path).open(encoding="utf-8") as f:
        schema_line = f.readline().strip()
        reader = csv.DictReader(f)
        rows = list(reader)
    return {
        "schema": schema_line.removeprefix("#schema="),
        "columns": reader.fieldnames or [],
        "rows": rows,
    }


def ber_rows(config: SimConfig, points: Sequence[BerPoint]) -> List[List[Any]]:
    """Строки CSV для точек BER одного эксперимента"""
    return [
        [
            float(point.ebn0_db),
            config.chirp_set.family.value,
            config.channel.kind.value,
            config.channel.profile_name,
            float(config.offset_sigma_frac),
            config.n_active_users,
            config.mode.value,
            point.bits_simulated,
            point.bit_errors,
            float(point.ber),
            float(point.wilson_95_halfwidth),
        ]
        for point in points
    ]


@dataclass
class RunManifest:
    """
    Манифест запуска: всё необходимое для воспроизведения результата

    Args:
        command: Имя команды
        argv: Аргументы команды с разрешённым seed
        parameters: Параметры со всеми значениями по умолчанию
        seed: Зерно (None для детерминированных команд)
        outputs: Пути к выходным файлам
        created_at: Время запуска в UTC (ISO 8601)
        version: Версия инструмента
    """
    command: str
    argv: List[str]
    parameters: Dict[str, Any]
    seed: Optional[int]
    outputs: List[str]
    created_at: str = ""
    version: str = __version__

    def __post_init__(self):
        if not self.created_at:
            self.created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool": "chirpsim",
            "version": self.version,
            "command": self.command,
            "argv": self.argv,
            "parameters": self.parameters,
            "seed": self.seed,
            "outputs": self.outputs,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        return cls(
            command=data["command"],
            argv=list(data["argv"]),
            parameters=data.get("parameters", {}),
            seed=data.get("seed"),
            outputs=list(data.get("outputs", [])),
            created_at=data.get("created_at", ""),
            version=data.get("version", __version__),
        )


def write_manifest(directory: Path, manifest: RunManifest) -> Path:
    """Запись манифеста <command>_manifest.json рядом с результатами"""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{manifest.command}{MANIFEST_SUFFIX}"
    path.write_text(json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False), encoding="utf-8")
    logger.info(f"Записан манифест {path}")
    return path


def read_manifest(path: Path) -> RunManifest:
    """Чтение манифеста запуска"""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return RunManifest.from_dict(data)


@dataclass
class RunRecord:
    id: int
    command: str
    created_at: str
    seed: Optional[int]
    parameters: Dict[str, Any]
    csv_path: str


class ResultsStore:
    """Архив BER-запусков в SQLite для сравнения между сериями"""

    def __init__(self, db_path: str = "chirpsim.db"):
        self.db_path = db_path
        self.init_database()

    def init_database(self):
        """Создание таблиц архива"""
        conn = self.get_connection()
        cursor = conn.cursor()

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                created_at TEXT NOT NULL,
                seed TEXT,
                parameters TEXT NOT NULL,
                csv_path TEXT
            )
        """)

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS ber_points (
                run_id INTEGER NOT NULL,
                family TEXT NOT NULL,
                channel TEXT NOT NULL,
                profile TEXT,
                sigma_frac REAL NOT NULL,
                users INTEGER NOT NULL,
                mode TEXT NOT NULL,
                ebn0_db REAL NOT NULL,
                bits INTEGER NOT NULL,
                errors INTEGER NOT NULL,
                ber REAL NOT NULL,
                ci95 REAL NOT NULL,
                FOREIGN KEY (run_id) REFERENCES runs (id)
            )
        """)

        conn.commit()
        conn.close()

    def get_connection(self):
        return sqlite3.connect(self.db_path)

    def save_run(self, manifest: RunManifest, rows: Sequence[Sequence[Any]], csv_path: str = "") -> int:
        """
        Сохранение запуска и его точек BER

        Args:
            manifest: Манифест запуска
            rows: Строки в порядке BER_COLUMNS
            csv_path: Путь к CSV запуска

        Returns:
            int: Идентификатор запуска
        """
        conn = self.get_connection()
        cursor = conn.cursor()
        # seed 64-битный беззнаковый, INTEGER в SQLite знаковый
        seed = None if manifest.seed is None else str(manifest.seed)
        cursor.execute("""
            INSERT INTO runs (command, created_at, seed, parameters, csv_path)
            VALUES (?, ?, ?, ?, ?)
        """, (manifest.command, manifest.created_at, seed, json.dumps(manifest.parameters), csv_path))
        run_id = cursor.lastrowid
        cursor.executemany("""
            INSERT INTO ber_points (run_id, ebn0_db, family, channel, profile, sigma_frac,
                                    users, mode, bits, errors, ber, ci95)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
        """, [(run_id, *row) for row in rows])
        conn.commit()
        conn.close()
        logger.info(f"Запуск {run_id} сохранён в {self.db_path}: точек {len(rows)}")
        return run_id

    def list_runs(self, limit: int = 20) -> List[RunRecord]:
        """Последние запуски, новые первыми"""
        conn = self.get_connection()
        cursor = conn.cursor()
        cursor.execute("""
            SELECT id, command, created_at, seed, parameters, csv_path
            FROM runs ORDER BY id DESC LIMIT ?
        """, (limit,))
        rows = cursor.fetchall()
        conn.close()
        return [
            RunRecord(
                id=row[0],
                command=row[1],
                created_at=row[2],
                seed=int(row[3]) if row[3] is not None else None,
                parameters=json.loads(row[4]),
                csv_path=row[5] or "",
            )
            for row in rows
        ]

    def get_points(self, run_id: int) -> List[Dict[str, Any]]:
        """Точки BER запуска в порядке сохранения"""
        conn = self.get_connection()
        cursor = conn.cursor()
        cursor.execute("""
            SELECT ebn0_db, family, channel, profile, sigma_frac, users, mode, bits, errors, ber, ci95
            FROM ber_points WHERE run_id = ? ORDER BY rowid
        """, (run_id,))
        rows = cursor.fetchall()
        conn.close()
        return [dict(zip(BER_COLUMNS, row)) for row in rows]
