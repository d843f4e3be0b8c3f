"""Тесты сохранения результатов"""

from chirp.waveform import ChirpFamily, ChirpSet
from channel.models import ChannelSpec
from sim.montecarlo import BerPoint, SimConfig
from sim.results import (
    BER_COLUMNS,
    ResultsStore,
    RunManifest,
    ber_rows,
    format_value,
    read_csv,
    read_manifest,
    write_csv,
    write_manifest,
)


def make_config(mean_profile):
    chirp_set = ChirpSet(n_signals=10, symbol_duration=1e-5, family=ChirpFamily.QUARTIC)
    return SimConfig(chirp_set, 5, offset_sigma_frac=0.05, channel=ChannelSpec.ag_tdl(mean_profile))


def test_format_value():
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(7) == "7"
    assert format_value("awgn") == "awgn"


def test_csv_has_schema_line(tmp_path):
    path = write_csv(tmp_path / "nested" / "table.csv", "demo", ["a", "b"], [[1, 0.5], [2, 1e-7]])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == ["#schema=demo/v1", "a,b", "1,0.5", "2,1e-07"]
    table = read_csv(path)
    assert table["schema"] == "demo/v1"
    assert table["columns"] == ["a", "b"]
    assert table["rows"][1] == {"a": "2", "b": "1e-07"}


def test_ber_rows_follow_columns(mean_profile):
    config = make_config(mean_profile)
    points = [BerPoint(4.0, 4096, 300), BerPoint(8.0, 8192, 12)]
    rows = ber_rows(config, points)
    assert len(rows) == 2
    record = dict(zip(BER_COLUMNS, rows[0]))
    assert record["family"] == "quartic"
    assert record["channel"] == "ag-tdl"
    assert record["profile"] == "hilly_suburban_mean"
    assert record["users"] == 5
    assert record["mode"] == "noncoherent"
    assert record["ber"] == 300 / 4096
    assert record["ci95"] == points[0].wilson_95_halfwidth


def test_manifest_round_trip(tmp_path):
    manifest = RunManifest("ber", ["ber", "--seed", "5"], {"users": 3}, 5, ["out/ber.csv"])
    path = write_manifest(tmp_path, manifest)
    assert path.name == "ber_manifest.json"
    restored = read_manifest(path)
    assert restored.argv == manifest.argv
    assert restored.seed == 5
    assert restored.parameters == {"users": 3}
    assert restored.created_at == manifest.created_at
    assert restored.to_dict()["tool"] == "chirpsim"


def test_results_store(tmp_path, mean_profile):
    store = ResultsStore(str(tmp_path / "runs.db"))
    config = make_config(mean_profile)
    rows = ber_rows(config, [BerPoint(4.0, 4096, 300), BerPoint(8.0, 8192, 12)])

    first = store.save_run(RunManifest("ber", ["ber"], config.describe(), 11, []), rows, "a.csv")
    second = store.save_run(RunManifest("ber", ["ber"], config.describe(), 2 ** 64 - 1, []), rows[:1], "b.csv")

    runs = store.list_runs()
    assert [run.id for run in runs] == [second, first]
    assert runs[0].seed == 2 ** 64 - 1
    assert runs[1].parameters["channel"]["profile"] == "hilly_suburban_mean"
    assert runs[1].csv_path == "a.csv"

    points = store.get_points(first)
    assert len(points) == 2
    assert points[0]["family"] == "quartic"
    assert points[1]["errors"] == 12
    assert points[1]["ebn0_db"] == 8.0
    assert store.get_points(999) == []
