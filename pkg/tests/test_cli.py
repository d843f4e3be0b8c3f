"""Тесты командной строки chirpsim"""

import argparse
import json

import pytest

from sim.main import UsageError, main, parse_count, parse_grid, parse_sigmas
from sim.results import read_csv, read_manifest


BER_ARGS = [
    "ber", "--n", "4", "--t-us", "1", "--users", "3", "--ebn0", "0:5:10",
    "--min-errors", "100", "--max-bits", "4096", "--block-size", "1024",
]

BAD_PROFILE = """
[tap1]
delay_us = 0.5
power_db = 0
fading = los_ricean
"""


def test_parse_grid():
    assert parse_grid("0:2:12") == [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
    assert parse_grid("0:0.1:0.3") == [0.0, 0.1, 0.2, 0.3]
    assert parse_grid("1,3.5") == [1.0, 3.5]
    assert parse_grid("5") == [5.0]
    for bad in ("0:0:5", "4:1:2", "a:b", "x"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_parse_count_and_sigmas():
    assert parse_count("2e7") == 20_000_000
    with pytest.raises(argparse.ArgumentTypeError):
        parse_count("1.5")
    assert parse_sigmas("presets") == [0.05, 0.1]
    assert parse_sigmas("0,0.2") == [0.0, 0.2]
    with pytest.raises(UsageError):
        parse_sigmas("-0.1")


def test_gen_default_waveform(tmp_path):
    assert main(["gen", "--out", str(tmp_path)]) == 0
    waveform = read_csv(tmp_path / "waveform_linear.csv")
    assert waveform["schema"] == "waveform/v1"
    assert waveform["columns"] == ["m", "t", "re", "im"]
    first = waveform["rows"][0]
    assert first["m"] == "0"
    assert float(first["t"]) == 0.0
    assert float(first["re"]) == pytest.approx(0.707106781, abs=1e-9)
    assert float(first["im"]) == pytest.approx(0.707106781, abs=1e-9)
    assert len(waveform["rows"]) == 10 * 80

    trace = read_csv(tmp_path / "tf_trace_linear.csv")
    last = [row for row in trace["rows"] if row["m"] == "9"][-1]
    assert float(last["f"]) == pytest.approx(1.9e6, abs=4000)
    manifest = read_manifest(tmp_path / "gen_manifest.json")
    assert manifest.command == "gen"
    assert manifest.seed is None
    assert manifest.parameters["users"] == list(range(10))
    assert manifest.parameters["gamma"] == 1.5
    assert manifest.parameters["out"] == str(tmp_path)


def test_gen_quartic_without_gain_matches_linear(tmp_path):
    linear_dir = tmp_path / "linear"
    quartic_dir = tmp_path / "quartic"
    assert main(["gen", "--family", "linear", "--out", str(linear_dir)]) == 0
    assert main(["gen", "--family", "quartic", "--gamma", "0", "--out", str(quartic_dir)]) == 0
    for name in ("waveform", "tf_trace"):
        linear = (linear_dir / f"{name}_linear.csv").read_bytes()
        quartic = (quartic_dir / f"{name}_quartic.csv").read_bytes()
        assert linear == quartic


def test_gen_rejects_bad_user(tmp_path):
    assert main(["gen", "--m", "12", "--out", str(tmp_path)]) == 2


def test_xcorr_curves(tmp_path):
    full_dir = tmp_path / "full"
    partial_dir = tmp_path / "partial"
    assert main(["xcorr", "--points", "17", "--out", str(full_dir)]) == 0
    assert main(["xcorr", "--points", "17", "--loading", "5", "--out", str(partial_dir)]) == 0

    full = read_csv(full_dir / "xcorr.csv")
    partial = read_csv(partial_dir / "xcorr.csv")
    assert full["schema"] == "xcorr/v1"
    families = {row["family"] for row in full["rows"]}
    assert families == {"linear", "quartic"}
    for family in families:
        fractions = [float(row["delay_frac"]) for row in full["rows"] if row["family"] == family]
        assert fractions[0] == 0.0
        assert fractions[-1] == pytest.approx(0.5)
    linear = {row["delay_frac"]: float(row["avg_abs_corr"]) for row in full["rows"] if row["family"] == "linear"}
    quartic = {row["delay_frac"]: float(row["avg_abs_corr"]) for row in full["rows"] if row["family"] == "quartic"}
    window = [fraction for fraction in linear if float(fraction) >= 0.05]
    assert len(window) == 15
    assert all(quartic[fraction] < linear[fraction] for fraction in window)
    for full_row, partial_row in zip(full["rows"], partial["rows"]):
        assert float(partial_row["avg_abs_corr"]) <= float(full_row["avg_abs_corr"]) + 2e-3
        assert partial_row["loading"] == "5"

    manifest = read_manifest(partial_dir / "xcorr_manifest.json")
    assert manifest.parameters["loading"] == 5
    assert manifest.parameters["normalization"] == "pair_mean"
    assert manifest.parameters["workers"] >= 1
    assert manifest.parameters["out"] == str(partial_dir)


def test_xcorr_aggregate_normalization(tmp_path):
    pair_dir = tmp_path / "pair"
    aggregate_dir = tmp_path / "aggregate"
    common = ["xcorr", "--families", "quartic", "--points", "5", "--loading", "5"]
    assert main(common + ["--out", str(pair_dir)]) == 0
    assert main(common + ["--normalization", "aggregate", "--out", str(aggregate_dir)]) == 0
    pair = read_csv(pair_dir / "xcorr.csv")["rows"]
    aggregate = read_csv(aggregate_dir / "xcorr.csv")["rows"]
    for pair_row, aggregate_row in zip(pair, aggregate):
        assert float(aggregate_row["avg_abs_corr"]) == pytest.approx(float(pair_row["avg_abs_corr"]) * 4 / 9, rel=1e-6)


def test_ber_is_reproducible_with_seed(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert main(BER_ARGS + ["--seed", "7", "--out", str(first)]) == 0
    assert main(BER_ARGS + ["--seed", "7", "--workers", "3", "--out", str(second)]) == 0
    assert (first / "ber.csv").read_bytes() == (second / "ber.csv").read_bytes()

    table = read_csv(first / "ber.csv")
    assert table["schema"] == "ber/v1"
    assert [float(row["ebn0_db"]) for row in table["rows"]] == [0.0, 5.0, 10.0]
    for row in table["rows"]:
        assert row["family"] == "linear"
        assert row["channel"] == "awgn"
        assert int(row["errors"]) <= int(row["bits"])


def test_ber_families_and_sigma_presets(tmp_path):
    args = BER_ARGS + ["--family", "linear,quartic", "--sigma", "presets", "--ebn0", "6", "--seed", "1"]
    assert main(args + ["--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "ber.csv")["rows"]
    assert [(row["family"], float(row["sigma_frac"])) for row in rows] == [
        ("linear", 0.05), ("linear", 0.1), ("quartic", 0.05), ("quartic", 0.1),
    ]


def test_ber_records_generated_seed_and_replays(tmp_path):
    original = tmp_path / "original"
    replayed = tmp_path / "replayed"
    assert main(BER_ARGS + ["--out", str(original)]) == 0

    manifest_path = original / "ber_manifest.json"
    manifest = read_manifest(manifest_path)
    assert manifest.seed is not None
    assert manifest.argv[-2:] == ["--seed", str(manifest.seed)]
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    assert data["parameters"]["experiments"][0]["seed"] == manifest.seed
    assert data["parameters"]["workers"] >= 1
    assert data["parameters"]["out"] == str(original)
    assert data["parameters"]["experiments"][0]["users"] == 3

    assert main(["replay", str(manifest_path), "--out", str(replayed)]) == 0
    assert (original / "ber.csv").read_bytes() == (replayed / "ber.csv").read_bytes()


def test_ber_ag_channel(tmp_path):
    args = [
        "ber", "--users", "3", "--channel", "ag-tdl", "--profile", "worst", "--ebn0", "8",
        "--min-errors", "100", "--max-bits", "2048", "--block-size", "1024", "--seed", "4",
    ]
    assert main(args + ["--out", str(tmp_path)]) == 0
    (row,) = read_csv(tmp_path / "ber.csv")["rows"]
    assert row["channel"] == "ag-tdl"
    assert row["profile"] == "hilly_suburban_worst"


def test_malformed_profile_is_config_error(tmp_path, capsys):
    profile = tmp_path / "bad.txt"
    profile.write_text(BAD_PROFILE, encoding="utf-8")
    code = main(BER_ARGS + ["--channel", "ag-tdl", "--profile", str(profile), "--seed", "1", "--out", str(tmp_path)])
    assert code == 2
    assert "tap1.delay_us" in capsys.readouterr().err
    assert not (tmp_path / "ber.csv").exists()


def test_profile_requires_ag_channel(tmp_path):
    assert main(BER_ARGS + ["--profile", "mean", "--seed", "1", "--out", str(tmp_path)]) == 2


def test_too_few_min_errors_is_domain_error(tmp_path):
    args = [arg if arg != "100" else "10" for arg in BER_ARGS]
    assert main(args + ["--seed", "1", "--out", str(tmp_path)]) == 1


def test_unknown_flag_exits_with_usage_code():
    with pytest.raises(SystemExit) as error:
        main(["ber", "--bogus"])
    assert error.value.code == 2


def test_runs_archive(tmp_path, capsys):
    db = tmp_path / "runs.db"
    assert main(BER_ARGS + ["--seed", "3", "--db", str(db), "--out", str(tmp_path / "out")]) == 0
    capsys.readouterr()

    assert main(["runs", "--db", str(db)]) == 0
    listing = capsys.readouterr().out
    assert "ber" in listing
    assert "seed=3" in listing

    assert main(["runs", "--db", str(db), "--run-id", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("ebn0_db,family,channel")
    assert len(lines) == 4

    assert main(["runs", "--db", str(db), "--run-id", "99"]) == 2


def test_pdp_command(tmp_path, capsys):
    assert main(["pdp", "--profile", "worst", "--symbols", "50", "--seed", "3", "--out", str(tmp_path)]) == 0
    assert "rms_delay_spread_s=" in capsys.readouterr().out
    table = read_csv(tmp_path / "pdp_hilly_suburban_worst.csv")
    assert table["schema"] == "pdp/v1"
    symbols = {int(row["symbol_index"]) for row in table["rows"]}
    assert symbols == set(range(50))
    assert {float(row["tap_delay_s"]) for row in table["rows"]} >= {0.0, 3e-7}
