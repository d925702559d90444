"""Tests for the result files."""

import csv
import json
import math
import struct

import numpy as np
import pytest

from thermoplate import EvolutionConfig, choose_constants, evolve, sample_ball
from thermoplate._serializers import (
    DISTANCE_COLUMNS,
    RunReport,
    SnapshotError,
    format_float,
    read_snapshot,
    write_report_csv,
    write_report_json,
    write_snapshot,
    write_svg_chart,
    write_trajectory_csv,
)
from thermoplate.constants import REPORT_SCHEMA_VERSION, TRAJECTORY_COLUMNS
from thermoplate.testing import seeded_state


def test_format_float():
    assert format_float(None) == ""
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(math.pi)) == math.pi
    assert format_float(2) == "2"


def test_snapshot_round_trip_is_exact(tmp_path, square):
    ensemble = sample_ball(square, 1.5, 5, seed=3, time=-2.5)
    path = tmp_path / "cloud.tplt"
    write_snapshot(path, ensemble)
    loaded = read_snapshot(path)
    assert loaded.domain == square
    assert loaded.time == -2.5
    assert len(loaded) == 5
    for original, copy in zip(ensemble.members, loaded.members, strict=True):
        assert np.array_equal(original.stacked(), copy.stacked())


def test_snapshot_header_layout(tmp_path, square):
    path = tmp_path / "cloud.tplt"
    write_snapshot(path, sample_ball(square, 1.0, 2, seed=0))
    data = path.read_bytes()
    magic, version, dimension = struct.unpack_from("<4sII", data)
    assert (magic, version, dimension) == (b"TPLT", 1, 2)
    assert len(data) == struct.calcsize("<4sIIdIId") + 2 * 3 * 16 * 8


def test_same_seed_gives_identical_snapshot_bytes(tmp_path, square):
    first, second = tmp_path / "a.tplt", tmp_path / "b.tplt"
    write_snapshot(first, sample_ball(square, 1.0, 4, seed=21))
    write_snapshot(second, sample_ball(square, 1.0, 4, seed=21))
    assert first.read_bytes() == second.read_bytes()


def test_snapshot_errors(tmp_path, square):
    path = tmp_path / "cloud.tplt"
    write_snapshot(path, sample_ball(square, 1.0, 2, seed=0))
    data = path.read_bytes()

    (tmp_path / "short.tplt").write_bytes(data[:10])
    with pytest.raises(SnapshotError, match="too short"):
        read_snapshot(tmp_path / "short.tplt")
    (tmp_path / "magic.tplt").write_bytes(b"XXXX" + data[4:])
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(tmp_path / "magic.tplt")
    (tmp_path / "version.tplt").write_bytes(data[:4] + struct.pack("<I", 9) + data[8:])
    with pytest.raises(SnapshotError, match="version"):
        read_snapshot(tmp_path / "version.tplt")
    (tmp_path / "truncated.tplt").write_bytes(data[:-8])
    with pytest.raises(SnapshotError, match="bytes"):
        read_snapshot(tmp_path / "truncated.tplt")


def test_trajectory_csv(tmp_path, square, unit_params, sine_f):
    lyapunov = choose_constants(square, unit_params, sine_f, radius=2.0)
    record = evolve(
        seeded_state(square, 1, scale=0.3), unit_params, sine_f, 0.0, 0.5, EvolutionConfig(dt=0.1), lyapunov=lyapunov
    )
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(path, record)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    assert len(rows) == len(record.times) + 1
    first = dict(zip(rows[0], rows[1], strict=True))
    assert float(first["time"]) == 0.0
    assert float(first["E"]) == record.energies[0].total
    assert float(first["L_functional"]) == record.energies[0].lyapunov
    assert "\r" not in path.read_text(encoding="utf-8")


def test_trajectory_csv_without_lyapunov_leaves_column_empty(tmp_path, square, unit_params, zero_f):
    record = evolve(seeded_state(square, 2), unit_params, zero_f, 0.0, 0.2, EvolutionConfig(dt=0.1))
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(path, record)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert all(row["L_functional"] == "" for row in rows)


def _report() -> RunReport:
    report = RunReport(command="verify", config="configs/default.ini")
    report.add("operator_inverse", True, 3e-16)
    report.add("envelope", False, -0.5, "2 violations")
    report.add("absorbing", True, math.inf)
    report.constants = {"M": 12.5, "window": (0.1, 0.2), "gamma2": math.nan}
    report.fitted = {"alpha": 0.2151, "samples": 100}
    report.timing = {"total": 1.5}
    return report


def test_run_report_json(tmp_path):
    report = _report()
    assert not report.passed
    path = tmp_path / "report.json"
    write_report_json(path, report)
    loaded = json.loads(path.read_text(encoding="utf-8"))
    assert loaded["schema_version"] == REPORT_SCHEMA_VERSION
    assert loaded["command"] == "verify"
    assert loaded["passed"] is False
    assert [check["name"] for check in loaded["checks"]] == ["operator_inverse", "envelope", "absorbing"]
    assert loaded["checks"][2]["margin"] == "inf"
    assert loaded["constants"]["window"] == [0.1, 0.2]
    assert loaded["constants"]["gamma2"] == "nan"
    assert loaded["fitted"]["samples"] == 100


def test_run_report_csv(tmp_path):
    path = tmp_path / "report.csv"
    write_report_csv(path, _report())
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["kind", "name", "passed", "value", "detail"]
    assert rows[2] == ["check", "envelope", "false", "-0.5", "2 violations"]
    assert ["constant", "M", "", "12.5", ""] in rows
    assert ["fitted", "samples", "", "100", ""] in rows


def test_empty_report_passes():
    assert RunReport(command="simulate", config="x.ini").passed


def test_run_report_json_accepts_numpy_scalars(tmp_path):
    report = RunReport(command="verify", config="x.ini")
    rise, allowed = np.float64(1e-4), np.float64(2e-4)
    report.add("energy_monotone", rise <= allowed, allowed - rise)
    report.fitted = {"alpha": np.float64(0.25), "levels": np.int64(3), "flag": np.bool_(True)}
    path = tmp_path / "report.json"
    write_report_json(path, report)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["checks"][0]["passed"] is True
    assert data["checks"][0]["margin"] == pytest.approx(1e-4)
    assert data["fitted"] == {"alpha": 0.25, "levels": 3, "flag": True}
    assert type(report.checks[0].passed) is bool


def test_distance_columns():
    assert DISTANCE_COLUMNS == ("horizon", "tau", "distance", "cloud_radius")


def test_svg_chart_is_reproducible(tmp_path):
    x = [0.0, 1.0, 2.0]
    series = {"E": [3.0, 2.0, 1.5], "L": [4.0, 2.5, 1.0]}
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    write_svg_chart(first, x, series, "t", "value", log_y=True)
    write_svg_chart(second, x, series, "t", "value", log_y=True)
    text = first.read_text(encoding="utf-8")
    assert text.lstrip().startswith("<?xml")
    assert "<dc:date>" not in text
    assert first.read_bytes() == second.read_bytes()
