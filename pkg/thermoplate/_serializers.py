"""Result files: trajectory and distance CSV, JSON reports, binary snapshots and SVG charts."""

from __future__ import annotations

import csv
import json
import logging
import struct
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from .attractor import EnsembleSet
from .constants import (
    CSV_SIGNIFICANT_DIGITS,
    REPORT_SCHEMA_VERSION,
    SNAPSHOT_MAGIC,
    SNAPSHOT_VERSION,
    TRAJECTORY_COLUMNS,
)
from .data_classes import BoxDomain, State

if TYPE_CHECKING:
    from .attractor import PullbackLevel
    from .dynamics import TrajectoryRecord

_LOGGER = logging.getLogger(__name__)

# magic, version, d, ℓ, n, member count, timestamp
_SNAPSHOT_HEADER = struct.Struct("<4sIIdIId")

DISTANCE_COLUMNS = ("horizon", "tau", "distance", "cloud_radius")


def format_float(value: float | None) -> str:
    """Locale-independent decimal text with 17 significant digits; empty for None."""
    if value is None:
        return ""
    return format(float(value), f".{CSV_SIGNIFICANT_DIGITS}g")


def write_trajectory_csv(path: Path, record: TrajectoryRecord) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for time, size, report in zip(record.times, record.y_norms, record.energies, strict=True):
            writer.writerow(
                [
                    format_float(time),
                    format_float(size),
                    format_float(report.total),
                    format_float(report.kinetic),
                    format_float(report.plate),
                    format_float(report.thermal),
                    format_float(report.potential),
                    format_float(report.phi),
                    format_float(report.psi),
                    format_float(report.lyapunov),
                ]
            )
    _LOGGER.info("Wrote %d trajectory rows to %s", len(record.times), path)


def write_distances_csv(path: Path, levels: Sequence[PullbackLevel]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DISTANCE_COLUMNS)
        for level in levels:
            writer.writerow(
                [
                    format_float(level.horizon),
                    format_float(level.tau),
                    format_float(level.distance),
                    format_float(level.cloud.radius_max()),
                ]
            )


@dataclass(frozen=True)
class CheckResult:
    """One named pass/fail line of a report."""

    name: str
    passed: bool
    margin: float | None = None
    detail: str = ""


@dataclass
class RunReport:
    """Machine-readable summary of one command."""

    command: str
    config: str
    checks: list[CheckResult] = field(default_factory=list)
    constants: dict[str, Any] = field(default_factory=dict)
    fitted: dict[str, Any] = field(default_factory=dict)
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, passed: bool, margin: float | None = None, detail: str = "") -> None:
        margin = None if margin is None else float(margin)
        self.checks.append(CheckResult(name, bool(passed), margin, detail))

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": self.command,
            "passed": self.passed,
            "config": self.config,
            "checks": _jsonable([asdict(check) for check in self.checks]),
            "constants": _jsonable(self.constants),
            "fitted": _jsonable(self.fitted),
            "timing": self.timing,
        }


def _jsonable(value: Any) -> Any:
    """Unwrap numpy scalars and replace non-finite floats by strings; JSON has no inf or nan."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}  # type: ignore[misc]
    if isinstance(value, list | tuple):
        return [_jsonable(item) for item in value]  # type: ignore[misc]
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


def write_report_json(path: Path, report: RunReport) -> None:
    path.write_text(json.dumps(report.to_dict(), indent=4) + "\n", encoding="utf-8")
    _LOGGER.info("Wrote %s report to %s", report.command, path)


def write_report_csv(path: Path, report: RunReport) -> None:
    """One row per check, then one row per constant and fitted value."""
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("kind", "name", "passed", "value", "detail"))
        for check in report.checks:
            writer.writerow(("check", check.name, str(check.passed).lower(), format_float(check.margin), check.detail))
        for kind, values in (("constant", report.constants), ("fitted", report.fitted)):
            for name, value in values.items():
                text = format_float(value) if isinstance(value, int | float) and not isinstance(value, bool) else value
                writer.writerow((kind, name, "", text, ""))


def write_snapshot(path: Path, ensemble: EnsembleSet) -> None:
    """Binary snapshot: little-endian header, then every member's u, v, θ coefficients as f64."""
    domain = ensemble.domain
    header = _SNAPSHOT_HEADER.pack(
        SNAPSHOT_MAGIC,
        SNAPSHOT_VERSION,
        domain.dimension,
        domain.length,
        domain.modes,
        len(ensemble),
        ensemble.time,
    )
    body = np.stack([member.stacked() for member in ensemble.members]).astype("<f8").tobytes()
    path.write_bytes(header + body)


def read_snapshot(path: Path) -> EnsembleSet:
    data = path.read_bytes()
    if len(data) < _SNAPSHOT_HEADER.size:
        raise SnapshotError(f"{path} is too short for a snapshot header")
    magic, version, dimension, length, modes, count, time = _SNAPSHOT_HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path} is not a snapshot (magic {magic!r})")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    domain = BoxDomain(dimension, length, modes)
    expected = _SNAPSHOT_HEADER.size + count * 3 * domain.mode_count * 8
    if len(data) != expected:
        raise SnapshotError(f"{path} holds {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=_SNAPSHOT_HEADER.size).astype(np.float64)
    stacked = values.reshape(count, 3, domain.mode_count)
    return EnsembleSet(tuple(State.from_stacked(domain, block, time) for block in stacked))


def write_svg_chart(
    path: Path,
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    log_y: bool = False,
) -> None:
    """Line chart without timestamps, so equal inputs give equal files."""
    import matplotlib as mpl  # noqa: PLC0415

    mpl.use("Agg")
    mpl.rcParams["svg.hashsalt"] = "thermoplate"
    from matplotlib import pyplot as plt  # noqa: PLC0415

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, values in series.items():
        ax.plot(x, values, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if log_y:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


class SnapshotError(Exception):
    """Error to indicate an unreadable snapshot file."""
