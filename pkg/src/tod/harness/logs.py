"""Run logs: the operator-side signal table and its CSV form.

Column order and formatting are frozen so identical runs export
byte-identical files: header `t,desired_swa,actual_swa,desired_v,
actual_v,gear,estop,mode`, floats with 6 decimal places.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

from ..core.types import DriveMode, Gear
from ..operator.node import LogRow

CSV_HEADER = "t,desired_swa,actual_swa,desired_v,actual_v,gear,estop,mode"

_GEAR_NAMES = {g: g.name.capitalize() for g in Gear}
_MODE_NAMES = {DriveMode.NORMAL: "Normal", DriveMode.SAFE_STOP: "SafeStop"}


@dataclass
class LogTable:
    rows: list[LogRow]

    def __post_init__(self) -> None:
        for a, b in zip(self.rows, self.rows[1:]):
            if b.t <= a.t:
                raise ValueError(f"log rows must increase in time ({a.t} -> {b.t})")

    def __len__(self) -> int:
        return len(self.rows)


def format_row(row: LogRow) -> str:
    return (
        f"{row.t:.6f},{row.desired_swa:.6f},{row.actual_swa:.6f},"
        f"{row.desired_v:.6f},{row.actual_v:.6f},"
        f"{_GEAR_NAMES[row.gear]},{int(row.estop)},{_MODE_NAMES[row.mode]}"
    )


def export_logs(table: LogTable, path: str | Path) -> Path:
    """Deterministic CSV; re-exporting the same table is byte-identical."""
    path = Path(path)
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for row in table.rows:
        buf.write(format_row(row) + "\n")
    path.write_text(buf.getvalue())
    return path


def read_log(path: str | Path) -> LogTable:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing or wrong CSV header")
    gear_by_name = {v: k for k, v in _GEAR_NAMES.items()}
    mode_by_name = {v: k for k, v in _MODE_NAMES.items()}
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 8:
            raise ValueError(f"{path}:{i}: expected 8 fields, got {len(parts)}")
        try:
            rows.append(
                LogRow(
                    t=float(parts[0]),
                    desired_swa=float(parts[1]),
                    actual_swa=float(parts[2]),
                    desired_v=float(parts[3]),
                    actual_v=float(parts[4]),
                    gear=gear_by_name[parts[5]],
                    estop=bool(int(parts[6])),
                    mode=mode_by_name[parts[7]],
                )
            )
        except (ValueError, KeyError) as exc:
            raise ValueError(f"{path}:{i}: {exc}") from exc
    return LogTable(rows)
