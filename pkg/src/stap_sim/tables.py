"""CSV emission with platform-stable float formatting."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dynamics import SimResult

SIG_DIGITS = 12


def fmt(x) -> str:
    """Shortest round-trip text of ``x`` after rounding to 12 significant digits."""
    if isinstance(x, str):
        return x
    x = float(x)
    if np.isnan(x):
        return "nan"
    rounded = float(f"{x:.{SIG_DIGITS}g}")
    if rounded == 0.0:
        rounded = 0.0  # drop the sign of -0.0
    return repr(rounded)


def render(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    Path(path).write_text(render(header, rows), encoding="utf-8")


def trajectory_table(result: SimResult) -> tuple[list[str], list[list]]:
    traj = result.trajectory
    header = ["t", *traj.populations, *traj.derived_populations, "fidelity"]
    columns = [traj.times, *traj.populations.values(), *traj.derived_populations.values(),
               traj.fidelity]
    return header, [list(row) for row in zip(*columns)]


def pulse_rows(table: np.ndarray) -> tuple[list[str], list[list]]:
    return ["t", "Omega1", "Omega2"], [list(r) for r in table]
