"""Perturbed probabilistic-teleportation sweep over (n, delta = n - m)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from gtp import analytic

HEADER = "n,delta,f_pqt,p_suc,c_pqt"


def grid_values(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded so that e.g. 0 is hit exactly."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid stop must not precede start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


@dataclass(frozen=True)
class SweepSpec:
    n_grid: tuple = (0.05, 1.0, 0.05)
    delta_grid: tuple = (-0.3, 0.3, 0.025)


class SweepRow(NamedTuple):
    n: float
    delta: float
    m: float
    f_pqt: float
    p_suc: float
    c_pqt: float


def sweep_rows(spec: SweepSpec) -> tuple[list[SweepRow], list[tuple[float, float]]]:
    """Rows in (n, delta) grid order, plus the skipped (n, delta) points."""
    rows, skipped = [], []
    for n in grid_values(*spec.n_grid):
        if not 0 < n <= 1:
            raise ValueError(f"channel parameter {n} outside (0, 1]")
        for delta in grid_values(*spec.delta_grid):
            m = round(n - delta, 12)
            if not 0 < m <= 1:
                skipped.append((n, delta))
                continue
            attrs = analytic.pqt_attributes(n, m)
            rows.append(SweepRow(n, delta, m, attrs.f_pqt, attrs.p_suc, attrs.c_pqt))
    if not rows:
        raise ValueError("sweep grid produced no valid rows")
    return rows, skipped


def _fmt(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def render_csv(rows: list[SweepRow]) -> str:
    lines = [HEADER]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (r.n, r.delta, r.f_pqt, r.p_suc, r.c_pqt)))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[dict[str, float]]:
    lines = text.strip("\n").split("\n")
    if lines[0] != HEADER:
        raise ValueError(f"unexpected header {lines[0]!r}")
    keys = HEADER.split(",")
    return [dict(zip(keys, map(float, line.split(",")))) for line in lines[1:]]
