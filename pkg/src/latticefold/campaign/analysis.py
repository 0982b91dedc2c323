"""Post-hoc analysis of run event logs.

Everything a comparison figure needs is derivable from the
per-evaluation JSONL records: best-so-far trajectories, axis scatter
exports with the criticality window attached, and the Pearson
correlation matrix over the five numeric record fields.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import NonFinite, UnknownAxis

CORR_COLUMNS = ("gd_count", "k_eff", "fq", "fdh", "fitness")
SCATTER_AXES = ("eval_index", "gd_count", "k_eff", "fq", "fdh", "fitness")
K_WINDOW = (1.02, 1.08)


def load_events(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


@dataclass(frozen=True)
class CorrelationReport:
    columns: tuple[str, ...]
    matrix: np.ndarray            # nan on rows/cols flagged as zero-variance
    zero_variance: tuple[str, ...]


def pearson_corr(records: list[dict]) -> CorrelationReport:
    """Pearson coefficients over the run log columns.

    Constant columns make the coefficient undefined; they are reported
    by name and their matrix entries set to nan instead of a silent 0.
    """
    if len(records) < 2:
        raise ValueError("need at least 2 records for a correlation")
    data = np.array([[float(rec[col]) for col in CORR_COLUMNS] for rec in records])
    if not np.all(np.isfinite(data)):
        raise NonFinite("run log contains non-finite values")
    n_cols = len(CORR_COLUMNS)
    stds = data.std(axis=0)
    flagged = tuple(col for col, s in zip(CORR_COLUMNS, stds) if s == 0.0)
    matrix = np.full((n_cols, n_cols), np.nan)
    centered = data - data.mean(axis=0)
    for i in range(n_cols):
        for j in range(n_cols):
            if stds[i] == 0.0 or stds[j] == 0.0:
                continue
            if i == j:
                matrix[i, j] = 1.0
            else:
                matrix[i, j] = float(
                    (centered[:, i] * centered[:, j]).mean() / (stds[i] * stds[j])
                )
    return CorrelationReport(columns=CORR_COLUMNS, matrix=matrix, zero_variance=flagged)


def trajectory(records: list[dict]) -> list[dict]:
    """Cumulative-minimum fitness and the inventory of the incumbent."""
    if not records:
        raise ValueError("empty run log")
    rows = []
    best_fit = math.inf
    best_gd = None
    for rec in records:
        fit = float(rec["fitness"])
        if fit < best_fit:
            best_fit = fit
            best_gd = int(rec["gd_count"])
        rows.append(
            {
                "eval_index": int(rec["eval_index"]),
                "fitness": fit,
                "gd_count": int(rec["gd_count"]),
                "best_fitness": best_fit,
                "best_gd_count": best_gd,
            }
        )
    return rows


def scatter_points(records: list[dict], x_axis: str, y_axis: str) -> list[tuple[float, float]]:
    for axis in (x_axis, y_axis):
        if axis not in SCATTER_AXES:
            raise UnknownAxis(f"{axis!r} is not one of {SCATTER_AXES}")
    return [(float(rec[x_axis]), float(rec[y_axis])) for rec in records]


def write_scatter_csv(
    records: list[dict],
    x_axis: str,
    y_axis: str,
    path: str | Path,
    window: tuple[float, float] = K_WINDOW,
) -> None:
    points = scatter_points(records, x_axis, y_axis)
    lines = [
        f"# k_window_lo = {window[0]!r}",
        f"# k_window_hi = {window[1]!r}",
        f"{x_axis},{y_axis}",
    ]
    lines += [f"{x!r},{y!r}" for x, y in points]
    Path(path).write_text("\n".join(lines) + "\n")


def write_trajectory_csv(records: list[dict], path: str | Path) -> None:
    rows = trajectory(records)
    lines = ["eval_index,fitness,gd_count,best_fitness,best_gd_count"]
    lines += [
        f"{r['eval_index']},{r['fitness']!r},{r['gd_count']},{r['best_fitness']!r},{r['best_gd_count']}"
        for r in rows
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def write_correlation_csv(report: CorrelationReport, path: str | Path) -> None:
    lines = []
    if report.zero_variance:
        lines.append("# zero_variance_columns = " + ",".join(report.zero_variance))
    lines.append("," + ",".join(report.columns))
    for name, row in zip(report.columns, report.matrix):
        cells = ",".join("nan" if math.isnan(v) else repr(float(v)) for v in row)
        lines.append(f"{name},{cells}")
    Path(path).write_text("\n".join(lines) + "\n")


def best_record(records: list[dict], k_target: float = 1.05) -> dict:
    """Incumbent by fitness with the deterministic tie-break chain."""
    if not records:
        raise ValueError("empty run log")
    return min(
        records,
        key=lambda rec: (float(rec["fitness"]), abs(float(rec["k_eff"]) - k_target), rec["layout"]),
    )
