"""Deterministic CSV results: one metric value per row, plus aggregation.

Floats are rendered with %.12g so identical runs produce identical bytes.
"""

import csv
import io
import math
from dataclasses import dataclass

COLUMNS = ("scenario", "seed", "sweep", "algorithm", "metric", "value")
AGG_COLUMNS = ("scenario", "sweep", "algorithm", "metric", "n", "mean", "ci95")

# two-sided 95% Student-t critical values by degrees of freedom
_T_TABLE = {
    1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571,
    6: 2.447, 7: 2.365, 8: 2.306, 9: 2.262, 10: 2.228,
    11: 2.201, 12: 2.179, 13: 2.160, 14: 2.145, 15: 2.131,
    16: 2.120, 17: 2.110, 18: 2.101, 19: 2.093, 20: 2.086,
    21: 2.080, 22: 2.074, 23: 2.069, 24: 2.064, 25: 2.060,
    26: 2.056, 27: 2.052, 28: 2.048, 29: 2.045, 30: 2.042,
    40: 2.021, 60: 2.000, 120: 1.980,
}


def t_critical(df: int) -> float:
    """95% two-sided Student-t critical value (normal limit above df 120)."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if df in _T_TABLE:
        return _T_TABLE[df]
    for cut in (40, 60, 120):
        if df <= cut:
            return _T_TABLE[cut]
    return 1.96


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    seed: int
    sweep: str
    algorithm: str
    metric: str
    value: float


def format_value(value: float) -> str:
    return "%.12g" % float(value)


def format_sweep(value) -> str:
    """Sweep coordinate as a stable string; '' when the run has no sweep."""
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return "/".join(format_sweep(v) for v in value)
    if isinstance(value, bool):
        raise TypeError("sweep values cannot be booleans")
    if isinstance(value, int):
        return str(value)
    return "%g" % float(value)


def write_rows(target, rows) -> None:
    """Write result rows as UTF-8 CSV with LF line endings."""
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_rows(fh, rows)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow((r.scenario, r.seed, r.sweep, r.algorithm, r.metric, format_value(r.value)))


def rows_to_bytes(rows) -> bytes:
    buf = io.StringIO()
    write_rows(buf, rows)
    return buf.getvalue().encode("utf-8")


def read_rows(path) -> list:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected header {header}")
        for rec in reader:
            scenario, seed, sweep, algorithm, metric, value = rec
            out.append(ResultRow(scenario, int(seed), sweep, algorithm, metric, float(value)))
    return out


def aggregate(rows) -> list:
    """Mean and 95% t-interval half-width per (scenario, sweep, algorithm,
    metric) across seeds, in first-appearance order."""
    groups = {}
    order = []
    for r in rows:
        key = (r.scenario, r.sweep, r.algorithm, r.metric)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r.value)
    out = []
    for key in order:
        values = groups[key]
        n = len(values)
        mean = sum(values) / n
        if n == 1:
            ci = 0.0
        else:
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            ci = t_critical(n - 1) * math.sqrt(var / n)
        out.append(key + (n, mean, ci))
    return out


def write_aggregate(target, rows) -> None:
    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_aggregate(fh, rows)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(AGG_COLUMNS)
    for scenario, sweep, algorithm, metric, n, mean, ci in aggregate(rows):
        writer.writerow((scenario, sweep, algorithm, metric, n, format_value(mean), format_value(ci)))
