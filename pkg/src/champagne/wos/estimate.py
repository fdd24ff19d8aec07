"""Monte Carlo hitting-probability estimates and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

CSV_FIELDS = ("trials", "hits_obstacle", "hits_boundary", "timeouts", "p_hat", "ci3sigma", "seed")


def fmt(x: float) -> str:
    """17 significant digits, '.' decimal point, locale independent."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class HitEstimate:
    p_hat: float
    trials: int
    hits_obstacle: int
    hits_boundary: int
    timeouts: int
    ci_halfwidth_3sigma: float
    seed: int
    start: tuple = ()
    mean_steps: float = math.nan

    @classmethod
    def from_counts(cls, hits_obstacle: int, hits_boundary: int, timeouts: int, seed: int,
                    start=(), mean_steps: float = math.nan) -> "HitEstimate":
        trials = hits_obstacle + hits_boundary + timeouts
        n = trials - timeouts
        p = hits_obstacle / n if n else math.nan
        half = 3.0 * math.sqrt(p * (1.0 - p) / n) if n else math.nan
        return cls(p, trials, hits_obstacle, hits_boundary, timeouts, half, seed,
                   tuple(float(v) for v in start), mean_steps)

    @property
    def sigma(self) -> float:
        n = self.trials - self.timeouts
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / n) if n else math.nan

    @property
    def timeout_fraction(self) -> float:
        return self.timeouts / self.trials if self.trials else 0.0

    def csv_row(self) -> list[str]:
        return [fmt(v) for v in self.start] + [
            str(self.trials), str(self.hits_obstacle), str(self.hits_boundary), str(self.timeouts),
            fmt(self.p_hat), fmt(self.ci_halfwidth_3sigma), str(self.seed),
        ]


def csv_header(d: int, shell_column: bool = False) -> list[str]:
    return [f"x{i}" for i in range(d)] + list(CSV_FIELDS) + (["k"] if shell_column else [])


def estimates_to_csv(estimates, d: int, comments: dict | None = None, shells=None) -> str:
    """CSV text; ``comments`` become leading '# key: value' lines and ``shells``
    (one shell index or None per estimate) adds a trailing column k."""
    buf = io.StringIO()
    for key, val in (comments or {}).items():
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(d, shells is not None))
    for i, e in enumerate(estimates):
        row = e.csv_row()
        if shells is not None:
            row.append("" if shells[i] is None else str(shells[i]))
        w.writerow(row)
    return buf.getvalue()


def read_csv_rows(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _row_estimate(row: dict) -> HitEstimate:
    d = sum(1 for key in row if key.startswith("x") and key[1:].isdigit())
    start = tuple(float(row[f"x{i}"]) for i in range(d))
    return HitEstimate(float(row["p_hat"]), int(row["trials"]), int(row["hits_obstacle"]),
                       int(row["hits_boundary"]), int(row["timeouts"]),
                       float(row["ci3sigma"]), int(row["seed"]), start)


def estimates_from_csv(text: str) -> list[HitEstimate]:
    return [_row_estimate(row) for row in read_csv_rows(text)]


def split_certificate_rows(text: str) -> tuple[list[HitEstimate], dict[int, list[HitEstimate]]]:
    """Global rows (empty or missing k) and per-shell rows grouped by k."""
    glob, shells = [], {}
    for row in read_csv_rows(text):
        e = _row_estimate(row)
        k = (row.get("k") or "").strip()
        if k:
            shells.setdefault(int(k), []).append(e)
        else:
            glob.append(e)
    return glob, shells


def pooled_sigma(estimates) -> float:
    return float(np.sqrt(sum(e.sigma**2 for e in estimates)))
