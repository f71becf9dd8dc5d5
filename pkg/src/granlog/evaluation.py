"""Prequential evaluation and multi-run aggregation.

Accuracy and the average rule count accumulate recursively so no
per-instance history is kept. Runs aggregate into Student-t confidence
intervals, mirroring the benchmark report layout.
"""

import csv
from dataclasses import dataclass, field
import math
import time

import numpy as np
from scipy.stats import t as student_t

REPORT_COLUMNS = ("window_min", "acc_mean", "acc_ci", "rules_mean",
                  "rules_ci", "time_mean", "time_ci")


@dataclass
class EvalState:
    """Accumulated test-then-train results of one run.

    The confusion matrix is indexed [actual - 1, estimated - 1]; steps
    without a real estimate (the cold start) are scored as errors and
    tallied separately instead of entering the matrix.
    """

    n_classes: int = 4
    step: int = 0
    accuracy: float = 0.0
    avg_rules: float = 0.0
    cold_start: int = 0
    elapsed: float = 0.0
    confusion: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.confusion is None:
            self.confusion = np.zeros((self.n_classes, self.n_classes),
                                      dtype=np.int64)

    def record(self, actual: int, estimated: int, rule_count: int):
        """Fold one step into the recursive metrics."""
        if not 1 <= actual <= self.n_classes:
            raise ValueError(f"actual class {actual} outside 1..{self.n_classes}")
        self.step += 1
        h = self.step
        tau = 1.0 if estimated == actual else 0.0
        self.accuracy = (h - 1) / h * self.accuracy + tau / h
        self.avg_rules = (h - 1) / h * self.avg_rules + rule_count / h
        if 1 <= estimated <= self.n_classes:
            self.confusion[actual - 1, estimated - 1] += 1
        else:
            self.cold_start += 1


@dataclass
class Interval:
    """Mean plus the half-width of its confidence interval."""

    mean: float
    half_width: float


@dataclass
class RunSummary:
    """Aggregate of several runs: intervals per metric, summed confusion."""

    accuracy: Interval
    rules: Interval
    time: Interval
    n_runs: int
    confusion: np.ndarray


def aggregate(runs, confidence: float = 0.99) -> RunSummary:
    """Student-t intervals over per-run accuracy, rule average, and time."""
    if len(runs) < 2:
        raise ValueError("need at least 2 runs to aggregate")
    if not 0.0 <= confidence < 1.0:
        raise ValueError(f"confidence must be in [0, 1), got {confidence}")
    n = len(runs)
    # ppf(0.5) is mathematically 0; keep the degenerate interval exact.
    quantile = float(student_t.ppf(0.5 * (1.0 + confidence), n - 1)) \
        if confidence > 0.0 else 0.0

    def interval(values):
        v = np.asarray(values, dtype=float)
        spread = float(v.std(ddof=1))
        return Interval(float(v.mean()), quantile * spread / math.sqrt(n))

    confusion = np.zeros_like(runs[0].confusion)
    for r in runs:
        confusion = confusion + r.confusion
    return RunSummary(
        accuracy=interval([r.accuracy for r in runs]),
        rules=interval([r.avg_rules for r in runs]),
        time=interval([r.elapsed for r in runs]),
        n_runs=n,
        confusion=confusion,
    )


def run_prequential(model, X, y, n_classes: int = 4) -> EvalState:
    """Stream a labeled dataset through a model, estimate-then-train.

    Only the learn_step calls are timed; scoring and iteration overhead
    stay out of the elapsed figure.
    """
    state = EvalState(n_classes=n_classes)
    for i in range(len(y)):
        label = int(y[i])
        t0 = time.perf_counter()
        estimate = model.learn_step(X[i], label)
        state.elapsed += time.perf_counter() - t0
        state.record(label, estimate, model.rule_count)
    return state


def _report_row(window_min, summary: RunSummary, timing: bool = True):
    tm, tc = (summary.time.mean, summary.time.half_width) if timing else (0.0, 0.0)
    return (str(window_min),
            f"{100.0 * summary.accuracy.mean:.4f}",
            f"{100.0 * summary.accuracy.half_width:.4f}",
            f"{summary.rules.mean:.4f}",
            f"{summary.rules.half_width:.4f}",
            f"{tm:.6f}",
            f"{tc:.6f}")


def write_report_csv(path, rows, timing: bool = True):
    """Write benchmark rows; rows are (window_min, RunSummary) pairs.

    Accuracy columns are percentages, time columns seconds. With timing
    disabled the time columns are zeroed so identical configurations
    reproduce byte-identical files.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for window_min, summary in rows:
            writer.writerow(_report_row(window_min, summary, timing))


def format_report_table(rows, title: str = "", timing: bool = True) -> str:
    """Aligned text table of benchmark rows, confusion matrices appended."""
    lines = []
    if title:
        lines.append(title)
    header = ("win(min)", "acc(%)", "+/-", "rules", "+/-", "time(s)", "+/-")
    widths = [8, 9, 7, 8, 7, 9, 9]
    lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for window_min, summary in rows:
        cells = _report_row(window_min, summary, timing)
        lines.append("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    for window_min, summary in rows:
        lines.append("")
        lines.append(f"confusion (window {window_min} min, "
                     f"rows=actual, cols=estimated, {summary.n_runs} runs):")
        for row in summary.confusion:
            lines.append("  " + " ".join(f"{int(v):6d}" for v in row))
    return "\n".join(lines) + "\n"
