"""End-to-end wiring: log lines to labeled datasets to benchmark runs."""

from dataclasses import dataclass

import numpy as np

from .egnn import EGNN
from .evaluation import EvalState, RunSummary, aggregate, run_prequential
from .fbem import FBeM
from .features import series_to_windows, windows_to_instances
from .ingest import LineParser, TimestampPattern, bin_records, make_pattern
from .labeling import ControlChart

CLASSIFIERS = ("fbem", "egnn")


@dataclass
class PipelineStats:
    """Counters from one dataset build."""

    lines: int = 0
    parsed: int = 0
    parse_errors: int = 0
    dropped_late: int = 0
    instances: int = 0


def make_model(classifier: str, n_attrs: int = 5, rho0: float = 0.5,
               h_r: int = 100, eta: float = 3.0, aggregation: str = "min"):
    if classifier == "fbem":
        return FBeM(n_attrs=n_attrs, rho0=rho0, h_r=h_r, eta=eta)
    if classifier == "egnn":
        return EGNN(n_attrs=n_attrs, rho0=rho0, h_r=h_r, eta=eta,
                    aggregation=aggregation)
    raise ValueError(f"classifier must be one of {CLASSIFIERS}")


def label_means(means, mode: str = "batch", warmup: int = 30) -> np.ndarray:
    """Weak labels for a sequence of instance-window means.

    Batch mode freezes the chart on the whole sequence first; online mode
    tags each mean before folding it into the running statistics.
    """
    means = np.asarray(means, dtype=float)
    if mode == "batch":
        chart = ControlChart.from_means(means)
        return np.array([chart.tag(m) for m in means], dtype=int)
    if mode != "online":
        raise ValueError(f"label mode must be 'batch' or 'online', got {mode!r}")
    chart = ControlChart(mode="online", warmup=warmup)
    labels = []
    for m in means:
        labels.append(chart.tag(m))
        chart.observe(m)
    return np.asarray(labels, dtype=int)


def build_dataset(lines, window_minutes: int, label_mode: str = "batch",
                  pattern: TimestampPattern | None = None, bin_seconds: int = 1,
                  sub_minutes: int = 1, lateness_seconds: int = 2,
                  warmup: int = 30):
    """Labeled instances from raw log lines.

    Returns (X, y, stats): X is (n, 5) feature rows, y the control-chart
    classes, stats the ingestion counters. The chart statistic of an
    instance is its own mean metric (column x1).
    """
    if pattern is None:
        pattern = make_pattern("iso8601")
    parser = LineParser(pattern)
    n_lines = 0

    def records():
        nonlocal n_lines
        for line in lines:
            n_lines += 1
            rec = parser.parse(line)
            if rec is not None:
                yield rec

    series = bin_records(records(), bin_ms=1000 * bin_seconds,
                         lateness_ms=1000 * lateness_seconds)
    sub_windows = series_to_windows(series, 60000 * sub_minutes)
    instances = list(windows_to_instances(sub_windows, 60000 * window_minutes))
    stats = PipelineStats(lines=n_lines, parsed=parser.parsed,
                          parse_errors=parser.errors,
                          dropped_late=series.dropped,
                          instances=len(instances))
    if not instances:
        return np.zeros((0, 5)), np.zeros(0, dtype=int), stats
    X = np.vstack([fv.as_array() for fv in instances])
    y = label_means(X[:, 0], mode=label_mode, warmup=warmup)
    return X, y, stats


def bench_runs(X, y, classifier: str, runs: int = 5, seed: int = 1,
               rho0: float = 0.5, h_r: int = 100, eta: float = 3.0,
               aggregation: str = "min") -> list[EvalState]:
    """Prequential runs over per-run shuffles of a labeled dataset.

    Run k shuffles with the generator seeded by (seed, k), so a master
    seed reproduces every run exactly.
    """
    if len(y) == 0:
        raise ValueError("dataset is empty")
    states = []
    for run in range(runs):
        perm = np.random.default_rng([seed, run]).permutation(len(y))
        model = make_model(classifier, rho0=rho0, h_r=h_r, eta=eta,
                           aggregation=aggregation)
        states.append(run_prequential(model, X[perm], y[perm]))
    return states


def bench_summary(X, y, classifier: str, runs: int = 5, seed: int = 1,
                  rho0: float = 0.5, h_r: int = 100, eta: float = 3.0,
                  aggregation: str = "min",
                  confidence: float = 0.99) -> RunSummary:
    states = bench_runs(X, y, classifier, runs=runs, seed=seed, rho0=rho0,
                        h_r=h_r, eta=eta, aggregation=aggregation)
    return aggregate(states, confidence=confidence)


def sweep_grid(X, y, classifier: str, rho0s, h_rs, runs: int = 5,
               seed: int = 1, eta: float = 3.0, aggregation: str = "min"):
    """Scatter rows (rho0, h_r, rules_mean, acc_mean) over a parameter grid."""
    rows = []
    for rho0 in rho0s:
        for h_r in h_rs:
            states = bench_runs(X, y, classifier, runs=runs, seed=seed,
                                rho0=rho0, h_r=h_r, eta=eta,
                                aggregation=aggregation)
            acc = float(np.mean([s.accuracy for s in states]))
            rules = float(np.mean([s.avg_rules for s in states]))
            rows.append((rho0, h_r, rules, acc))
    return rows
