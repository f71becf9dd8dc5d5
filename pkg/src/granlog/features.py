"""Two-level window feature extraction.

Per-second activity bins are first averaged over fixed sub-windows (one
minute by default), and consecutive sub-window means are then grouped into
clock-aligned instance windows. Each complete instance window yields one
5-metric feature vector: mean, spread, minimum, maximum, and the largest
jump between consecutive sub-window means.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .ingest import BinSeries
from .labeling import window_mean

DATASET_COLUMNS = ("x1", "x2", "x3", "x4", "x5", "label")


@dataclass
class ActivityWindow:
    """One sub-window: its time span in epoch ms and the activity counts."""

    start: int
    end: int
    bin_counts: np.ndarray

    def __post_init__(self):
        if self.end <= self.start:
            raise ValueError(f"window end {self.end} not after start {self.start}")
        self.bin_counts = np.asarray(self.bin_counts)

    @property
    def mean(self) -> float:
        return window_mean(self.bin_counts)


@dataclass
class FeatureVector:
    """The 5 activity metrics of one instance window (columns x1..x5)."""

    mean: float
    std: float
    minimum: float
    maximum: float
    max_jump: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mean, self.std, self.minimum,
                         self.maximum, self.max_jump])


def extract(sub_means) -> FeatureVector:
    """Feature vector of one instance window from its sub-window means.

    The spread is the population standard deviation; the jump metric is 0
    for a single sub-window.
    """
    arr = np.asarray(sub_means, dtype=float)
    if arr.size == 0:
        raise ValueError("instance window has no sub-window means")
    jump = float(np.abs(np.diff(arr)).max()) if arr.size > 1 else 0.0
    return FeatureVector(
        mean=float(arr.mean()),
        std=float(arr.std()),
        minimum=float(arr.min()),
        maximum=float(arr.max()),
        max_jump=jump,
    )


def series_to_windows(series: BinSeries, window_ms: int) -> list[ActivityWindow]:
    """Slice a bin series into complete, clock-aligned activity windows.

    Leading and trailing bins that do not fill a whole window are dropped.
    """
    if window_ms % series.bin_ms != 0:
        raise ValueError("window length must be a multiple of the bin length")
    per = window_ms // series.bin_ms
    first_aligned = -(-series.origin // window_ms) * window_ms
    skip = (first_aligned - series.origin) // series.bin_ms
    windows = []
    counts = series.counts
    pos = skip
    while pos + per <= counts.shape[0]:
        start = series.origin + pos * series.bin_ms
        windows.append(ActivityWindow(start, start + window_ms,
                                      counts[pos:pos + per].copy()))
        pos += per
    return windows


def windows_to_instances(windows, instance_ms: int):
    """Group sub-windows into landmark instance windows and extract features.

    Yields one FeatureVector per fully covered instance window, in time
    order; an incomplete trailing or gapped group is withheld. Windows must
    arrive time-ordered with a fixed length that divides instance_ms.
    """
    expected = None
    per = None
    cur_gid = None
    bucket = []
    last_start = None
    for w in windows:
        span = w.end - w.start
        if expected is None:
            expected = span
            if instance_ms % span != 0:
                raise ValueError(
                    "instance length must be a multiple of the sub-window length")
            per = instance_ms // span
        elif span != expected:
            raise ValueError(f"mixed sub-window lengths: {span} != {expected}")
        if last_start is not None and w.start < last_start:
            raise ValueError(f"out-of-order window at {w.start}")
        last_start = w.start
        gid = w.start // instance_ms
        if gid != cur_gid:
            cur_gid = gid
            bucket = []
        bucket.append(w.mean)
        if len(bucket) == per:
            yield extract(bucket)
            bucket = []
            cur_gid = None


def write_dataset_csv(path, X, y):
    """Write a labeled dataset (columns x1..x5,label, LF endings, UTF-8)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for row, label in zip(X, y):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def read_dataset_csv(path):
    """Read a labeled dataset written by write_dataset_csv."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != DATASET_COLUMNS:
            raise ValueError(f"unexpected dataset header: {header}")
        X, y = [], []
        for row in reader:
            if not row:
                continue
            X.append([float(v) for v in row[:5]])
            y.append(int(row[5]))
    return np.asarray(X, dtype=float), np.asarray(y, dtype=int)
