"""Control-chart weak labeler.

Window means are graded into severity classes 1 to 4 by how many running
standard deviations they sit away from the running grand mean: within one
sigma is normal operation, then low, medium, and high severity bands, the
last one open-ended past three sigma.
"""

import math

import numpy as np


def window_mean(counts) -> float:
    """Arithmetic mean of the activity counts of one window."""
    arr = np.asarray(counts, dtype=float)
    if arr.size == 0:
        raise ValueError("window has no counts")
    return float(arr.mean())


class ControlChart:
    """Running mean and sigma bands mapping window means to classes 1-4.

    In online mode statistics accumulate one mean at a time (label first,
    then observe, so a label never depends on its own instance) and the
    first `warmup` instances default to class 1. In batch mode statistics
    are frozen from a full pass over the data and observe is a no-op.
    """

    MODES = ("online", "batch")

    def __init__(self, mode: str = "online", warmup: int = 30):
        if mode not in self.MODES:
            raise ValueError(f"mode must be one of {self.MODES}")
        self.mode = mode
        self.warmup = int(warmup)
        self.grand_mean = 0.0
        self.sum_sq_dev = 0.0
        self.count = 0

    @classmethod
    def from_means(cls, means) -> "ControlChart":
        """Frozen batch chart with statistics from a full pass over means."""
        arr = np.asarray(means, dtype=float)
        if arr.size == 0:
            raise ValueError("cannot fit a chart on an empty sequence")
        chart = cls(mode="batch")
        chart.grand_mean = float(arr.mean())
        chart.sum_sq_dev = float(((arr - arr.mean()) ** 2).sum())
        chart.count = int(arr.size)
        return chart

    def sigma(self) -> float:
        """Population standard deviation of the means seen so far."""
        if self.count == 0:
            raise ValueError("no observations yet")
        return math.sqrt(self.sum_sq_dev / self.count)

    def tag(self, mu: float) -> int:
        """Severity class of a window mean under the current statistics.

        Band edges belong to the inner class (a deviation of exactly k
        sigma is class k). Degenerate statistics (no spread yet) and the
        online warm-up default to class 1.
        """
        if self.count == 0:
            return 1
        if self.mode == "online" and self.count < self.warmup:
            return 1
        s = self.sigma()
        if s == 0.0:
            return 1
        d = abs(mu - self.grand_mean)
        if d <= s:
            return 1
        if d <= 2.0 * s:
            return 2
        if d <= 3.0 * s:
            return 3
        return 4

    def observe(self, mu: float):
        """Fold a window mean into the running statistics (online only)."""
        if self.mode == "batch":
            return
        self.count += 1
        delta = mu - self.grand_mean
        self.grand_mean += delta / self.count
        self.sum_sq_dev += delta * (mu - self.grand_mean)
