"""Granular substrate shared by both evolving classifiers.

Trapezoidal fuzzy sets over the normalized attribute domain [0, 1], their
expansion regions, the coarseness self-adaptation law, and streaming
min-max normalization.
"""

from dataclasses import dataclass, replace

import numpy as np

# Coarseness is clamped into [RHO_MIN, 1]: the adaptation law can otherwise
# drive it to 0 (degenerate point granules) or past 1 (wider than the domain).
RHO_MIN = 0.01


class EmptyModelError(RuntimeError):
    """Classification was requested from a model that has no granules."""


@dataclass
class TrapezoidalSet:
    """Trapezoidal fuzzy set given by its four abscissae.

    The support is [lower_support, upper_support] and the core is
    [lower_core, upper_core]; membership is 1 on the core, 0 outside the
    support, and linear on the two shoulders.
    """

    lower_support: float
    lower_core: float
    upper_core: float
    upper_support: float

    def __post_init__(self):
        if not (self.lower_support <= self.lower_core <= self.upper_core
                <= self.upper_support):
            raise ValueError(f"abscissae out of order: {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.lower_support, self.lower_core,
                self.upper_core, self.upper_support)

    @property
    def width(self) -> float:
        return self.upper_support - self.lower_support

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower_core + self.upper_core)

    def membership(self, x: float) -> float:
        """Membership degree of x, in [0, 1].

        A degenerate shoulder acts as a crisp step: the shared point still
        belongs to the core and gets membership 1.
        """
        if x < self.lower_support or x > self.upper_support:
            return 0.0
        if self.lower_core <= x <= self.upper_core:
            return 1.0
        if x < self.lower_core:
            return (x - self.lower_support) / (self.lower_core - self.lower_support)
        return (self.upper_support - x) / (self.upper_support - self.upper_core)

    def expansion_region(self, rho: float) -> tuple[float, float]:
        """Interval of half-width rho/2 around the midpoint."""
        mp = self.midpoint
        return (mp - 0.5 * rho, mp + 0.5 * rho)

    def contracted(self, rho: float) -> "TrapezoidalSet":
        """Clip support and core into the rho-wide box around the midpoint."""
        lo = self.midpoint - 0.5 * rho
        hi = self.midpoint + 0.5 * rho
        return TrapezoidalSet(
            max(self.lower_support, lo),
            max(self.lower_core, lo),
            min(self.upper_core, hi),
            min(self.upper_support, hi),
        )


def trap_membership(x, lower_support, lower_core, upper_core, upper_support):
    """Vectorized trapezoid membership; broadcasts over array arguments.

    Matches TrapezoidalSet.membership elementwise, including the crisp
    behavior of degenerate shoulders.
    """
    x = np.asarray(x, dtype=float)
    ls = np.asarray(lower_support, dtype=float)
    lc = np.asarray(lower_core, dtype=float)
    uc = np.asarray(upper_core, dtype=float)
    us = np.asarray(upper_support, dtype=float)
    left = lc - ls
    right = us - uc
    rise = np.where(left > 0, (x - ls) / np.where(left > 0, left, 1.0), 1.0)
    fall = np.where(right > 0, (us - x) / np.where(right > 0, right, 1.0), 1.0)
    deg = np.clip(np.minimum(rise, fall), 0.0, 1.0)
    return np.where((x < ls) | (x > us), 0.0, deg)


@dataclass
class GranularityState:
    """Self-adapted coarseness of a rule base.

    rho bounds the width of every fuzzy set. At every period boundary
    (step multiple of h_r) the number of granules created during the
    period is compared with the growth reference eta: creating faster
    than eta coarsens the model, creating slower refines it.
    """

    rho: float
    eta: float = 3.0
    h_r: int = 100
    created_this_period: int = 0
    step: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must be in (0, 1], got {self.rho}")
        if self.h_r < 1:
            raise ValueError(f"h_r must be a positive integer, got {self.h_r}")
        if self.eta < 0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")

    def at_boundary(self) -> bool:
        return self.step > 0 and self.step % self.h_r == 0

    def adapted(self) -> "GranularityState":
        """Coarseness for the next period; resets the creation counter.

        With r granules created this period, rho is scaled by
        (1 + r/h_r) when r exceeds eta and by (1 - (eta - r)/h_r)
        otherwise, then clamped into [RHO_MIN, 1].
        """
        r = self.created_this_period
        if r > self.eta:
            rho = (1.0 + r / self.h_r) * self.rho
        else:
            rho = (1.0 - (self.eta - r) / self.h_r) * self.rho
        rho = min(1.0, max(RHO_MIN, rho))
        return replace(self, rho=rho, created_this_period=0)


class Normalizer:
    """Streaming per-attribute min-max scaler with expanding bounds.

    Bounds only widen, so a value normalized earlier never leaves [0, 1]
    under later updates. An attribute whose bounds coincide maps to 0.5.
    """

    def __init__(self, n_attrs: int = 5):
        self.n_attrs = int(n_attrs)
        self.low: np.ndarray | None = None
        self.high: np.ndarray | None = None

    @property
    def seen_any(self) -> bool:
        return self.low is not None

    def normalize(self, raw) -> np.ndarray:
        """Widen the bounds with raw, then map it into [0, 1] per attribute."""
        x = np.asarray(raw, dtype=float)
        if x.shape != (self.n_attrs,):
            raise ValueError(
                f"expected {self.n_attrs} attributes, got shape {x.shape}")
        if self.low is None:
            self.low = x.copy()
            self.high = x.copy()
        else:
            np.minimum(self.low, x, out=self.low)
            np.maximum(self.high, x, out=self.high)
        span = self.high - self.low
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (x - self.low) / safe, 0.5)
