"""Array-backed granule store shared by the two evolving classifiers.

Granule geometry lives in four (rules x attributes) arrays so that
activations are computed with a handful of vector operations per step
regardless of the rule count. Subclasses register extra per-granule
columns through _ROW_FIELDS.
"""

import numpy as np

from .granular import GranularityState, Normalizer, TrapezoidalSet


def resolve_label(label_source) -> int:
    """Accept either a plain label or a deferred zero-argument provider."""
    return int(label_source()) if callable(label_source) else int(label_source)


class GranularClassifier:
    """Common granule bookkeeping: geometry rows, activity stamps, pruning."""

    _ROW_FIELDS = ("low_sup", "low_core", "high_core", "high_sup",
                   "labels", "created_at", "last_win")

    def __init__(self, n_attrs: int = 5, rho0: float = 0.5,
                 h_r: int = 100, eta: float = 3.0):
        self.n_attrs = int(n_attrs)
        self.granularity = GranularityState(rho=float(rho0), eta=float(eta),
                                            h_r=int(h_r))
        self.normalizer = Normalizer(self.n_attrs)
        shape = (0, self.n_attrs)
        self.low_sup = np.empty(shape)
        self.low_core = np.empty(shape)
        self.high_core = np.empty(shape)
        self.high_sup = np.empty(shape)
        self.labels = np.empty(0, dtype=np.int64)
        self.created_at = np.empty(0, dtype=np.int64)
        self.last_win = np.empty(0, dtype=np.int64)

    @property
    def rule_count(self) -> int:
        return self.labels.shape[0]

    @property
    def step(self) -> int:
        return self.granularity.step

    @property
    def rho(self) -> float:
        return self.granularity.rho

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.low_core + self.high_core)

    def sets_of(self, i: int) -> list[TrapezoidalSet]:
        """Materialize the trapezoids of granule i for inspection."""
        return [TrapezoidalSet(float(self.low_sup[i, j]), float(self.low_core[i, j]),
                               float(self.high_core[i, j]), float(self.high_sup[i, j]))
                for j in range(self.n_attrs)]

    def _append_geometry(self, x, label: int):
        """Append a point granule at x and count it toward the period."""
        row = np.asarray(x, dtype=float).reshape(1, self.n_attrs)
        self.low_sup = np.vstack([self.low_sup, row])
        self.low_core = np.vstack([self.low_core, row])
        self.high_core = np.vstack([self.high_core, row])
        self.high_sup = np.vstack([self.high_sup, row])
        h = self.granularity.step
        self.labels = np.append(self.labels, int(label))
        self.created_at = np.append(self.created_at, h)
        self.last_win = np.append(self.last_win, h)
        self.granularity.created_this_period += 1

    def _install_geometry(self, sets, label: int, created_at: int, last_win: int):
        """Append a granule with explicit geometry (restore and tests)."""
        quads = [s.as_tuple() if isinstance(s, TrapezoidalSet)
                 else TrapezoidalSet(*s).as_tuple() for s in sets]
        if len(quads) != self.n_attrs:
            raise ValueError(f"expected {self.n_attrs} sets, got {len(quads)}")
        arr = np.asarray(quads, dtype=float)
        self.low_sup = np.vstack([self.low_sup, arr[:, 0]])
        self.low_core = np.vstack([self.low_core, arr[:, 1]])
        self.high_core = np.vstack([self.high_core, arr[:, 2]])
        self.high_sup = np.vstack([self.high_sup, arr[:, 3]])
        self.labels = np.append(self.labels, int(label))
        self.created_at = np.append(self.created_at, int(created_at))
        self.last_win = np.append(self.last_win, int(last_win))

    def _keep_rows(self, keep: np.ndarray):
        for name in self._ROW_FIELDS:
            setattr(self, name, getattr(self, name)[keep])

    def _enclosed_mask(self, x) -> np.ndarray:
        """True per granule when x lies in its expansion box on all attributes."""
        half = 0.5 * self.granularity.rho
        return np.all(np.abs(x - self.midpoints()) <= half, axis=1)

    def _nearest_midpoint(self, x) -> int:
        d = self.midpoints() - x
        return int(np.argmin((d * d).sum(axis=1)))

    def _contract_all(self):
        """Clip every set into the current rho box around its midpoint."""
        half = 0.5 * self.granularity.rho
        mids = self.midpoints()
        lo = mids - half
        hi = mids + half
        np.maximum(self.low_sup, lo, out=self.low_sup)
        np.maximum(self.low_core, lo, out=self.low_core)
        np.minimum(self.high_core, hi, out=self.high_core)
        np.minimum(self.high_sup, hi, out=self.high_sup)

    def delete_inactive(self):
        """Drop granules that have not won within the last h_r steps.

        The most recently active granule of each class survives
        unconditionally, so every class that has appeared keeps at least
        one granule.
        """
        g = self.granularity
        stale = self.last_win < g.step - g.h_r
        if not stale.any():
            return
        for cls in np.unique(self.labels):
            rows = np.where(self.labels == cls)[0]
            if stale[rows].all():
                stale[rows[np.argmax(self.last_win[rows])]] = False
        if stale.any():
            self._keep_rows(~stale)
