"""Fuzzy rule-based evolving classifier.

Each rule is a granule: one trapezoidal set per attribute plus a class
label. Classification picks the granule with the highest min-membership
activation. Learning absorbs instances into the winning granule of the
labeled class, creates point granules for outliers and new classes, and
periodically merges near-duplicate granules, adapts the coarseness, and
prunes inactive rules.
"""

from dataclasses import dataclass

import numpy as np

from .base import GranularClassifier, resolve_label
from .granular import EmptyModelError, TrapezoidalSet, trap_membership


@dataclass
class FbemGranule:
    """Read-only view of one rule: sets, class, and activity stamps."""

    sets: list[TrapezoidalSet]
    class_label: int
    created_at: int
    last_win_at: int


class FBeM(GranularClassifier):
    """Evolving fuzzy classifier with min activation and max winner selection."""

    def granules(self) -> list[FbemGranule]:
        return [FbemGranule(self.sets_of(i), int(self.labels[i]),
                            int(self.created_at[i]), int(self.last_win[i]))
                for i in range(self.rule_count)]

    def activations(self, x) -> np.ndarray:
        """Min-membership activation of every granule for a normalized x."""
        deg = trap_membership(x, self.low_sup, self.low_core,
                              self.high_core, self.high_sup)
        return deg.min(axis=1)

    def classify(self, x) -> tuple[int, int, float]:
        """Return (class, winner index, activation) for a normalized x.

        The winner is the granule with the largest activation, ties going
        to the lowest index. When every activation is zero the winner is
        the granule whose midpoint vector is nearest to x and the reported
        activation stays 0.
        """
        if self.rule_count == 0:
            raise EmptyModelError("model has no granules")
        act = self.activations(x)
        idx = int(np.argmax(act))
        top = float(act[idx])
        if top == 0.0:
            idx = self._nearest_midpoint(x)
        return int(self.labels[idx]), idx, top

    def create_granule(self, x, label: int):
        """Append a point granule (x_j, x_j, x_j, x_j) for the given class."""
        self._append_geometry(x, label)

    def update_granule(self, i: int, x):
        """Absorb a normalized x into granule i, one abscissa per attribute.

        Within the expansion region [mp - rho/2, mp + rho/2] the first
        matching band moves exactly one parameter: below the support the
        lower support walks out to x, from there to the midpoint the lower
        core follows x, past the midpoint the upper core follows x, and
        beyond the support the upper support walks out to x. Values outside
        the expansion region leave the attribute untouched. If the support
        grew wider than rho it is clipped back around the updated midpoint,
        which keeps every parameter inside the pre-update region.
        """
        rho = self.granularity.rho
        half = 0.5 * rho
        for j in range(self.n_attrs):
            ls = float(self.low_sup[i, j])
            lc = float(self.low_core[i, j])
            hc = float(self.high_core[i, j])
            hs = float(self.high_sup[i, j])
            xj = float(x[j])
            mp = 0.5 * (lc + hc)
            if xj < mp - half or xj > mp + half:
                continue
            if xj < ls:
                ls = xj
            elif xj <= mp:
                lc = xj
            elif xj <= hs:
                hc = xj
            else:
                hs = xj
            if hs - ls > rho:
                mp2 = 0.5 * (lc + hc)
                ls = max(ls, mp2 - half)
                lc = max(lc, mp2 - half)
                hc = min(hc, mp2 + half)
                hs = min(hs, mp2 + half)
            self.low_sup[i, j] = ls
            self.low_core[i, j] = lc
            self.high_core[i, j] = hc
            self.high_sup[i, j] = hs
        self.last_win[i] = self.granularity.step

    def merge_similar(self):
        """Merge the closest same-class pair when midpoints are within rho/2.

        Distance is the mean absolute midpoint gap across attributes. The
        pair is replaced by its parameter-wise hull, clipped back into the
        rho box; the merged granule keeps the older creation stamp and the
        fresher win stamp. At most one merge per call.
        """
        c = self.rule_count
        if c < 2:
            return
        mids = self.midpoints()
        best = None
        best_d = np.inf
        for a in range(c):
            for b in range(a + 1, c):
                if self.labels[a] != self.labels[b]:
                    continue
                d = float(np.mean(np.abs(mids[a] - mids[b])))
                if d < best_d:
                    best_d = d
                    best = (a, b)
        if best is None or best_d >= 0.5 * self.granularity.rho:
            return
        a, b = best
        np.minimum(self.low_sup[a], self.low_sup[b], out=self.low_sup[a])
        np.minimum(self.low_core[a], self.low_core[b], out=self.low_core[a])
        np.maximum(self.high_core[a], self.high_core[b], out=self.high_core[a])
        np.maximum(self.high_sup[a], self.high_sup[b], out=self.high_sup[a])
        half = 0.5 * self.granularity.rho
        mid = 0.5 * (self.low_core[a] + self.high_core[a])
        np.maximum(self.low_sup[a], mid - half, out=self.low_sup[a])
        np.maximum(self.low_core[a], mid - half, out=self.low_core[a])
        np.minimum(self.high_core[a], mid + half, out=self.high_core[a])
        np.minimum(self.high_sup[a], mid + half, out=self.high_sup[a])
        self.created_at[a] = min(self.created_at[a], self.created_at[b])
        self.last_win[a] = max(self.last_win[a], self.last_win[b])
        keep = np.ones(c, dtype=bool)
        keep[b] = False
        self._keep_rows(keep)

    def learn_step(self, x_raw, label_source) -> int:
        """One prequential step: estimate first, then learn from the label.

        Returns the estimated class; 0 when the model was empty (cold
        start, always scored as an error by the evaluator). The label is
        requested only after the estimate is fixed.
        """
        g = self.granularity
        g.step += 1
        x = self.normalizer.normalize(x_raw)
        if self.rule_count == 0:
            estimate = 0
            label = resolve_label(label_source)
            self.create_granule(x, label)
        else:
            act = self.activations(x)
            widx = int(np.argmax(act))
            if act[widx] == 0.0:
                widx = self._nearest_midpoint(x)
            estimate = int(self.labels[widx])
            label = resolve_label(label_source)
            self.last_win[widx] = g.step
            same_class = self.labels == label
            if not same_class.any() or not self._enclosed_mask(x).any():
                self.create_granule(x, label)
            else:
                rows = np.where(same_class)[0]
                target = int(rows[np.argmax(act[rows])])
                self.update_granule(target, x)
        if g.at_boundary():
            self.merge_similar()
            before = g.rho
            self.granularity = g = g.adapted()
            if g.rho < before:
                self._contract_all()
            self.delete_inactive()
        return estimate
