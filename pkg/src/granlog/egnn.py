"""Neuro-fuzzy evolving classifier over granular similarity degrees.

Each granule feeds one aggregation neuron: per-attribute similarities are
multiplied by synaptic weights and fused (min by default) into the neuron
output. The output layer takes the class of the most active neuron.
Learning creates a granule on every miss or out-of-reach instance, adapts
the winner's geometry on hits, and lowers the winner's synaptic weights in
proportion to its error history.
"""

from dataclasses import dataclass

import numpy as np

from .base import GranularClassifier, resolve_label
from .granular import EmptyModelError, TrapezoidalSet

AGGREGATIONS = ("min", "product")


def similarity(tset: TrapezoidalSet, x: float) -> float:
    """Similarity between a scalar x and a trapezoidal set, in [0, 1].

    One minus the mean absolute gap between x and the four abscissae,
    scaled by the span of the set united with x. Equals 1 exactly when the
    set is degenerate at x, and decays as x moves away from the support.
    """
    num = (abs(tset.lower_support - x) + abs(tset.lower_core - x)
           + abs(tset.upper_core - x) + abs(tset.upper_support - x))
    den = 4.0 * (max(tset.upper_support, x) - min(tset.lower_support, x))
    if den == 0.0:
        return 1.0
    return 1.0 - num / den


@dataclass
class EgnnGranule:
    """Read-only view of one granule with its synapses and score counters."""

    sets: list[TrapezoidalSet]
    class_label: int
    weights: np.ndarray
    right_count: int
    wrong_count: int
    created_at: int
    last_win_at: int


class EGNN(GranularClassifier):
    """Evolving granular network: weighted similarity neurons, max output."""

    _ROW_FIELDS = GranularClassifier._ROW_FIELDS + ("weights", "right", "wrong")

    def __init__(self, n_attrs: int = 5, rho0: float = 0.5, h_r: int = 100,
                 eta: float = 3.0, aggregation: str = "min", n_classes: int = 4):
        if aggregation not in AGGREGATIONS:
            raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
        super().__init__(n_attrs=n_attrs, rho0=rho0, h_r=h_r, eta=eta)
        self.aggregation = aggregation
        self.n_classes = int(n_classes)
        self.weights = np.empty((0, self.n_attrs))
        self.right = np.empty(0, dtype=np.int64)
        self.wrong = np.empty(0, dtype=np.int64)

    def granules(self) -> list[EgnnGranule]:
        return [EgnnGranule(self.sets_of(i), int(self.labels[i]),
                            self.weights[i].copy(), int(self.right[i]),
                            int(self.wrong[i]), int(self.created_at[i]),
                            int(self.last_win[i]))
                for i in range(self.rule_count)]

    def similarities(self, x) -> np.ndarray:
        """Similarity of x to every granule, per attribute (rules x attrs)."""
        num = (np.abs(self.low_sup - x) + np.abs(self.low_core - x)
               + np.abs(self.high_core - x) + np.abs(self.high_sup - x))
        den = 4.0 * (np.maximum(self.high_sup, x) - np.minimum(self.low_sup, x))
        return np.where(den > 0, 1.0 - num / np.where(den > 0, den, 1.0), 1.0)

    def activations(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Neuron outputs and the similarity matrix for a normalized x."""
        sims = self.similarities(x)
        weighted = sims * self.weights
        if self.aggregation == "min":
            o = weighted.min(axis=1)
        else:
            o = weighted.prod(axis=1)
        return o, sims

    def neuron_activate(self, i: int, x) -> float:
        """Output of the aggregation neuron of granule i for a normalized x."""
        o, _ = self.activations(x)
        return float(o[i])

    def classify(self, x) -> tuple[int, int, float]:
        """Return (class, winner index, output) for a normalized x.

        Winner is the neuron with the largest output, ties to the lowest
        index. If every output is zero (possible once synapses hit zero)
        the nearest-midpoint granule wins instead.
        """
        if self.rule_count == 0:
            raise EmptyModelError("model has no granules")
        o, _ = self.activations(x)
        idx = int(np.argmax(o))
        top = float(o[idx])
        if top == 0.0:
            idx = self._nearest_midpoint(x)
        return int(self.labels[idx]), idx, top

    def create_granule(self, x, label: int):
        """Append a point granule with unit synapses and zeroed counters."""
        self._append_geometry(x, label)
        self.weights = np.vstack([self.weights, np.ones((1, self.n_attrs))])
        self.right = np.append(self.right, 0)
        self.wrong = np.append(self.wrong, 0)

    def adapt_granule(self, i: int, x):
        """Move granule i toward a normalized x inside its expansion region.

        Per attribute, supports stretch out to x when x falls beyond them,
        the near core edge follows x and the far core edge snaps to the old
        midpoint. The midpoint is then recomputed from the new core and the
        supports are clipped into the rho box around it.
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
            if xj <= ls:
                ls = xj
            if xj <= mp:
                lc = xj
                hc = mp
            else:
                lc = mp
                hc = xj
            if xj >= hs:
                hs = xj
            mp2 = 0.5 * (lc + hc)
            if mp2 - half > ls:
                ls = mp2 - half
            if mp2 + half < hs:
                hs = mp2 + half
            self.low_sup[i, j] = ls
            self.low_core[i, j] = lc
            self.high_core[i, j] = hc
            self.high_sup[i, j] = hs
        self.last_win[i] = self.granularity.step

    def update_weights(self, i: int, sims_row, error: int):
        """Score granule i for the step and punish its synapses on a miss.

        The right/wrong tally updates first, so the error share beta is
        defined from the first scored step. On a miss each synapse drops by
        beta * similarity * |error| / (n_classes - 1), clamped into [0, 1];
        a hit only advances the tally.
        """
        if error == 0:
            self.right[i] += 1
            return
        self.wrong[i] += 1
        beta = self.wrong[i] / (self.right[i] + self.wrong[i])
        scale = abs(int(error)) / (self.n_classes - 1)
        w = self.weights[i] - beta * np.asarray(sims_row, dtype=float) * scale
        self.weights[i] = np.clip(w, 0.0, 1.0)

    def learn_step(self, x_raw, label_source) -> int:
        """One prequential step: estimate, score the winner, then learn.

        Returns the estimated class; 0 when the model was empty. A wrong
        estimate or an instance outside every expansion box creates a new
        granule for the labeled class; otherwise the winning granule is
        adapted in place. The winner's counters and synapses are updated
        every step it exists.
        """
        g = self.granularity
        g.step += 1
        x = self.normalizer.normalize(x_raw)
        if self.rule_count == 0:
            estimate = 0
            label = resolve_label(label_source)
            self.create_granule(x, label)
        else:
            o, sims = self.activations(x)
            widx = int(np.argmax(o))
            if o[widx] == 0.0:
                widx = self._nearest_midpoint(x)
            estimate = int(self.labels[widx])
            label = resolve_label(label_source)
            error = label - estimate
            self.update_weights(widx, sims[widx], error)
            self.last_win[widx] = g.step
            if error != 0 or not self._enclosed_mask(x).any():
                self.create_granule(x, label)
            else:
                self.adapt_granule(widx, x)
        if g.at_boundary():
            before = g.rho
            self.granularity = g = g.adapted()
            if g.rho < before:
                self._contract_all()
            self.delete_inactive()
        return estimate
