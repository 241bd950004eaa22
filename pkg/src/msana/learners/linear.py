"""Online Passive-Aggressive classifier (PA-I)."""

from __future__ import annotations

import logging
import math

import numpy as np

from .base import OnlineClassifier

log = logging.getLogger(__name__)


def pa_step(w, x, y_sign, C):
    """One PA-I update on a ``{-1, +1}`` label. Returns ``(w, tau, skipped)``."""
    loss = max(0.0, 1.0 - y_sign * float(w @ x))
    if loss == 0.0:
        return w, 0.0, False
    sq = float(x @ x)
    if sq == 0.0:
        return w, 0.0, True
    tau = min(C, loss / sq)
    return w + tau * y_sign * x, tau, False


class PassiveAggressive(OnlineClassifier):
    """PA-I with a logistic link on the margin for probability output.

    Binary problems use one weight vector; more classes use one-vs-rest.
    With ``fit_intercept`` a constant 1 is appended to every input.
    """

    def __init__(self, n_classes=2, n_features=1, C=1.0, fit_intercept=True):
        self.n_classes = n_classes
        self.n_features = n_features
        self.C = C
        self.fit_intercept = fit_intercept
        n_vec = 1 if n_classes == 2 else n_classes
        self.W = np.zeros((n_vec, n_features + int(fit_intercept)))
        self.skipped_updates = 0

    @property
    def weights(self):
        return self.W[0, : self.n_features] if self.n_classes == 2 else self.W[:, : self.n_features]

    @property
    def bias(self):
        return self.W[:, -1] if self.fit_intercept else np.zeros(len(self.W))

    def _augment(self, x):
        return np.append(x, 1.0) if self.fit_intercept else np.asarray(x, dtype=float)

    def decision(self, x):
        return self.W @ self._augment(x)

    def predict_proba(self, x):
        m = self.decision(x)
        if self.n_classes == 2:
            p1 = 1.0 / (1.0 + math.exp(-max(min(m[0], 500.0), -500.0)))
            return np.array([1.0 - p1, p1])
        s = 1.0 / (1.0 + np.exp(-np.clip(m, -500, 500)))
        total = s.sum()
        return s / total if total > 0 else self.uniform()

    def learn_one(self, x, y, weight=1.0):
        xa = self._augment(x)
        rows = [(0, 1.0 if y == 1 else -1.0)] if self.n_classes == 2 else [
            (c, 1.0 if y == c else -1.0) for c in range(self.n_classes)
        ]
        for r, sign in rows:
            self.W[r], _, skipped = pa_step(self.W[r], xa, sign, self.C)
            if skipped:
                self.skipped_updates += 1
                log.debug("zero-norm input with positive loss; update skipped")
        return self
