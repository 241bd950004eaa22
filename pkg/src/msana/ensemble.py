"""Window-based performance-weighted probability averaging, and leader/follower selection."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .stream import ClassProbabilities

log = logging.getLogger(__name__)

LEADERS = ("arf-adwin", "arf-eddm")
FOLLOWER_POOL = ("efdt", "knn-adwin", "sam-knn", "opa")
UNSEEN_ERROR = 0.5


class LossHistory:
    """0/1 losses with prefix sums so any trailing-window mean is O(1)."""

    def __init__(self):
        self._cum = [0]

    def __len__(self):
        return len(self._cum) - 1

    def append(self, loss: int):
        self._cum.append(self._cum[-1] + int(loss))

    def window_error(self, s: int) -> float:
        n = len(self)
        if n == 0:
            return UNSEEN_ERROR
        s = max(1, min(s, n))
        return (self._cum[-1] - self._cum[-1 - s]) / s

    def total_error(self) -> float:
        return self.window_error(len(self)) if len(self) else UNSEEN_ERROR


def window_size(n_processed: int, drift_arr, alpha_ratio: float = 0.1,
                literal: bool = False) -> int:
    """Samples in the current evaluation window.

    Without drifts it is ``alpha_ratio`` of everything processed. After a drift
    it spans from the last drift point to now (``literal=True`` instead uses the
    last drift index itself as the size).
    """
    if n_processed < 1:
        raise ValueError("window_size needs at least one processed sample")
    if drift_arr:
        s = drift_arr[-1] if literal else n_processed - drift_arr[-1]
    else:
        s = int(np.floor(alpha_ratio * n_processed))
    return int(min(max(s, 1), n_processed))


def model_weight(error_rate: float, epsilon: float = 0.001) -> float:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return 1.0 / (error_rate + epsilon)


def combine(probas, weights) -> ClassProbabilities:
    """Weighted mean of class-probability vectors; argmax ties go to the lower class."""
    P = np.asarray(probas, dtype=float)
    w = np.asarray(weights, dtype=float)
    if P.shape[0] != w.shape[0]:
        raise ValueError("one weight per model required")
    if not np.any(w > 0):
        log.warning("all ensemble weights are zero; falling back to uniform")
        return ClassProbabilities.uniform(P.shape[1])
    scores = w @ P / len(w)
    predicted = int(np.argmax(scores))
    return ClassProbabilities(scores / scores.sum(), predicted)


def select_followers(errors: dict, pool=FOLLOWER_POOL, n: int = 2) -> tuple:
    """The ``n`` pool members with the lowest window error, pool order breaking ties."""
    ranked = sorted(pool, key=lambda name: (errors.get(name, UNSEEN_ERROR), pool.index(name)))
    return tuple(ranked[:n])


@dataclass
class EnsembleState:
    leaders: tuple = LEADERS
    follower_pool: tuple = FOLLOWER_POOL
    active_followers: tuple = FOLLOWER_POOL[:2]
    drift_arr: list = field(default_factory=list)
    alpha_ratio: float = 0.1
    epsilon: float = 0.001
    window_from_drift_index: bool = False
    n_processed: int = 0
    losses: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in self.leaders + self.follower_pool:
            self.losses.setdefault(name, LossHistory())

    @property
    def active(self) -> tuple:
        return self.leaders + tuple(self.active_followers)

    @property
    def b(self) -> int:
        return len(self.active)

    def window(self) -> int:
        return window_size(max(self.n_processed, 1), self.drift_arr, self.alpha_ratio,
                           self.window_from_drift_index)

    def window_errors(self, names=None, s=None) -> dict:
        s = self.window() if s is None else s
        names = self.leaders + self.follower_pool if names is None else names
        return {name: self.losses[name].window_error(s) for name in names}

    def weights(self, s=None) -> np.ndarray:
        errs = self.window_errors(self.active, s)
        return np.array([model_weight(errs[name], self.epsilon) for name in self.active])

    def record(self, predictions: dict, truth: int):
        for name, pred in predictions.items():
            self.losses[name].append(int(pred != truth))
        self.n_processed += 1

    def reselect(self, s=None) -> tuple:
        self.active_followers = select_followers(self.window_errors(self.follower_pool, s),
                                                 self.follower_pool)
        return self.active_followers
