"""ADWIN, EDDM and the dual-detector AND rule."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels


class Status(enum.IntEnum):
    NONE = 0
    WARNING = 1
    DRIFT = 2


@dataclass(frozen=True)
class DriftSignal:
    status: Status
    at_index: int

    @property
    def drift(self) -> bool:
        return self.status == Status.DRIFT

    @property
    def warning(self) -> bool:
        return self.status == Status.WARNING


class ADWIN:
    """Adaptive windowing over values in [0, 1].

    Buckets follow the exponential-histogram layout with at most
    ``max_buckets`` per level. The cut test runs every ``clock`` insertions.
    """

    def __init__(self, delta: float = 0.002, clock: int = 32, min_window: int = 5,
                 max_buckets: int = 5):
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        self.delta = delta
        self.clock = clock
        self.min_window = min_window
        self.max_buckets = max_buckets
        self.reset()

    def reset(self):
        self._totals = np.zeros((kernels.ADWIN_MAX_LEVELS, self.max_buckets + 1))
        self._variances = np.zeros_like(self._totals)
        self._counts = np.zeros(kernels.ADWIN_MAX_LEVELS, dtype=np.int64)
        self._scal = np.zeros(kernels.ADWIN_SCALARS)
        self.n_detections = 0
        self._index = -1
        return self

    @property
    def width(self) -> int:
        return int(self._scal[0])

    @property
    def total(self) -> float:
        return float(self._scal[1])

    @property
    def estimation(self) -> float:
        w = self._scal[0]
        return float(self._scal[1] / w) if w > 0 else 0.0

    def bucket_sizes(self) -> list:
        """Bucket sizes from oldest to newest."""
        n_levels = int(self._scal[3])
        return [2 ** lev for lev in range(n_levels - 1, -1, -1) for _ in range(self._counts[lev])]

    def update(self, value: float, index: int | None = None) -> DriftSignal:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"ADWIN input must lie in [0, 1], got {value}")
        self._index = self._index + 1 if index is None else index
        cut = kernels.adwin_insert(float(value), self._totals, self._variances, self._counts,
                                   self._scal, self.delta, self.clock, self.min_window,
                                   self.max_buckets)
        if cut:
            self.n_detections += 1
            return DriftSignal(Status.DRIFT, self._index)
        return DriftSignal(Status.NONE, self._index)


class EDDM:
    """Early drift detection from the spacing between consecutive errors."""

    def __init__(self, alpha: float = 0.95, beta: float = 0.90, min_errors: int = 30):
        if not 0.0 < beta < alpha <= 1.0:
            raise ValueError("need 0 < beta < alpha <= 1")
        self.alpha = alpha
        self.beta = beta
        self.min_errors = min_errors
        self.n_detections = 0
        self.reset()

    def reset(self):
        self.p_avg = 0.0
        self.s_avg = 0.0
        self.p_max = 0.0
        self.s_max = 0.0
        self._m2 = 0.0
        self.error_count = 0
        self.last_error_index = None
        self._start_index = None
        self.ratio = 1.0
        return self

    def update(self, prediction_correct: bool, index: int) -> DriftSignal:
        if self._start_index is None:
            self._start_index = index - 1
        if prediction_correct:
            return DriftSignal(Status.NONE, index)
        prev = self._start_index if self.last_error_index is None else self.last_error_index
        distance = index - prev
        self.last_error_index = index
        self.error_count += 1
        delta = distance - self.p_avg
        self.p_avg += delta / self.error_count
        self._m2 += delta * (distance - self.p_avg)
        self.s_avg = math.sqrt(self._m2 / self.error_count)
        if self.error_count < self.min_errors:
            return DriftSignal(Status.NONE, index)
        # maxima are tracked only once the warm-up is over; early spacing estimates are noisy
        level = self.p_avg + 2.0 * self.s_avg
        if level > self.p_max + 2.0 * self.s_max:
            self.p_max, self.s_max = self.p_avg, self.s_avg
        self.ratio = level / (self.p_max + 2.0 * self.s_max)
        if self.ratio < self.beta:
            self.n_detections += 1
            self.reset()
            self._start_index = index
            return DriftSignal(Status.DRIFT, index)
        if self.ratio < self.alpha:
            return DriftSignal(Status.WARNING, index)
        return DriftSignal(Status.NONE, index)


class DualDetector:
    """Confirms a drift only when ADWIN and EDDM both fire within ``window`` samples."""

    def __init__(self, adwin_delta=0.002, eddm_alpha=0.95, eddm_beta=0.90, eddm_min_errors=30,
                 window=100):
        if window < 0:
            raise ValueError("window must be >= 0")
        self.window = window
        self.adwin = ADWIN(adwin_delta)
        self.eddm = EDDM(eddm_alpha, eddm_beta, eddm_min_errors)
        self.last_adwin = None
        self.last_eddm = None
        self.adwin_drifts = []
        self.eddm_drifts = []
        self.confirmed = []

    def update(self, prediction_correct: bool, index: int) -> DriftSignal:
        a = self.adwin.update(0.0 if prediction_correct else 1.0, index)
        e = self.eddm.update(prediction_correct, index)
        if a.drift:
            self.last_adwin = index
            self.adwin_drifts.append(index)
        if e.drift:
            self.last_eddm = index
            self.eddm_drifts.append(index)
        if confirm(self.last_adwin, self.last_eddm, index, self.window):
            self.confirmed.append(index)
            self.adwin.reset()
            self.eddm.reset()
            self.last_adwin = self.last_eddm = None
            return DriftSignal(Status.DRIFT, index)
        return DriftSignal(Status.NONE, index)


def confirm(last_a, last_b, index, window) -> bool:
    """AND rule: both detectors fired, one of them now, the other no more than ``window`` ago."""
    if last_a is None or last_b is None:
        return False
    if index not in (last_a, last_b):
        return False
    return abs(last_a - last_b) <= window


def adwin_update(state: ADWIN, value: float):
    sig = state.update(value)
    return state, sig


def eddm_update(state: EDDM, prediction_correct: bool, index: int):
    sig = state.update(prediction_correct, index)
    return state, sig


def dual_update(state: DualDetector, prediction_correct: bool, index: int):
    sig = state.update(prediction_correct, index)
    return state, sig
