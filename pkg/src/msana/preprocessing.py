"""Dynamic class balancing and dynamic feature scaling."""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class InsufficientStatistics(ValueError):
    pass


@dataclass
class RunningStats:
    """Per-feature count, mean, sum of squared deviations, min and max."""

    dim: int
    count: int = 0
    mean: np.ndarray = None
    m2: np.ndarray = None
    min: np.ndarray = None
    max: np.ndarray = None

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim)
            self.m2 = np.zeros(self.dim)
            self.min = np.full(self.dim, np.inf)
            self.max = np.full(self.dim, -np.inf)

    @property
    def variance(self) -> np.ndarray:
        """Population variance (denominator ``count``)."""
        if self.count == 0:
            return np.zeros(self.dim)
        return self.m2 / self.count

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def update(self, x) -> "RunningStats":
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} features, got {x.shape}")
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)
        np.minimum(self.min, x, out=self.min)
        np.maximum(self.max, x, out=self.max)
        return self

    def copy(self) -> "RunningStats":
        return RunningStats(
            self.dim, self.count, self.mean.copy(), self.m2.copy(), self.min.copy(), self.max.copy()
        )


def stats_update(stats: RunningStats, x) -> RunningStats:
    return stats.update(x)


def minmax_scale(stats: RunningStats, x) -> np.ndarray:
    if stats.count < 1:
        raise InsufficientStatistics("min-max scaling needs at least one observed sample")
    x = np.asarray(x, dtype=float)
    span = stats.max - stats.min
    safe = np.where(span > 0.0, span, 1.0)
    return np.where(span > 0.0, (x - stats.min) / safe, 0.0)


def zscore_scale(stats: RunningStats, x) -> np.ndarray:
    if stats.count < 2:
        raise InsufficientStatistics("z-score scaling needs at least two observed samples")
    x = np.asarray(x, dtype=float)
    sd = stats.std
    safe = np.where(sd > 0.0, sd, 1.0)
    return np.where(sd > 0.0, (x - stats.mean) / safe, 0.0)


class DynamicScaler:
    """Scale with the statistics seen so far; learn afterwards."""

    def __init__(self, dim: int, method: str = "minmax"):
        if method not in ("minmax", "zscore"):
            raise ValueError(f"unknown scaler {method!r}")
        self.method = method
        self.stats = RunningStats(dim)

    def transform(self, x) -> np.ndarray:
        needed = 1 if self.method == "minmax" else 2
        if self.stats.count < needed:
            return np.zeros(self.stats.dim)
        if self.method == "minmax":
            return minmax_scale(self.stats, x)
        return zscore_scale(self.stats, x)

    def learn(self, x) -> None:
        self.stats.update(x)


# ---------------------------------------------------------------------------
# balancing


@dataclass
class ClassCounter:
    counts: Counter = field(default_factory=Counter)
    ratio_threshold: float = 0.30

    def __post_init__(self):
        self.counts = Counter(self.counts)
        if not 0.0 < self.ratio_threshold <= 1.0:
            raise ValueError("ratio_threshold must lie in (0, 1]")

    def add(self, label: int, n: int = 1):
        self.counts[label] += n

    def remove(self, label: int, n: int = 1):
        self.counts[label] -= n
        if self.counts[label] <= 0:
            del self.counts[label]

    @property
    def majority(self):
        return max(sorted(self.counts), key=lambda k: self.counts[k])

    @property
    def minority(self):
        return min(sorted(self.counts), key=lambda k: self.counts[k])

    @property
    def minority_ratio(self) -> float:
        present = [v for v in self.counts.values() if v > 0]
        if len(present) < 2:
            return 1.0
        return min(present) / max(present)

    def triggered(self) -> bool:
        return self.minority_ratio < self.ratio_threshold


_EPS = 1e-9


def oversample_count(minority: int, majority: int, threshold: float) -> int:
    """Smallest ``d`` with ``(minority + d) / majority >= threshold``."""
    return max(0, math.ceil(threshold * majority - minority - _EPS))


def undersample_count(minority: int, majority: int, threshold: float) -> int:
    """Smallest ``d`` with ``minority / (majority - d) >= threshold``."""
    return max(0, math.ceil(majority - minority / threshold - _EPS))


def dros_rebalance(counter: ClassCounter, buffer, rng_seed) -> list:
    """Minority-class duplicates drawn from ``buffer`` until the ratio threshold holds."""
    if not counter.triggered():
        return []
    rng = np.random.default_rng(rng_seed)
    major = counter.counts[counter.majority]
    out = []
    for cls in sorted(counter.counts):
        need = oversample_count(counter.counts[cls], major, counter.ratio_threshold)
        if need == 0:
            continue
        pool = [s for s in buffer if s.label == cls]
        if not pool:
            log.warning("DROS triggered for class %s but the buffer holds none of it", cls)
            continue
        picks = rng.integers(0, len(pool), size=need)
        out.extend(pool[i] for i in picks)
    return out


def drus_rebalance(counter: ClassCounter, buffer, rng_seed) -> list:
    """Buffer positions of majority-class samples to discard."""
    if not counter.triggered():
        return []
    rng = np.random.default_rng(rng_seed)
    major = counter.majority
    drop = undersample_count(counter.counts[counter.minority], counter.counts[major],
                             counter.ratio_threshold)
    pool = [i for i, s in enumerate(buffer) if s.label == major]
    if not pool:
        log.warning("DRUS triggered but the buffer holds no majority samples")
        return []
    drop = min(drop, len(pool))
    return sorted(rng.choice(pool, size=drop, replace=False).tolist())
