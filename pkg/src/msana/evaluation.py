"""Hold-out plus prequential evaluation, classification metrics and latency accounting."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

COMPONENTS = (
    "balancing",
    "normalization",
    "drift_detection",
    "feature_selection",
    "base_learning",
    "model_selection",
    "ensemble_combine",
)


class EvaluationError(ValueError):
    pass


class PipelineFault(RuntimeError):
    """A pipeline step raised; ``partial`` holds everything evaluated before it."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


def holdout_split(stream, train_fraction: float = 0.1):
    if not 0.0 < train_fraction < 1.0:
        raise EvaluationError("train_fraction must lie in (0, 1)")
    samples = list(stream)
    n_train = int(np.floor(train_fraction * len(samples)))
    if n_train == 0 or n_train == len(samples):
        raise EvaluationError(
            f"hold-out split of {len(samples)} samples at {train_fraction} leaves an empty part"
        )
    return samples[:n_train], samples[n_train:]


@dataclass
class ConfusionCounts:
    n_classes: int = 2
    curve_stride: int = 50
    matrix: np.ndarray = None
    curve: list = field(default_factory=list)
    predictions: list = field(default_factory=list)

    def __post_init__(self):
        if self.matrix is None:
            self.matrix = np.zeros((self.n_classes, self.n_classes), dtype=np.int64)

    @property
    def n(self) -> int:
        return int(self.matrix.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.matrix) / self.n) if self.n else 0.0

    def update(self, truth: int, predicted: int, index: int | None = None):
        self.matrix[truth, predicted] += 1
        self.predictions.append((index, int(truth), int(predicted)))
        if self.n % self.curve_stride == 0:
            self.curve.append((index if index is not None else self.n - 1, self.accuracy))

    def tally(self, positive: int = 1) -> dict:
        m = self.matrix
        tp = int(m[positive, positive])
        fp = int(m[:, positive].sum() - tp)
        fn = int(m[positive, :].sum() - tp)
        return {"tp": tp, "fp": fp, "fn": fn, "tn": self.n - tp - fp - fn}

    def accuracy_since(self, start_index: int) -> float:
        hits = [t == p for i, t, p in self.predictions if i is not None and i >= start_index]
        return float(np.mean(hits)) if hits else 0.0


def metrics_from_tally(tp: int, fp: int, fn: int, tn: int) -> dict:
    n = tp + fp + fn + tn
    if n == 0:
        raise EvaluationError("no evaluated samples")
    if tp + fp == 0:
        log.warning("no positive predictions; precision defined as 0")
        precision = 0.0
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        log.warning("no positive samples; recall defined as 0")
        recall = 0.0
    else:
        recall = tp / (tp + fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {"accuracy": (tp + tn) / n, "precision": precision, "recall": recall, "f1": f1}


def metrics(counts: ConfusionCounts, positive: int = 1) -> dict:
    return metrics_from_tally(**counts.tally(positive))


class LatencyRecord:
    """Per-sample wall-clock totals and per-component durations, in nanoseconds."""

    def __init__(self, warmup: int = 100):
        self.warmup = warmup
        self.totals = []
        self.components = {c: [] for c in COMPONENTS}
        self._current = dict.fromkeys(COMPONENTS, 0)
        self.wall_start = None
        self.wall_end = None
        self.n_samples = 0

    @contextmanager
    def section(self, name: str):
        t0 = time.perf_counter_ns()
        try:
            yield
        finally:
            self._current[name] += time.perf_counter_ns() - t0

    def begin_sample(self):
        for c in self._current:
            self._current[c] = 0
        if self.n_samples == self.warmup:
            self.wall_start = time.perf_counter_ns()
        return time.perf_counter_ns()

    def end_sample(self, t0: int):
        total = time.perf_counter_ns() - t0
        self.n_samples += 1
        if self.n_samples > self.warmup:
            self.totals.append(total)
            for c in COMPONENTS:
                self.components[c].append(self._current[c])
            self.wall_end = time.perf_counter_ns()

    @classmethod
    def from_durations(cls, totals_ns, components_ns=None, wall_ns=None):
        rec = cls(warmup=0)
        rec.totals = list(totals_ns)
        rec.n_samples = len(rec.totals)
        for c in COMPONENTS:
            rec.components[c] = list((components_ns or {}).get(c, [0] * len(rec.totals)))
        rec.wall_start = 0
        rec.wall_end = int(sum(rec.totals)) if wall_ns is None else int(wall_ns)
        return rec


def qos_report(latency: LatencyRecord, bins: int = 50) -> dict:
    if not latency.totals:
        raise EvaluationError("no timed samples (stream shorter than the warm-up?)")
    ms = np.asarray(latency.totals, dtype=float) / 1e6
    wall_s = (latency.wall_end - latency.wall_start) / 1e9 if latency.wall_start is not None else 0.0
    if wall_s <= 0:
        wall_s = ms.sum() / 1e3
    density, edges = np.histogram(ms, bins=bins, density=True)
    breakdown = {c: float(np.mean(latency.components[c]) / 1e6) for c in COMPONENTS}
    return {
        "mean_latency_ms": float(ms.mean()),
        "median_latency_ms": float(np.median(ms)),
        "max_latency_ms": float(ms.max()),
        "throughput_sps": float(len(ms) / wall_s),
        "timed_samples": int(len(ms)),
        "latency_pdf": {"edges_ms": edges.tolist(), "density": density.tolist()},
        "component_breakdown": breakdown,
    }


@dataclass
class PrequentialResult:
    counts: ConfusionCounts
    latency: LatencyRecord
    events: list


def prequential_run(pipeline, test_stream, curve_stride: int = 50, warmup: int = 100,
                    n_classes: int | None = None) -> PrequentialResult:
    """Strict test-then-train over ``test_stream``.

    ``pipeline`` needs ``step(sample, latency) -> ClassProbabilities`` (predict,
    then learn) and an ``events`` list.
    """
    counts = ConfusionCounts(n_classes or pipeline.n_classes, curve_stride)
    latency = LatencyRecord(warmup)
    try:
        for z in test_stream:
            t0 = latency.begin_sample()
            pred = pipeline.step(z, latency)
            latency.end_sample(t0)
            counts.update(z.label, pred.predicted, z.index)
    except Exception as exc:
        partial = PrequentialResult(counts, latency, list(getattr(pipeline, "events", [])))
        raise PipelineFault(f"pipeline fault after {counts.n} samples: {exc}", partial) from exc
    return PrequentialResult(counts, latency, list(getattr(pipeline, "events", [])))
