"""Stream records, CSV ingestion and synthetic drift streams."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np
import yaml

log = logging.getLogger(__name__)


class StreamError(ValueError):
    """A malformed row in a stream source."""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    feature_names: tuple
    index: int

    def __post_init__(self):
        if len(self.features) != len(self.feature_names):
            raise ValueError(
                f"{len(self.features)} feature values but {len(self.feature_names)} names"
            )


@dataclass(frozen=True)
class LabeledSample:
    sample: Sample
    label: int

    @property
    def x(self) -> np.ndarray:
        return self.sample.features

    @property
    def index(self) -> int:
        return self.sample.index


@dataclass(frozen=True)
class ClassProbabilities:
    probs: np.ndarray
    predicted: int

    @classmethod
    def from_array(cls, probs) -> "ClassProbabilities":
        p = np.asarray(probs, dtype=float)
        # np.argmax returns the first maximum, i.e. the lowest class index on ties
        return cls(p, int(np.argmax(p)))

    @classmethod
    def uniform(cls, n_classes: int) -> "ClassProbabilities":
        return cls.from_array(np.full(n_classes, 1.0 / n_classes))


@dataclass
class StreamSchema:
    feature_names: tuple
    label_column: str = "label"
    c: int = 2
    label_map: Optional[dict] = None

    def __post_init__(self):
        if self.c < 2:
            raise SchemaError(f"class count must be >= 2, got {self.c}")
        self.feature_names = tuple(self.feature_names)

    @classmethod
    def from_file(cls, path, feature_names=()) -> "StreamSchema":
        """Load ``label_column``, ``class_count`` and optional ``label_map``.

        Feature names may be listed under ``features``; when absent they are
        taken from the CSV header at read time.
        """
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        allowed = {"label_column", "class_count", "label_map", "features"}
        unknown = set(raw) - allowed
        if unknown:
            raise SchemaError(f"unknown schema keys: {sorted(unknown)}")
        if "label_column" not in raw:
            raise SchemaError("schema missing label_column")
        label_map = raw.get("label_map")
        if label_map is not None:
            label_map = {str(k): int(v) for k, v in label_map.items()}
        return cls(
            feature_names=tuple(raw.get("features") or feature_names),
            label_column=str(raw["label_column"]),
            c=int(raw.get("class_count", 2)),
            label_map=label_map,
        )


@dataclass
class CsvStream:
    """Iterator over a CSV file yielding :class:`LabeledSample` in file order."""

    path: Path
    schema: StreamSchema
    missing_values: int = field(default=0, init=False)

    def __iter__(self) -> Iterator[LabeledSample]:
        self.missing_values = 0
        with open(self.path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise StreamError("empty file, header row required") from None
            if self.schema.label_column not in header:
                raise SchemaError(f"label column {self.schema.label_column!r} not in header")
            label_pos = header.index(self.schema.label_column)
            if self.schema.feature_names:
                missing = [f for f in self.schema.feature_names if f not in header]
                if missing:
                    raise SchemaError(f"feature columns missing from header: {missing}")
                names = self.schema.feature_names
            else:
                names = tuple(h for i, h in enumerate(header) if i != label_pos)
                self.schema.feature_names = names
            positions = [header.index(f) for f in names]
            for i, row in enumerate(reader):
                if not row:
                    continue
                if len(row) != len(header):
                    raise StreamError(f"expected {len(header)} cells, got {len(row)}", row=i + 1)
                label = self._parse_label(row[label_pos], i + 1)
                values = np.empty(len(positions))
                for j, p in enumerate(positions):
                    values[j] = self._parse_value(row[p])
                yield LabeledSample(Sample(values, names, i), label)

    def _parse_value(self, cell: str) -> float:
        try:
            v = float(cell)
        except ValueError:
            v = math.nan
        if not math.isfinite(v):
            self.missing_values += 1
            return 0.0
        return v

    def _parse_label(self, cell: str, row: int) -> int:
        cell = cell.strip()
        if self.schema.label_map is not None and cell in self.schema.label_map:
            label = self.schema.label_map[cell]
        else:
            try:
                label = int(float(cell))
            except ValueError:
                raise StreamError(f"unparseable label {cell!r}", row=row) from None
        if not 0 <= label < self.schema.c:
            raise StreamError(f"label {label} outside 0..{self.schema.c - 1}", row=row)
        return label


def read_csv_stream(path, schema: StreamSchema) -> CsvStream:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    return CsvStream(path, schema)


# ---------------------------------------------------------------------------
# Synthetic streams: binary linear-threshold concepts over three uniform features.
# Concept A leans on x0, concept B on x2, so feature relevance changes at the drift.

SYNTH_FEATURES = ("f0", "f1", "f2")
CONCEPTS = {
    "A": (np.array([1.0, 0.5, 0.0]), 0.75),
    "B": (np.array([0.0, 0.5, 1.0]), 0.75),
}


def concept_label(x: np.ndarray, concept: str) -> int:
    w, t = CONCEPTS[concept]
    return int(x @ w > t)


def _emit(X, concept_of, flips):
    out = []
    for i in range(len(X)):
        y = concept_label(X[i], concept_of[i])
        if flips[i]:
            y = 1 - y
        out.append(LabeledSample(Sample(X[i], SYNTH_FEATURES, i), y))
    return out


def generate_abrupt_drift_stream(seed: int, n_pre: int, n_post: int, noise: float = 0.0) -> list:
    if n_pre <= 0 or n_post <= 0:
        raise ValueError("n_pre and n_post must be positive")
    if not 0.0 <= noise < 0.5:
        raise ValueError("noise must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    n = n_pre + n_post
    X = rng.random((n, 3))
    flips = rng.random(n) < noise
    concept_of = ["A"] * n_pre + ["B"] * n_post
    return _emit(X, concept_of, flips)


def gradual_drift_probability(i: int, drift_center: int, drift_width: int) -> float:
    lo = drift_center - drift_width / 2.0
    return float(min(1.0, max(0.0, (i - lo) / drift_width)))


def generate_gradual_drift_stream(
    seed: int, n_total: int, drift_center: int, drift_width: int, noise: float = 0.0,
    with_concepts: bool = False,
):
    """Concept B replaces A along a linear ramp centred on ``drift_center``.

    With ``with_concepts=True`` also returns the concept ("A"/"B") drawn per sample.
    """
    if not 0 < drift_center < n_total:
        raise ValueError("drift_center must lie strictly inside the stream")
    if drift_width <= 0:
        raise ValueError("drift_width must be positive")
    if not 0.0 <= noise < 0.5:
        raise ValueError("noise must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    X = rng.random((n_total, 3))
    flips = rng.random(n_total) < noise
    pick = rng.random(n_total)
    concept_of = [
        "B" if pick[i] < gradual_drift_probability(i, drift_center, drift_width) else "A"
        for i in range(n_total)
    ]
    out = _emit(X, concept_of, flips)
    return (out, concept_of) if with_concepts else out


def as_arrays(samples: Sequence[LabeledSample]):
    """Stack a batch into ``(X, y)`` arrays."""
    if not samples:
        return np.empty((0, 0)), np.empty(0, dtype=int)
    X = np.vstack([s.x for s in samples])
    y = np.fromiter((s.label for s in samples), dtype=int, count=len(samples))
    return X, y
