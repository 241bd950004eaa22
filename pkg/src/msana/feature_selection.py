"""Drift-triggered feature selection: variance filter then Pearson select-k-best."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .stream import Sample

log = logging.getLogger(__name__)

# scores equal to this many decimals count as ties (then the lower index wins);
# otherwise |r| = 1 for y and for 1 - y can differ in the last bit
SCORE_DECIMALS = 12


@dataclass(frozen=True)
class FeatureMask:
    selected: tuple
    fitted_at: int = -1
    k: int = 20
    var_threshold: float = 0.0

    @classmethod
    def all_features(cls, d: int, k: int | None = None) -> "FeatureMask":
        return cls(tuple(range(d)), k=d if k is None else k)


@dataclass(frozen=True)
class FeatureScores:
    variances: np.ndarray
    correlations: np.ndarray


def fit_variance_threshold(X, threshold: float = 0.0) -> list:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("variance threshold needs a non-empty batch")
    var = X.var(axis=0)  # population form, denominator n
    return [j for j in range(X.shape[1]) if var[j] > threshold]


def abs_correlations(X, y) -> np.ndarray:
    """|Pearson r| of each column against ``y``; zero where either side is constant."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    num = xc.T @ yc
    den = np.sqrt((xc ** 2).sum(axis=0) * (yc ** 2).sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    return np.round(np.clip(np.abs(r), 0.0, 1.0), SCORE_DECIMALS)


def fit_select_k_best(X, y, candidates, k: int, fitted_at: int = -1,
                      var_threshold: float = 0.0) -> FeatureMask:
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidate features to rank")
    if k < 1:
        raise ValueError("k must be >= 1")
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("select-k-best needs at least two samples")
    scores = abs_correlations(X[:, candidates], y)
    # stable sort on -score keeps the lower original index first among ties
    order = np.argsort(-scores, kind="stable")[:k]
    chosen = sorted(candidates[i] for i in order)
    return FeatureMask(tuple(chosen), fitted_at, k, var_threshold)


def fit_mask(X, y, k: int, var_threshold: float = 0.0, fitted_at: int = -1) -> FeatureMask:
    survivors = fit_variance_threshold(X, var_threshold)
    if not survivors:
        log.warning("every feature fell below the variance threshold; keeping all")
        survivors = list(range(np.asarray(X).shape[1]))
    return fit_select_k_best(X, y, survivors, k, fitted_at, var_threshold)


def scores(X, y) -> FeatureScores:
    X = np.asarray(X, dtype=float)
    return FeatureScores(X.var(axis=0), abs_correlations(X, y))


def transform(mask: FeatureMask, x, n_features: int | None = None):
    """Restrict ``x`` (a :class:`Sample` or vector) to the masked features."""
    if isinstance(x, Sample):
        if mask.selected and max(mask.selected) >= len(x.features):
            raise ValueError("sample has fewer features than the mask expects")
        sel = list(mask.selected)
        return Sample(x.features[sel], tuple(x.feature_names[i] for i in sel), x.index)
    x = np.asarray(x)
    if n_features is not None and x.shape[0] != n_features:
        raise ValueError(f"expected {n_features} features, got {x.shape[0]}")
    return x[list(mask.selected)]


def ddfs_on_drift(current: FeatureMask, X_window, y_window, index: int) -> FeatureMask:
    """Re-fit over the full original feature space on the recent window."""
    X_window = np.asarray(X_window, dtype=float)
    if X_window.ndim != 2 or X_window.shape[0] < 2:
        log.info("window of %d samples too small for re-selection; keeping mask",
                 0 if X_window.ndim != 2 else X_window.shape[0])
        return current
    return fit_mask(X_window, y_window, current.k, current.var_threshold, fitted_at=index)
