"""Adaptive Random Forest with ADWIN or EDDM per-tree drift detection."""

from __future__ import annotations

import math

import numpy as np

from ..drift import ADWIN, EDDM
from .base import OnlineClassifier
from .tree import HoeffdingTree


class _Member:
    __slots__ = ("tree", "background", "drift_det", "warn_det", "n_seen")

    def __init__(self, tree, drift_det, warn_det):
        self.tree = tree
        self.background = None
        self.drift_det = drift_det
        self.warn_det = warn_det
        self.n_seen = 0


def _rose(adwin, wrong) -> bool:
    """ADWIN cut that raised the error estimate; a tree getting better is not a drift."""
    before = adwin.estimation
    return adwin.update(float(wrong)).drift and adwin.estimation > before


class AdaptiveRandomForest(OnlineClassifier):
    """Online bagging of Hoeffding trees with random feature subspaces.

    Every tree learns each sample with a Poisson(``lam``) weight. A per-tree
    detector watches the tree's 0/1 error: a warning starts a background tree,
    a drift swaps the background tree in (or a fresh tree when there is none).

    With ``detector="adwin"`` warnings come from a second, more sensitive ADWIN
    (``warning_delta``); with ``"eddm"`` they come from EDDM's own warning level.
    """

    def __init__(self, n_classes=2, n_features=1, n_models=10, max_features="sqrt", lam=6.0,
                 detector="adwin", drift_delta=0.001, warning_delta=0.01, grace_period=200.0,
                 delta=1e-7, tau=0.05, n_splits=10, max_depth=20, seed=0):
        if detector not in ("adwin", "eddm"):
            raise ValueError(f"unknown detector {detector!r}")
        self.n_classes = n_classes
        self.n_features = n_features
        self.n_models = n_models
        self.lam = lam
        self.detector = detector
        self.drift_delta = drift_delta
        self.warning_delta = warning_delta
        if max_features == "sqrt":
            m = math.ceil(math.sqrt(n_features))
        elif max_features is None or max_features == "all":
            m = n_features
        else:
            m = int(max_features)
        self.m = max(1, min(n_features, m))
        self._tree_kw = dict(grace_period=grace_period, delta=delta, tau=tau, n_splits=n_splits,
                             max_depth=max_depth)
        self._rng = np.random.default_rng(seed)
        self.members = [self._member() for _ in range(n_models)]
        self.n_replacements = 0
        self.n_backgrounds = 0
        self.samples_seen = 0

    def _tree(self):
        return HoeffdingTree(self.n_classes, self.n_features, subspace=self.m,
                             seed=int(self._rng.integers(2**31)), **self._tree_kw)

    def _detectors(self):
        if self.detector == "adwin":
            return ADWIN(self.drift_delta), ADWIN(self.warning_delta)
        return EDDM(), None

    def _member(self):
        return _Member(self._tree(), *self._detectors())

    def predict_proba(self, x):
        total = np.zeros(self.n_classes)
        for mem in self.members:
            total += mem.tree.predict_proba(x)
        s = total.sum()
        return total / s if s > 0 else self.uniform()

    def learn_one(self, x, y, weight=1.0):
        self.samples_seen += 1
        idx = self.samples_seen
        for mem in self.members:
            wrong = int(np.argmax(mem.tree.predict_proba(x))) != y
            k = self._rng.poisson(self.lam * weight)
            if k > 0:
                mem.tree.learn_one(x, y, float(k))
                if mem.background is not None:
                    mem.background.learn_one(x, y, float(k))
            mem.n_seen += 1
            self._watch(mem, wrong, idx)
        return self

    def _watch(self, mem, wrong, idx):
        if self.detector == "adwin":
            if _rose(mem.warn_det, wrong) and mem.background is None:
                mem.background = self._tree()
                mem.warn_det.reset()
                self.n_backgrounds += 1
            drift = _rose(mem.drift_det, wrong)
        else:
            sig = mem.drift_det.update(not wrong, idx)
            if sig.warning and mem.background is None:
                mem.background = self._tree()
                self.n_backgrounds += 1
            drift = sig.drift
        if drift:
            mem.tree = mem.background if mem.background is not None else self._tree()
            mem.background = None
            mem.drift_det, mem.warn_det = self._detectors()
            self.n_replacements += 1
