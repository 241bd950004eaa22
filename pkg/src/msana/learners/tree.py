"""Hoeffding Tree and Extremely Fast Decision Tree for numeric features."""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from .base import OnlineClassifier


def hoeffding_bound(R: float, delta: float, n: float) -> float:
    """Radius within which the observed mean of ``n`` draws of range ``R`` lies with prob. 1 - delta."""
    if R <= 0:
        raise ValueError("R must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt(R * R * math.log(1.0 / delta) / (2.0 * n))


class _Stats:
    """Per-class Gaussian estimators over every feature, plus class weights."""

    __slots__ = ("weight", "mean", "m2", "lo", "hi")

    def __init__(self, n_classes, n_features):
        self.weight = np.zeros(n_classes)
        self.mean = np.zeros((n_classes, n_features))
        self.m2 = np.zeros((n_classes, n_features))
        self.lo = np.full(n_features, np.inf)
        self.hi = np.full(n_features, -np.inf)

    def update(self, x, y, w):
        kernels.gaussian_update(self.weight, self.mean, self.m2, self.lo, self.hi, x, y, w)

    @property
    def total(self):
        return self.weight.sum()

    def split_counts(self, j, t):
        """Estimated class weights on each side of ``x_j <= t``."""
        left = np.zeros_like(self.weight)
        for c, wc in enumerate(self.weight):
            if wc <= 0.0:
                continue
            var = self.m2[c, j] / (wc - 1.0) if wc > 1.0 else 0.0
            if var > 0.0:
                p = 0.5 * (1.0 + math.erf((t - self.mean[c, j]) / math.sqrt(2.0 * var)))
            else:
                p = 1.0 if self.mean[c, j] <= t else 0.0
            left[c] = wc * p
        return left, self.weight - left


class Leaf:
    __slots__ = ("counts", "stats", "features", "last_eval", "depth")

    def __init__(self, counts, n_features, features, depth):
        self.counts = counts
        self.stats = _Stats(len(counts), n_features)
        self.features = features
        self.last_eval = 0.0
        self.depth = depth

    def proba(self):
        total = self.counts.sum()
        if total <= 0.0:
            return np.full(len(self.counts), 1.0 / len(self.counts))
        return self.counts / total


class Split:
    __slots__ = ("feature", "threshold", "left", "right", "stats", "counts", "last_eval", "depth")

    def __init__(self, feature, threshold, left, right, depth):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.depth = depth
        self.stats = None
        self.counts = None
        self.last_eval = 0.0

    def branch(self, x):
        return self.left if x[self.feature] <= self.threshold else self.right


class HoeffdingTree(OnlineClassifier):
    """Very Fast Decision Tree with Gaussian numeric split estimation.

    Parameters
    ----------
    n_classes, n_features : int
    grace_period : float
        Observed weight at a leaf between split attempts.
    delta : float
        Split confidence for the Hoeffding bound.
    tau : float
        Tie threshold; a split is forced once the bound drops below it.
    n_splits : int
        Evenly spaced candidate thresholds per feature.
    subspace : int or None
        When set, every new leaf only considers this many randomly drawn features.
    """

    eager = False

    def __init__(self, n_classes=2, n_features=1, grace_period=200.0, delta=1e-7, tau=0.05,
                 n_splits=10, max_depth=20, subspace=None, seed=0):
        self.n_classes = n_classes
        self.n_features = n_features
        self.grace_period = grace_period
        self.delta = delta
        self.tau = tau
        self.n_splits = n_splits
        self.max_depth = max_depth
        self.subspace = subspace
        self.R = math.log2(n_classes)
        self._rng = np.random.default_rng(seed)
        self.root = self._new_leaf(np.zeros(n_classes), 0)
        self.n_splits_installed = 0
        self.split_log = []
        self.samples_seen = 0

    def _new_leaf(self, counts, depth):
        d = self.n_features
        if self.subspace is None or self.subspace >= d:
            feats = np.arange(d)
        else:
            feats = np.sort(self._rng.choice(d, size=self.subspace, replace=False))
        return Leaf(counts, d, feats, depth)

    def _leaf(self, x):
        node = self.root
        while isinstance(node, Split):
            node = node.branch(x)
        return node

    def predict_proba(self, x):
        return self._leaf(x).proba()

    def learn_one(self, x, y, weight=1.0):
        self.samples_seen += 1
        parent = None
        node = self.root
        while isinstance(node, Split):
            if node.stats is not None:
                node.stats.update(x, y, weight)
                node.counts[y] += weight
            parent = node
            node = node.branch(x)
        node.counts[y] += weight
        node.stats.update(x, y, weight)
        seen = node.stats.total
        if seen - node.last_eval >= self.grace_period:
            node.last_eval = seen
            self._attempt_split(node, parent)
        return self

    def _rank(self, stats, features):
        gains, thresholds = kernels.best_splits(stats.weight, stats.mean, stats.m2, stats.lo,
                                                stats.hi, features, self.n_splits, 0.01)
        order = np.argsort(-gains, kind="stable")
        return gains, thresholds, order

    def _should_split(self, best, second, eps):
        return best > 0.0 and (best - second > eps or eps < self.tau)

    def _attempt_split(self, leaf, parent):
        if leaf.depth >= self.max_depth or np.count_nonzero(leaf.stats.weight) < 2:
            return
        gains, thresholds, order = self._rank(leaf.stats, leaf.features)
        best = gains[order[0]]
        if not np.isfinite(best):
            return
        if self.eager:
            second = 0.0  # the null split
        else:
            second = gains[order[1]] if len(order) > 1 and np.isfinite(gains[order[1]]) else 0.0
            second = max(second, 0.0)
        n = leaf.stats.total
        eps = hoeffding_bound(self.R, self.delta, n)
        if not self._should_split(best, second, eps):
            return
        j = int(leaf.features[order[0]])
        t = float(thresholds[order[0]])
        self._install(leaf, parent, j, t, leaf.stats, leaf.depth)
        self.split_log.append({"n": n, "eps": eps, "best": float(best), "second": float(second),
                               "feature": j, "at": self.samples_seen})

    def _install(self, node, parent, j, t, stats, depth):
        left_c, right_c = stats.split_counts(j, t)
        split = Split(j, t, self._new_leaf(left_c, depth + 1), self._new_leaf(right_c, depth + 1),
                      depth)
        if self.eager:
            split.stats = _Stats(self.n_classes, self.n_features)
            split.counts = np.zeros(self.n_classes)
            # keep what the node already knows so re-evaluation starts informed
            split.stats.weight[:] = stats.weight
            split.stats.mean[:] = stats.mean
            split.stats.m2[:] = stats.m2
            split.stats.lo[:] = stats.lo
            split.stats.hi[:] = stats.hi
            split.counts[:] = stats.weight
            split.last_eval = stats.total
        self._replace(node, parent, split)
        self.n_splits_installed += 1
        return split

    def _replace(self, old, parent, new):
        if parent is None:
            self.root = new
        elif parent.left is old:
            parent.left = new
        else:
            parent.right = new

    @property
    def root_feature(self):
        return self.root.feature if isinstance(self.root, Split) else None

    def n_nodes(self):
        stack, n = [self.root], 0
        while stack:
            node = stack.pop()
            n += 1
            if isinstance(node, Split):
                stack.extend((node.left, node.right))
        return n


class EFDT(HoeffdingTree):
    """Extremely Fast Decision Tree.

    Splits as soon as the best candidate beats the null split by the Hoeffding
    bound, and every ``reeval_period`` of observed weight revisits installed
    splits, replacing one whose attribute is no longer the best.
    """

    eager = True

    def __init__(self, n_classes=2, n_features=1, grace_period=200.0, delta=1e-7, tau=0.05,
                 n_splits=10, max_depth=20, subspace=None, seed=0, reeval_period=200.0):
        super().__init__(n_classes, n_features, grace_period, delta, tau, n_splits, max_depth,
                         subspace, seed)
        self.reeval_period = reeval_period
        self.n_replacements = 0
        self.replacement_log = []

    def learn_one(self, x, y, weight=1.0):
        self.samples_seen += 1
        parent = None
        node = self.root
        while isinstance(node, Split):
            node.stats.update(x, y, weight)
            node.counts[y] += weight
            seen = node.stats.total
            if seen - node.last_eval >= self.reeval_period:
                node.last_eval = seen
                fresh = self._reevaluate(node, parent)
                if fresh is not None:
                    node = fresh
            parent = node
            node = node.branch(x)
        node.counts[y] += weight
        node.stats.update(x, y, weight)
        seen = node.stats.total
        if seen - node.last_eval >= self.grace_period:
            node.last_eval = seen
            self._attempt_split(node, parent)
        return self

    def _reevaluate(self, node, parent):
        stats = node.stats
        if np.count_nonzero(stats.weight) < 2:
            return None
        feats = np.arange(self.n_features)
        gains, thresholds, order = self._rank(stats, feats)
        best_j = int(feats[order[0]])
        best = gains[order[0]]
        if best_j == node.feature or not np.isfinite(best):
            return None
        current = kernels.split_gain(stats.weight, stats.mean, stats.m2, node.feature,
                                     node.threshold, 0.0)
        if not np.isfinite(current):
            current = 0.0
        eps = hoeffding_bound(self.R, self.delta, stats.total)
        if best - current > eps or (eps < self.tau and best - current > 0.0):
            fresh = self._install(node, parent, best_j, float(thresholds[order[0]]), stats,
                                  node.depth)
            self.n_replacements += 1
            self.replacement_log.append({"at": self.samples_seen, "old": node.feature,
                                         "new": best_j, "depth": node.depth})
            return fresh
        return None
