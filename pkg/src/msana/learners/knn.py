"""Window-based kNN learners: kNN with ADWIN and Self-Adjusting Memory kNN."""

from __future__ import annotations

import warnings
from collections import deque

import numpy as np
from scipy.cluster.vq import kmeans2

from .. import kernels
from ..drift import ADWIN
from .base import OnlineClassifier


class _Window:
    """Fixed-capacity ring of (x, y) rows, oldest first when read back."""

    def __init__(self, capacity, n_features):
        self.capacity = capacity
        self.X = np.zeros((capacity, n_features))
        self.y = np.zeros(capacity, dtype=np.int64)
        self.start = 0
        self.size = 0

    def __len__(self):
        return self.size

    def append(self, x, y):
        """Append and return the evicted row, if any."""
        evicted = None
        if self.size == self.capacity:
            evicted = (self.X[self.start].copy(), int(self.y[self.start]))
            self.X[self.start] = x
            self.y[self.start] = y
            self.start = (self.start + 1) % self.capacity
        else:
            pos = (self.start + self.size) % self.capacity
            self.X[pos] = x
            self.y[pos] = y
            self.size += 1
        return evicted

    def ordered(self):
        idx = (self.start + np.arange(self.size)) % self.capacity
        return self.X[idx], self.y[idx]

    def keep_last(self, n):
        if n >= self.size:
            return
        X, y = self.ordered()
        self.X[:n] = X[-n:]
        self.y[:n] = y[-n:]
        self.start = 0
        self.size = n

    def compact(self):
        """Rows contiguous from position 0, for kernel queries."""
        if self.start != 0 and self.size:
            X, y = self.ordered()
            self.X[: self.size] = X
            self.y[: self.size] = y
            self.start = 0
        return self.X, self.y, self.size


def _vote(labels, n_classes):
    votes = np.bincount(labels, minlength=n_classes).astype(float)
    return votes / votes.sum()


class KNNADWIN(OnlineClassifier):
    """kNN over a sliding window that ADWIN shrinks when its error stream drifts."""

    def __init__(self, n_classes=2, n_features=1, k=5, window=500, adwin_delta=0.002):
        self.n_classes = n_classes
        self.n_features = n_features
        self.k = k
        self.window_size = window
        self.window = _Window(window, n_features)
        self.adwin = ADWIN(adwin_delta) if adwin_delta else None
        self.truncations = []
        self.samples_seen = 0

    def _neighbours(self, x):
        X, y, n = self.window.compact()
        _, idx = kernels.knn_query(X, n, x, self.k)
        return y[idx]

    def predict_proba(self, x):
        if len(self.window) == 0:
            return self.uniform()
        return _vote(self._neighbours(x), self.n_classes)

    def learn_one(self, x, y, weight=1.0):
        self.samples_seen += 1
        if self.adwin is not None and len(self.window) > 0:
            wrong = int(np.argmax(self.predict_proba(x))) != y
            if self.adwin.update(float(wrong)).drift:
                keep = min(self.adwin.width, len(self.window))
                if keep < len(self.window):
                    self.window.keep_last(keep)
                    self.truncations.append((self.samples_seen, keep))
        self.window.append(x, y)
        return self


class SAMKNN(OnlineClassifier):
    """kNN with a short-term memory (recent window) and a compressed long-term memory.

    Each prediction comes from whichever of STM, LTM or their union has the best
    accuracy over the last ``stm_max`` interleaved predictions.
    """

    MEMORIES = ("stm", "ltm", "both")
    PREFERENCE = ("both", "stm", "ltm")  # tie order

    def __init__(self, n_classes=2, n_features=1, k=5, stm_max=500, ltm_max=500, seed=0):
        self.n_classes = n_classes
        self.n_features = n_features
        self.k = k
        self.stm_max = stm_max
        self.ltm_max = ltm_max
        self.stm = _Window(stm_max, n_features)
        self.ltm_X = np.empty((0, n_features))
        self.ltm_y = np.empty(0, dtype=np.int64)
        self.hits = {m: deque(maxlen=stm_max) for m in self.MEMORIES}
        self.best = "both"
        self.switches = []
        self.samples_seen = 0
        self.n_compressions = 0
        self._seed = seed

    def _query(self, X, y, n, x):
        d, idx = kernels.knn_query(X, n, x, self.k)
        return d, y[idx]

    def _memory_votes(self, x):
        X, y, n = self.stm.compact()
        d_s, l_s = self._query(X, y, n, x)
        d_l, l_l = self._query(self.ltm_X, self.ltm_y, len(self.ltm_y), x)
        out = {}
        out["stm"] = _vote(l_s, self.n_classes) if len(l_s) else None
        out["ltm"] = _vote(l_l, self.n_classes) if len(l_l) else None
        if len(l_s) or len(l_l):
            d = np.concatenate([d_s, d_l])
            lab = np.concatenate([l_s, l_l])
            order = np.argsort(d, kind="stable")[: self.k]
            out["both"] = _vote(lab[order], self.n_classes)
        else:
            out["both"] = None
        return out

    def _accuracy(self, memory):
        h = self.hits[memory]
        return sum(h) / len(h) if h else 0.0

    def _choose(self, votes):
        best, best_acc = None, -1.0
        for m in self.PREFERENCE:
            if votes[m] is None:
                continue
            acc = self._accuracy(m)
            if acc > best_acc:
                best, best_acc = m, acc
        return best

    def predict_proba(self, x):
        votes = self._memory_votes(x)
        m = self._choose(votes)
        if m is None:
            return self.uniform()
        return votes[m]

    def learn_one(self, x, y, weight=1.0):
        self.samples_seen += 1
        votes = self._memory_votes(x)
        for m in self.MEMORIES:
            if votes[m] is not None:
                self.hits[m].append(int(np.argmax(votes[m])) == y)
        choice = self._choose(votes)
        if choice is not None and choice != self.best:
            self.switches.append((self.samples_seen, self.best, choice))
            self.best = choice
        evicted = self.stm.append(x, y)
        if evicted is not None:
            self._transfer(*evicted)
        return self

    def _transfer(self, x, y):
        # cleaning: drop the evicted sample if the current STM disagrees with it
        X, Y, n = self.stm.compact()
        _, labels = self._query(X, Y, n, x)
        if len(labels) and int(np.argmax(np.bincount(labels, minlength=self.n_classes))) != y:
            return
        self.ltm_X = np.vstack([self.ltm_X, x[None, :]])
        self.ltm_y = np.append(self.ltm_y, y)
        if len(self.ltm_y) > self.ltm_max:
            self._compress()

    def _compress(self):
        """Class-wise k-means halving of the long-term memory."""
        X_out, y_out = [], []
        for c in np.unique(self.ltm_y):
            Xc = self.ltm_X[self.ltm_y == c]
            n_clusters = max(1, len(Xc) // 2)
            if len(Xc) <= 1:
                centroids = Xc
            else:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")  # empty clusters are dropped below
                    centroids, labels = kmeans2(Xc, n_clusters, minit="++", iter=5,
                                                seed=self._seed + self.n_compressions)
                centroids = centroids[np.unique(labels)]
            X_out.append(centroids)
            y_out.append(np.full(len(centroids), c, dtype=np.int64))
        self.ltm_X = np.vstack(X_out)
        self.ltm_y = np.concatenate(y_out)
        self.n_compressions += 1
