"""The MSANA streaming pipeline and single-learner baselines built on the same preprocessing."""

from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

import numpy as np

from . import feature_selection as fs
from .config import PipelineConfig
from .drift import DualDetector
from .ensemble import FOLLOWER_POOL, LEADERS, EnsembleState, combine
from .learners import (
    EFDT,
    KNNADWIN,
    SAMKNN,
    AdaptiveRandomForest,
    HoeffdingTree,
    PassiveAggressive,
)
from .preprocessing import ClassCounter, DynamicScaler, dros_rebalance, drus_rebalance
from .stream import ClassProbabilities, LabeledSample, as_arrays

log = logging.getLogger(__name__)

ROSTER = LEADERS + FOLLOWER_POOL + ("ht",)
OUT_OF_SCOPE = ("lb", "srp", "pwpae")


def build_learner(name: str, n_classes: int, n_features: int, cfg: PipelineConfig, seed: int):
    lc = cfg.learners
    if name in ("arf-adwin", "arf-eddm"):
        a = lc.arf
        return AdaptiveRandomForest(
            n_classes, n_features, n_models=a.n_models, max_features=a.max_features, lam=a.lam,
            detector=name.split("-")[1], drift_delta=a.drift_delta, warning_delta=a.warning_delta,
            grace_period=a.grace_period, delta=a.delta, tau=a.tau, n_splits=a.n_splits,
            max_depth=a.max_depth, seed=seed,
        )
    if name == "efdt":
        e = lc.efdt
        return EFDT(n_classes, n_features, e.grace_period, e.delta, e.tau, e.n_splits,
                    e.max_depth, seed=seed, reeval_period=e.reeval_period)
    if name == "ht":
        h = lc.ht
        return HoeffdingTree(n_classes, n_features, h.grace_period, h.delta, h.tau, h.n_splits,
                             h.max_depth, seed=seed)
    if name == "knn-adwin":
        k = lc.knn
        return KNNADWIN(n_classes, n_features, k.k, k.window, k.adwin_delta)
    if name == "sam-knn":
        s = lc.samknn
        return SAMKNN(n_classes, n_features, s.k, s.stm_max, s.ltm_max, seed=seed)
    if name == "opa":
        return PassiveAggressive(n_classes, n_features, lc.opa.C, lc.opa.fit_intercept)
    if name in OUT_OF_SCOPE:
        raise ValueError(f"{name}: not implemented (out of scope baseline)")
    raise ValueError(f"unknown learner {name!r}; choose from {ROSTER + ('msana', 'ht-frozen')}")


class _NullTimer:
    def section(self, name):
        return nullcontext()


NULL_TIMER = _NullTimer()


class Balancer:
    """Bounded buffer of recent learned samples with DROS/DRUS rebalancing."""

    def __init__(self, method="dros", threshold=0.30, capacity=1000, seed=0):
        self.method = method
        self.buffer = deque()
        self.capacity = capacity
        self.counter = ClassCounter(ratio_threshold=threshold)
        self._rng = np.random.default_rng(seed)
        self.n_oversampled = 0
        self.n_dropped = 0

    def _push(self, z):
        self.buffer.append(z)
        self.counter.add(z.label)
        if len(self.buffer) > self.capacity:
            old = self.buffer.popleft()
            self.counter.remove(old.label)

    def add(self, z: LabeledSample):
        """Register ``z``. Returns ``(learn_z, extra_samples_to_learn)``."""
        if self.method == "off":
            return True, []
        self._push(z)
        if not self.counter.triggered():
            return True, []
        seed = int(self._rng.integers(2**31))
        if self.method == "dros":
            extra = dros_rebalance(self.counter, self.buffer, seed)
            for d in extra:
                self._push(d)
            self.n_oversampled += len(extra)
            return True, extra
        drops = set(drus_rebalance(self.counter, list(self.buffer), seed))
        if not drops:
            return True, []
        keep_z = (len(self.buffer) - 1) not in drops
        kept = deque()
        for i, s in enumerate(self.buffer):
            if i in drops:
                self.counter.remove(s.label)
            else:
                kept.append(s)
        self.buffer = kept
        self.n_dropped += len(drops)
        return keep_z, []


class _Preprocessed:
    """Shared dynamic preprocessing: balancing, scaling, feature mask."""

    def __init__(self, cfg: PipelineConfig, n_classes: int, n_features: int):
        self.cfg = cfg
        self.n_classes = n_classes
        self.n_features = n_features
        self.rng = np.random.default_rng(cfg.seed)
        p = cfg.preprocessing
        self.scaler = DynamicScaler(n_features, p.scaler)
        self.balancer = Balancer(p.balancer, p.balance_threshold, p.balance_buffer,
                                 seed=self._seed())
        self.mask = fs.FeatureMask.all_features(n_features)
        self.mask_history = []
        self.events = []
        self.n_seen = 0

    def _seed(self):
        return int(self.rng.integers(2**31))

    def _fit_preprocessing(self, train):
        X, y = as_arrays(train)
        for x in X:
            self.scaler.learn(x)
        Xs = np.vstack([self.scaler.transform(x) for x in X])
        k = min(self.cfg.feature_selection.fs_k, self.n_features)
        self.mask = fs.fit_mask(Xs, y, k, self.cfg.feature_selection.fs_var_threshold,
                                fitted_at=train[-1].index)
        self.mask_history.append((self.mask.fitted_at, self.mask.selected))
        self._sel = np.array(self.mask.selected, dtype=np.int64)
        return Xs

    def _learnable(self, z, timer):
        """Balance, then absorb ``z`` into the scaler. Yields scaled full-width vectors to learn."""
        with timer.section("balancing"):
            learn_z, extra = self.balancer.add(z)
        with timer.section("normalization"):
            out = []
            xs = self.scaler.transform(z.x)
            if learn_z:
                out.append((xs, z.label))
            for d in extra:
                out.append((self.scaler.transform(d.x), d.label))
            self.scaler.learn(z.x)
        return xs, out


class MSANA(_Preprocessed):
    """Full pipeline: preprocessing, drift-triggered feature selection, six learners,
    leader/follower selection and the weighted probability-averaging ensemble."""

    def __init__(self, cfg: PipelineConfig, n_classes: int, n_features: int):
        super().__init__(cfg, n_classes, n_features)
        d = cfg.drift
        self.detector = DualDetector(d.adwin_delta, d.eddm_alpha, d.eddm_beta, d.eddm_min_errors,
                                     d.dual_window)
        e = cfg.ensemble
        self.state = EnsembleState(alpha_ratio=e.alpha_ratio, epsilon=e.epsilon,
                                   window_from_drift_index=e.window_from_drift_index)
        self.replay = deque(maxlen=e.replay_buffer)
        self.models = {}
        self._pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None

    def _build_models(self):
        d = len(self.mask.selected)
        self.models = {
            name: build_learner(name, self.n_classes, d, self.cfg, self._seed())
            for name in LEADERS + FOLLOWER_POOL
        }

    def _fan(self, fn, names):
        if self._pool is None:
            return [fn(n) for n in names]
        return list(self._pool.map(fn, names))

    def _predict_all(self, xm):
        names = tuple(self.models)
        probas = self._fan(lambda n: self.models[n].predict_proba(xm), names)
        return dict(zip(names, probas))

    def _learn_all(self, items, names=None):
        names = tuple(self.models) if names is None else names
        masked = [(x[self._sel], y) for x, y in items]

        def learn(n):
            m = self.models[n]
            for xm, y in masked:
                m.learn_one(xm, y)

        self._fan(learn, names)

    def fit_holdout(self, train):
        """Fit scaler and feature mask on the hold-out batch, then train all six
        learners on it test-then-train and pick the initial followers."""
        Xs = self._fit_preprocessing(train)
        self._build_models()
        for z, xs in zip(train, Xs):
            probas = self._predict_all(xs[self._sel])
            self.state.record({n: int(np.argmax(p)) for n, p in probas.items()}, z.label)
            learn_z, extra = self.balancer.add(z)
            items = [(xs, z.label)] if learn_z else []
            items += [(self.scaler.transform(d.x), d.label) for d in extra]
            self._learn_all(items)
            self.replay.append((xs, z.label))
        self.n_seen = len(train)
        followers = self.state.reselect(s=len(train))
        self.events.append({"index": train[-1].index, "event": "initial_selection",
                            "payload": {"followers": list(followers),
                                        "holdout_errors": _rounded(self.state.window_errors(
                                            s=len(train)))}})
        return self

    def step(self, z: LabeledSample, timer=NULL_TIMER) -> ClassProbabilities:
        with timer.section("normalization"):
            xs = self.scaler.transform(z.x)
        with timer.section("feature_selection"):
            xm = xs[self._sel]
        with timer.section("base_learning"):
            probas = self._predict_all(xm)
        with timer.section("model_selection"):
            active = self.state.active
            weights = self.state.weights()
        with timer.section("ensemble_combine"):
            out = combine([probas[n] for n in active], weights)
        with timer.section("model_selection"):
            self.state.record({n: int(np.argmax(p)) for n, p in probas.items()}, z.label)
        with timer.section("drift_detection"):
            signal = self.detector.update(out.predicted == z.label, z.index)
        _, items = self._learnable(z, timer)
        with timer.section("base_learning"):
            self._learn_all(items)
        self.replay.append((xs, z.label))
        self.n_seen += 1
        if signal.drift:
            self._on_drift(z.index, timer)
        return out

    def _on_drift(self, index, timer):
        s = self.state.window()
        self.state.drift_arr.append(index)
        self.events.append({"index": index, "event": "drift", "payload": {"window": s}})
        recent = list(self.replay)[-min(s, len(self.replay)):]
        Xw = np.vstack([x for x, _ in recent])
        yw = np.array([y for _, y in recent])
        with timer.section("feature_selection"):
            old = self.mask
            self.mask = fs.ddfs_on_drift(old, Xw, yw, index)
            changed = self.mask.selected != old.selected
            self._sel = np.array(self.mask.selected, dtype=np.int64)
        self.mask_history.append((index, self.mask.selected))
        self.events.append({"index": index, "event": "refit_fs",
                            "payload": {"selected": list(self.mask.selected), "changed": changed,
                                        "window": len(recent)}})
        with timer.section("model_selection"):
            errors = self.state.window_errors(self.state.follower_pool, s)
            followers = self.state.reselect(s)
        self.events.append({"index": index, "event": "reselect",
                            "payload": {"followers": list(followers), "errors": _rounded(errors)}})
        n_replay = min(max(s, self.cfg.ensemble.retrain_min), len(self.replay))
        replay = list(self.replay)[-n_replay:]
        with timer.section("base_learning"):
            if changed:
                # learners are bound to the old feature width; rebuild and replay
                self._build_models()
                names = tuple(self.models)
            else:
                names = self.state.active
            self._learn_all(replay, names)
        self.events.append({"index": index, "event": "retrain",
                            "payload": {"samples": n_replay, "models": list(names),
                                        "rebuilt": changed}})


class SingleLearner(_Preprocessed):
    """One roster learner behind the same preprocessing and a hold-out-fitted mask.

    With ``frozen=True`` the learner never updates after the hold-out batch.
    """

    def __init__(self, cfg: PipelineConfig, n_classes: int, n_features: int, name: str,
                 frozen: bool = False):
        super().__init__(cfg, n_classes, n_features)
        self.name = name
        self.frozen = frozen
        self.model = None

    def fit_holdout(self, train):
        Xs = self._fit_preprocessing(train)
        self.model = build_learner(self.name, self.n_classes, len(self.mask.selected), self.cfg,
                                   self._seed())
        for z, xs in zip(train, Xs):
            learn_z, extra = self.balancer.add(z)
            if learn_z:
                self.model.learn_one(xs[self._sel], z.label)
            for d in extra:
                self.model.learn_one(self.scaler.transform(d.x)[self._sel], d.label)
        self.n_seen = len(train)
        return self

    def step(self, z: LabeledSample, timer=NULL_TIMER) -> ClassProbabilities:
        with timer.section("normalization"):
            xs = self.scaler.transform(z.x)
        with timer.section("feature_selection"):
            xm = xs[self._sel]
        with timer.section("base_learning"):
            out = ClassProbabilities.from_array(self.model.predict_proba(xm))
        self.n_seen += 1
        if self.frozen:
            return out
        _, items = self._learnable(z, timer)
        with timer.section("base_learning"):
            for x, y in items:
                self.model.learn_one(x[self._sel], y)
        return out


def make_pipeline(method: str, cfg: PipelineConfig, n_classes: int, n_features: int):
    if method == "msana":
        return MSANA(cfg, n_classes, n_features)
    if method == "ht-frozen":
        return SingleLearner(cfg, n_classes, n_features, "ht", frozen=True)
    if method in OUT_OF_SCOPE:
        raise ValueError(f"{method}: not implemented (out of scope baseline)")
    if method not in ROSTER:
        raise ValueError(f"unknown method {method!r}; choose from "
                         f"{('msana', 'ht-frozen') + ROSTER}")
    return SingleLearner(cfg, n_classes, n_features, method)


def _rounded(d):
    return {k: round(float(v), 10) for k, v in d.items()}
