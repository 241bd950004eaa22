import copy
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from msana.learners import (
    EFDT,
    KNNADWIN,
    SAMKNN,
    AdaptiveRandomForest,
    HoeffdingTree,
    PassiveAggressive,
)
from msana.learners import snapshot
from msana.learners.linear import pa_step
from msana.learners.tree import hoeffding_bound
from msana.stream import generate_abrupt_drift_stream


def separable(n=2000, seed=0):
    r = np.random.default_rng(seed)
    X = r.random((n, 1))
    return X, (X[:, 0] > 0.4).astype(int)


def plane(n, seed, concept):
    r = np.random.default_rng(seed)
    X = r.random((n, 3))
    w = {"A": (1.0, 0.5, 0.0), "B": (0.0, 0.5, 1.0)}[concept]
    return X, (X @ np.array(w) > 0.75).astype(int)


ALL = [
    lambda: HoeffdingTree(2, 3),
    lambda: EFDT(2, 3),
    lambda: KNNADWIN(2, 3),
    lambda: SAMKNN(2, 3),
    lambda: PassiveAggressive(2, 3),
    lambda: AdaptiveRandomForest(2, 3, n_models=3, detector="adwin"),
    lambda: AdaptiveRandomForest(2, 3, n_models=3, detector="eddm"),
]


# -- Hoeffding bound -----------------------------------------------------------

def test_hoeffding_bound_value():
    assert hoeffding_bound(1.0, 0.05, 1000) == pytest.approx(math.sqrt(math.log(20) / 2000))
    assert round(hoeffding_bound(1.0, 0.05, 1000), 5) == 0.03870


def test_hoeffding_bound_quarter_n_halves():
    assert hoeffding_bound(1, 1e-3, 400) == pytest.approx(2 * hoeffding_bound(1, 1e-3, 1600))


@pytest.mark.parametrize("args", [(0, 0.1, 10), (1, 1.0, 10), (1, 0.0, 10), (1, 0.1, 0.5)])
def test_hoeffding_bound_domain(args):
    with pytest.raises(ValueError):
        hoeffding_bound(*args)


# -- contract shared by every learner ----------------------------------------

@pytest.mark.parametrize("make", ALL)
def test_untrained_is_uniform(make):
    np.testing.assert_allclose(make().predict_proba(np.full(3, 0.3)), [0.5, 0.5])


@pytest.mark.parametrize("make", ALL)
def test_probabilities_valid_and_predict_is_pure(make):
    X, y = plane(600, 1, "A")
    m = make()
    for x, t in zip(X, y):
        before = copy.deepcopy(m.__dict__.get("samples_seen"))
        p = m.predict_proba(x)
        assert abs(p.sum() - 1) < 1e-6 and np.all((p >= 0) & (p <= 1))
        assert m.__dict__.get("samples_seen") == before
        m.learn_one(x, t)


@pytest.mark.parametrize("make", ALL)
def test_replay_determinism(make):
    X, y = plane(700, 2, "A")
    a, b = make(), make()
    for x, t in zip(X, y):
        a.learn_one(x, t)
        b.learn_one(x, t)
    probes = np.random.default_rng(9).random((50, 3))
    for q in probes:
        np.testing.assert_array_equal(a.predict_proba(q), b.predict_proba(q))


@pytest.mark.parametrize("make", ALL)
def test_reset_and_clone(make):
    X, y = plane(400, 3, "A")
    m = make()
    for x, t in zip(X, y):
        m.learn_one(x, t)
    fresh = m.clone()
    np.testing.assert_allclose(fresh.predict_proba(X[0]), [0.5, 0.5])
    m.reset()
    np.testing.assert_allclose(m.predict_proba(X[0]), [0.5, 0.5])


@pytest.mark.parametrize("make", ALL)
def test_snapshot_round_trip(make, tmp_path):
    X, y = plane(500, 4, "A")
    m = make()
    for x, t in zip(X[:300], y[:300]):
        m.learn_one(x, t)
    path = tmp_path / "m.snap"
    snapshot.save(m, path)
    restored = snapshot.load(path, type(m).__name__)
    for x, t in zip(X[300:], y[300:]):
        np.testing.assert_array_equal(m.predict_proba(x), restored.predict_proba(x))
        m.learn_one(x, t)
        restored.learn_one(x, t)


def test_snapshot_rejects_garbage(tmp_path):
    with pytest.raises(snapshot.SnapshotError):
        snapshot.loads(b"nope")
    blob = snapshot.dumps(PassiveAggressive())
    with pytest.raises(snapshot.SnapshotError):
        snapshot.loads(blob, "EFDT")
    with pytest.raises(snapshot.SnapshotError):
        snapshot.loads(b"XXXX" + blob[4:])


# -- trees ---------------------------------------------------------------------

def test_ht_splits_and_fits_separable_stream():
    X, y = separable()
    ht = HoeffdingTree(2, 1)
    for x, t in zip(X, y):
        ht.learn_one(x, t)
    assert ht.n_splits_installed >= 1
    acc = np.mean([ht.predict(x) == t for x, t in zip(X, y)])
    assert acc >= 0.95


def test_ht_degenerate_class():
    ht = HoeffdingTree(2, 2)
    for x in np.random.default_rng(0).random((500, 2)):
        ht.learn_one(x, 1)
    assert ht.predict_proba(np.array([0.5, 0.5]))[1] == 1.0


def test_split_log_satisfies_bound():
    X, y = plane(4000, 5, "A")
    for tree in (HoeffdingTree(2, 3), EFDT(2, 3)):
        for x, t in zip(X, y):
            tree.learn_one(x, t)
        assert tree.split_log
        for rec in tree.split_log:
            assert rec["eps"] == hoeffding_bound(tree.R, tree.delta, rec["n"])
            assert rec["best"] - rec["second"] > rec["eps"] or rec["eps"] < tree.tau


def test_efdt_splits_no_later_than_ht():
    for seed in range(5):
        X, y = separable(seed=seed)
        ht, ef = HoeffdingTree(2, 1), EFDT(2, 1)
        for x, t in zip(X, y):
            ht.learn_one(x, t)
            ef.learn_one(x, t)
        assert ef.split_log[0]["at"] <= ht.split_log[0]["at"]


def test_efdt_replaces_root_when_relevance_swaps():
    r = np.random.default_rng(0)
    X1 = r.random((3000, 2))
    X2 = r.random((6000, 2))
    ef = EFDT(2, 2)
    for x in X1:
        ef.learn_one(x, int(x[0] > 0.5))
    assert ef.root_feature == 0
    for x in X2:
        ef.learn_one(x, int(x[1] > 0.5))
    assert ef.root_feature == 1
    assert ef.n_replacements >= 1


# -- kNN family ----------------------------------------------------------------

def test_knn_nearest_neighbour():
    k = KNNADWIN(2, 1, k=1)
    k.learn_one(np.array([0.0]), 0)
    k.learn_one(np.array([1.0]), 1)
    np.testing.assert_array_equal(k.predict_proba(np.array([0.1])), [1.0, 0.0])


def test_knn_vote_fractions():
    k = KNNADWIN(2, 1, k=3, adwin_delta=None)
    for v, t in [(0.0, 0), (0.1, 0), (0.2, 1), (5.0, 1)]:
        k.learn_one(np.array([v]), t)
    np.testing.assert_allclose(k.predict_proba(np.array([0.05])), [2 / 3, 1 / 3])


def test_knn_window_bounded():
    k = KNNADWIN(2, 2, window=50)
    for x in np.random.default_rng(0).random((300, 2)):
        k.learn_one(x, int(x[0] > 0.5))
    assert len(k.window) == 50


def test_knn_truncates_after_label_flip():
    X, y = plane(3000, 6, "A")
    k = KNNADWIN(2, 3)
    for i, (x, t) in enumerate(zip(X, y)):
        k.learn_one(x, t if i < 1500 else 1 - t)
    assert k.truncations and all(n < 500 for _, n in k.truncations)


def test_samknn_stationary_prefers_union_and_matches_knn():
    X, y = plane(3000, 0, "A")
    sam, knn = SAMKNN(2, 3), KNNADWIN(2, 3)
    hs = hk = 0
    for x, t in zip(X, y):
        hs += sam.predict(x) == t
        hk += knn.predict(x) == t
        sam.learn_one(x, t)
        knn.learn_one(x, t)
    assert hs / 3000 >= hk / 3000 - 0.01
    assert sam.n_compressions >= 1 and len(sam.ltm_y) <= sam.ltm_max


def test_samknn_switches_to_stm_after_flip():
    X, y = plane(3000, 0, "A")
    sam = SAMKNN(2, 3)
    for i, (x, t) in enumerate(zip(X, y)):
        sam.learn_one(x, t if i < 1500 else 1 - t)
    assert any(1500 <= at <= 2000 and new == "stm" for at, _, new in sam.switches)


def test_samknn_stm_is_recent_contiguous():
    sam = SAMKNN(2, 1, stm_max=20)
    for i in range(100):
        sam.learn_one(np.array([float(i)]), i % 2)
    X, _, n = sam.stm.compact()
    assert sorted(X[:n, 0]) == [float(i) for i in range(80, 100)]


# -- passive-aggressive --------------------------------------------------------

def test_pa_step_example():
    w, tau, skipped = pa_step(np.zeros(2), np.array([1.0, 0.0]), 1.0, 1.0)
    np.testing.assert_array_equal(w, [1.0, 0.0])
    assert tau == 1.0 and not skipped


def test_pa_passive_when_margin_met():
    w0 = np.array([2.0, 0.0])
    w, tau, _ = pa_step(w0, np.array([1.0, 0.0]), 1.0, 1.0)
    np.testing.assert_array_equal(w, w0)
    assert tau == 0.0


def test_pa_zero_input_skipped():
    pa = PassiveAggressive(2, 2, fit_intercept=False)
    pa.learn_one(np.zeros(2), 1)
    assert pa.skipped_updates == 1
    np.testing.assert_array_equal(pa.weights, 0.0)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.booleans()), min_size=1,
                max_size=40), st.floats(0.01, 5))
def test_pa_step_never_exceeds_c(rows, C):
    w = np.zeros(2)
    for a, b, pos in rows:
        w, tau, _ = pa_step(w, np.array([a, b]), 1.0 if pos else -1.0, C)
        assert 0.0 <= tau <= C


def test_pa_multiclass_one_vs_rest():
    pa = PassiveAggressive(3, 2)
    r = np.random.default_rng(0)
    for _ in range(500):
        c = int(r.integers(3))
        x = np.eye(3)[c][:2] * 2 + r.normal(0, 0.1, 2)
        pa.learn_one(x, c)
    assert pa.predict(np.array([2.0, 0.0])) == 0
    assert pa.predict(np.array([0.0, 2.0])) == 1
    assert pa.W.shape == (3, 3)


# -- adaptive random forest ----------------------------------------------------

def test_arf_single_tree_matches_hoeffding_tree():
    X, y = plane(1500, 7, "A")
    arf = AdaptiveRandomForest(2, 3, n_models=1, max_features="all", seed=3)
    twin = copy.deepcopy(arf.members[0].tree)
    weights = []
    tree = arf.members[0].tree
    original = tree.learn_one

    def record(x, t, w=1.0):
        weights.append(w)
        return original(x, t, w)

    tree.learn_one = record
    for x, t in zip(X, y):
        before = len(weights)
        arf.learn_one(x, t)
        if len(weights) > before:
            twin.learn_one(x, t, weights[-1])
    assert arf.n_replacements == 0
    for q in np.random.default_rng(1).random((100, 3)):
        np.testing.assert_allclose(arf.predict_proba(q), twin.predict_proba(q), atol=1e-9)


@pytest.mark.parametrize("detector", ["adwin", "eddm"])
def test_arf_recovers_after_abrupt_drift(detector):
    s = generate_abrupt_drift_stream(1, 5000, 5000, 0.0)
    arf = AdaptiveRandomForest(2, 3, detector=detector, seed=1)
    hits = []
    for z in s:
        hits.append(arf.predict(z.x) == z.label)
        arf.learn_one(z.x, z.label)
    pre = np.mean(hits[4000:5000])
    post = np.mean(hits[6000:7000])
    assert arf.n_replacements >= 1
    assert post >= 0.9 * pre


def test_arf_rejects_unknown_detector():
    with pytest.raises(ValueError):
        AdaptiveRandomForest(detector="ddm")
