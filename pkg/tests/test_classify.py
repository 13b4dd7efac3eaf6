import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hashspread.classify import evaluation as ev
from hashspread.classify import models
from hashspread.classify.evaluation import HashtagClass as HC


def blobs(rng, n_per=30, d=4, sep=5.0, k=4):
    centers = np.eye(k, d) * sep
    X = np.vstack([rng.normal(c, 1.0, (n_per, d)) for c in centers])
    y = np.repeat(np.arange(k), n_per)
    return X, y


def test_standardize_examples():
    t, Z = ev.standardize(np.array([[1.0, 7.0], [3.0, 7.0]]))
    assert Z[:, 0].tolist() == [-1.0, 1.0]
    assert Z[:, 1].tolist() == [7.0, 7.0]
    X = np.random.default_rng(0).normal(3, 2, (50, 5))
    _, Z = ev.standardize(X)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-12)
    np.testing.assert_allclose(Z.std(axis=0), 1.0)
    with pytest.raises(ValueError):
        ev.standardize(np.zeros((0, 3)))


def test_imputer_uses_column_medians():
    X = np.array([[1.0, np.nan], [3.0, 4.0], [np.nan, 8.0], [10.0, 5.0]])
    imp = ev.MedianImputer.fit(X)
    assert imp.medians.tolist() == [3.0, 5.0]
    assert imp.apply(X).tolist() == [[1, 5], [3, 4], [3, 8], [10, 5]]


def test_zeror():
    m = models.ZeroR().fit(np.zeros((4, 2)), [0, 0, 0, 1])
    assert m.predict(np.ones((3, 2))).tolist() == [0, 0, 0]
    assert m.predict(np.zeros((0, 2))).tolist() == []


@pytest.mark.parametrize("name", sorted(models.MODELS))
def test_errors(name):
    m = models.make_model(name)
    with pytest.raises(models.NotFitted):
        m.predict(np.zeros((1, 2)))
    X, y = blobs(np.random.default_rng(1), n_per=6)
    with pytest.raises(ValueError):
        models.make_model(name).fit(np.vstack([X[:-1], [[np.nan] * 4]]), y)
    m.fit(X, y)
    with pytest.raises(ValueError):
        m.predict(np.zeros((2, 3)))
    assert m.predict(np.zeros((0, 4))).shape == (0,)
    with pytest.raises(ValueError):
        models.make_model("svm")


@pytest.mark.parametrize("name", ["lda", "naive_bayes"])
def test_generative_models_need_every_class(name):
    X, y = blobs(np.random.default_rng(2), n_per=5)
    keep = y != 3
    with pytest.raises(ValueError):
        models.make_model(name).fit(X[keep], y[keep])


def test_lda_blobs_perfect():
    X, y = blobs(np.random.default_rng(3))
    m = models.LDA().fit(X, y)
    assert (m.predict(X) == y).all()


@pytest.mark.parametrize("name", sorted(set(models.MODELS) - {"zeror"}))
def test_every_model_fits_blobs(name):
    X, y = blobs(np.random.default_rng(4))
    acc = (models.make_model(name).fit(X, y).predict(X) == y).mean()
    assert acc >= 0.95


def test_knn_leave_one_in_beats_majority():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 4, 60)
    acc = (models.KNN().fit(X, y).predict(X) == y).mean()
    assert acc >= np.bincount(y).max() / len(y)


def test_knn_tie_rules():
    X = np.array([[1.0], [-1.0], [2.0], [-2.0]])
    # 2-2 vote tie: the class of the nearest neighbour wins, equal distances keep the smaller index
    assert models.KNN(k=4).fit(X, [1, 2, 1, 2]).predict([[0.0]]).tolist() == [1]
    assert models.KNN(k=4).fit(X, [2, 1, 2, 1]).predict([[0.0]]).tolist() == [2]
    assert models.KNN(k=2).fit(np.array([[1.0], [-1.0]]), [3, 2]).predict([[0.0]]).tolist() == [3]


def test_lda_matches_sklearn():
    skl = pytest.importorskip("sklearn.discriminant_analysis")
    rng = np.random.default_rng(6)
    X, y = blobs(rng, sep=1.5)
    mine = models.LDA().fit(X, y).predict(X)
    ref = skl.LinearDiscriminantAnalysis(solver="lsqr").fit(X, y).predict(X)
    assert (mine == ref).mean() >= 0.99


def test_naive_bayes_matches_sklearn():
    nb = pytest.importorskip("sklearn.naive_bayes")
    rng = np.random.default_rng(7)
    X, y = blobs(rng, sep=1.5)
    mine = models.GaussianNB().fit(X, y)
    ref = nb.GaussianNB(var_smoothing=0.0).fit(X, y)
    np.testing.assert_allclose(mine.mean, ref.theta_, rtol=1e-12)
    assert (mine.predict(X) == ref.predict(X)).all()


def test_logistic_matches_sklearn():
    lm = pytest.importorskip("sklearn.linear_model")
    rng = np.random.default_rng(8)
    X, y = blobs(rng, sep=1.0, n_per=40)
    mine = models.LogisticRegression().fit(X, y)
    assert mine.converged
    # sklearn's C is the inverse of our per-sum L2 strength; it also leaves intercepts unpenalised
    ref = lm.LogisticRegression(C=1.0, tol=1e-12, max_iter=10_000).fit(X, y)
    np.testing.assert_allclose(mine.theta[:-1], ref.coef_.T, atol=1e-4)
    assert (mine.predict(X) == ref.predict(X)).all()


def test_logistic_gradient_finite_differences():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(20, 3))
    Y = np.eye(4)[rng.integers(0, 4, 20)]
    worst = 0.0
    for _ in range(100):
        theta = rng.normal(size=(4, 4))
        _, g = models.LogisticRegression.objective(theta, X, Y, 1.0)
        num = np.zeros_like(theta)
        h = 1e-6
        for idx in np.ndindex(theta.shape):
            e = np.zeros_like(theta)
            e[idx] = h
            num[idx] = (models.LogisticRegression.objective(theta + e, X, Y, 1.0)[0]
                        - models.LogisticRegression.objective(theta - e, X, Y, 1.0)[0]) / (2 * h)
        worst = max(worst, np.linalg.norm(num - g) / np.linalg.norm(g))
    assert worst < 1e-5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_logistic_always_converges(seed):
    rng = np.random.default_rng(seed)
    X, y = blobs(rng, n_per=int(rng.integers(5, 40)), sep=float(rng.uniform(0, 8)), d=6)
    X[:, 0] = np.round(X[:, 0])  # ties and a coarse column
    Xs = ev.standardize(X)[1]
    m = models.LogisticRegression().fit(Xs, y)
    assert m.converged and m.n_iter < 20_000
    _, g = models.LogisticRegression.objective(m.theta, Xs, np.eye(4)[y], 1.0)
    assert np.linalg.norm(g) < 1e-6


def test_logistic_subset_of_classes():
    X, y = blobs(np.random.default_rng(10), n_per=10)
    keep = y < 2
    m = models.LogisticRegression().fit(X[keep], y[keep])
    assert set(m.predict(X).tolist()) <= {0, 1}


def test_cart_respects_limits():
    X, y = blobs(np.random.default_rng(11), sep=0.5)
    m = models.CART(max_depth=2, min_leaf=3).fit(X, y)
    leaves = np.flatnonzero(m.left < 0)
    assert len(m.value) <= 7 and len(leaves) <= 4
    m1 = models.CART(max_depth=0).fit(X, y)
    assert len(m1.value) == 1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=10, max_size=120), st.integers(2, 10), st.integers(0, 1000))
def test_folds_stratified(labels, k, seed):
    y = np.array(labels)
    folds = ev.stratified_folds(y, k, np.random.default_rng(seed))
    assert set(folds.tolist()) <= set(range(k))
    for c in np.unique(y):
        per = np.bincount(folds[y == c], minlength=k)
        assert per.max() - per.min() <= 1
    sizes = np.bincount(folds, minlength=k)
    assert sizes.max() - sizes.min() <= 1


def test_evaluate_hand_count():
    r = ev.evaluate([HC.LocalEvent, HC.LocalPhenomenon, HC.LocalPhenomenon, HC.LocalPhenomenon],
                    [HC.LocalEvent, HC.LocalEvent, HC.LocalPhenomenon, HC.LocalPhenomenon])
    assert r.precision_mean[1] == pytest.approx(2 / 3)
    assert r.recall_mean[0] == 0.5
    assert r.precision_mean[0] == 1.0 and r.recall_mean[1] == 1.0
    cm = np.array(r.confusion[0])
    assert cm.sum(axis=1).tolist() == [2, 2, 0, 0]
    assert set(r.no_predictions) == {"event", "other_meme"}


def test_evaluate_perfect_and_errors():
    y = [0, 1, 2, 3, 3]
    r = ev.evaluate(y, y)
    assert r.precision_mean == r.recall_mean == r.f1_mean == [1.0] * 4 and r.accuracy_mean == 1.0
    with pytest.raises(ValueError):
        ev.evaluate([0], [0, 1])
    with pytest.raises(ValueError):
        ev.evaluate([], [])


def test_no_prediction_flag():
    r = ev.evaluate([0, 0, 0, 1], [0, 2, 3, 1])
    assert r.precision_mean[2] == 0.0 and "event" in r.no_predictions


def test_cross_validate_separable():
    X, y = blobs(np.random.default_rng(12), sep=10.0, n_per=20)
    r = ev.cross_validate("lda", X, y, k=5, repeats=2, seed=1)
    assert r.f1_mean == [1.0] * 4
    assert len(r.confusion) == 2
    for cm in r.confusion:
        assert np.array(cm).sum(axis=1).tolist() == [20] * 4


def test_cross_validate_errors_and_warning(caplog):
    X, y = blobs(np.random.default_rng(13), n_per=2)
    with pytest.raises(ValueError):
        ev.cross_validate("zeror", X[:5], y[:5], k=10)
    X, y = blobs(np.random.default_rng(13), n_per=8)
    with caplog.at_level(logging.WARNING):
        ev.cross_validate("zeror", X, y, k=10, repeats=1)
    assert "fewer than k" in caplog.text


def test_shuffled_labels_near_chance():
    rng = np.random.default_rng(14)
    X, y = blobs(rng, sep=4.0, n_per=50)
    accs = []
    for s in range(100):
        ys = rng.permutation(y)
        accs.append(ev.cross_validate("lda", X, ys, k=10, repeats=1, seed=s).accuracy_mean)
    majority = np.bincount(y).max() / len(y)
    assert abs(np.mean(accs) - majority) <= 0.05


def test_leakage_bit_for_bit():
    rng = np.random.default_rng(15)
    X, y = blobs(rng, n_per=15)
    X[rng.random(X.shape) < 0.05] = np.nan
    for name in models.MODELS:
        base = list(ev.iter_fold_fits(name, X, y, k=5, repeats=1, seed=3))
        for ff in base:
            Xp = X.copy()
            Xp[ff.test_idx] = rng.normal(100, 50, (len(ff.test_idx), X.shape[1]))
            again = next(f for f in ev.iter_fold_fits(name, Xp, y, k=5, repeats=1, seed=3)
                         if f.fold == ff.fold)
            pa, pb = ff.pipeline.params(), again.pipeline.params()
            assert pa.keys() == pb.keys()
            for key in pa:
                assert np.array_equal(pa[key], pb[key], equal_nan=True), (name, key)


def test_cv_deterministic_json():
    X, y = blobs(np.random.default_rng(16), sep=1.0, n_per=15)
    a = ev.cross_validate("cart", X, y, k=5, repeats=3, seed=42).to_json()
    b = ev.cross_validate("cart", X, y, k=5, repeats=3, seed=42).to_json()
    assert a == b
    c = ev.cross_validate("cart", X, y, k=5, repeats=3, seed=43).to_json()
    assert a != c


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 1000))
def test_knn_scale_invariance_after_standardizing(seed, c):
    rng = np.random.default_rng(seed)
    X, y = blobs(rng, sep=2.0, n_per=10)
    T = rng.normal(size=(15, 4))
    a = ev.fit_pipeline("knn", X, y).predict(T)
    b = ev.fit_pipeline("knn", X * c, y).predict(T * c)
    assert np.array_equal(a, b)


def test_ablation_and_drop_group():
    from hashspread.features import FEATURE_NAMES
    X = np.random.default_rng(17).normal(size=(40, 14))
    Xd, names = ev.drop_group(X, "spatial")
    assert Xd.shape == (40, 11) and "focus" not in names
    with pytest.raises(ValueError):
        ev.drop_group(X, "nope")
    y = np.repeat(np.arange(4), 10)
    X[:, FEATURE_NAMES.index("focus")] += y * 10
    out = ev.ablation("lda", X, y, groups=("spatial", "text"), k=5, repeats=1)
    assert out["full"] > 0.9 and out["spatial"]["delta"] < -0.3
    assert abs(out["text"]["delta"]) < 0.2


def test_labels_roundtrip(tmp_path):
    ls = ev.LabeledSet(["a", "b"], [HC.Event, HC.OtherMeme])
    ev.write_labels(ls, tmp_path / "l.csv")
    (tmp_path / "ex.txt").write_text("b\n")
    back = ev.read_labels(tmp_path / "l.csv", tmp_path / "ex.txt")
    assert back.hashtags == ["a"] and back.labels == [HC.Event] and back.excluded == ["b"]
    assert back.y().tolist() == [2]
    with pytest.raises(ValueError):
        ev.LabeledSet(["a", "a"], [HC.Event, HC.Event])
    with pytest.raises(KeyError):
        ls.matrix(["a"], np.zeros((1, 14)))
