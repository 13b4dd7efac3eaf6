import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import index_from_occurrences, make_locations, random_mini_corpus
from hashspread import features, spatial, temporal
from hashspread.corpus import build_index_columns

COORDS = {"A": (50.0, 6.0), "B": (52.0, 8.0), "C": (48.0, 11.0)}


def posts_index(texts, comments=None):
    n = len(texts)
    return build_index_columns([f"p{i}" for i in range(n)], [f"u{i % 2}" for i in range(n)], ["A"] * n,
                               list(range(n)), texts, make_locations(COORDS), comment_count=comments)


def test_text_features_single_post():
    idx = posts_index(["just #a!"], comments=[0])
    assert features.hashtag_text_features(idx, "a") == (1.0, 0.0, 1.0, 0.0)


def test_text_features_two_posts():
    idx = posts_index(["#a #b", "#a?"], comments=[4, 1])
    ah, ac, ex, qu = features.hashtag_text_features(idx, "a")
    assert (ah, ac, ex, qu) == (1.5, 2.5, 0.0, 0.5)
    assert features.hashtag_text_features(idx, "b") == (2.0, 4.0, 0.0, 0.0)


def test_repeated_tag_counts_post_once():
    idx = posts_index(["#a #a #a", "#a"])
    assert features.hashtag_text_features(idx, "a")[0] == 2.0
    assert features.user_diversity(idx, "a") == 2 / 4


def test_user_diversity():
    occs = [("h", "A", i, "same") for i in range(5)]
    assert features.user_diversity(index_from_occurrences(occs, COORDS), "h") == 0.2
    occs = [("h", "A", i, f"u{i}") for i in range(5)]
    assert features.user_diversity(index_from_occurrences(occs, COORDS), "h") == 1.0


def test_threshold():
    occs = [("h", "A", i) for i in range(29)]
    idx = index_from_occurrences(occs, COORDS)
    with pytest.raises(features.BelowThreshold):
        features.assemble(idx, "h")
    assert features.assemble(idx, "h", min_occurrences=29).hashtag == "h"
    names, X = features.feature_table(idx)
    assert names == [] and X.shape == (0, 14)


def test_assemble_composes_module_operations():
    rng = np.random.default_rng(4)
    occs = [("h", str(rng.choice(list(COORDS))), int(rng.integers(0, 40 * 86400)), f"u{int(rng.integers(9))}",
             str(rng.choice(["", "!", "?", " #x"]))) for _ in range(60)]
    idx = index_from_occurrences(occs, COORDS)
    fv = features.assemble(idx, "h")
    assert fv.focus == spatial.focus(idx, "h")[1]
    assert fv.entropy == spatial.entropy(idx, "h")
    assert fv.spread_km == spatial.spread(idx, "h")
    assert fv.local_variation == temporal.local_variation(idx, "h")
    assert fv.temporal_focus == temporal.temporal_focus(idx, "h")[1]
    assert fv.temporal_entropy == temporal.temporal_entropy(idx, "h")
    assert fv.temporal_spread_days == temporal.temporal_spread(idx, "h")
    assert (fv.peak_increase, fv.peak_decline) == temporal.peak_shape(idx, "h")
    assert fv.values().shape == (14,)


def test_undefined_lv_is_nan():
    idx = index_from_occurrences([("h", "A", 0), ("h", "A", 5)], COORDS)
    assert math.isnan(features.assemble(idx, "h", min_occurrences=1).local_variation)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_table_matches_assemble(seed):
    rng = np.random.default_rng(seed)
    occs, coords = random_mini_corpus(rng, max_per_tag=40)
    occs = [o + (str(rng.choice(["", "!", "?", " #extra", "!?"])),) for o in occs]
    idx = index_from_occurrences(occs, coords)
    names, X = features.feature_table(idx, min_occurrences=5)
    assert names == [h for h in idx.tags if idx.counts[idx.code(h)] >= 5]
    for name, row in zip(names, X):
        want = features.assemble(idx, name, min_occurrences=5).values()
        np.testing.assert_allclose(row, want, rtol=1e-9, atol=1e-12, equal_nan=True)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ranges(seed):
    occs, coords = random_mini_corpus(np.random.default_rng(seed))
    idx = index_from_occurrences(occs, coords)
    names, X = features.feature_table(idx, min_occurrences=1)
    col = {f: X[:, i] for i, f in enumerate(features.FEATURE_NAMES)}
    for f in ("focus", "temporal_focus", "exclamation_fraction", "question_fraction", "user_diversity"):
        assert np.all((col[f] >= 0) & (col[f] <= 1))
    assert np.all((col["focus"] > 0) & (col["user_diversity"] > 0))
    for f in ("entropy", "spread_km", "temporal_entropy", "temporal_spread_days", "peak_increase",
              "peak_decline"):
        assert np.all(col[f] >= 0)
    assert np.all(col["avg_hashtags_per_post"] >= 1)


def test_removing_comments_changes_one_column():
    texts = [f"#h{'!' if i % 3 == 0 else ''}" for i in range(40)]
    a = posts_index(texts, comments=list(range(40)))
    b = posts_index(texts)
    _, Xa = features.feature_table(a)
    _, Xb = features.feature_table(b)
    j = features.FEATURE_NAMES.index("avg_comments_per_post")
    assert Xa[0, j] == 19.5 and Xb[0, j] == 0.0
    mask = np.arange(14) != j
    np.testing.assert_array_equal(Xa[:, mask], Xb[:, mask])


def test_csv_roundtrip(tmp_path):
    occs = [("h", "A", 0), ("h", "B", 3)] + [("g", "C", i * 100) for i in range(4)]
    idx = index_from_occurrences(occs, COORDS)
    names, X = features.feature_table(idx, min_occurrences=1)
    features.write_features_csv(names, X, tmp_path / "f.csv")
    n2, X2 = features.read_features_csv(tmp_path / "f.csv")
    assert n2 == names
    np.testing.assert_array_equal(X2, X)


def test_read_rejects_missing_columns(tmp_path):
    (tmp_path / "bad.csv").write_text("hashtag,focus\nx,1\n")
    with pytest.raises(ValueError):
        features.read_features_csv(tmp_path / "bad.csv")


def test_spread_grid():
    occs = [("near", "A", i) for i in range(30)] + [("far", loc, i * 86400) for i in range(30) for loc in "ABC"]
    idx = index_from_occurrences(occs, COORDS)
    points, counts, xe, ye = features.spread_grid(idx, bins=10)
    assert points.shape == (2, 2) and counts.sum() == 2
    assert counts[0, 0] == 1 and counts[-1, -1] == 1
    assert xe[0] == 0 and ye[0] == 0
