import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import index_from_occurrences, make_locations, random_mini_corpus
from hashspread import spatial
from hashspread.corpus import LocationTable, build_index_columns, partition_by_occurrences
from hashspread.geo import haversine_km

COORDS = {"A": (50.0, 6.0), "B": (52.0, 8.0), "C": (48.0, 11.0), "D": (53.5, 10.0)}


def idx_of(counts: dict, coords=COORDS):
    occs = [("h", loc, i) for loc, n in counts.items() for i in range(n)]
    return index_from_occurrences(occs, coords)


def test_probabilities():
    assert spatial.location_probabilities(idx_of({"A": 3, "B": 1}), "h") == {"A": 0.75, "B": 0.25}
    assert spatial.location_probabilities(idx_of({"C": 4}), "h") == {"C": 1.0}


def test_unknown_hashtag():
    with pytest.raises(KeyError):
        spatial.focus(idx_of({"A": 1}), "nope")


def test_focus():
    assert spatial.focus(idx_of({"A": 3, "B": 1}), "h") == ("A", 0.75)
    assert spatial.focus(idx_of({"B": 2, "A": 2}), "h") == ("A", 0.5)


def test_entropy_values():
    assert spatial.entropy(idx_of({"A": 5}), "h") == 0.0
    assert spatial.entropy(idx_of({"A": 2, "B": 2, "C": 2, "D": 2}), "h") == 2.0
    hand = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    assert spatial.entropy(idx_of({"A": 3, "B": 1}), "h") == pytest.approx(0.811278, abs=1e-6)
    assert spatial.entropy(idx_of({"A": 3, "B": 1}), "h") == pytest.approx(hand, rel=1e-12)


def test_midpoint():
    assert spatial.geographic_midpoint([50.0], [6.0]) == (50.0, 6.0)
    assert spatial.geographic_midpoint([50, 52], [6, 8]) == (51.0, 7.0)
    assert spatial.geographic_midpoint([50, 50, 50, 52], [6, 6, 6, 8]) == (50.5, 6.5)
    assert spatial.geographic_midpoint([50, 52], [6, 8], weights=[3, 1]) == (50.5, 6.5)
    idx = idx_of({"A": 3, "B": 1})
    assert spatial.occurrence_midpoint(idx, "h") == (50.5, 6.5)


def test_spread_single_city():
    assert spatial.spread(idx_of({"B": 7}), "h") == 0.0


def test_spread_two_points_100km():
    # due north: 100 km of latitude on the mean sphere
    dlat = math.degrees(100.0 / 6371.0088)
    coords = {"S": (50.0, 8.0), "N": (50.0 + dlat, 8.0)}
    assert oracles.hav(50.0, 8.0, 50.0 + dlat, 8.0) == pytest.approx(100.0, abs=1e-9)
    s = spatial.spread(idx_of({"S": 1, "N": 1}, coords), "h")
    assert s == pytest.approx(50.0, abs=0.5)


def test_spread_two_points_east_west():
    # same latitude: the lat/lon mean sits on the parallel, a hair off the great-circle midpoint
    coords = {"W": (51.0, 7.0), "E": (51.0, 8.4265)}
    d = oracles.hav(51.0, 7.0, 51.0, 8.4265)
    s = spatial.spread(idx_of({"W": 1, "E": 1}, coords), "h")
    assert s == pytest.approx(d / 2, abs=0.5)


def test_missing_coordinates_named():
    nan = float("nan")
    locs = LocationTable(["A", "X"], ["A", "X"], [50.0, nan], [6.0, nan])
    idx = build_index_columns(["p1", "p2"], ["u", "u"], ["A", "X"], [0, 1], ["#h", "#h"], locs)
    with pytest.raises(ValueError, match="'X'"):
        spatial.spread(idx, "h")


def test_haversine_symmetry():
    assert haversine_km(50, 6, 52, 8) == pytest.approx(haversine_km(52, 8, 50, 6), rel=1e-15)
    assert haversine_km(10, 20, 10, 20) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_against_oracle(seed):
    occs, coords = random_mini_corpus(np.random.default_rng(seed))
    idx = index_from_occurrences(occs, coords)
    table = spatial.spatial_table(idx)
    for h, occ in oracles.by_tag(occs).items():
        c = idx.code(h)
        loc, f = oracles.focus(occ)
        assert spatial.focus(idx, h) == (loc, pytest.approx(f, rel=1e-12))
        assert idx.locations.ids[table["focus_loc"][c]] == loc
        assert table["focus"][c] == pytest.approx(f, rel=1e-12)
        e = oracles.entropy(occ)
        assert spatial.entropy(idx, h) == pytest.approx(e, rel=1e-9, abs=1e-12)
        assert table["entropy"][c] == pytest.approx(e, rel=1e-9, abs=1e-12)
        s = oracles.spread(occ, coords)
        assert spatial.spread(idx, h) == pytest.approx(s, rel=1e-9, abs=1e-9)
        assert table["spread_km"][c] == pytest.approx(s, rel=1e-9, abs=1e-9)


def test_large_random_spread_vs_double_loop():
    rng = np.random.default_rng(11)
    coords = {f"L{i}": (float(rng.uniform(47, 55)), float(rng.uniform(6, 15))) for i in range(20)}
    occs = [("big", f"L{int(rng.integers(0, 20))}", i) for i in range(500)]
    idx = index_from_occurrences(occs, coords)
    assert spatial.spread(idx, "big") == pytest.approx(oracles.spread(occs, coords), rel=1e-9)
    probs = spatial.location_probabilities(idx, "big")
    assert math.isclose(sum(probs.values()), 1.0, abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_scale_and_permutation_invariance(seed, k):
    rng = np.random.default_rng(seed)
    occs, coords = random_mini_corpus(rng, n_tags=1)
    a = index_from_occurrences(occs, coords)
    dup = [o for o in occs for _ in range(k)]
    b = index_from_occurrences([dup[i] for i in rng.permutation(len(dup))], coords)
    for fn in (spatial.entropy, spatial.spread):
        assert fn(b, "t0") == pytest.approx(fn(a, "t0"), rel=1e-9, abs=1e-12)
    assert spatial.focus(b, "t0") == spatial.focus(a, "t0")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_single_location_equivalences(seed):
    occs, coords = random_mini_corpus(np.random.default_rng(seed))
    idx = index_from_occurrences(occs, coords)
    t = spatial.spatial_table(idx)
    nloc = np.array([len({o[1] for o in occs if o[0] == h}) for h in idx.tags])
    assert np.array_equal(t["focus"] == 1.0, nloc == 1)
    assert np.array_equal(t["entropy"] == 0.0, nloc == 1)
    assert np.all(t["entropy"] <= np.log2(nloc) + 1e-12)
    assert np.all(t["spread_km"] >= 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_merging_locations_never_increases_entropy(seed):
    rng = np.random.default_rng(seed)
    occs, coords = random_mini_corpus(rng, n_tags=1)
    a, b = rng.choice(list(coords), 2, replace=False)
    merged = [(h, a if l == b else l, t, u) for h, l, t, u in occs]
    e0 = spatial.entropy(index_from_occurrences(occs, coords), "t0")
    e1 = spatial.entropy(index_from_occurrences(merged, coords), "t0")
    assert e1 <= e0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_small_shift_changes_spread_little(seed, dlat, dlon):
    occs, coords = random_mini_corpus(np.random.default_rng(seed), n_tags=1)
    shifted = {k: (v[0] + dlat, v[1] + dlon) for k, v in coords.items()}
    s0 = spatial.spread(index_from_occurrences(occs, coords), "t0")
    s1 = spatial.spread(index_from_occurrences(occs, shifted), "t0")
    assert abs(s1 - s0) <= 0.01 * s0 + 1e-9


def test_spatial_cdf():
    occs = [("a", "A", i) for i in range(3)] + [("b", "A", 0), ("b", "B", 1)] + [("c", "C", 0)] * 1
    occs += [("d", "A", 0), ("d", "D", 1), ("d", "D", 2), ("d", "C", 3), ("d", "B", 4), ("d", "B", 5)]
    idx = index_from_occurrences(occs, COORDS)
    table = spatial.spatial_table(idx)
    buckets = partition_by_occurrences(idx, [2, 5])
    rows = spatial.spatial_cdf(table["focus"], buckets)
    assert rows == [("[2,5)", 0.5, 0.5), ("[2,5)", 1.0, 1.0), ("[5,inf)", 1 / 3, 1.0)]
    merged = {(2, math.inf): np.concatenate(list(buckets.values()))}
    assert sorted(v for _, v, _ in spatial.spatial_cdf(table["focus"], merged)) == sorted(v for _, v, _ in rows)


def test_fsum_path_matches():
    counts = np.arange(1, 10_050)
    direct = -sum((c / counts.sum()) * math.log2(c / counts.sum()) for c in counts.tolist())
    assert spatial.shannon_bits(counts) == pytest.approx(direct, rel=1e-12)
