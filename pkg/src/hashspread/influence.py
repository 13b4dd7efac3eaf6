"""Inter-city spatial impact and top-50 hashtag similarity.

The per-hashtag impact score is a reconstruction: only its anchors are fixed
(+1 when every use in A precedes every use in B or B never uses the tag,
-1 in reverse, about 0 for simultaneous adoption). We use the normalised
pair-ordering statistic

    (#{(a, b): t_a < t_b} - #{(a, b): t_a > t_b}) / (n_A * n_B)

which is the Mann-Whitney U rescaled to [-1, 1]. Equal timestamps count in
the denominator only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import OccurrenceIndex
from .geo import haversine_km

TOP_N = 50


@dataclass(frozen=True)
class ImpactScore:
    source: str
    target: str
    score: Optional[float]
    hashtags_considered: int


@dataclass(frozen=True)
class SimilarityScore:
    a: str
    b: str
    score: float
    distance_km: float


def pair_order_count(times_a: Sequence, times_b: Sequence) -> int:
    """#(a before b) - #(a after b) by a single two-pointer merge.

    Both inputs must be sorted ascending. O(len(a) + len(b)).
    """
    nb = len(times_b)
    total = 0
    lo = hi = 0  # b[:lo] < t, b[:hi] <= t
    for t in times_a:
        while lo < nb and times_b[lo] < t:
            lo += 1
        if hi < lo:
            hi = lo
        while hi < nb and times_b[hi] <= t:
            hi += 1
        total += (nb - hi) - lo
    return total


def impact_score(times_a, times_b) -> Optional[float]:
    """Ordering score for one hashtag; None when neither city used it."""
    na, nb = len(times_a), len(times_b)
    if na == 0 and nb == 0:
        return None
    if nb == 0:
        return 1.0
    if na == 0:
        return -1.0
    a = sorted(times_a)
    b = sorted(times_b)
    return pair_order_count(a, b) / (na * nb)


def _loc_code(index: OccurrenceIndex, location) -> int:
    if isinstance(location, (int, np.integer)):
        return int(location)
    return index.locations.code(location)


def hashtag_impact(index: OccurrenceIndex, hashtag: str, a, b) -> Optional[float]:
    sl = index.span(hashtag)
    loc = index.loc[sl]
    ts = index.ts[sl]
    ca, cb = _loc_code(index, a), _loc_code(index, b)
    return impact_score(ts[loc == ca].tolist(), ts[loc == cb].tolist())


def _pair_scores(index: OccurrenceIndex, ca: int, cb: int):
    """Per-hashtag (codes, scores) for every hashtag used in A or B.

    Rows of the index are already in (hashtag, timestamp) order, so
    restricting to the two cities keeps that order; one cumulative pass
    over the merged rows gives each A-use its count of B-uses strictly
    before and strictly after it.
    """
    rows, off = index.location_rows
    ra = rows[off[ca]:off[ca + 1]]
    rb = rows[off[cb]:off[cb + 1]]
    merged = np.sort(np.concatenate([ra, rb]))
    if len(merged) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    tag = index.tag_of_row[merged]
    ts = index.ts[merged]
    is_b = (index.loc[merged] == cb).astype(np.int64)
    is_a = 1 - is_b

    new_tag = np.r_[True, tag[1:] != tag[:-1]]
    new_tie = new_tag | np.r_[True, ts[1:] != ts[:-1]]
    tag_start = np.flatnonzero(new_tag)
    tag_id = np.cumsum(new_tag) - 1
    tie_id = np.cumsum(new_tie) - 1
    tie_start = np.flatnonzero(new_tie)

    cum_b = np.cumsum(is_b)
    b_before_tag = (cum_b - is_b)[tag_start]  # B rows before this tag's block
    tie_end = np.r_[tie_start[1:], len(merged)] - 1
    b_through_tie = cum_b[tie_end]
    b_before_tie = cum_b[tie_start] - is_b[tie_start]

    n_b = np.bincount(tag_id, weights=is_b).astype(np.int64)
    n_a = np.bincount(tag_id, weights=is_a).astype(np.int64)
    ti = tie_id
    before = b_before_tie[ti] - b_before_tag[tag_id]
    after = n_b[tag_id] - (b_through_tie[ti] - b_before_tag[tag_id])
    num = np.bincount(tag_id, weights=is_a * (after - before)).astype(np.int64)

    score = np.empty(len(tag_start))
    only_a = n_b == 0
    only_b = n_a == 0
    both = ~(only_a | only_b)
    score[only_a] = 1.0
    score[only_b] = -1.0
    score[both] = num[both] / (n_a[both] * n_b[both])
    return tag[tag_start], score


def hashtag_scores(index: OccurrenceIndex, a, b) -> dict[str, float]:
    codes, scores = _pair_scores(index, _loc_code(index, a), _loc_code(index, b))
    return {index.tags[int(c)]: float(s) for c, s in zip(codes, scores)}


def spatial_impact(index: OccurrenceIndex, a, b) -> ImpactScore:
    """Mean per-hashtag impact over every hashtag used in A or B."""
    ca, cb = _loc_code(index, a), _loc_code(index, b)
    if ca == cb:
        raise ValueError("spatial impact needs two distinct cities")
    _, scores = _pair_scores(index, ca, cb)
    ids = index.locations.ids
    if len(scores) == 0:
        return ImpactScore(ids[ca], ids[cb], None, 0)
    return ImpactScore(ids[ca], ids[cb], float(scores.mean()), len(scores))


def impact_histogram(index: OccurrenceIndex, source, top_k: int = 500, bins: int = 40):
    """Histogram over [-1, 1] of impact from ``source`` to the top-k ranked cities.

    Returns (counts, bin_edges, scores) where scores maps target id to score.
    The source itself and targets sharing no hashtag with it are skipped.
    """
    cs = _loc_code(index, source)
    k = min(top_k, len(index.locations))
    targets = index.locations.by_rank()[:k]
    scores = {}
    for t in targets:
        if t == cs:
            continue
        r = spatial_impact(index, cs, int(t))
        if r.score is not None:
            scores[r.target] = r.score
    counts, edges = np.histogram(np.array(list(scores.values()), dtype=float), bins=bins,
                                 range=(-1.0, 1.0))
    return counts, edges, scores


def location_tag_counts(index: OccurrenceIndex, location):
    """(hashtag codes, counts, first use in the location) for one location."""
    c = _loc_code(index, location)
    rows, off = index.location_rows
    r = rows[off[c]:off[c + 1]]  # ascending row order, i.e. hashtag then time
    tag = index.tag_of_row[r]
    if len(tag) == 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e, e
    starts = np.flatnonzero(np.r_[True, tag[1:] != tag[:-1]])
    cnt = np.diff(np.r_[starts, len(tag)])
    return tag[starts], cnt, index.ts[r[starts]]


def top_hashtags(index: OccurrenceIndex, location, n: int = TOP_N) -> list[str]:
    """n most used hashtags in a location.

    Ties: earlier first use in that location, then hashtag string.
    """
    if not isinstance(location, (int, np.integer)) and location not in index.locations:
        raise KeyError(f"unknown location {location!r}")
    codes, cnt, first = location_tag_counts(index, location)
    # hashtag codes are in lexicographic order already
    order = np.lexsort((codes, first, -cnt))[:n]
    return [index.tags[int(c)] for c in codes[order]]


def _top_codes(index, code, n=TOP_N) -> np.ndarray:
    codes, cnt, first = location_tag_counts(index, code)
    return codes[np.lexsort((codes, first, -cnt))[:n]]


def similarity(index: OccurrenceIndex, a, b, n: int = TOP_N) -> SimilarityScore:
    """|top-n(A) & top-n(B)| / n with a fixed denominator."""
    ca, cb = _loc_code(index, a), _loc_code(index, b)
    ids = index.locations.ids
    lat, lon = index.locations.lat, index.locations.lon
    shared = len(np.intersect1d(_top_codes(index, ca, n), _top_codes(index, cb, n)))
    if ca == cb:
        shared = n  # a city is identical to itself
    return SimilarityScore(ids[ca], ids[cb], shared / n,
                           haversine_km(lat[ca], lon[ca], lat[cb], lon[cb]))


def similarity_by_distance(index: OccurrenceIndex, source, group_size: int = 100, n: int = TOP_N):
    """Other cities sorted by distance, averaged in consecutive chunks.

    Returns a list of (mean distance km, mean similarity, group size).
    """
    cs = _loc_code(index, source)
    lat, lon = index.locations.lat, index.locations.lon
    others = np.array([c for c in range(len(index.locations)) if c != cs], dtype=np.int64)
    if len(others) == 0:
        raise ValueError("no other locations")
    dist = haversine_km(lat[cs], lon[cs], lat[others], lon[others])
    order = np.lexsort((others, dist))
    top_src = _top_codes(index, cs, n)
    sims = np.array([len(np.intersect1d(top_src, _top_codes(index, c, n))) / n
                     for c in others[order]])
    d = np.asarray(dist)[order]
    out = []
    for i in range(0, len(order), group_size):
        out.append((float(d[i:i + group_size].mean()), float(sims[i:i + group_size].mean()),
                    len(d[i:i + group_size])))
    return out
