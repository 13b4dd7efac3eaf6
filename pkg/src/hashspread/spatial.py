"""Spatial focus, entropy and spread of hashtags."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .corpus import OccurrenceIndex, bucket_label
from .geo import haversine_km

# above this many locations, entropy terms go through math.fsum
FSUM_THRESHOLD = 10_000


@dataclass(frozen=True)
class SpatialMetrics:
    hashtag: str
    focus_location: str
    focus: float
    entropy: float
    spread_km: float
    midpoint: tuple[float, float]


def shannon_bits(counts) -> float:
    """Entropy in bits of a count vector (zero counts ignored)."""
    c = np.asarray(counts, dtype=np.float64)
    c = c[c > 0]
    if len(c) == 0:
        raise ValueError("empty distribution")
    p = c / c.sum()
    terms = -p * np.log2(p)
    if len(terms) > FSUM_THRESHOLD:
        return math.fsum(terms.tolist()) + 0.0
    return float(terms.sum()) + 0.0


def _loc_counts(index: OccurrenceIndex, hashtag):
    sl = index.span(hashtag)
    if sl.stop == sl.start:
        raise KeyError(f"hashtag {hashtag!r} has no occurrences")
    return np.unique(index.loc[sl], return_counts=True)


def location_probabilities(index: OccurrenceIndex, hashtag: str) -> dict[str, float]:
    codes, counts = _loc_counts(index, hashtag)
    total = counts.sum()
    return {index.locations.ids[c]: float(n / total) for c, n in zip(codes, counts)}


def focus(index: OccurrenceIndex, hashtag: str) -> tuple[str, float]:
    """Most frequent location and its share; ties go to the smallest location_id."""
    codes, counts = _loc_counts(index, hashtag)
    i = int(np.argmax(counts))  # codes ascend in location_id order, argmax takes the first
    return index.locations.ids[codes[i]], float(counts[i] / counts.sum())


def entropy(index: OccurrenceIndex, hashtag: str) -> float:
    _, counts = _loc_counts(index, hashtag)
    return shannon_bits(counts)


def geographic_midpoint(lats, lons, weights=None) -> tuple[float, float]:
    """Weighted arithmetic mean of latitude and longitude."""
    lats = np.asarray(lats, dtype=np.float64)
    lons = np.asarray(lons, dtype=np.float64)
    if len(lats) == 0:
        raise ValueError("no occurrences")
    if not (np.all(np.isfinite(lats)) and np.all(np.isfinite(lons))):
        raise ValueError("non-finite coordinates")
    if weights is None:
        return float(lats.mean()), float(lons.mean())
    w = np.asarray(weights, dtype=np.float64)
    return float(np.dot(w, lats) / w.sum()), float(np.dot(w, lons) / w.sum())


def occurrence_midpoint(index: OccurrenceIndex, hashtag: str) -> tuple[float, float]:
    codes, counts = _loc_counts(index, hashtag)
    _check_coords(index, codes)
    return geographic_midpoint(index.locations.lat[codes], index.locations.lon[codes], counts)


def _check_coords(index, codes):
    bad = ~(np.isfinite(index.locations.lat[codes]) & np.isfinite(index.locations.lon[codes]))
    if bad.any():
        raise ValueError(f"no coordinates for location {index.locations.ids[codes[bad][0]]!r}")


def spread(index: OccurrenceIndex, hashtag: str) -> float:
    """Mean great-circle km from each occurrence to the weighted midpoint."""
    codes, counts = _loc_counts(index, hashtag)
    _check_coords(index, codes)
    lat = index.locations.lat[codes]
    lon = index.locations.lon[codes]
    mlat, mlon = geographic_midpoint(lat, lon, counts)
    d = np.atleast_1d(haversine_km(lat, lon, mlat, mlon))
    return float(np.dot(counts, d) / counts.sum())


def spatial_metrics(index: OccurrenceIndex, hashtag: str) -> SpatialMetrics:
    loc, f = focus(index, hashtag)
    return SpatialMetrics(hashtag, loc, f, entropy(index, hashtag), spread(index, hashtag),
                          occurrence_midpoint(index, hashtag))


# -- whole-index pass ------------------------------------------------------

def group_first_argmax(group: np.ndarray, values: np.ndarray, n_groups: int):
    """Per group (rows sorted by group): max value and first row attaining it."""
    gmax = np.full(n_groups, -np.inf)
    first = np.full(n_groups, len(values), dtype=np.int64)
    if len(values) == 0:
        return gmax, first
    starts = np.flatnonzero(np.r_[True, group[1:] != group[:-1]])
    ids = group[starts]
    gmax[ids] = np.maximum.reduceat(values, starts)
    pos = np.where(values == gmax[group], np.arange(len(values)), len(values))
    first[ids] = np.minimum.reduceat(pos, starts)
    return gmax, first


def spatial_table(index: OccurrenceIndex) -> dict[str, np.ndarray]:
    """Focus, entropy, spread and midpoint for every hashtag code at once.

    Hashtags with zero occurrences get NaN.
    """
    n = index.n_tags
    tag, loc, cnt = index.tag_location_counts
    total = index.counts.astype(np.float64)
    out = {k: np.full(n, np.nan) for k in ("focus", "entropy", "spread_km", "mid_lat", "mid_lon")}
    out["focus_loc"] = np.full(n, -1, dtype=np.int64)
    if len(tag) == 0:
        return out
    has = total > 0
    p = cnt / total[tag]
    gmax, first = group_first_argmax(tag, p, n)
    out["focus"][has] = gmax[has]
    out["focus_loc"][has] = loc[first[has]]

    terms = -p * np.log2(p)
    ent = np.bincount(tag, weights=terms, minlength=n)
    nloc = np.bincount(tag, minlength=n)
    for t in np.flatnonzero(nloc > FSUM_THRESHOLD):
        ent[t] = math.fsum(terms[tag == t].tolist())
    out["entropy"][has] = ent[has] + 0.0

    lat = index.locations.lat[loc]
    lon = index.locations.lon[loc]
    mlat = np.bincount(tag, weights=cnt * lat, minlength=n)[has] / total[has]
    mlon = np.bincount(tag, weights=cnt * lon, minlength=n)[has] / total[has]
    out["mid_lat"][has] = mlat
    out["mid_lon"][has] = mlon
    d = haversine_km(lat, lon, out["mid_lat"][tag], out["mid_lon"][tag])
    out["spread_km"][has] = np.bincount(tag, weights=cnt * d, minlength=n)[has] / total[has]
    return out


def spatial_cdf(values: np.ndarray, buckets: dict) -> list[tuple[str, float, float]]:
    """Rows (bucket, value, cdf_fraction) of the sorted per-bucket values.

    ``values`` is indexed by hashtag code; ``buckets`` as returned by
    partition_by_occurrences.
    """
    rows = []
    for (lo, hi), codes in sorted(buckets.items()):
        v = np.sort(values[codes][~np.isnan(values[codes])])
        label = bucket_label(lo, hi)
        for i, x in enumerate(v):
            rows.append((label, float(x), (i + 1) / len(v)))
    return rows


def write_cdf_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bucket", "value", "cdf_fraction"])
        for b, v, f in rows:
            w.writerow([b, repr(v), repr(f)])


def write_spatial_metrics_csv(index: OccurrenceIndex, table: dict, codes, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["hashtag", "uses", "focus_location", "focus", "entropy", "spread_km",
                    "mid_lat", "mid_lon"])
        for c in codes:
            w.writerow([index.tags[int(c)], int(index.counts[c]),
                        index.locations.ids[int(table["focus_loc"][c])],
                        repr(float(table["focus"][c])), repr(float(table["entropy"][c])),
                        repr(float(table["spread_km"][c])), repr(float(table["mid_lat"][c])),
                        repr(float(table["mid_lon"][c]))])
