"""Temporal focus, entropy, spread, local variation and peak shape."""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Optional

import numpy as np

from .corpus import SECONDS_PER_DAY, OccurrenceIndex, tag_blocks
from .spatial import group_first_argmax, shannon_bits

PEAK_WINDOW_DAYS = 7
_EPOCH = date(1970, 1, 1)


@dataclass(frozen=True)
class TemporalMetrics:
    hashtag: str
    peak_day: date
    temporal_focus: float
    temporal_entropy: float
    temporal_spread_days: float
    local_variation: Optional[float]  # None when undefined
    peak_increase: float
    peak_decline: float


def day_to_date(day: int) -> date:
    return _EPOCH + timedelta(days=int(day))


def _slice(index: OccurrenceIndex, hashtag):
    sl = index.span(hashtag)
    if sl.stop == sl.start:
        raise KeyError(f"hashtag {hashtag!r} has no occurrences")
    return sl


def _day_counts(index, hashtag):
    sl = _slice(index, hashtag)
    return np.unique(index.day[sl], return_counts=True)


def daily_counts(index: OccurrenceIndex, hashtag: str) -> dict[date, int]:
    days, counts = _day_counts(index, hashtag)
    return {day_to_date(d): int(c) for d, c in zip(days, counts)}


def temporal_focus(index: OccurrenceIndex, hashtag: str) -> tuple[date, float]:
    """Busiest day and its share of uses; ties go to the earliest day."""
    days, counts = _day_counts(index, hashtag)
    i = int(np.argmax(counts))
    return day_to_date(days[i]), float(counts[i] / counts.sum())


def temporal_entropy(index: OccurrenceIndex, hashtag: str) -> float:
    _, counts = _day_counts(index, hashtag)
    return shannon_bits(counts)


def mean_abs_deviation_days(ts: np.ndarray) -> float:
    t = np.asarray(ts, dtype=np.int64)
    rel = (t - t[0]).astype(np.float64)
    return float(np.abs(rel - rel.mean()).mean() / SECONDS_PER_DAY)


def temporal_spread(index: OccurrenceIndex, hashtag: str) -> float:
    """Mean absolute distance in days from each use to the mean timestamp."""
    return mean_abs_deviation_days(index.ts[_slice(index, hashtag)])


def lv_statistic(times) -> Optional[float]:
    """Local variation of sorted event times; None for fewer than 3 events.

    Adjacent interval pairs summing to zero contribute 0.
    """
    t = np.asarray(times, dtype=np.float64)
    if len(t) < 3:
        return None
    iv = np.diff(t)
    a, b = iv[:-1], iv[1:]
    s = a + b
    safe = np.where(s > 0, s, 1.0)
    terms = np.where(s > 0, ((a - b) / safe) ** 2, 0.0)
    return float(3.0 * terms.sum() / (len(iv) - 1))


def local_variation(index: OccurrenceIndex, hashtag: str) -> Optional[float]:
    return lv_statistic(index.ts[_slice(index, hashtag)])


def peak_shape(index: OccurrenceIndex, hashtag: str) -> tuple[float, float]:
    """(uses in the 7 days before the peak day, uses in the 7 days after) / peak-day uses."""
    days, counts = _day_counts(index, hashtag)
    i = int(np.argmax(counts))
    peak = days[i]
    before = counts[(days >= peak - PEAK_WINDOW_DAYS) & (days < peak)].sum()
    after = counts[(days > peak) & (days <= peak + PEAK_WINDOW_DAYS)].sum()
    return float(before / counts[i]), float(after / counts[i])


def temporal_metrics(index: OccurrenceIndex, hashtag: str) -> TemporalMetrics:
    peak, tf = temporal_focus(index, hashtag)
    inc, dec = peak_shape(index, hashtag)
    return TemporalMetrics(hashtag, peak, tf, temporal_entropy(index, hashtag),
                           temporal_spread(index, hashtag), local_variation(index, hashtag),
                           inc, dec)


# -- whole-index pass ------------------------------------------------------

def temporal_table(index: OccurrenceIndex) -> dict[str, np.ndarray]:
    """All temporal metrics for every hashtag code. NaN marks undefined values."""
    n = index.n_tags
    keys = ("temporal_focus", "temporal_entropy", "temporal_spread_days", "local_variation",
            "peak_increase", "peak_decline")
    out = {k: np.full(n, np.nan) for k in keys}
    out["peak_day"] = np.full(n, np.iinfo(np.int64).min, dtype=np.int64)
    if len(index) == 0:
        return out
    counts = index.counts
    has = counts > 0
    total = counts.astype(np.float64)

    tag, day, cnt = index.tag_day_counts
    p = cnt / total[tag]
    gmax, first = group_first_argmax(tag, p, n)
    out["temporal_focus"][has] = gmax[has]
    peak = np.full(n, 0, dtype=np.int64)
    peak[has] = day[first[has]]
    out["peak_day"][has] = peak[has]
    terms = -p * np.log2(p)
    ent = np.bincount(tag, weights=terms, minlength=n)
    nday = np.bincount(tag, minlength=n)
    for t in np.flatnonzero(nday > 10_000):
        ent[t] = math.fsum(terms[tag == t].tolist())
    out["temporal_entropy"][has] = ent[has] + 0.0

    peak_cnt = cnt[first[has]].astype(np.float64)
    rel = day - peak[tag]
    pre = (rel >= -PEAK_WINDOW_DAYS) & (rel < 0)
    post = (rel > 0) & (rel <= PEAK_WINDOW_DAYS)
    out["peak_increase"][has] = np.bincount(tag[pre], weights=cnt[pre], minlength=n)[has] / peak_cnt
    out["peak_decline"][has] = np.bincount(tag[post], weights=cnt[post], minlength=n)[has] / peak_cnt

    # spread and LV row-wise, in blocks of whole hashtags to bound memory
    spread_sum = np.zeros(n)
    lv_sum = np.zeros(n)
    first_use = index.first_use
    for lo, hi in tag_blocks(index.offsets):
        r0, r1 = index.offsets[lo], index.offsets[hi]
        if r0 == r1:
            continue
        bt = np.repeat(np.arange(hi - lo), counts[lo:hi])
        ts = index.ts[r0:r1]
        # relative to each hashtag's first use to keep float precision
        rel_ts = (ts - first_use[lo:hi][bt]).astype(np.float64)
        mean = np.bincount(bt, weights=rel_ts, minlength=hi - lo) / np.maximum(total[lo:hi], 1)
        rel_ts -= mean[bt]
        np.abs(rel_ts, out=rel_ts)
        spread_sum[lo:hi] = np.bincount(bt, weights=rel_ts, minlength=hi - lo)
        del rel_ts
        # local variation over within-hashtag interval pairs
        iv = np.diff(ts).astype(np.float64)
        same = bt[1:] == bt[:-1]
        a, b = iv[:-1], iv[1:]
        pair_ok = same[:-1] & same[1:]
        s = a + b
        pair_ok &= s > 0  # zero-sum pairs contribute 0
        terms = ((a[pair_ok] - b[pair_ok]) / s[pair_ok]) ** 2
        lv_sum[lo:hi] = np.bincount(bt[:-2][pair_ok], weights=terms, minlength=hi - lo)
    out["temporal_spread_days"][has] = spread_sum[has] / total[has] / SECONDS_PER_DAY
    ok = counts >= 3
    out["local_variation"][ok] = 3.0 * lv_sum[ok] / (counts[ok] - 2)
    return out
