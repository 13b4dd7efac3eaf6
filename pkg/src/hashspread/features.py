"""Per-hashtag feature vectors and the spatial-vs-temporal spread grid."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import spatial, temporal
from .corpus import OccurrenceIndex
from .spatial import spatial_table
from .temporal import temporal_table

log = logging.getLogger(__name__)

MIN_OCCURRENCES = 30

FEATURE_NAMES = (
    "focus", "entropy", "spread_km", "local_variation",
    "avg_hashtags_per_post", "avg_comments_per_post", "exclamation_fraction",
    "question_fraction", "temporal_focus", "temporal_entropy", "temporal_spread_days",
    "peak_increase", "peak_decline", "user_diversity",
)

FEATURE_GROUPS = {
    "spatial": ("focus", "entropy", "spread_km"),
    "temporal": ("local_variation", "temporal_focus", "temporal_entropy",
                 "temporal_spread_days", "peak_increase", "peak_decline"),
    "user_diversity": ("user_diversity",),
    "text": ("avg_hashtags_per_post", "avg_comments_per_post", "exclamation_fraction",
             "question_fraction"),
}


class BelowThreshold(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    hashtag: str
    focus: float
    entropy: float
    spread_km: float
    local_variation: float  # NaN when undefined, imputed later
    avg_hashtags_per_post: float
    avg_comments_per_post: float
    exclamation_fraction: float
    question_fraction: float
    temporal_focus: float
    temporal_entropy: float
    temporal_spread_days: float
    peak_increase: float
    peak_decline: float
    user_diversity: float

    def values(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FEATURE_NAMES], dtype=np.float64)


def text_features(n_tags, comments, exclaims, questions) -> tuple[float, float, float, float]:
    """Averages over the distinct posts carrying a hashtag."""
    n_tags = np.asarray(n_tags, dtype=np.float64)
    if len(n_tags) == 0:
        raise ValueError("no posts")
    return (float(n_tags.mean()), float(np.mean(comments)), float(np.mean(exclaims)),
            float(np.mean(questions)))


def _posts_of(index: OccurrenceIndex, hashtag) -> np.ndarray:
    return np.unique(index.post[index.span(hashtag)])


def hashtag_text_features(index: OccurrenceIndex, hashtag):
    p = _posts_of(index, hashtag)
    return text_features(index.post_n_tags[p], index.post_comments[p], index.post_excl[p],
                         index.post_quest[p])


def user_diversity(index: OccurrenceIndex, hashtag) -> float:
    sl = index.span(hashtag)
    return len(np.unique(index.user[sl])) / (sl.stop - sl.start)


def assemble(index: OccurrenceIndex, hashtag: str, min_occurrences: int = MIN_OCCURRENCES) -> FeatureVector:
    """Feature vector for one hashtag, built from the metric operations."""
    sl = index.span(hashtag)
    n = sl.stop - sl.start
    if n < min_occurrences:
        raise BelowThreshold(f"{hashtag!r} has {n} uses, below min_occurrences={min_occurrences}")
    _, f = spatial.focus(index, hashtag)
    _, tf = temporal.temporal_focus(index, hashtag)
    lv = temporal.local_variation(index, hashtag)
    inc, dec = temporal.peak_shape(index, hashtag)
    ah, ac, ex, qu = hashtag_text_features(index, hashtag)
    return FeatureVector(
        hashtag, f, spatial.entropy(index, hashtag), spatial.spread(index, hashtag),
        math.nan if lv is None else lv, ah, ac, ex, qu, tf,
        temporal.temporal_entropy(index, hashtag), temporal.temporal_spread(index, hashtag),
        inc, dec, user_diversity(index, hashtag),
    )


def feature_table(index: OccurrenceIndex, min_occurrences: int = MIN_OCCURRENCES):
    """Vectorised feature matrix for every qualifying hashtag.

    Returns (hashtag names, matrix with columns FEATURE_NAMES).
    """
    if not index.comments_present:
        log.warning("corpus has no comment_count column; avg_comments_per_post is 0")
    codes = np.flatnonzero(index.counts >= max(min_occurrences, 1))
    n = index.n_tags
    sp = spatial_table(index)
    tp = temporal_table(index)

    # text features over distinct (hashtag, post) pairs
    row_tag = index.tag_of_row
    key = row_tag * max(len(index.posts), 1) + index.post
    uk = np.unique(key)
    ptag = uk // max(len(index.posts), 1)
    ppost = uk % max(len(index.posts), 1)
    npost = np.bincount(ptag, minlength=n).astype(np.float64)
    safe = np.where(npost > 0, npost, 1.0)

    def avg(v):
        return np.bincount(ptag, weights=v[ppost].astype(np.float64), minlength=n) / safe

    ukey = np.unique(row_tag * max(len(index.users), 1) + index.user)
    distinct_users = np.bincount(ukey // max(len(index.users), 1), minlength=n)
    cols = {
        "focus": sp["focus"], "entropy": sp["entropy"], "spread_km": sp["spread_km"],
        "local_variation": tp["local_variation"],
        "avg_hashtags_per_post": avg(index.post_n_tags),
        "avg_comments_per_post": avg(index.post_comments),
        "exclamation_fraction": avg(index.post_excl),
        "question_fraction": avg(index.post_quest),
        "temporal_focus": tp["temporal_focus"], "temporal_entropy": tp["temporal_entropy"],
        "temporal_spread_days": tp["temporal_spread_days"],
        "peak_increase": tp["peak_increase"], "peak_decline": tp["peak_decline"],
        "user_diversity": distinct_users / np.where(index.counts > 0, index.counts, 1),
    }
    X = np.column_stack([cols[f][codes] for f in FEATURE_NAMES]) if len(codes) else np.zeros((0, 14))
    return [index.tags[int(c)] for c in codes], X


def write_features_csv(names, X, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["hashtag", *FEATURE_NAMES])
        for name, row in zip(names, X):
            w.writerow([name, *("" if np.isnan(v) else repr(float(v)) for v in row)])


def read_features_csv(path):
    names, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [f for f in FEATURE_NAMES if f not in reader.fieldnames]
        if missing:
            raise ValueError(f"feature file lacks columns {missing}")
        for r in reader:
            names.append(r["hashtag"])
            rows.append([float(r[f]) if r[f] != "" else math.nan for f in FEATURE_NAMES])
    return names, np.array(rows, dtype=np.float64).reshape(len(rows), len(FEATURE_NAMES))


def spread_grid(index: OccurrenceIndex, min_occurrences: int = MIN_OCCURRENCES, bins: int = 50):
    """(spatial km, temporal days) per qualifying hashtag plus a 2-D histogram.

    Returns (points, counts, x_edges, y_edges); bins span [0, max] per axis.
    """
    codes = np.flatnonzero(index.counts >= max(min_occurrences, 1))
    sp = spatial_table(index)["spread_km"][codes]
    tp = temporal_table(index)["temporal_spread_days"][codes]
    points = np.column_stack([sp, tp]) if len(codes) else np.zeros((0, 2))
    xmax = float(sp.max()) if len(sp) and sp.max() > 0 else 1.0
    ymax = float(tp.max()) if len(tp) and tp.max() > 0 else 1.0
    counts, xe, ye = np.histogram2d(sp, tp, bins=bins, range=[[0, xmax], [0, ymax]])
    return points, counts.astype(np.int64), xe, ye


def write_grid_csv(counts, xe, ye, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["spread_km_lo", "spread_km_hi", "spread_days_lo", "spread_days_hi", "count"])
        for i in range(counts.shape[0]):
            for j in range(counts.shape[1]):
                w.writerow([repr(float(xe[i])), repr(float(xe[i + 1])), repr(float(ye[j])),
                            repr(float(ye[j + 1])), int(counts[i, j])])
