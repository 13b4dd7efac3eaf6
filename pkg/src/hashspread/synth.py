"""Synthetic geotagged corpora with a ground-truth ledger.

Four class-conditional generators:

- local_event: one city, burst of at most 3 days
- local_phenomenon: up to 3 neighbouring cities, uniform over 60+ days
- event: 20+ population-weighted cities, burst of at most 5 days
- other_meme: 20+ cities over 60+ days, seeded in a top-ranked city and
  adopted elsewhere after an exponential lag whose mean grows with distance

Cities get Zipf(1) population weights and uniform coordinates inside a
Germany-sized box, so 50 km and 150 km are meaningful distances.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np
import polars as pl

from .corpus import DEFAULT_CHUNK_ROWS, SECONDS_PER_DAY, LocationTable, OccurrenceIndex, build_index_frames
from .geo import haversine_km

CLASS_NAMES = ("local_event", "local_phenomenon", "event", "other_meme")
_PREFIX = {"local_event": "lev", "local_phenomenon": "lph", "event": "evt", "other_meme": "mem"}
_REGIMES = {
    "local_event": ("local", "short"),
    "local_phenomenon": ("local", "long"),
    "event": ("countrywide", "short"),
    "other_meme": ("countrywide", "long"),
}
# spread-grid quadrant boundaries separating local/countrywide and short/long
LOCAL_MAX_KM = 100.0
SHORT_MAX_DAYS = 7.0
_FILLER = ("heute", "wer noch", "endlich", "mal wieder", "so", "na toll", "hier")


@dataclass
class WorldSpec:
    cities: int = 200
    hashtags: int = 2000
    uses: int = 1_000_000
    seed: int = 7
    # None: split `hashtags` evenly over the four classes
    class_counts: Optional[dict] = None
    start: str = "2016-01-01T00:00:00Z"
    days: int = 730
    min_uses: int = 30
    popularity_tail: float = 1.2  # Pareto index of the per-hashtag use weights
    lat_range: tuple = (47.0, 55.0)
    lon_range: tuple = (6.0, 15.0)
    users_per_use: float = 0.05
    lag_days_per_km: float = 0.08
    exclamation_p: float = 0.2
    question_p: float = 0.15
    comments_mean: float = 2.5

    def counts(self) -> dict:
        if self.class_counts is not None:
            return {c: int(self.class_counts.get(c, 0)) for c in CLASS_NAMES}
        base, extra = divmod(self.hashtags, 4)
        return {c: base + (i < extra) for i, c in enumerate(CLASS_NAMES)}

    def validate(self):
        if self.cities < 2:
            raise ValueError("need at least 2 cities")
        if self.days < 1:
            raise ValueError("window must have positive length")
        n = sum(self.counts().values())
        wide = self.counts()["event"] + self.counts()["other_meme"]
        if wide and self.cities < 20:
            raise ValueError(f"countrywide classes need 20 cities, spec has {self.cities}")
        if wide and self.min_uses < 20:
            raise ValueError("countrywide classes need min_uses >= 20")
        if self.uses < n * self.min_uses:
            raise ValueError(f"{self.uses} uses cannot give {n} hashtags {self.min_uses} each")
        if self.counts()["local_phenomenon"] or self.counts()["other_meme"]:
            if self.days < 90:
                raise ValueError("long-lived classes need a window of at least 90 days")


@dataclass
class SynthCorpus:
    """Generated corpus in columnar form, one row per post."""

    spec: WorldSpec
    city_ids: list
    city_names: list
    lat: np.ndarray
    lon: np.ndarray
    population: np.ndarray
    tag_names: list  # canonical names, one per hashtag
    tag_raw: list  # as written in post text
    tag_class: list
    tag_seed_city: np.ndarray
    post_tag: np.ndarray
    post_city: np.ndarray
    post_ts: np.ndarray
    post_user: np.ndarray  # global user number
    post_punct: np.ndarray  # 0 none, 1 '!', 2 '?'
    post_filler: np.ndarray
    post_comments: np.ndarray
    ledger: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.post_tag)

    def locations(self) -> LocationTable:
        return LocationTable(list(self.city_ids), list(self.city_names), self.lat, self.lon)

    def columns(self, start: int = 0, stop: Optional[int] = None) -> pl.DataFrame:
        """Posts [start, stop) as a frame of string ids, epoch ts, text and comment_count."""
        sl = slice(start, len(self) if stop is None else stop)
        n = len(self.post_tag[sl])
        df = pl.DataFrame({
            "i": np.arange(sl.start, sl.start + n, dtype=np.int64),
            "tag": pl.Series(self.tag_raw, dtype=pl.String).gather(self.post_tag[sl]),
            "city": pl.Series(self.city_ids, dtype=pl.String).gather(self.post_city[sl]),
            "user": self.post_user[sl],
            "ts": self.post_ts[sl],
            "punct": pl.Series(["", "!", "?"]).gather(self.post_punct[sl]),
            "filler": pl.Series(list(_FILLER)).gather(self.post_filler[sl]),
            "comment_count": self.post_comments[sl].astype(np.int32),
        })
        return df.select(
            pl.format("p{}", pl.col("i").cast(pl.String).str.zfill(9)).alias("post_id"),
            pl.format("u{}", pl.col("user").cast(pl.String).str.zfill(7)).alias("user_id"),
            pl.col("city").alias("location_id"),
            pl.col("ts"),
            pl.format("{} #{}{}", "filler", "tag", "punct").alias("text"),
            pl.col("comment_count"),
        )

    def iter_frames(self, chunk_rows: int = DEFAULT_CHUNK_ROWS):
        for start in range(0, len(self), chunk_rows):
            yield self.columns(start, start + chunk_rows)

    def build_index(self, chunk_rows: int = DEFAULT_CHUNK_ROWS, **kwargs) -> OccurrenceIndex:
        return build_index_frames(self.iter_frames(chunk_rows), self.locations(), True, **kwargs)

    def write_jsonl(self, path) -> int:
        df = self.columns().with_columns(
            pl.from_epoch("ts", time_unit="s").dt.strftime("%Y-%m-%dT%H:%M:%SZ").alias("timestamp")
        ).select("post_id", "user_id", "location_id", "timestamp", "text", "comment_count")
        df.write_ndjson(path)
        return df.height

    def write_locations(self, path) -> None:
        self.locations().to_csv(path)

    def write_ledger(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.ledger, fh, ensure_ascii=False, sort_keys=True)


def _trunc_exp(rng, n, scale, limit):
    """Exponential(scale) truncated to [0, limit) by inverse CDF."""
    u = rng.random(n)
    return -scale * np.log1p(-u * (1.0 - np.exp(-limit / scale)))


def _spread_counts(rng, n, weights):
    """n uses over len(weights) cities, at least one each, rest by weight."""
    m = len(weights)
    extra = rng.multinomial(n - m, weights / weights.sum())
    return extra + 1


def generate(spec: WorldSpec = None) -> SynthCorpus:
    spec = spec or WorldSpec()
    spec.validate()
    master = np.random.default_rng(spec.seed)
    nc = spec.cities
    lat = master.uniform(*spec.lat_range, nc)
    lon = master.uniform(*spec.lon_range, nc)
    pop = 1.0 / np.arange(1, nc + 1)  # city i has population rank i+1
    pop_p = pop / pop.sum()
    dist = haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    width = len(str(nc - 1))
    city_ids = [f"c{i:0{width}d}" for i in range(nc)]
    city_names = [f"city-{i:0{width}d}" for i in range(nc)]

    counts = spec.counts()
    classes = [c for c in CLASS_NAMES for _ in range(counts[c])]
    nh = len(classes)
    weights = master.pareto(spec.popularity_tail, nh) + 1.0 if nh else np.zeros(0)
    rest = spec.uses - nh * spec.min_uses
    uses = (master.multinomial(rest, weights / weights.sum()) + spec.min_uses) if nh else np.zeros(0, int)
    raw_upper = master.random(nh) < 0.3

    users_total = max(nc, int(spec.uses * spec.users_per_use))
    pool = np.maximum(2, np.round(pop_p * users_total)).astype(np.int64)
    pool_off = np.r_[0, np.cumsum(pool)]

    t0 = int(datetime.fromisoformat(spec.start.replace("Z", "+00:00")).timestamp())
    window = spec.days * SECONDS_PER_DAY
    day_s = float(SECONDS_PER_DAY)

    tag_names, tag_raw, seed_city = [], [], np.zeros(nh, dtype=np.int64)
    chunks_city, chunks_ts, chunks_tag = [], [], []
    idx_in_class = Counter()
    for h, cls in enumerate(classes):
        rng = np.random.default_rng([spec.seed, h])
        n = int(uses[h])
        k = idx_in_class[cls]
        idx_in_class[cls] += 1
        name = f"{_PREFIX[cls]}_{k:05d}"
        tag_names.append(name)
        tag_raw.append(name.capitalize() if raw_upper[h] else name)

        if cls == "local_event":
            c = rng.choice(nc, p=pop_p)
            cities = np.full(n, c)
            start = rng.uniform(0, window - 3 * day_s)
            ts = start + _trunc_exp(rng, n, 0.6 * day_s, 3 * day_s)
        elif cls == "local_phenomenon":
            c = rng.choice(nc, p=pop_p)
            m = rng.integers(1, 4)
            near = np.argsort(dist[c], kind="stable")[:m]  # includes c itself
            w = np.array([0.6, 0.25, 0.15])[:m]
            cities = near[rng.choice(m, size=n, p=w / w.sum())]
            length = rng.uniform(60, min(300, spec.days)) * day_s
            start = rng.uniform(0, window - length)
            ts = start + rng.uniform(0, length, n)
        elif cls == "event":
            m = int(rng.integers(20, min(60, n, nc) + 1))
            chosen = rng.choice(nc, size=m, replace=False, p=pop_p)
            c = chosen[np.argmax(pop[chosen])]
            per = _spread_counts(rng, n, pop[chosen])
            cities = np.repeat(chosen, per)
            start = rng.uniform(0, window - 5 * day_s)
            ts = start + _trunc_exp(rng, n, 1.0 * day_s, 5 * day_s)
        else:
            top = min(5, nc)
            c = rng.choice(top, p=pop[:top] / pop[:top].sum())
            m = int(rng.integers(20, min(80, n, nc) + 1))
            others = np.delete(np.arange(nc), c)
            po = pop_p[others] / pop_p[others].sum()
            chosen = np.r_[c, rng.choice(others, size=m - 1, replace=False, p=po)]
            per = _spread_counts(rng, n, pop[chosen])
            cities = np.repeat(chosen, per)
            length = rng.uniform(90, min(400, spec.days)) * day_s
            start = rng.uniform(0, window - length)
            lag = rng.exponential(np.maximum(spec.lag_days_per_km * dist[c, chosen], 1e-9)) * day_s
            lag[0] = 0.0
            lag = np.minimum(lag, 0.8 * length)
            lo = np.repeat(lag, per)
            ts = start + lo + rng.uniform(0, 1, n) * (length - lo)
        seed_city[h] = c
        ts = t0 + np.floor(ts).astype(np.int64)
        order = np.argsort(ts, kind="stable")
        chunks_city.append(np.asarray(cities, dtype=np.int32)[order])
        chunks_ts.append(ts[order])
        chunks_tag.append(np.full(n, h, dtype=np.int32))

    def cat(chunks, dtype):
        out = np.concatenate(chunks) if chunks else np.zeros(0, dtype=dtype)
        chunks.clear()
        return out

    post_city = cat(chunks_city, np.int32)
    post_ts = cat(chunks_ts, np.int64)
    post_tag = cat(chunks_tag, np.int32)
    n_posts = len(post_tag)
    post_user = (pool_off[post_city] + (master.random(n_posts) * pool[post_city]).astype(np.int64)).astype(np.int32)
    r = master.random(n_posts)
    post_punct = np.where(r < spec.exclamation_p, 1, np.where(r < spec.exclamation_p + spec.question_p, 2, 0))
    post_punct = post_punct.astype(np.int8)
    del r
    post_filler = master.integers(0, len(_FILLER), n_posts).astype(np.int8)
    post_comments = master.poisson(spec.comments_mean, n_posts).astype(np.int32)

    corpus = SynthCorpus(
        spec, city_ids, city_names, lat, lon, pop, tag_names, tag_raw, classes, seed_city,
        post_tag, post_city, post_ts, post_user, post_punct, post_filler, post_comments,
    )
    corpus.ledger = make_ledger(corpus, t0)
    return corpus


def _count_pairs(a, b, nb):
    """Distinct (a, b) pairs with their counts, in (a, b) order."""
    key, n = np.unique(np.asarray(a, dtype=np.int64) * nb + b, return_counts=True)
    return key // nb, key % nb, n


def make_ledger(corpus: SynthCorpus, t0: int) -> dict:
    nh = len(corpus.tag_names)
    days = np.floor_divide(corpus.post_ts, SECONDS_PER_DAY)
    d0 = int(days.min()) if len(days) else 0
    tags = {}
    for h in range(nh):
        cls = corpus.tag_class[h]
        tags[corpus.tag_names[h]] = {
            "class": cls,
            "spatial_regime": _REGIMES[cls][0],
            "temporal_regime": _REGIMES[cls][1],
            "seed_city": corpus.city_ids[corpus.tag_seed_city[h]],
            "uses": 0,
            "counts_by_city": {},
            "counts_by_day": {},
        }
    for h, c, n in zip(*(x.tolist() for x in _count_pairs(corpus.post_tag, corpus.post_city, len(corpus.city_ids)))):
        e = tags[corpus.tag_names[h]]
        e["counts_by_city"][corpus.city_ids[c]] = n
        e["uses"] += n
    span = int(days.max()) - d0 + 1 if len(days) else 1
    for h, d, n in zip(*(x.tolist() for x in _count_pairs(corpus.post_tag, days - d0, span))):
        day = datetime.fromtimestamp((d + d0) * SECONDS_PER_DAY, tz=timezone.utc).date().isoformat()
        tags[corpus.tag_names[h]]["counts_by_day"][day] = n
    totals = {
        "uses": int(len(corpus)),
        "distinct_hashtags": int(sum(1 for e in tags.values() if e["uses"])),
        "messages": int(len(corpus)),
        "users": int(len(np.unique(corpus.post_user))),
        "locations": int(len(np.unique(corpus.post_city))),
    }
    spec = asdict(corpus.spec)
    return {"spec": spec, "totals": totals, "hashtags": tags}


def _index_view(index: OccurrenceIndex) -> dict:
    """Per-hashtag city/day counts recomputed from the index."""
    tag, loc, cnt = index.tag_location_counts
    out = {}
    for t, l, n in zip(tag.tolist(), loc.tolist(), cnt.tolist()):
        e = out.setdefault(index.tags[t], {"uses": 0, "counts_by_city": {}, "counts_by_day": {}})
        e["counts_by_city"][index.locations.ids[l]] = n
        e["uses"] += n
    tag, day, cnt = index.tag_day_counts
    for t, d, n in zip(tag.tolist(), day.tolist(), cnt.tolist()):
        iso = datetime.fromtimestamp(d * SECONDS_PER_DAY, tz=timezone.utc).date().isoformat()
        out[index.tags[t]]["counts_by_day"][iso] = n
    return out


def verify(ledger: dict, index: OccurrenceIndex) -> dict:
    """Diff an index against a ledger.

    One discrepancy per hashtag whose counts differ (or that is missing or
    unexpected); totals and the use-count histogram are diffed alongside.
    """
    from .corpus import occurrence_histogram

    view = _index_view(index)
    want = ledger["hashtags"]
    diffs = []
    for tag in sorted(set(want) | set(view)):
        a, b = want.get(tag), view.get(tag)
        if a is None:
            diffs.append({"hashtag": tag, "problem": "not in ledger"})
        elif b is None:
            if a["uses"]:
                diffs.append({"hashtag": tag, "problem": "missing from index"})
        elif (a["uses"], a["counts_by_city"], a["counts_by_day"]) != (
                b["uses"], b["counts_by_city"], b["counts_by_day"]):
            diffs.append({"hashtag": tag, "problem": "counts differ",
                          "ledger_uses": a["uses"], "index_uses": b["uses"]})
    got = index.totals()
    totals_diff = {k: (v, got.get(k)) for k, v in ledger["totals"].items() if got.get(k) != v}
    hist_ledger = sorted(Counter(e["uses"] for e in want.values() if e["uses"]).items())
    hist_diff = hist_ledger != occurrence_histogram(index)
    return {
        "ok": not diffs and not totals_diff and not hist_diff,
        "n_discrepancies": len(diffs),
        "hashtag_diffs": diffs,
        "totals_diff": totals_diff,
        "histogram_differs": hist_diff,
    }


def quadrant(spread_km: float, spread_days: float) -> str:
    """Class whose intended regime matches a (spatial, temporal) spread point."""
    local = spread_km < LOCAL_MAX_KM
    short = spread_days < SHORT_MAX_DAYS
    return {(True, True): "local_event", (True, False): "local_phenomenon",
            (False, True): "event", (False, False): "other_meme"}[(local, short)]


def labeled_set_from_ledger(ledger: dict, names, counts=None, limit: Optional[int] = None):
    """LabeledSet over hashtags that have feature vectors.

    With ``limit``, keep the ``limit`` most used ones (ties by name).
    """
    from .classify import HashtagClass, LabeledSet

    names = list(names)
    if limit is not None and counts is not None:
        order = sorted(range(len(names)), key=lambda i: (-counts[i], names[i]))[:limit]
        names = [names[i] for i in sorted(order)]
    elif limit is not None:
        names = names[:limit]
    return LabeledSet(names, [HashtagClass(ledger["hashtags"][n]["class"]) for n in names])
