"""Columnar occurrence index, location table, and the heavy-tail histograms.

The index keeps one row per (post, hashtag token) in flat numpy arrays,
sorted by (hashtag, timestamp, post_id), with CSR offsets per hashtag.
Hashtag, post and user codes are dense ranks of their string ids, so code
order is lexicographic id order.
"""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import polars as pl

from .ingest import TAG_CHARS, PostRecord

SECONDS_PER_DAY = 86400
DEFAULT_BUCKET_EDGES = (2, 5, 10, 50, 100, 1000)
INDEX_FORMAT_VERSION = 1


class StringTable:
    """Immutable list of strings stored as one UTF-8 blob plus offsets."""

    def __init__(self, blob: np.ndarray, offsets: np.ndarray):
        self.blob = blob
        self.offsets = offsets
        self._lookup = None

    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "StringTable":
        encoded = [s.encode("utf-8") for s in strings]
        offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
        if encoded:
            np.cumsum([len(b) for b in encoded], out=offsets[1:])
        blob = np.frombuffer(b"".join(encoded), dtype=np.uint8).copy()
        return cls(blob, offsets)

    @classmethod
    def from_series(cls, s: pl.Series) -> "StringTable":
        lengths = s.str.len_bytes().to_numpy().astype(np.int64)
        offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        # join in slices: one full-size copy instead of several
        step = 1 << 20
        parts = [np.frombuffer(s.slice(i, step).str.join("").cast(pl.Binary).item(), dtype=np.uint8)
                 for i in range(0, len(s), step)]
        blob = np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)
        return cls(blob, offsets)

    def __len__(self) -> int:
        return len(self.offsets) - 1

    def __getitem__(self, i: int) -> str:
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return self.blob[self.offsets[i]:self.offsets[i + 1]].tobytes().decode("utf-8")

    def __iter__(self):
        raw = self.blob.tobytes()
        off = self.offsets
        for i in range(len(self)):
            yield raw[off[i]:off[i + 1]].decode("utf-8")

    def tolist(self) -> list[str]:
        return list(self)

    def index(self, s: str) -> int:
        if self._lookup is None:
            self._lookup = {v: i for i, v in enumerate(self)}
        return self._lookup[s]

    def __contains__(self, s) -> bool:
        try:
            self.index(s)
        except KeyError:
            return False
        return True

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StringTable)
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.blob, other.blob)
        )


@dataclass
class LocationTable:
    """Cities keyed by location_id; rows kept in location_id order."""

    ids: list[str]
    names: list[str]
    lat: np.ndarray
    lon: np.ndarray
    post_count: np.ndarray = None
    rank: np.ndarray = None

    def __post_init__(self):
        order = sorted(range(len(self.ids)), key=lambda i: self.ids[i])
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate location_id")
        self.ids = [self.ids[i] for i in order]
        self.names = [self.names[i] for i in order]
        self.lat = np.asarray(self.lat, dtype=np.float64)[order]
        self.lon = np.asarray(self.lon, dtype=np.float64)[order]
        if np.any(np.abs(self.lat) > 90) or np.any(np.abs(self.lon) > 180):
            raise ValueError("coordinates out of range")
        if self.post_count is None:
            self.post_count = np.zeros(len(self.ids), dtype=np.int64)
        else:
            self.post_count = np.asarray(self.post_count, dtype=np.int64)[order]
        self._code = {v: i for i, v in enumerate(self.ids)}
        self.rank = _ranks(self.post_count)

    def __len__(self) -> int:
        return len(self.ids)

    def code(self, location_id: str) -> int:
        try:
            return self._code[location_id]
        except KeyError:
            raise KeyError(f"unknown location {location_id!r}") from None

    def __contains__(self, location_id) -> bool:
        return location_id in self._code

    def with_post_counts(self, counts: np.ndarray) -> "LocationTable":
        # rows are already sorted, so __post_init__ keeps the order
        return LocationTable(list(self.ids), list(self.names), self.lat, self.lon, counts)

    def by_rank(self) -> np.ndarray:
        """Location codes ordered rank 1, 2, ..."""
        return np.argsort(self.rank, kind="stable")

    @classmethod
    def from_csv(cls, path) -> "LocationTable":
        ids, names, lat, lon, counts = [], [], [], [], []
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                ids.append(row["location_id"])
                names.append(row.get("name") or row["location_id"])
                lat.append(float(row["lat"]))
                lon.append(float(row["lon"]))
                counts.append(int(row.get("post_count") or 0))
        return cls(ids, names, np.array(lat), np.array(lon), np.array(counts, dtype=np.int64))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["location_id", "name", "lat", "lon", "post_count", "rank"])
            for i, lid in enumerate(self.ids):
                w.writerow([lid, self.names[i], repr(float(self.lat[i])), repr(float(self.lon[i])),
                            int(self.post_count[i]), int(self.rank[i])])


def _ranks(post_count: np.ndarray) -> np.ndarray:
    # 1-based, post_count descending, ties by location_id (row order)
    order = np.lexsort((np.arange(len(post_count)), -post_count))
    rank = np.empty(len(post_count), dtype=np.int64)
    rank[order] = np.arange(1, len(post_count) + 1)
    return rank


def to_epoch(t) -> float:
    """datetime / int / float / None(-inf) to epoch seconds."""
    if t is None:
        return -math.inf
    if isinstance(t, datetime):
        if t.tzinfo is None:
            t = t.replace(tzinfo=timezone.utc)
        return t.timestamp()
    return t


@dataclass
class Occurrence:
    hashtag: str
    location_id: str
    timestamp: datetime
    day: object
    user_id: str
    post_id: str


@dataclass
class OccurrenceIndex:
    tags: StringTable
    offsets: np.ndarray  # int64, len(tags)+1
    loc: np.ndarray  # int32 location code
    ts: np.ndarray  # int64 epoch seconds
    user: np.ndarray  # int32 code into users
    post: np.ndarray  # int32 code into posts
    users: StringTable
    posts: StringTable
    post_n_tags: np.ndarray  # int32, hashtag tokens in the post text
    post_excl: np.ndarray  # bool
    post_quest: np.ndarray  # bool
    post_comments: np.ndarray  # int32
    locations: LocationTable
    comments_present: bool = False
    tz_offset: int = 0
    skipped: dict = field(default_factory=dict)

    # -- basic access -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.loc)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @cached_property
    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    @cached_property
    def first_use(self) -> np.ndarray:
        out = np.full(self.n_tags, np.iinfo(np.int64).max, dtype=np.int64)
        nz = self.counts > 0
        out[nz] = self.ts[self.offsets[:-1][nz]]
        return out

    @cached_property
    def tag_of_row(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_tags, dtype=np.int64), self.counts)

    @cached_property
    def day(self) -> np.ndarray:
        return np.floor_divide(self.ts + self.tz_offset, SECONDS_PER_DAY)

    def code(self, hashtag: str) -> int:
        try:
            return self.tags.index(hashtag)
        except KeyError:
            raise KeyError(f"unknown hashtag {hashtag!r}") from None

    def span(self, hashtag) -> slice:
        c = hashtag if isinstance(hashtag, (int, np.integer)) else self.code(hashtag)
        return slice(int(self.offsets[c]), int(self.offsets[c + 1]))

    def occurrences(self, hashtag: str) -> list[Occurrence]:
        sl = self.span(hashtag)
        out = []
        for i in range(sl.start, sl.stop):
            t = datetime.fromtimestamp(int(self.ts[i]), tz=timezone.utc)
            out.append(Occurrence(
                hashtag, self.locations.ids[self.loc[i]], t,
                datetime.fromtimestamp(int(self.day[i]) * SECONDS_PER_DAY, tz=timezone.utc).date(),
                self.users[int(self.user[i])], self.posts[int(self.post[i])],
            ))
        return out

    # -- shared group-bys, cached ------------------------------------------

    @cached_property
    def tag_location_counts(self):
        """(tag, loc, count) for every distinct pair, sorted by tag then loc."""
        nloc = max(len(self.locations), 1)
        key = self.tag_of_row * nloc + self.loc
        key.sort()  # in place; np.unique would hold several copies
        if len(key) == 0:
            return key, key.copy(), key.copy()
        starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
        cnt = np.diff(np.append(starts, len(key)))
        uniq = key[starts]
        del key
        return uniq // nloc, uniq % nloc, cnt

    @cached_property
    def tag_day_counts(self):
        """(tag, day, count) for every distinct pair, sorted by tag then day."""
        if len(self) == 0:
            e = np.zeros(0, dtype=np.int64)
            return e, e, e
        tag = self.tag_of_row
        day = self.day
        brk = np.ones(len(day), dtype=bool)
        brk[1:] = (tag[1:] != tag[:-1]) | (day[1:] != day[:-1])
        starts = np.flatnonzero(brk)
        cnt = np.diff(np.append(starts, len(day)))
        return tag[starts], day[starts], cnt

    @cached_property
    def location_rows(self):
        """Row positions grouped by location: (rows, offsets)."""
        order = np.argsort(self.loc, kind="stable")
        off = np.zeros(len(self.locations) + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.loc, minlength=len(self.locations)), out=off[1:])
        return order, off

    # -- totals -----------------------------------------------------------

    def totals(self) -> dict:
        def distinct(codes):
            return int(np.count_nonzero(np.bincount(codes))) if len(codes) else 0
        return {
            "uses": int(len(self)),
            "distinct_hashtags": int(np.count_nonzero(self.counts)),
            "hashtags_used_once": int(np.count_nonzero(self.counts == 1)),
            "messages": distinct(self.post),
            "users": distinct(self.user),
            "locations": distinct(self.loc),
        }

    # -- persistence ------------------------------------------------------

    def save(self, path) -> Path:
        """Write the index as an uncompressed .npz and a totals.json sidecar."""
        path = Path(path)
        meta = {
            "format_version": INDEX_FORMAT_VERSION,
            "comments_present": self.comments_present,
            "tz_offset": self.tz_offset,
            "skipped": self.skipped,
            "location_ids": self.locations.ids,
            "location_names": self.locations.names,
        }
        with open(path, "wb") as fh:
            np.savez(
                fh,
                meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
                tags_blob=self.tags.blob, tags_off=self.tags.offsets,
                users_blob=self.users.blob, users_off=self.users.offsets,
                posts_blob=self.posts.blob, posts_off=self.posts.offsets,
                offsets=self.offsets, loc=self.loc, ts=self.ts, user=self.user, post=self.post,
                post_n_tags=self.post_n_tags, post_excl=self.post_excl,
                post_quest=self.post_quest, post_comments=self.post_comments,
                loc_lat=self.locations.lat, loc_lon=self.locations.lon,
                loc_posts=self.locations.post_count,
            )
        sidecar = path.with_name("totals.json")
        with open(sidecar, "w") as fh:
            json.dump(self.totals(), fh, indent=2, sort_keys=True)
        return sidecar

    @classmethod
    def load(cls, path) -> "OccurrenceIndex":
        with np.load(path) as z:
            meta = json.loads(z["meta"].tobytes().decode("utf-8"))
            if meta.get("format_version") != INDEX_FORMAT_VERSION:
                raise ValueError(f"unsupported index format {meta.get('format_version')}")
            locs = LocationTable(meta["location_ids"], meta["location_names"],
                                 z["loc_lat"], z["loc_lon"], z["loc_posts"])
            return cls(
                StringTable(z["tags_blob"], z["tags_off"]), z["offsets"],
                z["loc"], z["ts"], z["user"], z["post"],
                StringTable(z["users_blob"], z["users_off"]),
                StringTable(z["posts_blob"], z["posts_off"]),
                z["post_n_tags"], z["post_excl"], z["post_quest"], z["post_comments"],
                locs, meta["comments_present"], meta["tz_offset"], meta["skipped"],
            )

    # -- subsetting -------------------------------------------------------

    def select(self, keep: np.ndarray) -> "OccurrenceIndex":
        """New index holding only hashtags whose code is True in ``keep``.

        Post and user tables are shared, not compacted.
        """
        keep = np.asarray(keep, dtype=bool)
        rows = np.repeat(keep, self.counts)
        kept_codes = np.flatnonzero(keep)
        counts = self.counts[kept_codes]
        offsets = np.zeros(len(kept_codes) + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        tags = StringTable.from_strings(self.tags[int(c)] for c in kept_codes)
        return OccurrenceIndex(
            tags, offsets, self.loc[rows], self.ts[rows], self.user[rows], self.post[rows],
            self.users, self.posts, self.post_n_tags, self.post_excl, self.post_quest,
            self.post_comments, self.locations, self.comments_present, self.tz_offset,
            dict(self.skipped),
        )


# -- building -------------------------------------------------------------

_TAG_PATTERN = f"#[{TAG_CHARS}]+"


DEFAULT_CHUNK_ROWS = 2_000_000


class _Vocab:
    """Growing string -> provisional code dictionary, remapped to lexical rank at the end."""

    def __init__(self):
        self.frame = pl.DataFrame(schema={"s": pl.String, "code": pl.Int32})

    def encode(self, col: pl.Series) -> np.ndarray:
        new = col.unique().to_frame("s").join(self.frame, on="s", how="anti")
        if new.height:
            base = self.frame.height
            new = new.with_columns(pl.int_range(base, base + new.height, dtype=pl.Int32).alias("code"))
            self.frame = pl.concat([self.frame, new])
        return (col.to_frame("s").join(self.frame, on="s", how="left", maintain_order="left")
                ["code"].to_numpy())

    def finish(self):
        """(strings in lexical order, provisional code -> rank)."""
        ordered = self.frame.sort("s")
        remap = np.empty(self.frame.height, dtype=np.int32)
        remap[ordered["code"].to_numpy()] = np.arange(self.frame.height, dtype=np.int32)
        return ordered["s"], remap


def _frame(post_id, user_id, location_id, timestamp, text, comment_count) -> pl.DataFrame:
    return pl.DataFrame({
        "post_id": pl.Series(post_id, dtype=pl.String),
        "user_id": pl.Series(user_id, dtype=pl.String),
        "location_id": pl.Series(location_id, dtype=pl.String),
        "ts": pl.Series(timestamp, dtype=pl.Int64),
        "text": pl.Series(text, dtype=pl.String),
        "comment_count": (pl.Series(comment_count, dtype=pl.Int32) if comment_count is not None
                          else pl.Series(np.zeros(len(post_id), dtype=np.int32))),
    })


def tag_blocks(offsets: np.ndarray, max_rows: int = DEFAULT_CHUNK_ROWS):
    """Consecutive (first_tag, end_tag) ranges covering about max_rows rows each."""
    n = len(offsets) - 1
    lo = 0
    while lo < n:
        hi = int(np.searchsorted(offsets, offsets[lo] + max_rows, side="right")) - 1
        hi = min(max(hi, lo + 1), n)
        yield lo, hi
        lo = hi


def build_index_columns(
    post_id,
    user_id,
    location_id,
    timestamp,
    text,
    locations: LocationTable,
    comment_count=None,
    fold: bool = True,
    tz_offset: int = 0,
    skipped: Optional[Counter] = None,
) -> OccurrenceIndex:
    """Build an index from parallel columns (lists, numpy arrays or polars Series).

    ``timestamp`` is epoch seconds (int). Posts at unknown locations are
    skipped and counted as ``unknown_location``.
    """
    df = _frame(post_id, user_id, location_id, timestamp, text, comment_count)
    return build_index_frames([df], locations, comment_count is not None, fold, tz_offset, skipped)


def build_index_frames(
    frames: Iterable[pl.DataFrame],
    locations: LocationTable,
    comments_present: bool = True,
    fold: bool = True,
    tz_offset: int = 0,
    skipped: Optional[Counter] = None,
) -> OccurrenceIndex:
    """Build an index from a stream of post frames.

    Each frame has columns post_id, user_id, location_id, ts (epoch seconds),
    text and comment_count. Only one frame's text is held at a time; the
    result is identical however the posts are chunked.
    """
    skipped = Counter() if skipped is None else skipped
    loc_df = pl.DataFrame({
        "location_id": pl.Series(locations.ids, dtype=pl.String),
        "loc": pl.Series(np.arange(len(locations), dtype=np.int32)),
    })
    post_counts = np.zeros(len(locations), dtype=np.int64)
    tag_vocab, user_vocab = _Vocab(), _Vocab()
    post_cols = {k: [] for k in ("post_id", "user", "loc", "ts", "n_tags", "excl", "quest", "comments")}
    occ_tag, occ_post = [], []
    n_posts = 0
    for df in frames:
        df = df.join(loc_df, on="location_id", how="left", maintain_order="left").drop("location_id")
        unknown = df["loc"].null_count()
        if unknown:
            skipped["unknown_location"] += unknown
            df = df.filter(pl.col("loc").is_not_null())
        post_counts += np.bincount(df["loc"].to_numpy(), minlength=len(locations))
        df = df.with_columns(
            pl.col("text").str.extract_all(_TAG_PATTERN).alias("found"),
            pl.col("text").str.contains("!", literal=True).alias("excl"),
            pl.col("text").str.contains("?", literal=True).alias("quest"),
        ).drop("text")
        df = df.with_columns(pl.col("found").list.len().cast(pl.Int32).alias("n_tags"))
        df = df.filter(pl.col("n_tags") > 0)
        occ = (df.select(pl.int_range(n_posts, n_posts + pl.len(), dtype=pl.Int32).alias("post"), "found")
               .explode("found", empty_as_null=False))
        tag = occ["found"].str.slice(1)
        occ_tag.append(tag_vocab.encode(tag.str.to_lowercase() if fold else tag))
        occ_post.append(occ["post"].to_numpy())
        del occ, tag
        post_cols["post_id"].append(df["post_id"])
        post_cols["user"].append(user_vocab.encode(df["user_id"]))
        post_cols["loc"].append(df["loc"].to_numpy())
        post_cols["ts"].append(df["ts"].to_numpy())
        post_cols["n_tags"].append(df["n_tags"].to_numpy())
        post_cols["excl"].append(df["excl"].to_numpy())
        post_cols["quest"].append(df["quest"].to_numpy())
        post_cols["comments"].append(df["comment_count"].to_numpy())
        n_posts += df.height
        del df

    locations = locations.with_post_counts(post_counts)
    post_ids = pl.concat(post_cols.pop("post_id")) if n_posts else pl.Series([], dtype=pl.String)
    if post_ids.n_unique() != len(post_ids):
        raise ValueError("post_id values are not unique")
    # posts in post_id order, one column at a time to bound peak memory
    order = post_ids.arg_sort().to_numpy()
    post_rank = np.empty(n_posts, dtype=np.int32)
    post_rank[order] = np.arange(n_posts, dtype=np.int32)
    post_ids = post_ids.gather(order)
    posts = {}
    for k in list(post_cols):
        chunks = post_cols.pop(k)
        col = np.concatenate(chunks) if chunks else np.zeros(0)
        del chunks
        posts[k] = col[order]
        del col
    del order

    tag_names, tag_remap = tag_vocab.finish()
    user_names, user_remap = user_vocab.finish()
    tcode = tag_remap[np.concatenate(occ_tag)] if occ_tag else np.zeros(0, dtype=np.int32)
    del occ_tag
    opost = np.concatenate(occ_post) if occ_post else np.zeros(0, dtype=np.int32)
    del occ_post
    opost = post_rank[opost] if n_posts else opost
    del post_rank
    occ_ts = posts["ts"][opost] if n_posts else np.zeros(0, dtype=np.int64)
    # occurrence rows sorted by (hashtag, ts, post_id)
    srt = pl.DataFrame({"t": tcode, "ts": occ_ts, "p": opost}).sort(["t", "ts", "p"])
    del tcode, occ_ts, opost
    tcode = srt["t"].to_numpy()
    n_tags = len(tag_names)
    offsets = np.zeros(n_tags + 1, dtype=np.int64)
    np.cumsum(np.bincount(tcode, minlength=n_tags), out=offsets[1:])
    del tcode
    opost = srt["p"].to_numpy().astype(np.int32)
    ts = srt["ts"].to_numpy().astype(np.int64)
    del srt
    puser = user_remap[posts["user"]] if n_posts else np.zeros(0, dtype=np.int32)

    return OccurrenceIndex(
        tags=StringTable.from_series(tag_names),
        offsets=offsets,
        loc=posts["loc"][opost].astype(np.int32) if n_posts else np.zeros(0, dtype=np.int32),
        ts=ts,
        user=puser[opost].astype(np.int32),
        post=opost,
        users=StringTable.from_series(user_names),
        posts=StringTable.from_series(post_ids),
        post_n_tags=posts["n_tags"].astype(np.int32) if n_posts else np.zeros(0, dtype=np.int32),
        post_excl=posts["excl"].astype(bool) if n_posts else np.zeros(0, dtype=bool),
        post_quest=posts["quest"].astype(bool) if n_posts else np.zeros(0, dtype=bool),
        post_comments=posts["comments"].astype(np.int32) if n_posts else np.zeros(0, dtype=np.int32),
        locations=locations,
        comments_present=comments_present,
        tz_offset=int(tz_offset),
        skipped=dict(skipped),
    )


def build_index(
    records: Iterable[PostRecord],
    locations: LocationTable,
    fold: bool = True,
    tz_offset: int = 0,
    skipped: Optional[Counter] = None,
    chunk_rows: int = DEFAULT_CHUNK_ROWS,
) -> OccurrenceIndex:
    """Build an OccurrenceIndex from a stream of PostRecords, chunk by chunk."""
    any_comments = False

    def frames():
        nonlocal any_comments
        cols = ([], [], [], [], [], [])
        for r in records:
            cols[0].append(r.post_id)
            cols[1].append(r.user_id)
            cols[2].append(r.location_id)
            cols[3].append(int(math.floor(r.timestamp.timestamp())))
            cols[4].append(r.text)
            if r.comment_count is not None:
                any_comments = True
            cols[5].append(r.comment_count or 0)
            if len(cols[0]) >= chunk_rows:
                yield _frame(*cols)
                cols = ([], [], [], [], [], [])
        if cols[0]:
            yield _frame(*cols)

    idx = build_index_frames(frames(), locations, True, fold, tz_offset, skipped)
    idx.comments_present = any_comments
    return idx


def filter_first_use(index: OccurrenceIndex, cutoff) -> OccurrenceIndex:
    """Keep hashtags whose first use is at or after ``cutoff`` (inclusive)."""
    c = to_epoch(cutoff)
    keep = (index.counts > 0) & (index.first_use >= c)
    return index.select(keep)


# -- distributions ----------------------------------------------------------

def _histogram(values: np.ndarray) -> list[tuple[int, int]]:
    if len(values) == 0:
        return []
    u, c = np.unique(values, return_counts=True)
    return [(int(a), int(b)) for a, b in zip(u, c)]


def occurrence_histogram(index: OccurrenceIndex) -> list[tuple[int, int]]:
    """(uses, number of hashtags with that many uses), ascending."""
    return _histogram(index.counts[index.counts > 0])


def distinct_locations(index: OccurrenceIndex) -> np.ndarray:
    tag, _, _ = index.tag_location_counts
    return np.bincount(tag, minlength=index.n_tags)


def location_histogram(index: OccurrenceIndex) -> list[tuple[int, int]]:
    """(distinct locations, number of hashtags seen in that many), ascending."""
    d = distinct_locations(index)
    return _histogram(d[index.counts > 0])


def bucket_label(lo: int, hi: float) -> str:
    return f"[{lo},{'inf' if math.isinf(hi) else int(hi)})"


def partition_by_occurrences(
    index: OccurrenceIndex, bucket_edges: Sequence[int] = DEFAULT_BUCKET_EDGES
) -> dict[tuple[int, float], np.ndarray]:
    """Map half-open use-count buckets to the hashtag codes falling in them.

    The last bucket is open-ended. Hashtags below the first edge are left out.
    """
    edges = [int(e) for e in bucket_edges]
    if not edges or edges[0] < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("bucket edges must be strictly ascending and start at >= 2")
    bounds = list(zip(edges, edges[1:] + [math.inf]))
    counts = index.counts
    which = np.searchsorted(np.asarray(edges), counts, side="right") - 1
    return {b: np.flatnonzero(which == i) for i, b in enumerate(bounds)}


def write_histogram_csv(rows, path, header) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
