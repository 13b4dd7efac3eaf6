"""Post records, hashtag extraction and corpus readers/writers."""
from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Optional, Tuple

log = logging.getLogger(__name__)

# ASCII alphanumerics, German umlauts, Eszett, dot, dash, underscore.
TAG_CHARS = "A-Za-z0-9äöüÄÖÜß._\\-"
HASHTAG_RE = re.compile(f"#([{TAG_CHARS}]+)")

FIELDS = ("post_id", "user_id", "location_id", "timestamp", "text")


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    user_id: str
    location_id: str
    timestamp: datetime
    text: str
    # None when the input carried no comment_count column
    comment_count: Optional[int] = None


@dataclass(frozen=True)
class HashtagToken:
    raw: str
    canonical: str


def canonicalize(raw: str) -> str:
    """Case-fold a raw hashtag. Only lowercasing; ß and punctuation survive."""
    return raw.lower()


def extract_hashtags(text: str, fold: bool = True) -> list[HashtagToken]:
    """All maximal ``#tag`` runs in order of appearance, duplicates kept."""
    out = []
    for m in HASHTAG_RE.finditer(text):
        raw = m.group(1)
        out.append(HashtagToken(raw, canonicalize(raw) if fold else raw))
    return out


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 instant into an aware UTC datetime."""
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp without offset: {value!r}")
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    dt = dt.astimezone(timezone.utc)
    return dt.isoformat().replace("+00:00", "Z")


def _record_from_mapping(obj, skipped: Counter) -> Optional[PostRecord]:
    if not isinstance(obj, dict):
        skipped["malformed_json"] += 1
        return None
    try:
        vals = [obj[f] for f in FIELDS]
    except KeyError:
        skipped["missing_field"] += 1
        return None
    if not all(isinstance(v, str) for v in vals):
        skipped["bad_field_type"] += 1
        return None
    try:
        ts = parse_timestamp(vals[3])
    except (ValueError, OverflowError):
        skipped["bad_timestamp"] += 1
        return None
    cc = obj.get("comment_count")
    if cc in ("", None):
        cc = None
    else:
        try:
            cc = int(cc)
        except (TypeError, ValueError):
            skipped["bad_comment_count"] += 1
            return None
    return PostRecord(vals[0], vals[1], vals[2], ts, vals[4], cc)


def _iter_jsonl(fh, skipped: Counter) -> Iterator[PostRecord]:
    for line in fh:
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            skipped["malformed_json"] += 1
            continue
        rec = _record_from_mapping(obj, skipped)
        if rec is not None:
            yield rec


def _iter_csv(fh, skipped: Counter) -> Iterator[PostRecord]:
    reader = csv.DictReader(fh)
    missing = [f for f in FIELDS if f not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"CSV header lacks columns {missing}")
    for row in reader:
        if None in row or any(row[f] is None for f in FIELDS):
            skipped["malformed_csv"] += 1
            continue
        rec = _record_from_mapping(row, skipped)
        if rec is not None:
            yield rec


def parse_corpus(
    path,
    fmt: str = "jsonl",
    time_window: Optional[Tuple[datetime, datetime]] = None,
    skipped: Optional[Counter] = None,
) -> Iterator[PostRecord]:
    """Stream PostRecords from a JSONL or CSV file.

    Bad lines never abort the read; they are tallied by reason in ``skipped``
    (pass your own Counter to inspect it). Records outside ``time_window``
    (inclusive bounds) are dropped and counted as ``outside_window``.
    """
    if skipped is None:
        skipped = Counter()
    if fmt not in ("jsonl", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    lo = hi = None
    if time_window is not None:
        lo, hi = time_window
    with open(Path(path), encoding="utf-8", newline="" if fmt == "csv" else None) as fh:
        it = _iter_jsonl(fh, skipped) if fmt == "jsonl" else _iter_csv(fh, skipped)
        for rec in it:
            if (lo is not None and rec.timestamp < lo) or (hi is not None and rec.timestamp > hi):
                skipped["outside_window"] += 1
                continue
            yield rec
    bad = {k: v for k, v in skipped.items() if k != "outside_window"}
    if bad:
        log.warning("skipped lines in %s: %s", path, dict(bad))


def record_to_json(rec: PostRecord) -> str:
    obj = {
        "post_id": rec.post_id,
        "user_id": rec.user_id,
        "location_id": rec.location_id,
        "timestamp": format_timestamp(rec.timestamp),
        "text": rec.text,
    }
    if rec.comment_count is not None:
        obj["comment_count"] = rec.comment_count
    return json.dumps(obj, ensure_ascii=False)


def write_jsonl(records: Iterable[PostRecord], path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(record_to_json(rec))
            fh.write("\n")
            n += 1
    return n
