"""Command line entry point: ``hashspread <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .corpus import (
    DEFAULT_BUCKET_EDGES,
    LocationTable,
    OccurrenceIndex,
    build_index,
    filter_first_use,
    location_histogram,
    occurrence_histogram,
    partition_by_occurrences,
)
from .ingest import parse_corpus, parse_timestamp

log = logging.getLogger("hashspread")


def _edges(s: str):
    return [int(x) for x in s.split(",") if x.strip()]


def _read_aliases(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return {r["alias"]: r["location_id"] for r in csv.DictReader(fh)}


def _aliased(records, aliases):
    from dataclasses import replace
    for r in records:
        yield replace(r, location_id=aliases.get(r.location_id, r.location_id)) if r.location_id in aliases else r


def _locations_from_records(path, fmt):
    # no coordinate file: ids only, coordinates unknown (NaN)
    ids = sorted({r.location_id for r in parse_corpus(path, fmt, skipped=Counter())})
    nan = np.full(len(ids), np.nan)
    return LocationTable(ids, list(ids), nan, nan)


def cmd_index(args):
    since = parse_timestamp(args.since) if args.since else None
    until = parse_timestamp(args.until) if args.until else None
    window = (since, until) if (since or until) else None
    if args.locations:
        locs = LocationTable.from_csv(args.locations)
    else:
        log.warning("no --locations file; spatial distances will be unavailable")
        locs = _locations_from_records(args.input, args.format)
    skipped = Counter()
    records = parse_corpus(args.input, args.format, window, skipped)
    if args.aliases:
        records = _aliased(records, _read_aliases(args.aliases))
    idx = build_index(records, locs, fold=not args.no_fold, tz_offset=args.tz_offset, skipped=skipped)
    sidecar = idx.save(args.out)
    print(json.dumps({"index": str(args.out), "totals": str(sidecar), "skipped": dict(skipped),
                      **idx.totals()}, indent=2))


def _load(args) -> OccurrenceIndex:
    idx = OccurrenceIndex.load(args.index)
    if getattr(args, "since", None):
        idx = filter_first_use(idx, parse_timestamp(args.since))
    return idx


def cmd_report(args):
    idx = _load(args)
    if args.what == "histogram":
        rows = occurrence_histogram(idx) if args.kind == "occurrences" else location_histogram(idx)
        first = "occurrences" if args.kind == "occurrences" else "locations"
        corpus_mod.write_histogram_csv(rows, args.out, [first, "hashtags"])
    else:
        from .features import spread_grid, write_grid_csv
        points, counts, xe, ye = spread_grid(idx, args.min_occurrences, args.bins)
        write_grid_csv(counts, xe, ye, args.out)
        if args.points:
            with open(args.points, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["spread_km", "spread_days"])
                w.writerows(points.tolist())
    print(args.out)


def cmd_metrics(args):
    idx = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    buckets = partition_by_occurrences(idx, _edges(args.buckets))
    codes = np.sort(np.concatenate(list(buckets.values()))) if buckets else np.zeros(0, int)
    from .spatial import spatial_cdf, write_cdf_csv
    if args.kind == "spatial":
        from .spatial import spatial_table, write_spatial_metrics_csv
        table = spatial_table(idx)
        for m, fname in (("focus", "focus_cdf.csv"), ("entropy", "entropy_cdf.csv"),
                         ("spread_km", "spread_cdf.csv")):
            write_cdf_csv(spatial_cdf(table[m], buckets), out / fname)
        write_spatial_metrics_csv(idx, table, codes, out / "spatial_metrics.csv")
    else:
        from .temporal import day_to_date, temporal_table
        table = temporal_table(idx)
        for m, fname in (("temporal_focus", "temporal_focus_cdf.csv"),
                         ("temporal_entropy", "temporal_entropy_cdf.csv"),
                         ("temporal_spread_days", "temporal_spread_cdf.csv")):
            write_cdf_csv(spatial_cdf(table[m], buckets), out / fname)
        cols = ["temporal_focus", "temporal_entropy", "temporal_spread_days", "local_variation",
                "peak_increase", "peak_decline"]
        with open(out / "temporal_metrics.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["hashtag", "uses", "peak_day", *cols])
            for c in codes:
                w.writerow([idx.tags[int(c)], int(idx.counts[c]), day_to_date(table["peak_day"][c]).isoformat(),
                            *("" if np.isnan(table[k][c]) else repr(float(table[k][c])) for k in cols)])
    print(out)


def cmd_impact(args):
    from .influence import impact_histogram
    idx = _load(args)
    counts, edges, scores = impact_histogram(idx, args.source, args.top_k, args.bins)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo", "bin_hi", "cities"])
        for i, n in enumerate(counts):
            w.writerow([repr(float(edges[i])), repr(float(edges[i + 1])), int(n)])
    if args.scores:
        with open(args.scores, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source", "target", "score"])
            for t, s in sorted(scores.items()):
                w.writerow([args.source, t, repr(s)])
    print(args.out)


def cmd_similarity(args):
    from .influence import similarity_by_distance
    idx = _load(args)
    rows = similarity_by_distance(idx, args.source, args.group_size)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mean_distance_km", "mean_similarity", "locations"])
        for d, s, n in rows:
            w.writerow([repr(d), repr(s), n])
    print(args.out)


def cmd_features(args):
    from .features import feature_table, write_features_csv
    idx = _load(args)
    names, X = feature_table(idx, args.min_occurrences)
    write_features_csv(names, X, args.out)
    print(f"{len(names)} hashtags -> {args.out}")


def cmd_classify(args):
    from .classify import ablation, cross_validate, read_labels
    from .features import read_features_csv
    names, X = read_features_csv(args.features)
    labels = read_labels(args.labels, args.exclude)
    Xl = labels.matrix(names, X)
    y = labels.y()
    kwargs = {"k": args.k, "repeats": args.repeats, "seed": args.seed}
    report = cross_validate(args.model, Xl, y, **kwargs)
    out = json.loads(report.to_json())
    if args.ablate:
        out["ablation"] = ablation(args.model, Xl, y, groups=tuple(args.ablate), **kwargs)
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(report.table())


def cmd_synth(args):
    from .synth import WorldSpec, generate
    spec = WorldSpec(cities=args.cities, hashtags=args.hashtags, uses=args.uses, seed=args.seed)
    c = generate(spec)
    n = c.write_jsonl(args.out)
    c.write_ledger(args.ledger)
    loc_path = args.locations_out or str(Path(args.out).with_suffix("")) + "_locations.csv"
    c.write_locations(loc_path)
    if args.labels_out:
        from .classify import HashtagClass, LabeledSet, write_labels
        write_labels(LabeledSet(c.tag_names, [HashtagClass(k) for k in c.tag_class]), args.labels_out)
    print(json.dumps({"posts": n, "corpus": args.out, "ledger": args.ledger,
                      "locations": loc_path}, indent=2))


def cmd_verify(args):
    from .synth import verify
    with open(args.ledger, encoding="utf-8") as fh:
        ledger = json.load(fh)
    rep = verify(ledger, OccurrenceIndex.load(args.index))
    print(json.dumps(rep, indent=2, default=str))
    return 0 if rep["ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hashspread", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add_index_args(sp, required_locations):
        sp.add_argument("--input", required=True)
        sp.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
        sp.add_argument("--locations", required=required_locations,
                        help="CSV with location_id,name,lat,lon")
        sp.add_argument("--aliases", help="CSV alias,location_id merging locations")
        sp.add_argument("--since")
        sp.add_argument("--until")
        sp.add_argument("--no-fold", action="store_true", help="keep hashtag case")
        sp.add_argument("--tz-offset", type=int, default=0, help="seconds added before day grouping")
        sp.add_argument("--out", required=True)
        sp.set_defaults(func=cmd_index)

    add_index_args(sub.add_parser("ingest", help="parse a corpus into an index"), False)
    add_index_args(sub.add_parser("index", help="build an index with a location table"), True)

    rp = sub.add_parser("report", help="summary tables over an index")
    rsub = rp.add_subparsers(dest="what", required=True)
    h = rsub.add_parser("histogram")
    h.add_argument("--index", required=True)
    h.add_argument("--kind", choices=["occurrences", "locations"], default="occurrences")
    h.add_argument("--since")
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_report)
    g = rsub.add_parser("spreadgrid")
    g.add_argument("--index", required=True)
    g.add_argument("--since")
    g.add_argument("--min-occurrences", type=int, default=30)
    g.add_argument("--bins", type=int, default=50)
    g.add_argument("--points", help="also write the per-hashtag points")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_report)

    mp = sub.add_parser("metrics", help="per-hashtag spatial or temporal metrics")
    msub = mp.add_subparsers(dest="kind", required=True)
    for kind in ("spatial", "temporal"):
        m = msub.add_parser(kind)
        m.add_argument("--index", required=True)
        m.add_argument("--since", help="keep hashtags first used at or after this instant")
        m.add_argument("--buckets", default=",".join(map(str, DEFAULT_BUCKET_EDGES)))
        m.add_argument("--out", required=True)
        m.set_defaults(func=cmd_metrics)

    ip = sub.add_parser("impact", help="impact scores from a source location")
    ip.add_argument("--index", required=True)
    ip.add_argument("--source", required=True)
    ip.add_argument("--top-k", type=int, default=500)
    ip.add_argument("--bins", type=int, default=40)
    ip.add_argument("--since")
    ip.add_argument("--scores", help="also write per-target scores")
    ip.add_argument("--out", required=True)
    ip.set_defaults(func=cmd_impact)

    sp = sub.add_parser("similarity", help="hashtag-set similarity against distance")
    sp.add_argument("--index", required=True)
    sp.add_argument("--source", required=True)
    sp.add_argument("--group-size", type=int, default=100)
    sp.add_argument("--since")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_similarity)

    fp = sub.add_parser("features", help="per-hashtag feature vectors")
    fp.add_argument("--index", required=True)
    fp.add_argument("--min-occurrences", type=int, default=30)
    fp.add_argument("--since")
    fp.add_argument("--out", required=True)
    fp.set_defaults(func=cmd_features)

    cp = sub.add_parser("classify", help="cross-validate a classifier")
    cp.add_argument("--features", required=True)
    cp.add_argument("--labels", required=True)
    cp.add_argument("--exclude", help="file with one unclassifiable hashtag per line")
    cp.add_argument("--model", default="lda",
                    choices=["knn", "cart", "naive_bayes", "logistic", "lda", "zeror"])
    cp.add_argument("--k", type=int, default=10)
    cp.add_argument("--repeats", type=int, default=10)
    cp.add_argument("--seed", type=int, default=42)
    cp.add_argument("--ablate", action="append", choices=["spatial", "temporal", "user_diversity"])
    cp.add_argument("--out")
    cp.set_defaults(func=cmd_classify)

    yp = sub.add_parser("synth", help="generate a synthetic corpus with a ledger")
    yp.add_argument("--cities", type=int, default=200)
    yp.add_argument("--hashtags", type=int, default=2000)
    yp.add_argument("--uses", type=int, default=1_000_000)
    yp.add_argument("--seed", type=int, default=7)
    yp.add_argument("--out", required=True)
    yp.add_argument("--ledger", required=True)
    yp.add_argument("--locations-out")
    yp.add_argument("--labels-out")
    yp.set_defaults(func=cmd_synth)

    vp = sub.add_parser("verify", help="check an index against a ledger")
    vp.add_argument("--ledger", required=True)
    vp.add_argument("--index", required=True)
    vp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    rc = args.func(args)
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
