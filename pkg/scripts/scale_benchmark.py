"""Time and peak memory of index build plus the full spatial/temporal pass.

The synthetic corpus is written to parquet part files first and streamed
back, so the measured phase holds only one chunk of post text at a time.
Each size runs in a fresh subprocess so peak RSS is not shared between runs.

    python3 scripts/scale_benchmark.py --uses 1000000 10000000 40000000
"""
import argparse
import json
import resource
import subprocess
import sys
import tempfile
import threading
import time
from pathlib import Path


class RssMonitor:
    """Samples resident memory; ru_maxrss alone cannot be reset between phases."""

    def __init__(self, every=0.05):
        import psutil
        self.proc = psutil.Process()
        self.every = every
        self.peak = 0
        self._stop = threading.Event()
        self._t = threading.Thread(target=self._run, daemon=True)

    def _run(self):
        while not self._stop.is_set():
            self.peak = max(self.peak, self.proc.memory_info().rss)
            time.sleep(self.every)

    def __enter__(self):
        self.peak = self.proc.memory_info().rss
        self._t.start()
        return self

    def __exit__(self, *exc):
        self._stop.set()
        self._t.join()
        self.peak = max(self.peak, self.proc.memory_info().rss)


def run_one(uses: int, hashtags: int, cities: int, chunk_rows: int, workdir: Path) -> dict:
    import gc

    import polars as pl

    from hashspread.corpus import build_index_frames
    from hashspread.spatial import spatial_table
    from hashspread.synth import WorldSpec, generate
    from hashspread.temporal import temporal_table

    t0 = time.perf_counter()
    corpus = generate(WorldSpec(cities=cities, hashtags=hashtags, uses=uses, seed=1))
    parts = []
    for i, frame in enumerate(corpus.iter_frames(chunk_rows)):
        parts.append(workdir / f"part-{i:05d}.parquet")
        frame.write_parquet(parts[-1])
    locations = corpus.locations()
    del corpus, frame
    gc.collect()
    t1 = time.perf_counter()
    with RssMonitor() as mon:
        t2 = time.perf_counter()
        idx = build_index_frames((pl.read_parquet(p) for p in parts), locations)
        t3 = time.perf_counter()
        spatial_table(idx)
        temporal_table(idx)
        t4 = time.perf_counter()
    return {
        "uses": len(idx), "hashtags": idx.n_tags, "chunk_rows": chunk_rows,
        "generate_and_write_s": t1 - t0, "index_s": t3 - t2, "metrics_s": t4 - t3,
        "index_plus_metrics_s": t4 - t2,
        "peak_rss_gb": mon.peak / 2**30,
        "process_max_rss_gb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 2**20,
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--uses", type=int, nargs="+", default=[1_000_000, 4_000_000])
    p.add_argument("--uses-per-hashtag", type=int, default=500)
    p.add_argument("--cities", type=int, default=200)
    p.add_argument("--chunk-rows", type=int, default=2_000_000)
    p.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--out", help="append JSON lines here")
    args = p.parse_args(argv)
    if args.child:
        n = args.uses[0]
        with tempfile.TemporaryDirectory() as d:
            r = run_one(n, max(4, n // args.uses_per_hashtag), args.cities, args.chunk_rows, Path(d))
        print(json.dumps(r))
        return 0
    for n in args.uses:
        cmd = [sys.executable, __file__, "--child", "--uses", str(n), "--uses-per-hashtag",
               str(args.uses_per_hashtag), "--cities", str(args.cities), "--chunk-rows", str(args.chunk_rows)]
        r = subprocess.run(cmd, capture_output=True, text=True)
        if r.returncode != 0:
            line = json.dumps({"uses": n, "failed": True, "returncode": r.returncode,
                               "stderr": r.stderr[-500:]})
        else:
            line = r.stdout.strip().splitlines()[-1]
        print(line, flush=True)
        if args.out:
            with open(args.out, "a") as fh:
                fh.write(line + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
