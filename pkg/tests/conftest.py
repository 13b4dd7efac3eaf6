import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hashspread.corpus import LocationTable, build_index_columns  # noqa: E402
from hashspread.synth import WorldSpec, generate  # noqa: E402

DATA = Path(__file__).parent / "data"


def make_locations(coords: dict) -> LocationTable:
    ids = list(coords)
    return LocationTable(ids, ids, [coords[i][0] for i in ids], [coords[i][1] for i in ids])


def index_from_occurrences(occs, coords, **kwargs):
    """One post per occurrence tuple (hashtag, location, ts[, user[, text_suffix]])."""
    post_ids, users, locs, ts, texts = [], [], [], [], []
    for i, o in enumerate(occs):
        post_ids.append(f"p{i:06d}")
        users.append(o[3] if len(o) > 3 else f"u{i}")
        locs.append(o[1])
        ts.append(int(o[2]))
        texts.append(f"#{o[0]}" + (o[4] if len(o) > 4 else ""))
    return build_index_columns(post_ids, users, locs, ts, texts, make_locations(coords), **kwargs)


def random_mini_corpus(rng: np.random.Generator, max_cities=10, max_per_tag=50, n_tags=None):
    """Random small corpus: occurrence tuples plus a coordinate map."""
    nc = int(rng.integers(2, max_cities + 1))
    coords = {f"L{i}": (float(rng.uniform(47, 55)), float(rng.uniform(6, 15))) for i in range(nc)}
    names = list(coords)
    nt = int(rng.integers(1, 6)) if n_tags is None else n_tags
    occs = []
    for t in range(nt):
        n = int(rng.integers(2, max_per_tag + 1))
        k = int(rng.integers(1, nc + 1))
        cities = rng.choice(names, size=k, replace=False)
        # coarse time grid so same-second and same-day ties happen
        base = int(rng.integers(0, 40)) * 86400
        for _ in range(n):
            ts = base + int(rng.integers(0, 30)) * int(rng.choice([1, 3600, 86400]))
            occs.append((f"t{t}", str(rng.choice(cities)), ts, f"u{int(rng.integers(0, 10))}"))
    return occs, coords


@pytest.fixture(scope="session")
def default_corpus():
    return generate(WorldSpec())


@pytest.fixture(scope="session")
def default_index(default_corpus):
    return default_corpus.build_index()
