"""Cross-validate every classifier on a synthetic labeled set, with the
feature-group ablation for one model.

    python3 scripts/run_classification.py --per-class 100 --seed 42
"""
import argparse
import json

from hashspread.classify import CLASSES, ablation, cross_validate
from hashspread.classify.models import MODELS
from hashspread.features import feature_table
from hashspread.synth import WorldSpec, generate, labeled_set_from_ledger


def labeled_set(corpus, per_class):
    idx = corpus.build_index()
    names, X = feature_table(idx)
    cls = [corpus.ledger["hashtags"][n]["class"] for n in names]
    pick = sorted(i for c in CLASSES for i in [j for j, k in enumerate(cls) if k == c.value][:per_class])
    ls = labeled_set_from_ledger(corpus.ledger, [names[i] for i in pick])
    return X[pick], ls.y()


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--synth-seed", type=int, default=7)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ablate-model", default="lda")
    p.add_argument("--out")
    args = p.parse_args(argv)
    X, y = labeled_set(generate(WorldSpec(seed=args.synth_seed)), args.per_class)
    cv = dict(k=args.k, repeats=args.repeats, seed=args.seed)
    results = {}
    for m in MODELS:
        r = cross_validate(m, X, y, **cv)
        results[m] = json.loads(r.to_json())
        print(f"{m:<12} accuracy {r.accuracy_mean:.3f} +- {r.accuracy_std:.3f}   "
              f"macro F1 {r.macro_f1_mean:.3f}")
    results["ablation"] = ablation(args.ablate_model, X, y, **cv)
    print("ablation", json.dumps(results["ablation"]))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
