"""Labels, stratified folds, leakage-safe cross-validation and reports."""
from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from ..features import FEATURE_GROUPS, FEATURE_NAMES
from .models import Classifier, make_model

log = logging.getLogger(__name__)


class HashtagClass(enum.Enum):
    LocalEvent = "local_event"
    LocalPhenomenon = "local_phenomenon"
    Event = "event"
    OtherMeme = "other_meme"


CLASSES = list(HashtagClass)
CLASS_INDEX = {c: i for i, c in enumerate(CLASSES)}


@dataclass
class LabeledSet:
    hashtags: list[str]
    labels: list[HashtagClass]
    excluded: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.hashtags)) != len(self.hashtags):
            raise ValueError("duplicate hashtag in labeled set")
        if len(self.hashtags) != len(self.labels):
            raise ValueError("one label per hashtag")

    def y(self) -> np.ndarray:
        return np.array([CLASS_INDEX[c] for c in self.labels], dtype=np.int64)

    def matrix(self, names: Sequence[str], X: np.ndarray) -> np.ndarray:
        """Rows of X (indexed like ``names``) in labeled-set order."""
        pos = {n: i for i, n in enumerate(names)}
        missing = [h for h in self.hashtags if h not in pos]
        if missing:
            raise KeyError(f"no feature vector for {missing[:5]}")
        return X[[pos[h] for h in self.hashtags]]


def read_labels(path, exclusions_path=None) -> LabeledSet:
    excluded = []
    if exclusions_path:
        with open(exclusions_path, encoding="utf-8") as fh:
            excluded = [ln.strip() for ln in fh if ln.strip()]
    skip = set(excluded)
    tags, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["hashtag"] in skip:
                continue
            tags.append(row["hashtag"])
            labels.append(HashtagClass(row["class"].strip()))
    return LabeledSet(tags, labels, excluded)


def write_labels(ls: LabeledSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["hashtag", "class"])
        for h, c in zip(ls.hashtags, ls.labels):
            w.writerow([h, c.value])


# -- preprocessing -----------------------------------------------------------

@dataclass
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray  # 1 where the training column is constant

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


def standardize(train) -> tuple[Standardizer, np.ndarray]:
    """Fit zero-mean/unit-variance scaling on ``train``; constant columns pass through."""
    X = np.asarray(train, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("empty training set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    const = std == 0
    mean = np.where(const, 0.0, mean)
    scale = np.where(const, 1.0, std)
    t = Standardizer(mean, scale)
    return t, t.apply(X)


@dataclass
class MedianImputer:
    medians: np.ndarray

    @classmethod
    def fit(cls, X) -> "MedianImputer":
        X = np.asarray(X, dtype=np.float64)
        med = np.zeros(X.shape[1])
        for j in range(X.shape[1]):
            col = X[:, j][~np.isnan(X[:, j])]
            med[j] = np.median(col) if len(col) else 0.0
        return cls(med)

    def apply(self, X) -> np.ndarray:
        X = np.array(X, dtype=np.float64)
        r, c = np.nonzero(np.isnan(X))
        X[r, c] = self.medians[c]
        return X


@dataclass
class Pipeline:
    imputer: MedianImputer
    scaler: Standardizer
    model: Classifier

    def predict(self, X) -> np.ndarray:
        return self.model.predict(self.scaler.apply(self.imputer.apply(X)))

    def params(self) -> dict:
        p = {f"model.{k}": v for k, v in self.model.params().items()}
        p["imputer.medians"] = self.imputer.medians
        p["scaler.mean"] = self.scaler.mean
        p["scaler.scale"] = self.scaler.scale
        return p


def fit_pipeline(model: str, X, y, n_classes: int = 4, **model_kwargs) -> Pipeline:
    imp = MedianImputer.fit(X)
    scaler, Xs = standardize(imp.apply(X))
    m = make_model(model, n_classes=n_classes, **model_kwargs).fit(Xs, y)
    return Pipeline(imp, scaler, m)


def train(model: str, X, y, n_classes: int = 4, **model_kwargs) -> Classifier:
    """Fit a bare model on already-prepared features."""
    return make_model(model, n_classes=n_classes, **model_kwargs).fit(X, y)


def predict(fitted: Classifier, X) -> np.ndarray:
    return fitted.predict(X)


# -- folds -------------------------------------------------------------------

def stratified_folds(y, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold number per sample; each class is dealt round-robin after a shuffle."""
    y = np.asarray(y)
    fold = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(len(idx))]
        fold[idx] = (offset + np.arange(len(idx))) % k
        offset = (offset + len(idx)) % k
    return fold


# -- reports -------------------------------------------------------------------

def confusion_matrix(truths, predictions, n_classes: int = 4) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(truths), np.asarray(predictions)), 1)
    return cm


def metrics_from_confusion(cm: np.ndarray) -> dict:
    cm = np.asarray(cm)
    tp = np.diag(cm).astype(np.float64)
    pred = cm.sum(axis=0).astype(np.float64)
    true = cm.sum(axis=1).astype(np.float64)
    no_pred = pred == 0
    precision = np.divide(tp, pred, out=np.zeros_like(tp), where=~no_pred)
    recall = np.divide(tp, true, out=np.zeros_like(tp), where=true > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    total = cm.sum()
    return {
        "precision": precision, "recall": recall, "f1": f1, "no_predictions": no_pred,
        "support": true.astype(np.int64),
        "accuracy": float(tp.sum() / total) if total else 0.0,
        "macro_f1": float(f1.mean()),
    }


@dataclass
class EvalReport:
    classes: list[str]
    precision_mean: list[float]
    precision_std: list[float]
    recall_mean: list[float]
    recall_std: list[float]
    f1_mean: list[float]
    f1_std: list[float]
    accuracy_mean: float
    accuracy_std: float
    macro_f1_mean: float
    macro_f1_std: float
    confusion: list[list[list[int]]]  # one matrix per repeat
    no_predictions: list[str]  # classes never predicted in some repeat
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_confusions(cls, cms: Sequence[np.ndarray], meta=None) -> "EvalReport":
        ms = [metrics_from_confusion(cm) for cm in cms]

        def agg(key):
            a = np.array([m[key] for m in ms], dtype=np.float64)
            return a.mean(axis=0), a.std(axis=0)

        p, r, f = agg("precision"), agg("recall"), agg("f1")
        acc, mf = agg("accuracy"), agg("macro_f1")
        flagged = np.any([m["no_predictions"] for m in ms], axis=0)
        return cls(
            classes=[c.value for c in CLASSES],
            precision_mean=p[0].tolist(), precision_std=p[1].tolist(),
            recall_mean=r[0].tolist(), recall_std=r[1].tolist(),
            f1_mean=f[0].tolist(), f1_std=f[1].tolist(),
            accuracy_mean=float(acc[0]), accuracy_std=float(acc[1]),
            macro_f1_mean=float(mf[0]), macro_f1_std=float(mf[1]),
            confusion=[np.asarray(cm).tolist() for cm in cms],
            no_predictions=[CLASSES[i].value for i in np.flatnonzero(flagged)],
            meta=dict(meta or {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=2)

    def table(self) -> str:
        lines = [f"{'class':<18}{'precision':>10}{'recall':>10}{'f1':>10}"]
        for i, c in enumerate(self.classes):
            lines.append(f"{c:<18}{self.precision_mean[i]:>10.3f}{self.recall_mean[i]:>10.3f}"
                         f"{self.f1_mean[i]:>10.3f}")
        lines.append(f"accuracy {self.accuracy_mean:.3f} +- {self.accuracy_std:.3f}, "
                     f"macro F1 {self.macro_f1_mean:.3f} +- {self.macro_f1_std:.3f}")
        return "\n".join(lines)


def evaluate(predictions, truths) -> EvalReport:
    predictions = np.asarray([CLASS_INDEX[p] if isinstance(p, HashtagClass) else p for p in predictions])
    truths = np.asarray([CLASS_INDEX[t] if isinstance(t, HashtagClass) else t for t in truths])
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths differ in length")
    if len(truths) == 0:
        raise ValueError("nothing to evaluate")
    return EvalReport.from_confusions([confusion_matrix(truths, predictions, len(CLASSES))])


# -- cross-validation ----------------------------------------------------------

@dataclass
class FoldFit:
    repeat: int
    fold: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    pipeline: Pipeline
    predictions: np.ndarray


def iter_fold_fits(model: str, X, y, k: int = 10, repeats: int = 10, seed: int = 0,
                   model_kwargs: Optional[dict] = None) -> Iterator[FoldFit]:
    """Fit one pipeline per (repeat, fold). Only training rows reach the fit."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) < k:
        raise ValueError(f"labeled set has {len(y)} samples, fewer than k={k}")
    small = [CLASSES[c].value for c, n in enumerate(np.bincount(y, minlength=len(CLASSES)))
             if 0 < n < k]
    if small:
        log.warning("classes with fewer than k=%d samples: %s", k, small)
    for r in range(repeats):
        folds = stratified_folds(y, k, np.random.default_rng(seed + r))
        for f in range(k):
            test = np.flatnonzero(folds == f)
            tr = np.flatnonzero(folds != f)
            pipe = fit_pipeline(model, X[tr], y[tr], len(CLASSES), **(model_kwargs or {}))
            yield FoldFit(r, f, tr, test, pipe, pipe.predict(X[test]))


def cross_validate(model: str, X, y, k: int = 10, repeats: int = 10, seed: int = 0,
                   model_kwargs: Optional[dict] = None) -> EvalReport:
    """Repeated stratified k-fold CV; one pooled confusion matrix per repeat."""
    y = np.asarray(y, dtype=np.int64)
    cms = [np.zeros((len(CLASSES), len(CLASSES)), dtype=np.int64) for _ in range(repeats)]
    for ff in iter_fold_fits(model, X, y, k, repeats, seed, model_kwargs):
        cms[ff.repeat] += confusion_matrix(y[ff.test_idx], ff.predictions, len(CLASSES))
    meta = {"model": model, "k": k, "repeats": repeats, "seed": seed, "n": int(len(y)),
            "features": np.asarray(X).shape[1]}
    return EvalReport.from_confusions(cms, meta)


def drop_group(X, group: str, names: Sequence[str] = FEATURE_NAMES):
    if group not in FEATURE_GROUPS:
        raise ValueError(f"unknown feature group {group!r}")
    keep = [i for i, n in enumerate(names) if n not in FEATURE_GROUPS[group]]
    return np.asarray(X)[:, keep], [names[i] for i in keep]


def ablation(model: str, X, y, groups=("spatial", "temporal", "user_diversity"), **cv_kwargs) -> dict:
    """Accuracy with everything vs. with each feature group removed."""
    base = cross_validate(model, X, y, **cv_kwargs)
    out = {"full": base.accuracy_mean}
    for g in groups:
        Xg, _ = drop_group(X, g)
        acc = cross_validate(model, Xg, y, **cv_kwargs).accuracy_mean
        out[g] = {"accuracy": acc, "delta": acc - base.accuracy_mean}
    return out
