"""From-scratch classifiers: kNN, CART, Gaussian naive Bayes, multinomial
logistic regression, LDA and the ZeroR baseline.

Every model takes integer class labels 0..n_classes-1 and exposes
``fit``, ``predict`` and ``params`` (a flat dict of arrays, used to compare
fitted state bit-for-bit).
"""
from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


class NotFitted(RuntimeError):
    pass


def _check_X(X, d=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-D feature matrix")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected {d} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature value")
    return X


class Classifier:
    n_classes: int = 4

    def __init__(self, n_classes: int = 4):
        self.n_classes = n_classes
        self.d = None

    def fit(self, X, y):
        X = _check_X(X)
        y = np.asarray(y, dtype=np.int64)
        if len(X) == 0 or len(X) != len(y):
            raise ValueError("need a nonempty training set with one label per row")
        if y.min() < 0 or y.max() >= self.n_classes:
            raise ValueError("label out of range")
        self.d = X.shape[1]
        self._fit(X, y)
        return self

    def predict(self, X) -> np.ndarray:
        if self.d is None:
            raise NotFitted(type(self).__name__)
        X = np.asarray(X, dtype=np.float64)
        if X.size == 0:
            return np.zeros(0, dtype=np.int64)
        return self._predict(_check_X(X, self.d))

    def params(self) -> dict:
        raise NotImplementedError


class ZeroR(Classifier):
    def _fit(self, X, y):
        # bincount argmax picks the smallest label on ties
        self.majority = int(np.argmax(np.bincount(y, minlength=self.n_classes)))

    def _predict(self, X):
        return np.full(len(X), self.majority, dtype=np.int64)

    def params(self):
        return {"majority": np.array([self.majority])}


class KNN(Classifier):
    def __init__(self, n_classes: int = 4, k: int = 5):
        super().__init__(n_classes)
        self.k = k

    def _fit(self, X, y):
        self.X = X.copy()
        self.y = y.copy()

    def _predict(self, X):
        d2 = ((X[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        k = min(self.k, len(self.X))
        out = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(d2):
            nn = np.argsort(row, kind="stable")[:k]  # equal distances keep the smaller index
            labels = self.y[nn]
            votes = np.bincount(labels, minlength=self.n_classes)
            best = np.flatnonzero(votes == votes.max())
            # vote tie: the tied class whose member is nearest wins
            out[i] = labels[np.isin(labels, best)][0]
        return out

    def params(self):
        return {"X": self.X, "y": self.y}


class GaussianNB(Classifier):
    var_floor = 1e-9

    def _fit(self, X, y):
        counts = np.bincount(y, minlength=self.n_classes)
        if np.any(counts == 0):
            raise ValueError(f"naive Bayes needs every class in training; counts={counts.tolist()}")
        self.log_prior = np.log(counts / counts.sum())
        self.mean = np.array([X[y == c].mean(axis=0) for c in range(self.n_classes)])
        var = np.array([X[y == c].var(axis=0) for c in range(self.n_classes)])
        self.var = np.maximum(var, self.var_floor)

    def _predict(self, X):
        ll = -0.5 * (np.log(2 * np.pi * self.var)[None] + (X[:, None, :] - self.mean[None]) ** 2
                     / self.var[None]).sum(axis=2)
        return np.argmax(ll + self.log_prior, axis=1)

    def params(self):
        return {"log_prior": self.log_prior, "mean": self.mean, "var": self.var}


class LDA(Classifier):
    """Shared pooled covariance, ridge of 1e-6 * trace / d on the diagonal."""

    ridge = 1e-6

    def _fit(self, X, y):
        counts = np.bincount(y, minlength=self.n_classes)
        if np.any(counts == 0):
            raise ValueError(f"LDA needs every class in training; counts={counts.tolist()}")
        n, d = X.shape
        self.means = np.array([X[y == c].mean(axis=0) for c in range(self.n_classes)])
        centered = X - self.means[y]
        dof = max(n - self.n_classes, 1)
        cov = centered.T @ centered / dof
        lam = self.ridge * np.trace(cov) / d
        if lam <= 0:
            lam = self.ridge
        self.cov = cov + lam * np.eye(d)
        sol = np.linalg.solve(self.cov, self.means.T)  # d x K
        self.coef = sol.T
        self.intercept = -0.5 * np.einsum("kd,dk->k", self.means, sol) + np.log(counts / n)

    def decision_function(self, X):
        return X @ self.coef.T + self.intercept

    def _predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)

    def params(self):
        return {"means": self.means, "cov": self.cov, "coef": self.coef, "intercept": self.intercept}


class LogisticRegression(Classifier):
    """Multinomial logistic regression, L2 on weights (not on intercepts).

    Objective: sum of per-sample negative log-likelihoods + l2/2 * ||W||^2,
    minimised by Nesterov-accelerated gradient descent with a fixed 1/L step
    and adaptive restart, until the gradient norm drops below ``tol``.
    """

    def __init__(self, n_classes: int = 4, l2: float = 1.0, tol: float = 1e-6,
                 max_iter: int = 200_000):
        super().__init__(n_classes)
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    @staticmethod
    def objective(theta, X, Y, l2):
        """(loss, gradient) for packed parameters theta of shape (d+1, K)."""
        Z = X @ theta[:-1] + theta[-1]
        Z = Z - Z.max(axis=1, keepdims=True)
        logsum = np.log(np.exp(Z).sum(axis=1))
        P = np.exp(Z - logsum[:, None])
        W = theta[:-1]
        loss = float(-(Y * (Z - logsum[:, None])).sum() + 0.5 * l2 * (W * W).sum())
        G = P - Y
        grad = np.vstack([X.T @ G + l2 * W, G.sum(axis=0)[None]])
        return loss, grad

    def _fit(self, X, y):
        present = np.flatnonzero(np.bincount(y, minlength=self.n_classes))
        self.classes = present
        n, d = X.shape
        K = len(present)
        Y = (y[:, None] == present[None]).astype(np.float64)
        theta = np.zeros((d + 1, K))
        if K == 1:
            self.theta, self.n_iter, self.converged = theta, 0, True
            return
        Xb = np.hstack([X, np.ones((n, 1))])
        lip = 0.5 * np.linalg.norm(Xb, 2) ** 2 + self.l2
        step = 1.0 / lip
        v = theta.copy()
        t = 1.0
        loss_prev = np.inf
        restarted = False
        self.converged = False
        for it in range(self.max_iter):
            loss, g = self.objective(v, X, Y, self.l2)
            new = v - step * g
            loss_new, g_new = self.objective(new, X, Y, self.l2)
            if np.linalg.norm(g_new) < self.tol:
                theta = new
                self.converged = True
                break
            # restart momentum on an increase; the plain step taken right after a
            # restart is always accepted, since near the optimum the loss change
            # can be below its rounding noise
            if loss_new > loss_prev and not restarted:
                t = 1.0
                v = theta
                restarted = True
                continue
            restarted = False
            t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
            v = new + ((t - 1) / t_next) * (new - theta)
            theta, t, loss_prev = new, t_next, loss_new
        self.theta = theta
        self.n_iter = it + 1
        if not self.converged:
            log.warning("logistic regression stopped after %d iterations without reaching tol=%g",
                        self.n_iter, self.tol)

    def _predict(self, X):
        Z = X @ self.theta[:-1] + self.theta[-1]
        return self.classes[np.argmax(Z, axis=1)]

    def params(self):
        return {"theta": self.theta, "classes": self.classes}


class CART(Classifier):
    """Gini tree; stops at max_depth, pure nodes, or when no split leaves
    min_leaf samples on both sides."""

    def __init__(self, n_classes: int = 4, max_depth: int = 8, min_leaf: int = 3):
        super().__init__(n_classes)
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def _fit(self, X, y):
        # flat arrays: feature, threshold, left, right, leaf value
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []
        self._grow(X, y, 0)
        self.feature = np.array(self.feature, dtype=np.int64)
        self.threshold = np.array(self.threshold, dtype=np.float64)
        self.left = np.array(self.left, dtype=np.int64)
        self.right = np.array(self.right, dtype=np.int64)
        self.value = np.array(self.value, dtype=np.int64)

    def _new_node(self):
        for a in (self.feature, self.threshold, self.left, self.right, self.value):
            a.append(-1)
        return len(self.value) - 1

    def _grow(self, X, y, depth):
        node = self._new_node()
        counts = np.bincount(y, minlength=self.n_classes)
        self.value[node] = int(np.argmax(counts))
        if depth >= self.max_depth or counts.max() == len(y) or len(y) < 2 * self.min_leaf:
            return node
        split = self._best_split(X, y, counts)
        if split is None:
            return node
        f, thr = split
        mask = X[:, f] <= thr
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self._grow(X[mask], y[mask], depth + 1)
        self.right[node] = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    def _best_split(self, X, y, counts):
        n = len(y)
        parent = 1.0 - ((counts / n) ** 2).sum()
        best = None
        best_imp = parent - 1e-12
        onehot = np.eye(self.n_classes)[y]
        for f in range(X.shape[1]):
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            left = np.cumsum(onehot[order], axis=0)[:-1]  # left counts after i+1 samples
            nl = np.arange(1, n)
            nr = n - nl
            right = counts[None] - left
            gl = 1.0 - ((left / nl[:, None]) ** 2).sum(axis=1)
            gr = 1.0 - ((right / nr[:, None]) ** 2).sum(axis=1)
            imp = (nl * gl + nr * gr) / n
            ok = (xs[1:] > xs[:-1]) & (nl >= self.min_leaf) & (nr >= self.min_leaf)
            if not ok.any():
                continue
            imp = np.where(ok, imp, np.inf)
            i = int(np.argmin(imp))
            if imp[i] < best_imp:
                best_imp = imp[i]
                best = (f, 0.5 * (xs[i] + xs[i + 1]))
        return best

    def _predict(self, X):
        out = np.empty(len(X), dtype=np.int64)
        for i, x in enumerate(X):
            node = 0
            while self.left[node] >= 0:
                node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
            out[i] = self.value[node]
        return out

    def params(self):
        return {"feature": self.feature, "threshold": self.threshold, "left": self.left,
                "right": self.right, "value": self.value}


MODELS = {
    "zeror": ZeroR,
    "knn": KNN,
    "cart": CART,
    "naive_bayes": GaussianNB,
    "logistic": LogisticRegression,
    "lda": LDA,
}


def make_model(name: str, n_classes: int = 4, **kwargs) -> Classifier:
    try:
        cls = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return cls(n_classes=n_classes, **kwargs)
