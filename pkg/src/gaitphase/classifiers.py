"""The six classifier families behind one train/score contract.

All models output a continuous score where higher means more
stance-like (label 1): NB the posterior, KNN the neighbor vote
fraction, DT/RF leaf or ensemble class-1 fractions, GBM the logistic of
the boosted score, SVM the signed decision margin. Every stochastic
choice is driven by the seed passed to train().
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from gaitphase import backend


class ModelKind(Enum):
    GAUSSIAN_NB = "nb"
    DECISION_TREE = "dt"
    RANDOM_FOREST = "rf"
    GRADIENT_BOOSTING = "gbm"
    SVM = "svm"
    KNN = "knn"

    @staticmethod
    def from_name(name):
        for kind in ModelKind:
            if kind.value == name.lower():
                return kind
        raise ValueError(f"unknown model {name!r}")


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


class GaussianNB:
    def __init__(self, var_smoothing=1e-9):
        self.var_smoothing = var_smoothing

    def fit(self, X, y, seed=0):
        eps = self.var_smoothing * float(X.var(axis=0).max())
        self.log_prior_ = np.empty(2)
        self.theta_ = np.empty((2, X.shape[1]))
        self.var_ = np.empty((2, X.shape[1]))
        for c in (0, 1):
            Xc = X[y == c]
            self.log_prior_[c] = math.log(Xc.shape[0] / X.shape[0])
            self.theta_[c] = Xc.mean(axis=0)
            self.var_[c] = Xc.var(axis=0) + eps
        return self

    def score(self, X):
        joint = np.empty((X.shape[0], 2))
        for c in (0, 1):
            ll = -0.5 * np.log(2 * np.pi * self.var_[c]) \
                - 0.5 * (X - self.theta_[c]) ** 2 / self.var_[c]
            joint[:, c] = self.log_prior_[c] + ll.sum(axis=1)
        return _sigmoid(joint[:, 1] - joint[:, 0])


class KNearestNeighbors:
    def __init__(self, k=5):
        self.k = k

    def fit(self, X, y, seed=0):
        self.X_ = X
        self.y_ = y.astype(np.float64)
        return self

    def score(self, X):
        k = min(self.k, self.X_.shape[0])
        out = np.empty(X.shape[0])
        sq_train = (self.X_ ** 2).sum(axis=1)
        for lo in range(0, X.shape[0], 2048):
            chunk = X[lo: lo + 2048]
            d2 = sq_train + (chunk ** 2).sum(axis=1)[:, None] - 2.0 * chunk @ self.X_.T
            # stable sort: distance ties resolve to the lowest train index
            nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[lo: lo + 2048] = self.y_[nn].mean(axis=1)
        return out


class DecisionTree:
    def __init__(self, max_depth=6, min_leaf=1, min_split=2):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.min_split = min_split

    def fit(self, X, y, seed=0):
        self.nodes_ = backend.grow_tree(
            X, y.astype(np.float64), None, np.arange(X.shape[0], dtype=np.int64),
            X.shape[1], self.max_depth, self.min_leaf, self.min_split, 0, 0.0, 1,
        )
        return self

    def score(self, X):
        return backend.predict_tree(*self.nodes_, X)


class RandomForest:
    def __init__(self, n_trees=100, max_depth=10, min_leaf=1, min_split=2,
                 mtry=None, bootstrap=True):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.min_split = min_split
        self.mtry = mtry
        self.bootstrap = bootstrap

    def fit(self, X, y, seed=0):
        n, d = X.shape
        mtry = self.mtry if self.mtry is not None else max(1, round(math.sqrt(d)))
        yf = y.astype(np.float64)
        self.trees_ = []
        for t in range(self.n_trees):
            rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
            idx = rng.integers(0, n, n) if self.bootstrap else np.arange(n, dtype=np.int64)
            tree_seed = int(rng.integers(1, 2 ** 63))
            self.trees_.append(backend.grow_tree(
                X, yf, None, idx, mtry, self.max_depth, self.min_leaf,
                self.min_split, 0, 0.0, tree_seed,
            ))
        return self

    def score(self, X):
        acc = np.zeros(X.shape[0])
        for nodes in self.trees_:
            acc += backend.predict_tree(*nodes, X)
        return acc / len(self.trees_)


class GradientBoosting:
    """Logistic-loss boosting with depth-limited Newton trees."""

    def __init__(self, n_rounds=100, learning_rate=0.1, max_depth=3,
                 min_leaf=5, reg_lambda=1e-6):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.reg_lambda = reg_lambda

    def fit(self, X, y, seed=0):
        yf = y.astype(np.float64)
        p = min(max(yf.mean(), 1e-12), 1 - 1e-12)
        self.f0_ = math.log(p / (1 - p))
        idx = np.arange(X.shape[0], dtype=np.int64)
        F = np.full(X.shape[0], self.f0_)
        self.trees_ = []
        self.train_losses_ = []
        for _ in range(self.n_rounds):
            prob = _sigmoid(F)
            g = yf - prob
            h = prob * (1.0 - prob)
            nodes = backend.grow_tree(
                X, g, h, idx, X.shape[1], self.max_depth, self.min_leaf, 2,
                1, self.reg_lambda, 1,
            )
            self.trees_.append(nodes)
            F = F + self.learning_rate * backend.predict_tree(*nodes, X)
            prob = np.clip(_sigmoid(F), 1e-12, 1 - 1e-12)
            self.train_losses_.append(
                float(-(yf * np.log(prob) + (1 - yf) * np.log(1 - prob)).mean())
            )
        return self

    def decision(self, X):
        F = np.full(X.shape[0], self.f0_)
        for nodes in self.trees_:
            F = F + self.learning_rate * backend.predict_tree(*nodes, X)
        return F

    def score(self, X):
        return _sigmoid(self.decision(X))


def rbf_gram(A, B, gamma):
    d2 = (A ** 2).sum(axis=1)[:, None] + (B ** 2).sum(axis=1)[None, :] - 2.0 * A @ B.T
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


class SupportVectorMachine:
    """C-SVM trained by SMO; score is the signed decision margin."""

    def __init__(self, C=1.0, gamma=1.0, kernel="rbf", tol=1e-3, max_iter=100_000):
        self.C = C
        self.gamma = gamma
        self.kernel = kernel
        self.tol = tol
        self.max_iter = max_iter

    def _gram(self, A, B):
        if self.kernel == "rbf":
            return rbf_gram(A, B, self.gamma)
        if self.kernel == "linear":
            return A @ B.T
        raise ValueError(f"unknown kernel {self.kernel!r}")

    def fit(self, X, y, seed=0, record_objective=False):
        ypm = np.where(y > 0, 1.0, -1.0)
        K = self._gram(X, X)
        alpha, rho, n_iter, obj, trace = backend.smo_solve(
            K, ypm, self.C, self.tol, self.max_iter, record_objective,
        )
        sv = alpha > 0
        self.support_X_ = X[sv]
        self.coef_ = (alpha * ypm)[sv]
        self.rho_ = rho
        self.alpha_ = alpha
        self.n_iter_ = n_iter
        self.dual_objective_ = obj
        self.objective_trace_ = trace
        self._fit_X = X
        self._fit_ypm = ypm
        return self

    def score(self, X):
        if self.support_X_.shape[0] == 0:
            return np.full(X.shape[0], -self.rho_)
        return self._gram(X, self.support_X_) @ self.coef_ - self.rho_

    def kkt_violation(self):
        """Largest complementarity violation on the training set."""
        margins = self._fit_ypm * self.score(self._fit_X)
        a = self.alpha_
        v_zero = np.maximum(1.0 - margins[a <= 0], 0.0)
        v_free = np.abs(1.0 - margins[(a > 0) & (a < self.C)])
        v_cap = np.maximum(margins[a >= self.C] - 1.0, 0.0)
        parts = [v for v in (v_zero, v_free, v_cap) if v.size]
        return max(float(v.max()) for v in parts) if parts else 0.0


@dataclass(frozen=True)
class TrainedModel:
    kind: ModelKind
    params: dict
    model: object
    train_row_count: int

    def score(self, X):
        return self.model.score(np.asarray(X, dtype=np.float64))


_BUILDERS = {
    ModelKind.GAUSSIAN_NB: lambda p: GaussianNB(var_smoothing=p.get("var_smoothing", 1e-9)),
    ModelKind.KNN: lambda p: KNearestNeighbors(k=p.get("k", 5)),
    ModelKind.DECISION_TREE: lambda p: DecisionTree(
        max_depth=p.get("max_depth", 6), min_leaf=p.get("min_leaf", 1)),
    ModelKind.RANDOM_FOREST: lambda p: RandomForest(
        n_trees=p.get("n_trees", 100), max_depth=p.get("max_depth", 10),
        min_leaf=p.get("min_leaf", 1), mtry=p.get("mtry"),
        bootstrap=p.get("bootstrap", True)),
    ModelKind.GRADIENT_BOOSTING: lambda p: GradientBoosting(
        n_rounds=p.get("n_rounds", 100), learning_rate=p.get("learning_rate", 0.1),
        max_depth=p.get("max_depth", 3), min_leaf=p.get("min_leaf", 5)),
    ModelKind.SVM: lambda p: SupportVectorMachine(
        C=p.get("C", 1.0), gamma=p.get("gamma", 1.0),
        kernel=p.get("kernel", "rbf")),
}


def train(kind: ModelKind, params: dict, X, y, seed: int) -> TrainedModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature value in training data")
    if np.unique(y).size < 2:
        raise ValueError("training data holds a single class")
    model = _BUILDERS[kind](params).fit(X, y, seed=seed)
    return TrainedModel(kind=kind, params=dict(params), model=model, train_row_count=X.shape[0])


def score(model: TrainedModel, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ValueError("expected scaled (n, 4) feature rows")
    return model.score(X)


# random-search spaces; scale-like parameters draw log-uniformly
DEFAULT_SPACES = {
    ModelKind.GAUSSIAN_NB: {"var_smoothing": ("logfloat", 1e-9, 1e-3)},
    ModelKind.DECISION_TREE: {"max_depth": ("int", 2, 12), "min_leaf": ("int", 1, 20)},
    ModelKind.RANDOM_FOREST: {
        "n_trees": ("int", 50, 300),
        "max_depth": ("int", 4, 16),
        "min_leaf": ("int", 1, 20),
    },
    ModelKind.GRADIENT_BOOSTING: {
        "n_rounds": ("int", 50, 300),
        "learning_rate": ("logfloat", 0.01, 0.3),
    },
    ModelKind.SVM: {"C": ("logfloat", 0.1, 100.0), "gamma": ("logfloat", 0.01, 10.0)},
    ModelKind.KNN: {"k": ("oddint", 1, 51)},
}


def sample_params(space: dict, rng: np.random.Generator) -> dict:
    if not space:
        raise ValueError("empty search space")
    params = {}
    for name in sorted(space):
        spec = space[name]
        kind, lo, hi = spec[0], spec[1], spec[2]
        if kind == "int":
            params[name] = int(rng.integers(lo, hi + 1))
        elif kind == "oddint":
            params[name] = int(lo + 2 * rng.integers(0, (hi - lo) // 2 + 1))
        elif kind == "logfloat":
            params[name] = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        elif kind == "float":
            params[name] = float(rng.uniform(lo, hi))
        elif kind == "choice":
            params[name] = spec[1][int(rng.integers(0, len(spec[1])))]
        else:
            raise ValueError(f"unknown parameter spec {spec!r}")
    return params
