"""Base regression learner registry and the strategy abstraction.

Each learner exposes ``fit(X, y, rng)`` and ``predict(X)``; the registry
maps a short name plus a validated hyperparameter map to a fresh
estimator.  Tree-based learners default to the conventional node-size
settings (min_split=20, min_bucket=7; forests with 500 trees and
ceil(p/3) candidate features per split); kernel ridge regressors with RBF
and Tanimoto kernels stand in for the SVR variants.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import FPFCFP4, Dataset, Representation
from .trees import DecisionTree, Forest

__all__ = [
    "LearnerSpec",
    "Strategy",
    "TrainedModel",
    "train",
    "learner_names",
    "learner_defaults",
    "is_fingerprint_only",
    "tanimoto_kernel",
    "tanimoto_matrix",
    "rbf_matrix",
]


@dataclass(frozen=True)
class LearnerSpec:
    """Registry key plus hyperparameter overrides.

    ``hyperparams`` may be given as a mapping; it is stored as a sorted
    tuple of (name, value) pairs so specs stay hashable and picklable.
    """

    name: str
    hyperparams: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.name not in _REGISTRY:
            raise ValueError(
                f"unknown learner {self.name!r}; registry has {sorted(_REGISTRY)}"
            )
        params = dict(self.hyperparams)
        info = _REGISTRY[self.name]
        unknown = set(params) - set(info.defaults)
        if unknown:
            raise ValueError(
                f"{self.name}: invalid hyperparameters {sorted(unknown)}; "
                f"accepted: {sorted(info.defaults)}"
            )
        object.__setattr__(self, "hyperparams", tuple(sorted(params.items())))

    def resolved(self) -> dict:
        params = dict(_REGISTRY[self.name].defaults)
        params.update(dict(self.hyperparams))
        return params


@dataclass(frozen=True)
class Strategy:
    """A (learner, representation) pair — the unit of algorithm selection."""

    learner: LearnerSpec
    representation: Representation

    def __post_init__(self):
        if is_fingerprint_only(self.learner.name) and not self.representation.is_fingerprint:
            raise ValueError(
                f"{self.learner.name} is restricted to the {FPFCFP4} representation, "
                f"got {self.representation.kind}"
            )

    @property
    def id(self) -> str:
        return f"{self.learner.name}.{self.representation.kind}"


class TrainedModel:
    """Opaque predictor bound to the feature width it was trained on."""

    def __init__(self, estimator, n_features, strategy_name):
        self._estimator = estimator
        self.n_features = n_features
        self.name = strategy_name

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"{self.name}: model trained on {self.n_features} features, got {X.shape[1]}"
            )
        return np.asarray(self._estimator.predict(X), dtype=np.float64).reshape(-1)


def train(spec: LearnerSpec, dataset: Dataset, seed: int = 0) -> TrainedModel:
    """Fit ``spec``'s learner on an imputed dataset.

    Stochastic learners consume ``seed``; deterministic ones ignore it.
    """
    if dataset.has_missing:
        raise ValueError(f"{dataset.target_id}: impute missing values before training")
    info = _REGISTRY[spec.name]
    if info.fingerprint_only and not dataset.representation.is_fingerprint:
        raise ValueError(f"{spec.name} requires the {FPFCFP4} representation")
    estimator = info.factory(spec.resolved())
    rng = np.random.default_rng(seed)
    estimator.fit(dataset.features, dataset.activity, rng)
    return TrainedModel(estimator, dataset.n_features, spec.name)


# ---------------------------------------------------------------------------
# kernels


def tanimoto_kernel(x, y) -> float:
    """Tanimoto similarity |x AND y| / |x OR y| of two binary vectors.

    Defined as 1.0 when both vectors are all-zero.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.shape != y.shape:
        raise ValueError("vectors must have equal length")
    for v in (x, y):
        if not np.isin(v, (0.0, 1.0)).all():
            raise ValueError("tanimoto_kernel requires binary {0,1} input")
    inter = float(np.minimum(x, y).sum())
    union = float(np.maximum(x, y).sum())
    if union == 0.0:
        return 1.0
    return inter / union


def tanimoto_matrix(A, B) -> np.ndarray:
    """Pairwise Tanimoto similarities between rows of two binary matrices."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    for M in (A, B):
        if not np.isin(M, (0.0, 1.0)).all():
            raise ValueError("tanimoto_matrix requires binary {0,1} input")
    inter = A @ B.T
    union = A.sum(axis=1)[:, None] + B.sum(axis=1)[None, :] - inter
    out = np.ones_like(inter)
    np.divide(inter, union, out=out, where=union > 0)
    return out


def rbf_matrix(A, B, gamma) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


# ---------------------------------------------------------------------------
# estimators


class _LinearRegression:
    """Ordinary least squares with intercept.

    Rank-deficient designs are refit with a tiny ridge jitter (1e-8) and a
    warning instead of failing; many fingerprint datasets are singular.
    """

    def __init__(self, params):
        self.jitter = params["jitter"]

    def fit(self, X, y, rng):
        A = np.column_stack([np.ones(len(X)), X])
        coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
        if rank < A.shape[1]:
            warnings.warn(
                "singular design matrix; refitting with ridge jitter", stacklevel=2
            )
            G = A.T @ A + self.jitter * np.eye(A.shape[1])
            coef = np.linalg.solve(G, A.T @ y)
        self.intercept_ = coef[0]
        self.coef_ = coef[1:]
        return self

    def predict(self, X):
        return self.intercept_ + X @ self.coef_


class _Ridge:
    """Ridge on centered, unit-variance features; intercept unpenalized."""

    def __init__(self, params):
        self.lam = params["lambda"]
        if self.lam < 0:
            raise ValueError("ridge lambda must be >= 0")

    def fit(self, X, y, rng):
        self.mu_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd_ = np.where(sd > 0, sd, 1.0)
        Z = (X - self.mu_) / self.sd_
        self.y_mean_ = y.mean()
        yc = y - self.y_mean_
        G = Z.T @ Z + self.lam * np.eye(Z.shape[1])
        try:
            self.coef_ = np.linalg.solve(G, Z.T @ yc)
        except np.linalg.LinAlgError:
            self.coef_ = np.linalg.lstsq(Z, yc, rcond=None)[0]
        return self

    def predict(self, X):
        return self.y_mean_ + ((X - self.mu_) / self.sd_) @ self.coef_


class _ElasticNet:
    """Elastic net by cyclic coordinate descent on standardized features.

    The usual lambda path is collapsed to a single CV-free default:
    ``lambda = lambda_frac * lambda_max`` where lambda_max is the smallest
    penalty that zeroes every coefficient.
    """

    def __init__(self, params):
        self.mixing = params["mixing"]
        self.lam = params["lambda"]
        self.lambda_frac = params["lambda_frac"]
        self.max_iter = params["max_iter"]
        self.tol = params["tol"]
        if not 0 < self.mixing <= 1:
            raise ValueError("mixing must be in (0, 1]")

    def fit(self, X, y, rng):
        n, p = X.shape
        self.mu_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd_ = np.where(sd > 0, sd, 1.0)
        Z = (X - self.mu_) / self.sd_
        self.y_mean_ = y.mean()
        yc = y - self.y_mean_

        lam = self.lam
        if lam is None:
            lam_max = np.abs(Z.T @ yc).max() / (n * self.mixing)
            lam = self.lambda_frac * lam_max

        l1 = lam * self.mixing
        l2 = lam * (1.0 - self.mixing)
        beta = np.zeros(p)
        resid = yc.copy()
        col_sq = (Z * Z).sum(axis=0) / n
        for _ in range(self.max_iter):
            delta = 0.0
            for j in range(p):
                if col_sq[j] == 0:
                    continue
                rho = (Z[:, j] @ resid) / n + col_sq[j] * beta[j]
                new = np.sign(rho) * max(abs(rho) - l1, 0.0) / (col_sq[j] + l2)
                if new != beta[j]:
                    resid += Z[:, j] * (beta[j] - new)
                    delta = max(delta, abs(new - beta[j]))
                    beta[j] = new
            if delta < self.tol:
                break
        self.coef_ = beta
        return self

    def predict(self, X):
        return self.y_mean_ + ((X - self.mu_) / self.sd_) @ self.coef_


class _KNearest:
    """k-nearest-neighbor regression, Euclidean, mean of neighbor responses."""

    def __init__(self, params):
        self.k = params["k"]
        if self.k < 1:
            raise ValueError("k must be >= 1")

    def fit(self, X, y, rng):
        self.X_ = X.copy()
        self.y_ = y.copy()
        return self

    def predict(self, X):
        k = min(self.k, len(self.y_))
        sq = (
            (X * X).sum(axis=1)[:, None]
            + (self.X_ * self.X_).sum(axis=1)[None, :]
            - 2.0 * X @ self.X_.T
        )
        # stable sort keeps neighbor choice deterministic under distance ties
        order = np.argsort(sq, axis=1, kind="stable")[:, :k]
        return self.y_[order].mean(axis=1)


class _RegressionTree:
    def __init__(self, params):
        self.tree = DecisionTree(
            min_split=params["min_split"], min_bucket=params["min_bucket"]
        )

    def fit(self, X, y, rng):
        self.tree.fit(X, y)
        return self

    def predict(self, X):
        return self.tree.predict(X)[:, 0]


class _RandomForest:
    def __init__(self, params):
        self.params = params

    def fit(self, X, y, rng):
        mtry = self.params["mtry"]
        if mtry is None:
            mtry = max(1, int(np.ceil(X.shape[1] / 3)))
        self.forest = Forest(
            n_trees=self.params["n_trees"],
            min_split=self.params["min_split"],
            min_bucket=self.params["min_bucket"],
            mtry=None if mtry >= X.shape[1] else mtry,
            bootstrap=self.params["bootstrap"],
        )
        self.forest.fit(X, y, rng)
        return self

    def predict(self, X):
        return self.forest.predict(X)[:, 0]


class _GradientBoosting:
    """Least-squares boosting of shallow trees with shrinkage.

    Each stage fits the current residuals on a without-replacement subsample
    of ``bag_fraction`` of the rows, so the learner consumes the seed.
    """

    def __init__(self, params):
        self.n_trees = params["n_trees"]
        self.depth = params["depth"]
        self.learning_rate = params["learning_rate"]
        self.min_obs_node = params["min_obs_node"]
        self.bag_fraction = params["bag_fraction"]

    def fit(self, X, y, rng):
        n = len(y)
        self.base_ = y.mean()
        resid = y - self.base_
        self.trees_ = []
        n_bag = max(2 * self.min_obs_node, int(round(self.bag_fraction * n)))
        n_bag = min(n_bag, n)
        for _ in range(self.n_trees):
            rows = rng.choice(n, size=n_bag, replace=False) if n_bag < n else np.arange(n)
            tree = DecisionTree(
                min_split=2, min_bucket=self.min_obs_node, max_depth=self.depth
            )
            tree.fit(X[rows], resid[rows])
            resid -= self.learning_rate * tree.predict(X)[:, 0]
            self.trees_.append(tree)
        return self

    def predict(self, X):
        out = np.full(np.atleast_2d(X).shape[0], self.base_)
        for tree in self.trees_:
            out += self.learning_rate * tree.predict(X)[:, 0]
        return out


class _KernelRidge:
    """Kernel ridge regression on a centered response."""

    def __init__(self, params, kernel):
        self.lam = params["lambda"]
        self.kernel = kernel
        if self.lam <= 0:
            raise ValueError("kernel ridge lambda must be > 0")

    def fit(self, X, y, rng):
        self.X_ = X.copy()
        self.y_mean_ = y.mean()
        K = self.kernel(X, X)
        self.alpha_ = np.linalg.solve(K + self.lam * np.eye(len(y)), y - self.y_mean_)
        return self

    def predict(self, X):
        return self.y_mean_ + self.kernel(X, self.X_) @ self.alpha_


class _RbfKernelRidge(_KernelRidge):
    def __init__(self, params):
        super().__init__(params, kernel=None)
        self.gamma = params["gamma"]

    def fit(self, X, y, rng):
        gamma = self.gamma if self.gamma is not None else 1.0 / X.shape[1]
        self.kernel = lambda A, B: rbf_matrix(A, B, gamma)
        return super().fit(X, y, rng)


class _TanimotoKernelRidge(_KernelRidge):
    def __init__(self, params):
        super().__init__(params, kernel=tanimoto_matrix)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class _LearnerInfo:
    factory: object
    defaults: dict
    fingerprint_only: bool = False
    stochastic: bool = False


_REGISTRY = {
    "lm": _LearnerInfo(_LinearRegression, {"jitter": 1e-8}),
    "ridge": _LearnerInfo(_Ridge, {"lambda": 1.0}),
    "glmnet": _LearnerInfo(
        _ElasticNet,
        {"mixing": 0.5, "lambda": None, "lambda_frac": 0.01, "max_iter": 1000, "tol": 1e-7},
    ),
    "fnn": _LearnerInfo(_KNearest, {"k": 1}),
    "rtree": _LearnerInfo(_RegressionTree, {"min_split": 20, "min_bucket": 7}),
    "rforest": _LearnerInfo(
        _RandomForest,
        {"n_trees": 500, "min_split": 20, "min_bucket": 7, "mtry": None, "bootstrap": True},
        stochastic=True,
    ),
    "gbm": _LearnerInfo(
        _GradientBoosting,
        {"n_trees": 100, "depth": 1, "learning_rate": 0.1, "min_obs_node": 10,
         "bag_fraction": 0.5},
        stochastic=True,
    ),
    "ksvm": _LearnerInfo(_RbfKernelRidge, {"lambda": 0.1, "gamma": None}),
    "ksvmfp": _LearnerInfo(_TanimotoKernelRidge, {"lambda": 0.1}, fingerprint_only=True),
}


def learner_names():
    return tuple(sorted(_REGISTRY))


def learner_defaults(name: str) -> dict:
    return dict(_REGISTRY[name].defaults)


def is_fingerprint_only(name: str) -> bool:
    return _REGISTRY[name].fingerprint_only
