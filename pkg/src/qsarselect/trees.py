"""CART-style trees and bagged forests over one or many numeric outputs.

A single builder covers regression trees, multi-output regression forests
and (via one-hot targets, where summed variance reduction coincides with
the Gini gain) classification forests.  Split search is vectorized across
candidate features; ties are broken by the first-encountered best split in
feature index order, which makes every tree deterministic given its seed.
"""

import numpy as np

__all__ = ["DecisionTree", "Forest", "ForestClassifier"]


def _best_split(X_node, Y_node, min_bucket):
    """Best (feature, threshold) by summed-SSE reduction, or None.

    X_node holds only the candidate feature columns, in ascending original
    index order; Y_node is (n, d).  Returns (local_feature, threshold,
    gain) where gain is the SSE decrease of the best valid split.
    """
    n = X_node.shape[0]
    order = np.argsort(X_node, axis=0, kind="stable")
    xs = np.take_along_axis(X_node, order, axis=0)

    Yo = Y_node[order]  # (n, q, d)
    cum = np.cumsum(Yo, axis=0)
    cum_sq = np.cumsum(Yo * Yo, axis=0)
    total = cum[-1]
    total_sq = cum_sq[-1]

    left_n = np.arange(1, n, dtype=np.float64)[:, None, None]
    right_n = n - left_n
    sse_left = cum_sq[:-1] - cum[:-1] ** 2 / left_n
    sse_right = (total_sq - cum_sq[:-1]) - (total - cum[:-1]) ** 2 / right_n
    score = (sse_left + sse_right).sum(axis=2)  # (n-1, q)

    pos = np.arange(1, n)[:, None]
    valid = (xs[:-1] < xs[1:]) & (pos >= min_bucket) & (n - pos >= min_bucket)
    if not valid.any():
        return None

    score = np.where(valid, score, np.inf)
    flat_idx = int(np.argmin(score.T.ravel()))  # feature-major: first best wins
    local_feat, split_pos = divmod(flat_idx, n - 1)
    best = score[split_pos, local_feat]

    parent_sse = float((total_sq - total * total / n).sum())
    gain = parent_sse - float(best)
    if gain <= 1e-12 * max(1.0, parent_sse):
        return None
    threshold = 0.5 * (xs[split_pos, local_feat] + xs[split_pos + 1, local_feat])
    return local_feat, float(threshold), gain


class DecisionTree:
    """Binary regression tree minimizing summed squared error over outputs.

    Parameters
    ----------
    min_split : int
        A node is considered for splitting only if it holds at least this
        many rows.
    min_bucket : int
        Every leaf must hold at least this many training rows.
    mtry : int or None
        Number of candidate features drawn (without replacement) at each
        node; None examines all features.
    max_depth : int or None
        Depth limit; the root has depth 0.
    """

    def __init__(self, min_split=2, min_bucket=1, mtry=None, max_depth=None):
        if min_split < 2 or min_bucket < 1:
            raise ValueError("min_split must be >= 2 and min_bucket >= 1")
        self.min_split = min_split
        self.min_bucket = min_bucket
        self.mtry = mtry
        self.max_depth = max_depth
        self._feature = None
        self._threshold = None
        self._left = None
        self._right = None
        self._value = None

    def fit(self, X, Y, rng=None):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or X.shape[0] != Y.shape[0] or X.shape[0] == 0:
            raise ValueError("X must be (n, p) and Y (n, d) with n >= 1")
        if self.mtry is not None and rng is None:
            raise ValueError("mtry requires an rng")
        self.n_features_ = X.shape[1]
        self.n_outputs_ = Y.shape[1]

        feature, threshold, left, right, value = [], [], [], [], []

        def build(rows, depth):
            node = len(feature)
            feature.append(-1)
            threshold.append(np.nan)
            left.append(-1)
            right.append(-1)
            value.append(Y[rows].mean(axis=0))

            n = rows.size
            if n < self.min_split or n < 2 * self.min_bucket:
                return node
            if self.max_depth is not None and depth >= self.max_depth:
                return node

            p = X.shape[1]
            if self.mtry is not None and self.mtry < p:
                feats = np.sort(rng.choice(p, size=self.mtry, replace=False))
            else:
                feats = np.arange(p)

            found = _best_split(X[np.ix_(rows, feats)], Y[rows], self.min_bucket)
            if found is None:
                return node
            local_feat, thr, _ = found
            feat = int(feats[local_feat])

            go_left = X[rows, feat] <= thr
            feature[node] = feat
            threshold[node] = thr
            left[node] = build(rows[go_left], depth + 1)
            right[node] = build(rows[~go_left], depth + 1)
            return node

        build(np.arange(X.shape[0]), 0)
        self._feature = np.asarray(feature, dtype=np.int32)
        self._threshold = np.asarray(threshold, dtype=np.float64)
        self._left = np.asarray(left, dtype=np.int32)
        self._right = np.asarray(right, dtype=np.int32)
        self._value = np.asarray(value, dtype=np.float64)
        return self

    def predict(self, X):
        """Leaf mean vectors for each row of X, shape (n, d)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        node_of = np.zeros(X.shape[0], dtype=np.int32)
        for i in range(self._feature.shape[0]):
            f = self._feature[i]
            if f < 0:
                continue
            at = node_of == i
            if not at.any():
                continue
            goes_left = X[at, f] <= self._threshold[i]
            idx = np.flatnonzero(at)
            node_of[idx[goes_left]] = self._left[i]
            node_of[idx[~goes_left]] = self._right[i]
        return self._value[node_of]

    @property
    def n_nodes(self) -> int:
        return int(self._feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int((self._feature < 0).sum())

    def leaf_sizes(self, X):
        """Training-row count per leaf when X is the training matrix."""
        X = np.asarray(X, dtype=np.float64)
        node_of = np.zeros(X.shape[0], dtype=np.int32)
        for i in range(self._feature.shape[0]):
            f = self._feature[i]
            if f < 0:
                continue
            at = node_of == i
            if not at.any():
                continue
            goes_left = X[at, f] <= self._threshold[i]
            idx = np.flatnonzero(at)
            node_of[idx[goes_left]] = self._left[i]
            node_of[idx[~goes_left]] = self._right[i]
        leaves = np.flatnonzero(self._feature < 0)
        return np.asarray([(node_of == leaf).sum() for leaf in leaves])

    def features_used(self):
        """Sorted unique feature indices appearing in split nodes."""
        return np.unique(self._feature[self._feature >= 0])


class Forest:
    """Bagged ensemble of :class:`DecisionTree` averaging leaf vectors."""

    def __init__(self, n_trees=500, min_split=2, min_bucket=1, mtry=None,
                 max_depth=None, bootstrap=True):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.n_trees = n_trees
        self.min_split = min_split
        self.min_bucket = min_bucket
        self.mtry = mtry
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.trees_ = []

    def fit(self, X, Y, rng):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        n = X.shape[0]
        self.trees_ = []
        # One child seed per tree keeps tree t identical no matter how many
        # trees run or in which order.
        tree_seeds = rng.integers(0, 2**63 - 1, size=self.n_trees)
        for t in range(self.n_trees):
            tree_rng = np.random.default_rng(tree_seeds[t])
            tree = DecisionTree(self.min_split, self.min_bucket, self.mtry, self.max_depth)
            if self.bootstrap:
                rows = tree_rng.integers(0, n, size=n)
                tree.fit(X[rows], Y[rows], tree_rng)
            else:
                tree.fit(X, Y, tree_rng)
            self.trees_.append(tree)
        return self

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        acc = self.trees_[0].predict(X).copy()
        for tree in self.trees_[1:]:
            acc += tree.predict(X)
        return acc / len(self.trees_)


class ForestClassifier:
    """Random forest classifier by majority vote over per-tree leaf classes.

    Targets are one-hot encoded internally, so the summed-variance split
    criterion the trees use is exactly the Gini impurity decrease.  Vote
    ties resolve to the lowest class index.
    """

    def __init__(self, n_trees=500, min_split=2, min_bucket=1, mtry="sqrt",
                 bootstrap=True):
        self.n_trees = n_trees
        self.min_split = min_split
        self.min_bucket = min_bucket
        self.mtry = mtry
        self.bootstrap = bootstrap
        self.classes_ = None
        self.forest_ = None

    def _resolve_mtry(self, p):
        if self.mtry == "sqrt":
            return max(1, int(np.ceil(np.sqrt(p))))
        if self.mtry is None or self.mtry >= p:
            return None
        return int(self.mtry)

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        self.classes_, codes = np.unique(y, return_inverse=True)
        onehot = np.zeros((len(codes), len(self.classes_)))
        onehot[np.arange(len(codes)), codes] = 1.0
        self.forest_ = Forest(
            n_trees=self.n_trees,
            min_split=self.min_split,
            min_bucket=self.min_bucket,
            mtry=self._resolve_mtry(X.shape[1]),
            bootstrap=self.bootstrap,
        )
        self.forest_.fit(X, onehot, rng)
        return self

    def vote_counts(self, X):
        """Per-row vote counts over classes, one vote per tree."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        counts = np.zeros((X.shape[0], len(self.classes_)))
        rows = np.arange(X.shape[0])
        for tree in self.forest_.trees_:
            votes = np.argmax(tree.predict(X), axis=1)
            counts[rows, votes] += 1.0
        return counts

    def predict(self, X):
        counts = self.vote_counts(X)
        return self.classes_[np.argmax(counts, axis=1)]
