"""Gradient boosted decision trees, built from first principles.

The weak learner is a depth-limited regression tree with exact greedy
splits: every boundary between distinct sorted values of every feature
is scanned, and the split maximizing the usual gradient/hessian gain
G_L^2/H_L + G_R^2/H_R - G^2/H wins. Regression boosts on residuals with
unit hessians (leaf value = mean residual); classification boosts the
logistic loss with Newton leaf values sum(y - p) / sum(p (1 - p)).

The feature matrix is argsorted once per fit; tree nodes carry their
per-feature sorted row indices and partition them on the way down, so
no re-sorting happens inside the boosting loop.

Training is deterministic: splits are exact, ties break by feature
index then boundary position, and no subsampling is performed. The
``seed`` parameter is carried on the estimators for interface parity
but does not influence the fit.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

_H_EPS = 1e-12
_MIN_GAIN = 1e-12
_MIN_ROWS = 10


def _node_split(X, g, h, order, min_leaf):
    """Exact greedy split for the rows in ``order``; None when nothing improves.

    ``order`` holds the node's row indices sorted per feature, shape
    (node size, n_features).
    """
    m, d = order.shape
    if m < 2 * min_leaf:
        return None
    cols = np.arange(d)
    xs = X[order, cols]
    gl = np.cumsum(g[order], axis=0)[:-1]
    hl = np.cumsum(h[order], axis=0)[:-1]
    g_total = float(g[order[:, 0]].sum())
    h_total = float(h[order[:, 0]].sum())
    gr = g_total - gl
    hr = h_total - hl

    counts = np.arange(1, m)[:, None]
    valid = (xs[1:] > xs[:-1]) & (counts >= min_leaf) & (m - counts >= min_leaf)
    if not valid.any():
        return None

    parent = g_total * g_total / max(h_total, _H_EPS)
    gain = gl**2 / np.maximum(hl, _H_EPS) + gr**2 / np.maximum(hr, _H_EPS) - parent
    gain = np.where(valid, gain, -np.inf)
    per_feature = gain.max(axis=0)
    feature = int(np.argmax(per_feature))
    if per_feature[feature] <= _MIN_GAIN:
        return None
    boundary = int(np.argmax(gain[:, feature]))
    threshold = 0.5 * (xs[boundary, feature] + xs[boundary + 1, feature])
    return feature, float(threshold)


def _partition(order, member_left):
    """Split a node's sorted-index matrix into the two children's, keeping order."""
    keep = member_left[order]
    m_left = int(keep[:, 0].sum())
    d = order.shape[1]
    left = order.T[keep.T].reshape(d, m_left).T
    right = order.T[~keep.T].reshape(d, order.shape[0] - m_left).T
    return left, right


def _build_tree(X, g, h, order, depth_left, min_leaf):
    rows = order[:, 0]
    if depth_left > 0:
        split = _node_split(X, g, h, order, min_leaf)
        if split is not None:
            feature, threshold = split
            goes_left = X[rows, feature] <= threshold
            if goes_left.any() and not goes_left.all():
                member_left = np.zeros(X.shape[0], dtype=bool)
                member_left[rows[goes_left]] = True
                left_order, right_order = _partition(order, member_left)
                return (
                    feature,
                    threshold,
                    _build_tree(X, g, h, left_order, depth_left - 1, min_leaf),
                    _build_tree(X, g, h, right_order, depth_left - 1, min_leaf),
                )
    return (None, float(g[rows].sum() / max(h[rows].sum(), _H_EPS)), None, None)


def _fit_tree(X, g, h, root_order, max_depth, min_leaf):
    return _build_tree(X, g, h, root_order, max_depth, min_leaf)


def _tree_apply(node, X: np.ndarray) -> np.ndarray:
    feature, value, left, right = node
    if feature is None:
        return np.full(X.shape[0], value)
    mask = X[:, feature] <= value
    out = np.empty(X.shape[0])
    out[mask] = _tree_apply(left, X[mask])
    out[~mask] = _tree_apply(right, X[~mask])
    return out


def _check_params(n_trees, max_depth, learning_rate, min_leaf):
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    if not 0 < learning_rate <= 1:
        raise ValueError("learning_rate must lie in (0, 1]")
    if min_leaf < 1:
        raise ValueError("min_leaf must be at least 1")


class BoostedTreesRegressor(BaseEstimator, RegressorMixin):
    """Least-squares boosting on residuals."""

    def __init__(self, n_trees=100, max_depth=3, learning_rate=0.1, min_leaf=5, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y):
        _check_params(self.n_trees, self.max_depth, self.learning_rate, self.min_leaf)
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        if X.shape[0] < _MIN_ROWS:
            raise ValueError(f"need at least {_MIN_ROWS} rows to train")
        self.n_features_in_ = X.shape[1]
        self.base_score_ = float(y.mean())
        root_order = np.argsort(X, axis=0, kind="stable")
        prediction = np.full(X.shape[0], self.base_score_)
        hessian = np.ones(X.shape[0])
        self.trees_ = []
        for _ in range(self.n_trees):
            tree = _fit_tree(X, y - prediction, hessian, root_order, self.max_depth, self.min_leaf)
            prediction += self.learning_rate * _tree_apply(tree, X)
            self.trees_.append(tree)
        return self

    def predict(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X, dtype=np.float64)
        prediction = np.full(X.shape[0], self.base_score_)
        for tree in self.trees_:
            prediction += self.learning_rate * _tree_apply(tree, X)
        return prediction


class BoostedTreesClassifier(BaseEstimator, ClassifierMixin):
    """Binary logistic-loss boosting with Newton leaf values."""

    def __init__(self, n_trees=100, max_depth=3, learning_rate=0.1, min_leaf=5, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y):
        _check_params(self.n_trees, self.max_depth, self.learning_rate, self.min_leaf)
        X, y = check_X_y(X, y, dtype=np.float64)
        if X.shape[0] < _MIN_ROWS:
            raise ValueError(f"need at least {_MIN_ROWS} rows to train")
        classes = np.unique(y)
        if classes.size == 1:
            raise ValueError("training labels contain a single class")
        if classes.size > 2:
            raise ValueError("only binary classification is supported")
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]

        positive = (y == classes[1]).astype(np.float64)
        n = X.shape[0]
        rate = float(np.clip(positive.mean(), 1.0 / (2 * n), 1.0 - 1.0 / (2 * n)))
        self.base_score_ = float(np.log(rate / (1.0 - rate)))
        root_order = np.argsort(X, axis=0, kind="stable")
        score = np.full(n, self.base_score_)
        self.trees_ = []
        for _ in range(self.n_trees):
            probability = expit(score)
            tree = _fit_tree(
                X, positive - probability, probability * (1.0 - probability),
                root_order, self.max_depth, self.min_leaf,
            )
            score += self.learning_rate * _tree_apply(tree, X)
            self.trees_.append(tree)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X, dtype=np.float64)
        score = np.full(X.shape[0], self.base_score_)
        for tree in self.trees_:
            score += self.learning_rate * _tree_apply(tree, X)
        return score

    def predict_proba(self, X):
        positive = expit(self.decision_function(X))
        return np.column_stack([1.0 - positive, positive])

    def predict(self, X):
        positive = self.predict_proba(X)[:, 1]
        return self.classes_[(positive >= 0.5).astype(np.int64)]
