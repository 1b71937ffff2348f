"""Decision tree and random forest classifiers.

Splits maximize information gain (bits) over midpoint thresholds of
consecutive distinct feature values. All ties resolve to the negative
class; forests vote by majority with the tie also negative.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from .base import (
    BaseClassifier,
    DTParams,
    RFParams,
    TreeNodes,
    normalized_importances,
)


def entropy_bits(class_counts) -> float:
    """Two-or-more-class entropy H(Y) = -sum p_i log2 p_i, in bits."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if (counts < 0).any() or counts.sum() <= 0:
        raise ValueError("class counts must be non-negative and not all zero")
    p = counts / counts.sum()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def information_gain(labels, split_masks) -> float:
    """Entropy reduction of a label partition: H(Y) - sum (n_c/n) H(Y_c)."""
    labels = np.asarray(labels)
    n = len(labels)
    classes = np.unique(labels)
    parent = entropy_bits([(labels == c).sum() for c in classes])
    child_term = 0.0
    covered = 0
    for mask in split_masks:
        mask = np.asarray(mask, dtype=bool)
        nc = int(mask.sum())
        covered += nc
        if nc == 0:
            continue
        child_term += (nc / n) * entropy_bits([(labels[mask] == c).sum() for c in classes])
    if covered != n:
        raise ValueError("split masks must partition the labels")
    return parent - child_term


class DecisionTree(BaseClassifier):
    family = "dt"

    def __init__(self, params: DTParams | None = None):
        super().__init__()
        self.params = params or DTParams()
        self.tree_: TreeNodes | None = None

    def fit(self, X, y, feature_names=None, seed=0):
        X, y = self._pre_fit(X, y, feature_names, seed)
        w = np.ones(len(y), dtype=np.float64)
        self.tree_ = TreeNodes.from_kernel(
            kernels.build_cls_tree(
                X,
                y,
                w,
                self.params.max_depth,
                self.params.min_samples_split,
                X.shape[1],
                0,
            )
        )
        return self

    def predict_score(self, X):
        """Positive fraction of the reached leaf."""
        return self.tree_.predict_value(self._check_X(X))

    def predict(self, X):
        return (self.predict_score(X) > 0.5).astype(np.int64)

    def feature_importances(self):
        return normalized_importances(self.tree_.importances)

    def state_payload(self):
        return {"tree": self.tree_.to_payload()}

    def load_state(self, payload):
        self.tree_ = TreeNodes.from_payload(payload["tree"])


class RandomForest(BaseClassifier):
    family = "rf"

    def __init__(self, params: RFParams | None = None):
        super().__init__()
        self.params = params or RFParams()
        self.trees_: list[TreeNodes] = []

    def fit(self, X, y, feature_names=None, seed=0):
        X, y = self._pre_fit(X, y, feature_names, seed)
        n, p = X.shape
        n_feats = max(1, int(round(self.params.feature_subsample_fraction * p)))
        rng = np.random.Generator(np.random.PCG64(self.seed))
        w = np.ones(n, dtype=np.float64)
        self.trees_ = []
        for _ in range(self.params.n_trees):
            tree_seed = int(rng.integers(1, 2**63 - 1))
            if self.params.bootstrap:
                rows = rng.integers(0, n, size=n)
                Xb = np.ascontiguousarray(X[rows])
                yb = y[rows]
            else:
                Xb, yb = X, y
            self.trees_.append(
                TreeNodes.from_kernel(
                    kernels.build_cls_tree(
                        Xb, yb, w, self.params.max_depth, 2, n_feats, tree_seed
                    )
                )
            )
        return self

    def predict_score(self, X):
        """Fraction of trees voting positive."""
        X = self._check_X(X)
        votes = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees_:
            votes += tree.predict_value(X) > 0.5
        return votes / len(self.trees_)

    def predict(self, X):
        return (self.predict_score(X) > 0.5).astype(np.int64)

    def feature_importances(self):
        raw = np.sum([t.importances for t in self.trees_], axis=0)
        return normalized_importances(raw)

    def state_payload(self):
        return {"trees": [t.to_payload() for t in self.trees_]}

    def load_state(self, payload):
        self.trees_ = [TreeNodes.from_payload(t) for t in payload["trees"]]
