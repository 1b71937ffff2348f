"""Gradient boosting (logistic loss, Newton leaves) and discrete AdaBoost."""

from __future__ import annotations

import numpy as np

from .. import kernels
from .base import (
    AdaBoostParams,
    BaseClassifier,
    GBParams,
    TreeNodes,
    normalized_importances,
    sigmoid,
)

LEAF_EPS = 1e-12
ADA_EPS_MIN = 1e-10


class GradientBoosting(BaseClassifier):
    """Additive log-odds ensemble: prior + learning_rate * residual trees.

    Each round fits a regression tree to y - p and replaces leaf values
    with the Newton step sum(r) / (sum(p(1-p)) + eps).
    """

    family = "gb"

    def __init__(self, params: GBParams | None = None):
        super().__init__()
        self.params = params or GBParams()
        self.prior_: float = 0.0
        self.trees_: list[TreeNodes] = []
        self.loss_history_: list[float] = []

    @staticmethod
    def _logistic_loss(f: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(np.logaddexp(0.0, f) - y * f))

    def fit(self, X, y, feature_names=None, seed=0):
        X, y = self._pre_fit(X, y, feature_names, seed)
        yf = y.astype(np.float64)
        pbar = min(max(float(yf.mean()), 1e-12), 1.0 - 1e-12)
        self.prior_ = float(np.log(pbar / (1.0 - pbar)))
        f = np.full(len(yf), self.prior_)
        self.trees_ = []
        self.loss_history_ = [self._logistic_loss(f, yf)]
        for _ in range(self.params.n_trees):
            p = sigmoid(f)
            resid = yf - p
            hess = p * (1.0 - p)
            tree = TreeNodes.from_kernel(
                kernels.build_reg_tree(
                    X, resid, hess, self.params.max_depth, 2, LEAF_EPS
                )
            )
            self.trees_.append(tree)
            f = f + self.params.learning_rate * tree.predict_value(X)
            self.loss_history_.append(self._logistic_loss(f, yf))
        return self

    def decision_scores(self, X):
        X = self._check_X(X)
        f = np.full(len(X), self.prior_)
        for tree in self.trees_:
            f += self.params.learning_rate * tree.predict_value(X)
        return f

    def predict_proba(self, X):
        return sigmoid(self.decision_scores(X))

    def predict_score(self, X):
        return self.predict_proba(X)

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def feature_importances(self):
        raw = np.sum([t.importances for t in self.trees_], axis=0)
        return normalized_importances(raw)

    def state_payload(self):
        return {"prior": self.prior_, "trees": [t.to_payload() for t in self.trees_]}

    def load_state(self, payload):
        self.prior_ = float(payload["prior"])
        self.trees_ = [TreeNodes.from_payload(t) for t in payload["trees"]]


class AdaBoost(BaseClassifier):
    """Discrete AdaBoost over shallow weighted trees.

    alpha_t = 0.5*ln((1-e)/e); stops early on e >= 0.5 (round discarded) or
    e <= eps_min (alpha capped, round kept). sign(0) predicts negative.
    """

    family = "adaboost"

    def __init__(self, params: AdaBoostParams | None = None):
        super().__init__()
        self.params = params or AdaBoostParams()
        self.trees_: list[TreeNodes] = []
        self.alphas_: list[float] = []
        self.loss_history_: list[float] = []

    def fit(self, X, y, feature_names=None, seed=0):
        X, y = self._pre_fit(X, y, feature_names, seed)
        n = len(y)
        ypm = np.where(y == 1, 1.0, -1.0)
        w = np.full(n, 1.0 / n)
        margin = np.zeros(n)
        self.trees_ = []
        self.alphas_ = []
        self.loss_history_ = [float(np.mean(np.exp(-ypm * margin)))]
        alpha_cap = 0.5 * np.log((1.0 - ADA_EPS_MIN) / ADA_EPS_MIN)
        for _ in range(self.params.n_rounds):
            tree = TreeNodes.from_kernel(
                kernels.build_cls_tree(
                    X, y, w, self.params.stump_depth, 2, X.shape[1], 0
                )
            )
            h = np.where(tree.predict_value(X) > 0.5, 1.0, -1.0)
            err = float(w[h != ypm].sum())
            if err >= 0.5:
                break
            if err <= ADA_EPS_MIN:
                alpha = alpha_cap
                stop = True
            else:
                alpha = 0.5 * np.log((1.0 - err) / err)
                stop = False
            self.trees_.append(tree)
            self.alphas_.append(float(alpha))
            margin = margin + alpha * h
            self.loss_history_.append(float(np.mean(np.exp(-ypm * margin))))
            if stop:
                break
            w = w * np.exp(-alpha * ypm * h)
            w = w / w.sum()
        return self

    def decision_function(self, X):
        X = self._check_X(X)
        margin = np.zeros(len(X))
        for tree, alpha in zip(self.trees_, self.alphas_):
            h = np.where(tree.predict_value(X) > 0.5, 1.0, -1.0)
            margin += alpha * h
        return margin

    def predict_score(self, X):
        return self.decision_function(X)

    def predict(self, X):
        return (self.decision_function(X) > 0.0).astype(np.int64)

    def feature_importances(self):
        if not self.trees_:
            return np.zeros(self.n_features_ or 0)
        raw = np.zeros(self.n_features_)
        for tree, alpha in zip(self.trees_, self.alphas_):
            raw += alpha * normalized_importances(tree.importances)
        return normalized_importances(raw)

    def state_payload(self):
        return {
            "alphas": self.alphas_,
            "trees": [t.to_payload() for t in self.trees_],
        }

    def load_state(self, payload):
        self.alphas_ = [float(a) for a in payload["alphas"]]
        self.trees_ = [TreeNodes.from_payload(t) for t in payload["trees"]]
