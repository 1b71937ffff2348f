"""Support vector machine trained by pairwise coordinate ascent on the dual.

Linear or RBF kernel, box constraint 0 <= alpha_i <= C. Standardizes
features with train-split statistics. If the solver exhausts its iteration
budget the best iterate is kept and `converged_` is False.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from .base import BaseClassifier, SVMParams, Standardizer


def gram_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """W(alpha) = sum(alpha) - 1/2 * alpha^T (yy^T o K) alpha."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


class SupportVectorMachine(BaseClassifier):
    family = "svm"

    def __init__(self, params: SVMParams | None = None):
        super().__init__()
        self.params = params or SVMParams()
        self.scaler_: Standardizer | None = None
        self.sv_: np.ndarray | None = None
        self.sv_coef_: np.ndarray | None = None
        self.bias_: float = 0.0
        self.converged_: bool = True
        self.dual_objective_: float = 0.0

    def fit(self, X, y, feature_names=None, seed=0):
        X, y = self._pre_fit(X, y, feature_names, seed)
        self.scaler_ = Standardizer.fit(X)
        Xs = np.ascontiguousarray(self.scaler_.transform(X))
        ypm = np.where(y == 1, 1.0, -1.0)
        K = np.ascontiguousarray(gram_matrix(Xs, Xs, self.params.kernel, self.params.gamma))
        alpha, b, _, converged = kernels.smo_solve(
            K,
            ypm,
            float(self.params.C),
            float(self.params.tol),
            int(self.params.max_passes),
            int(self.params.max_iter),
            self.seed if self.seed else 1,
        )
        self.converged_ = bool(converged)
        self.dual_objective_ = dual_objective(K, ypm, alpha)
        keep = alpha > 1e-12
        self.sv_ = Xs[keep].copy()
        self.sv_coef_ = (alpha[keep] * ypm[keep]).copy()
        self.bias_ = float(b)
        return self

    def decision_function(self, X):
        X = self._check_X(X)
        Xs = self.scaler_.transform(X)
        if len(self.sv_) == 0:
            return np.full(len(Xs), self.bias_)
        K = gram_matrix(Xs, self.sv_, self.params.kernel, self.params.gamma)
        return K @ self.sv_coef_ + self.bias_

    def predict_score(self, X):
        return self.decision_function(X)

    def predict(self, X):
        return (self.decision_function(X) > 0.0).astype(np.int64)

    def state_payload(self):
        return {
            "sv": self.sv_.tolist(),
            "sv_coef": self.sv_coef_.tolist(),
            "bias": self.bias_,
            "converged": self.converged_,
            "scaler": self.scaler_.to_payload(),
        }

    def load_state(self, payload):
        sv = np.asarray(payload["sv"], dtype=np.float64)
        if sv.size == 0:
            sv = np.zeros((0, self.n_features_), dtype=np.float64)
        self.sv_ = sv
        self.sv_coef_ = np.asarray(payload["sv_coef"], dtype=np.float64)
        self.bias_ = float(payload["bias"])
        self.converged_ = bool(payload["converged"])
        self.scaler_ = Standardizer.from_payload(payload["scaler"])
