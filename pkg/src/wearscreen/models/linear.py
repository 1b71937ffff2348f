"""L2-regularized logistic regression via full-batch gradient descent.

Features are standardized with train-split statistics inside `fit`. The
intercept is left unregularized.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteLossError
from .base import BaseClassifier, LRParams, Standardizer, sigmoid


def lr_loss_and_grad(
    Xb: np.ndarray, y: np.ndarray, beta: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood + (lambda/2)||beta[1:]||^2 and its gradient.

    Xb carries a leading all-ones bias column.
    """
    n = len(y)
    z = Xb @ beta
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    reg = beta.copy()
    reg[0] = 0.0
    loss += 0.5 * l2_lambda * float(reg @ reg)
    grad = Xb.T @ (sigmoid(z) - y) / n + l2_lambda * reg
    return loss, grad


class LogisticRegression(BaseClassifier):
    family = "lr"

    def __init__(self, params: LRParams | None = None):
        super().__init__()
        self.params = params or LRParams()
        self.beta_: np.ndarray | None = None
        self.scaler_: Standardizer | None = None
        self.loss_history_: list[float] = []

    def fit(self, X, y, feature_names=None, seed=0):
        X, y = self._pre_fit(X, y, feature_names, seed)
        self.scaler_ = Standardizer.fit(X)
        Xs = self.scaler_.transform(X)
        Xb = np.hstack([np.ones((len(Xs), 1)), Xs])
        beta = np.zeros(Xb.shape[1], dtype=np.float64)
        yf = y.astype(np.float64)
        self.loss_history_ = []
        for _ in range(self.params.epochs):
            loss, grad = lr_loss_and_grad(Xb, yf, beta, self.params.l2_lambda)
            if not np.isfinite(loss):
                raise NonFiniteLossError(
                    f"logistic loss diverged (learning_rate={self.params.learning_rate})"
                )
            self.loss_history_.append(loss)
            beta = beta - self.params.learning_rate * grad
        self.beta_ = beta
        return self

    def predict_proba(self, X):
        X = self._check_X(X)
        Xs = self.scaler_.transform(X)
        return sigmoid(self.beta_[0] + Xs @ self.beta_[1:])

    def predict_score(self, X):
        return self.predict_proba(X)

    def predict(self, X):
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def state_payload(self):
        return {"beta": self.beta_.tolist(), "scaler": self.scaler_.to_payload()}

    def load_state(self, payload):
        self.beta_ = np.asarray(payload["beta"], dtype=np.float64)
        self.scaler_ = Standardizer.from_payload(payload["scaler"])
