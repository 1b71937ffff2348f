"""Shared classifier interface, hyperparameter records, and tree storage."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..errors import DimensionMismatchError
from .. import kernels


@dataclass(slots=True)
class TreeNodes:
    """Flat node arrays produced by the tree kernels."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importances: np.ndarray

    @classmethod
    def from_kernel(cls, result: tuple) -> "TreeNodes":
        feature, threshold, left, right, value, n_nodes, importances = result
        return cls(
            feature[:n_nodes].copy(),
            threshold[:n_nodes].copy(),
            left[:n_nodes].copy(),
            right[:n_nodes].copy(),
            value[:n_nodes].copy(),
            importances.copy(),
        )

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return kernels.predict_tree(
            self.feature, self.threshold, self.left, self.right, self.value, X
        )

    def to_payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "importances": self.importances.tolist(),
        }

    @classmethod
    def from_payload(cls, d: dict) -> "TreeNodes":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64),
            np.asarray(d["importances"], dtype=np.float64),
        )


@dataclass(slots=True)
class Standardizer:
    """Train-split mean/std scaling, applied to test data as-is."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0.0, scale, 1.0)
        return cls(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale

    def to_payload(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_payload(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"]), np.asarray(d["scale"]))


class BaseClassifier:
    """fit / predict / predict_score plus JSON-able state.

    Labels are 0 (negative screen) / 1 (positive screen). `predict_score`
    returns the family's native score channel: probability for LR and GB,
    margin for SVM and AdaBoost, vote or leaf positive fraction for RF/DT.
    """

    family: str = "?"

    def __init__(self) -> None:
        self.feature_names: list[str] | None = None
        self.seed: int = 0
        self.n_features_: int | None = None

    def fit(self, X, y, feature_names=None, seed=0):
        raise NotImplementedError

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def feature_importances(self) -> np.ndarray:
        """Impurity-decrease importances normalized to sum 1 (zeros if no splits)."""
        raise NotImplementedError(f"{self.family} has no impurity importances")

    def _check_X(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or self.n_features_ is None or X.shape[1] != self.n_features_:
            raise DimensionMismatchError(
                f"expected {self.n_features_} features, got {X.shape}"
            )
        return X

    def _pre_fit(self, X, y, feature_names, seed) -> tuple[np.ndarray, np.ndarray]:
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) != len(y):
            raise ValueError("X must be 2-D with one label per row")
        self.n_features_ = X.shape[1]
        self.feature_names = list(feature_names) if feature_names is not None else None
        self.seed = int(seed)
        return X, y

    # Serialization ----------------------------------------------------

    def state_payload(self) -> dict:
        raise NotImplementedError

    def load_state(self, payload: dict) -> None:
        raise NotImplementedError

    def params_payload(self) -> dict:
        return asdict(self.params)  # type: ignore[attr-defined]

    def to_dict(self) -> dict:
        return {
            "schema": "wearscreen-model/1",
            "family": self.family,
            "params": self.params_payload(),
            "feature_names": self.feature_names,
            "seed": self.seed,
            "n_features": self.n_features_,
            "state": self.state_payload(),
        }


def normalized_importances(raw: np.ndarray) -> np.ndarray:
    total = raw.sum()
    if total <= 0.0:
        return np.zeros_like(raw)
    return raw / total


@dataclass(slots=True)
class DTParams:
    max_depth: int = 6
    min_samples_split: int = 2


@dataclass(slots=True)
class LRParams:
    learning_rate: float = 0.1
    l2_lambda: float = 1e-3
    epochs: int = 300


@dataclass(slots=True)
class RFParams:
    n_trees: int = 100
    max_depth: int = 8
    feature_subsample_fraction: float = 0.5
    bootstrap: bool = True


@dataclass(slots=True)
class SVMParams:
    kernel: str = "rbf"
    C: float = 1.0
    gamma: float = 0.1
    tol: float = 1e-3
    max_passes: int = 10
    max_iter: int = 2000


@dataclass(slots=True)
class GBParams:
    n_trees: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3


@dataclass(slots=True)
class AdaBoostParams:
    n_rounds: int = 100
    stump_depth: int = 1


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
