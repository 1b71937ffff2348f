"""Six classifier families behind one train/predict/serialize interface."""

from __future__ import annotations

import json
from pathlib import Path

from .base import (
    AdaBoostParams,
    BaseClassifier,
    DTParams,
    GBParams,
    LRParams,
    RFParams,
    SVMParams,
)
from .boosting import AdaBoost, GradientBoosting
from .linear import LogisticRegression
from .svm import SupportVectorMachine
from .tree import DecisionTree, RandomForest, entropy_bits, information_gain

#: family tag -> (classifier class, hyperparameter dataclass)
FAMILIES: dict[str, tuple[type[BaseClassifier], type]] = {
    "dt": (DecisionTree, DTParams),
    "lr": (LogisticRegression, LRParams),
    "rf": (RandomForest, RFParams),
    "svm": (SupportVectorMachine, SVMParams),
    "gb": (GradientBoosting, GBParams),
    "adaboost": (AdaBoost, AdaBoostParams),
}

MODEL_ORDER = ("dt", "lr", "rf", "svm", "gb", "adaboost")


def make_model(family: str, params: dict | None = None) -> BaseClassifier:
    cls, params_cls = FAMILIES[family]
    return cls(params_cls(**params) if params else None)


def model_to_json(model: BaseClassifier) -> str:
    return json.dumps(model.to_dict(), sort_keys=True)


def model_from_dict(d: dict) -> BaseClassifier:
    if d.get("schema") != "wearscreen-model/1":
        raise ValueError(f"unknown model schema {d.get('schema')!r}")
    model = make_model(d["family"], d["params"])
    model.feature_names = d["feature_names"]
    model.seed = d["seed"]
    model.n_features_ = d["n_features"]
    model.load_state(d["state"])
    return model


def save_model(model: BaseClassifier, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model))


def load_model(path: str | Path) -> BaseClassifier:
    return model_from_dict(json.loads(Path(path).read_text()))


__all__ = [
    "AdaBoost",
    "AdaBoostParams",
    "BaseClassifier",
    "DTParams",
    "DecisionTree",
    "FAMILIES",
    "GBParams",
    "GradientBoosting",
    "LogisticRegression",
    "LRParams",
    "MODEL_ORDER",
    "RandomForest",
    "RFParams",
    "SupportVectorMachine",
    "SVMParams",
    "entropy_bits",
    "information_gain",
    "load_model",
    "make_model",
    "model_from_dict",
    "model_to_json",
    "save_model",
]
