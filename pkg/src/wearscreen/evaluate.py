"""Leave-one-participant-out evaluation with pooled counts and bootstrap CIs.

Each fold holds out every segment of one participant; feature elimination
and hyperparameter tuning run strictly inside the fold's training split.
Confusion counts are pooled across folds before metrics are computed; any
0/0 ratio is reported as 0 with a degeneracy flag. Confidence intervals
resample the pooled prediction list with the model fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewGroupsError
from .models import FAMILIES, RFParams, make_model

METRIC_NAMES = ("sensitivity", "specificity", "balanced_accuracy", "precision", "f1")

#: Families exposing impurity-based feature importances.
IMPORTANCE_FAMILIES = ("dt", "rf", "gb", "adaboost")


@dataclass(slots=True)
class ConfusionCounts:
    tp: int = 0
    fn: int = 0
    tn: int = 0
    fp: int = 0

    @classmethod
    def from_pairs(cls, y_true: np.ndarray, y_pred: np.ndarray) -> "ConfusionCounts":
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        return cls(
            tp=int(np.sum((y_true == 1) & (y_pred == 1))),
            fn=int(np.sum((y_true == 1) & (y_pred == 0))),
            tn=int(np.sum((y_true == 0) & (y_pred == 0))),
            fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        )

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fn + other.fn, self.tn + other.tn, self.fp + other.fp
        )

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp


def _ratio(num: int, denom: int) -> tuple[float, bool]:
    """num/denom with the 0/0 convention: value 0, flagged degenerate."""
    if denom == 0:
        return 0.0, True
    return num / denom, False


def compute_metrics(c: ConfusionCounts) -> tuple[dict[str, float], dict[str, bool]]:
    """Point metrics and per-metric degeneracy flags from pooled counts."""
    sens, f_sens = _ratio(c.tp, c.tp + c.fn)
    spec, f_spec = _ratio(c.tn, c.tn + c.fp)
    prec, f_prec = _ratio(c.tp, c.tp + c.fp)
    ba = 0.5 * (sens + spec)
    if prec + sens > 0.0:
        f1 = 2.0 * prec * sens / (prec + sens)
        f_f1 = False
    else:
        f1, f_f1 = 0.0, True
    values = {
        "sensitivity": sens,
        "specificity": spec,
        "balanced_accuracy": ba,
        "precision": prec,
        "f1": f1,
    }
    flags = {
        "sensitivity": f_sens,
        "specificity": f_spec,
        "balanced_accuracy": f_sens or f_spec,
        "precision": f_prec,
        "f1": f_f1 or f_prec or f_sens,
    }
    return values, flags


def bootstrap_ci(
    pairs: list[tuple[int, int]] | np.ndarray,
    n_bootstrap: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> dict[str, dict[str, float]]:
    """Percentile bootstrap over (true, predicted) pairs, model fixed.

    Returns per metric {lower, upper, halfwidth}. Resample r uses the
    counter-based seed (seed, r) so execution order cannot matter.
    """
    if n_bootstrap < 1:
        raise ValueError("n_bootstrap must be >= 1")
    if not (0.0 < level < 1.0):
        raise ValueError("level must be in (0, 1)")
    arr = np.asarray(pairs, dtype=np.int64)
    n = len(arr)
    samples = {m: np.empty(n_bootstrap) for m in METRIC_NAMES}
    for r in range(n_bootstrap):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, r])))
        rows = arr[rng.integers(0, n, size=n)]
        values, _ = compute_metrics(ConfusionCounts.from_pairs(rows[:, 0], rows[:, 1]))
        for m in METRIC_NAMES:
            samples[m][r] = values[m]
    lo_q = 100.0 * (1.0 - level) / 2.0
    hi_q = 100.0 - lo_q
    out = {}
    for m in METRIC_NAMES:
        lo, hi = np.percentile(samples[m], [lo_q, hi_q])
        out[m] = {
            "lower": float(lo),
            "upper": float(hi),
            "halfwidth": float((hi - lo) / 2.0),
        }
    return out


@dataclass(slots=True)
class PipelineConfig:
    """Everything one LOPO cell needs: family, tuning, RFE, seeding."""

    family: str = "rf"
    family_params: dict = field(default_factory=dict)
    tuning_strategy: str = "random"
    tuning_budget: int = 20
    inner_folds: int = 5
    rfe_enabled: bool = True
    rfe_trees: int = 50
    rfe_max_depth: int = 6
    rfe_feature_fraction: float = 0.5
    rfe_folds: int = 3
    rfe_drop_fraction: float = 0.1
    seed: int = 0


@dataclass(slots=True)
class FoldLog:
    participant: str
    train_size: int
    test_size: int
    constant: bool
    n_selected: int
    best_params: dict


@dataclass(slots=True)
class PredictionRow:
    participant: str
    week_start: int
    true: int
    predicted: int
    score: float


@dataclass(slots=True)
class EvalResult:
    counts: ConfusionCounts
    predictions: list[PredictionRow]
    fold_logs: list[FoldLog]
    importances: np.ndarray | None
    feature_names: list[str]

    def pairs(self) -> np.ndarray:
        return np.array([(p.true, p.predicted) for p in self.predictions], dtype=np.int64)


def _child_seed(*key: int) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(1)[0])


def lopo_cv(
    X: np.ndarray,
    y: np.ndarray,
    groups: np.ndarray,
    feature_names: list[str],
    cfg: PipelineConfig,
    week_starts: np.ndarray | None = None,
) -> EvalResult:
    """One fold per participant; RFE + tuning run inside each training split.

    A fold whose training split is single-class gets the training-majority
    constant classifier (ties negative) and is logged as such.
    """
    from .tune_select import hyperparameter_search, rfecv

    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    groups = np.asarray(groups)
    participants = np.unique(groups)
    if len(participants) < 2:
        raise TooFewGroupsError("lopo_cv needs >= 2 participants")
    if week_starts is None:
        week_starts = np.zeros(len(y), dtype=np.int64)
    if cfg.family not in FAMILIES:
        raise ValueError(f"unknown model family {cfg.family!r}")

    counts = ConfusionCounts()
    predictions: list[PredictionRow] = []
    fold_logs: list[FoldLog] = []
    importance_sum = np.zeros(X.shape[1])
    importance_folds = 0

    for fold_i, pid in enumerate(participants):
        test = np.flatnonzero(groups == pid)
        train = np.flatnonzero(groups != pid)
        Xtr, ytr, gtr = X[train], y[train], groups[train]
        fold_seed = _child_seed(cfg.seed, fold_i)

        if ytr.min() == ytr.max():
            majority = int(ytr[0])
            pred = np.full(len(test), majority)
            score = np.full(len(test), float(majority))
            fold_logs.append(
                FoldLog(str(pid), len(train), len(test), True, 0, {})
            )
        else:
            selected = np.arange(X.shape[1])
            if cfg.rfe_enabled and X.shape[1] > 1 and len(np.unique(gtr)) >= 3:
                mask = rfecv(
                    Xtr,
                    ytr,
                    gtr,
                    RFParams(
                        n_trees=cfg.rfe_trees,
                        max_depth=cfg.rfe_max_depth,
                        feature_subsample_fraction=cfg.rfe_feature_fraction,
                    ),
                    seed=_child_seed(fold_seed, 1),
                    feature_names=feature_names,
                    k=cfg.rfe_folds,
                    drop_fraction=cfg.rfe_drop_fraction,
                )
                selected = mask.indices
            params = dict(cfg.family_params)
            if cfg.tuning_budget >= 1:
                best, _ = hyperparameter_search(
                    Xtr[:, selected],
                    ytr,
                    gtr,
                    cfg.family,
                    budget=cfg.tuning_budget,
                    strategy=cfg.tuning_strategy,
                    seed=_child_seed(fold_seed, 2),
                    k=cfg.inner_folds,
                )
                params.update(best)
            model = make_model(cfg.family, params)
            sel_names = [feature_names[i] for i in selected]
            model.fit(Xtr[:, selected], ytr, feature_names=sel_names,
                      seed=_child_seed(fold_seed, 3))
            pred = model.predict(X[test][:, selected])
            score = model.predict_score(X[test][:, selected])
            if cfg.family in IMPORTANCE_FAMILIES:
                imp = model.feature_importances()
                full = np.zeros(X.shape[1])
                full[selected] = imp
                importance_sum += full
                importance_folds += 1
            fold_logs.append(
                FoldLog(str(pid), len(train), len(test), False, len(selected), params)
            )

        counts = counts + ConfusionCounts.from_pairs(y[test], pred)
        for row_i, s, p in zip(test, score, pred):
            predictions.append(
                PredictionRow(str(pid), int(week_starts[row_i]), int(y[row_i]), int(p), float(s))
            )

    importances = (
        importance_sum / importance_folds if importance_folds > 0 else None
    )
    return EvalResult(counts, predictions, fold_logs, importances, list(feature_names))


def predictions_csv(result: EvalResult) -> str:
    from .timeutil import format_iso_utc

    lines = ["participant,week_start,true,predicted,score"]
    for p in result.predictions:
        lines.append(
            f"{p.participant},{format_iso_utc(p.week_start)},{p.true},{p.predicted},{p.score!r}"
        )
    return "\n".join(lines) + "\n"
