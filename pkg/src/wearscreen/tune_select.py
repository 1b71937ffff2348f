"""Leakage-safe feature elimination and hyperparameter search.

Both operate on a training split only; the caller wires them inside each
outer cross-validation fold. Inner folds are grouped by participant so no
participant's rows straddle a fit/score boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewGroupsError
from .models import RFParams, make_model
from .models.tree import RandomForest


@dataclass(slots=True)
class SearchTrial:
    trial_id: int
    family: str
    params: dict
    objective: float
    seed: int


@dataclass(slots=True)
class EliminationRound:
    round: int
    n_features: int
    dropped: list[str]
    score: float
    se: float


@dataclass(slots=True)
class FeatureMask:
    indices: np.ndarray
    names: list[str]
    history: list[EliminationRound] = field(default_factory=list)


def _child_seed(*key: int) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(1)[0])


def grouped_kfold(groups: np.ndarray, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Row-index (train, test) splits with whole groups per side."""
    groups = np.asarray(groups)
    uniq = np.unique(groups)
    if len(uniq) < 2:
        raise TooFewGroupsError(f"need >= 2 groups, got {len(uniq)}")
    k = min(k, len(uniq))
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(uniq))
    fold_of = {uniq[g]: i % k for i, g in enumerate(order)}
    folds = []
    assignment = np.array([fold_of[g] for g in groups])
    for f in range(k):
        test = np.flatnonzero(assignment == f)
        train = np.flatnonzero(assignment != f)
        folds.append((train, test))
    return folds


def _f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom > 0 else 0.0


def _cv_f1(
    family: str,
    params: dict,
    X: np.ndarray,
    y: np.ndarray,
    folds: list[tuple[np.ndarray, np.ndarray]],
    seed: int,
) -> tuple[float, float]:
    """Mean and standard error of per-fold F1 for one configuration."""
    scores = []
    for fi, (train, test) in enumerate(folds):
        ytr = y[train]
        if ytr.min() == ytr.max():
            pred = np.full(len(test), int(round(ytr.mean())))
        else:
            model = make_model(family, params)
            model.fit(X[train], ytr, seed=_child_seed(seed, fi))
            pred = model.predict(X[test])
        scores.append(_f1(y[test], pred))
    scores = np.asarray(scores)
    se = scores.std(ddof=1) / math.sqrt(len(scores)) if len(scores) > 1 else 0.0
    return float(scores.mean()), float(se)


def rfecv(
    X: np.ndarray,
    y: np.ndarray,
    groups: np.ndarray,
    base: RFParams,
    seed: int,
    feature_names: list[str] | None = None,
    k: int = 3,
    drop_fraction: float = 0.1,
) -> FeatureMask:
    """Recursive feature elimination scored by grouped k-fold F1.

    Each round a forest ranks the active features by impurity-decrease
    importance and the lowest ceil(drop_fraction) (at least 1) are dropped.
    Elimination stops once the score falls more than one standard error
    below the best seen, or a single feature remains; the best-scoring
    feature set is returned.
    """
    X = np.asarray(X, dtype=np.float64)
    n_features = X.shape[1]
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(n_features)]
    uniq = np.unique(groups)
    if len(uniq) < 3:
        raise TooFewGroupsError(f"rfecv needs >= 3 groups, got {len(uniq)}")
    folds = grouped_kfold(groups, k, _child_seed(seed, 0))
    base_params = {
        "n_trees": base.n_trees,
        "max_depth": base.max_depth,
        "feature_subsample_fraction": base.feature_subsample_fraction,
        "bootstrap": base.bootstrap,
    }

    active = np.arange(n_features)
    history: list[EliminationRound] = []
    best_mean = -np.inf
    best_se = 0.0
    best_active = active.copy()
    rnd = 0
    while True:
        mean, se = _cv_f1("rf", base_params, X[:, active], y, folds, _child_seed(seed, 1, rnd))
        history.append(EliminationRound(rnd, len(active), [], mean, se))
        if mean > best_mean:
            best_mean = mean
            best_se = se
            best_active = active.copy()
        if mean < best_mean - best_se or len(active) == 1:
            break
        ranker = RandomForest(RFParams(**base_params))
        ranker.fit(X[:, active], y, seed=_child_seed(seed, 2, rnd))
        importances = ranker.feature_importances()
        n_drop = max(1, math.ceil(drop_fraction * len(active)))
        order = np.argsort(importances, kind="stable")
        drop_local = order[:n_drop]
        history[-1].dropped = [feature_names[active[i]] for i in drop_local]
        keep = np.ones(len(active), dtype=bool)
        keep[drop_local] = False
        active = active[keep]
        rnd += 1
    return FeatureMask(
        best_active, [feature_names[i] for i in best_active], history
    )


# Hyperparameter search -------------------------------------------------

@dataclass(frozen=True)
class Dim:
    name: str
    kind: str  # "int" | "float" | "cat"
    low: float = 0.0
    high: float = 0.0
    log: bool = False
    choices: tuple = ()


SEARCH_SPACES: dict[str, tuple[Dim, ...]] = {
    "dt": (
        Dim("max_depth", "int", 2, 12),
        Dim("min_samples_split", "int", 2, 10),
    ),
    "lr": (
        Dim("learning_rate", "float", 1e-2, 1.0, log=True),
        Dim("l2_lambda", "float", 1e-5, 1.0, log=True),
        Dim("epochs", "int", 100, 500),
    ),
    "rf": (
        Dim("n_trees", "int", 50, 400),
        Dim("max_depth", "int", 2, 12),
        Dim("feature_subsample_fraction", "float", 0.1, 1.0),
    ),
    "svm": (
        Dim("kernel", "cat", choices=("linear", "rbf")),
        Dim("C", "float", 1e-2, 1e2, log=True),
        Dim("gamma", "float", 1e-3, 1e1, log=True),
    ),
    "gb": (
        Dim("n_trees", "int", 50, 300),
        Dim("learning_rate", "float", 0.01, 0.3, log=True),
        Dim("max_depth", "int", 2, 6),
    ),
    "adaboost": (
        Dim("n_rounds", "int", 50, 400),
        Dim("stump_depth", "int", 1, 3),
    ),
}

TPE_WARMUP = 10
TPE_CANDIDATES = 24


def _to_unit(dim: Dim, v: float) -> float:
    if dim.log:
        return (math.log(v) - math.log(dim.low)) / (math.log(dim.high) - math.log(dim.low))
    return (v - dim.low) / (dim.high - dim.low)


def _from_unit(dim: Dim, u: float) -> float:
    u = min(max(u, 0.0), 1.0)
    if dim.log:
        return math.exp(math.log(dim.low) + u * (math.log(dim.high) - math.log(dim.low)))
    return dim.low + u * (dim.high - dim.low)


def _sample_random(dims: tuple[Dim, ...], rng: np.random.Generator) -> dict:
    params = {}
    for dim in dims:
        if dim.kind == "cat":
            params[dim.name] = dim.choices[int(rng.integers(len(dim.choices)))]
        elif dim.kind == "int":
            params[dim.name] = int(rng.integers(int(dim.low), int(dim.high) + 1))
        else:
            params[dim.name] = float(_from_unit(dim, float(rng.random())))
    return params


def _kde_logpdf(u: float, centers: np.ndarray, bw: float) -> float:
    """Log density of a Gaussian mixture over unit-scaled values."""
    z = (u - centers) / bw
    dens = np.mean(np.exp(-0.5 * z * z)) / (bw * math.sqrt(2.0 * math.pi))
    return math.log(dens + 1e-12)


def _tpe_propose(
    dims: tuple[Dim, ...], trials: list[SearchTrial], rng: np.random.Generator
) -> dict:
    objectives = np.array([t.objective for t in trials])
    median = float(np.median(objectives))
    good = [t for t in trials if t.objective >= median]
    bad = [t for t in trials if t.objective < median]
    if not bad:  # all tied; fall back to random exploration
        return _sample_random(dims, rng)

    per_dim: list[dict] = []
    for dim in dims:
        if dim.kind == "cat":
            g_counts = np.ones(len(dim.choices))
            b_counts = np.ones(len(dim.choices))
            for t in good:
                g_counts[dim.choices.index(t.params[dim.name])] += 1
            for t in bad:
                b_counts[dim.choices.index(t.params[dim.name])] += 1
            per_dim.append(
                {"g": g_counts / g_counts.sum(), "b": b_counts / b_counts.sum()}
            )
        else:
            gu = np.array([_to_unit(dim, t.params[dim.name]) for t in good])
            bu = np.array([_to_unit(dim, t.params[dim.name]) for t in bad])
            bw_g = max(float(gu.std()) * len(gu) ** -0.2, 0.05)
            bw_b = max(float(bu.std()) * len(bu) ** -0.2, 0.05)
            per_dim.append({"gu": gu, "bu": bu, "bw_g": bw_g, "bw_b": bw_b})

    best_score = -np.inf
    best_params: dict = {}
    for _ in range(TPE_CANDIDATES):
        cand: dict = {}
        score = 0.0
        for dim, model in zip(dims, per_dim):
            if dim.kind == "cat":
                c = int(rng.choice(len(dim.choices), p=model["g"]))
                cand[dim.name] = dim.choices[c]
                score += math.log(model["g"][c]) - math.log(model["b"][c])
            else:
                center = model["gu"][int(rng.integers(len(model["gu"])))]
                u = float(center + rng.normal(0.0, model["bw_g"]))
                u = min(max(u, 0.0), 1.0)
                v = _from_unit(dim, u)
                if dim.kind == "int":
                    v = int(round(v))
                    v = int(min(max(v, dim.low), dim.high))
                    u = _to_unit(dim, v)
                cand[dim.name] = v
                score += _kde_logpdf(u, model["gu"], model["bw_g"]) - _kde_logpdf(
                    u, model["bu"], model["bw_b"]
                )
        if score > best_score:
            best_score = score
            best_params = cand
    return best_params


def hyperparameter_search(
    X: np.ndarray,
    y: np.ndarray,
    groups: np.ndarray,
    family: str,
    budget: int,
    strategy: str = "random",
    seed: int = 0,
    k: int = 5,
) -> tuple[dict, list[SearchTrial]]:
    """Best hyperparameters by mean inner-CV F1 plus the full study log.

    strategy="random" draws i.i.d. from the family's space; "tpe" switches
    after 10 warm-up trials to density-ratio proposals over past trials.
    Ties between trials go to the lower trial_id.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if strategy not in ("random", "tpe"):
        raise ValueError(f"unknown strategy {strategy!r}")
    dims = SEARCH_SPACES[family]
    folds = grouped_kfold(groups, k, _child_seed(seed, 100))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 101])))
    trials: list[SearchTrial] = []
    for t in range(budget):
        if strategy == "tpe" and t >= TPE_WARMUP:
            params = _tpe_propose(dims, trials, rng)
        else:
            params = _sample_random(dims, rng)
        trial_seed = _child_seed(seed, 102, t)
        objective, _ = _cv_f1(family, params, X, y, folds, trial_seed)
        trials.append(SearchTrial(t, family, params, objective, trial_seed))
    best = max(trials, key=lambda tr: (tr.objective, -tr.trial_id))
    return dict(best.params), trials


def study_log_csv(trials: list[SearchTrial]) -> str:
    import json

    lines = ["trial_id,family,params_json,objective,seed"]
    for t in trials:
        params = json.dumps(t.params, sort_keys=True).replace('"', "'")
        lines.append(f'{t.trial_id},{t.family},"{params}",{t.objective!r},{t.seed}')
    return "\n".join(lines) + "\n"
