"""Sweep orchestration: dataset assembly and per-cell experiment execution.

A cell is one (label, modality, granularity, model) combination. Feature
matrices are built once per granularity and shared; cells then run
independently (optionally on a process pool) with seeds derived from the
cell coordinates, so results cannot depend on scheduling order.
"""

from __future__ import annotations

import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from itertools import groupby
from pathlib import Path

import numpy as np

from .aggregate import GRANULARITIES, aggregate_series
from .errors import AllMissingError, EmptyInputError, WearscreenError
from .evaluate import (
    PipelineConfig,
    bootstrap_ci,
    compute_metrics,
    lopo_cv,
    predictions_csv,
)
from .features import feature_matrix, resolve_modalities
from .ingest import (
    LABEL_INSTRUMENTS,
    MODALITY_ORDER,
    Modality,
    parse_sensor_file,
    parse_survey_file,
)
from .models import MODEL_ORDER
from .preprocess import preprocess_series
from .segment import WeeklySegment, build_segments, inclusion_filter

LABEL_TOKENS = ("depression", "anxiety", "stress")
MODALITY_TOKEN_ORDER = ("all", "calories", "distance", "heart", "sleep", "steps")


@dataclass(slots=True)
class RunConfig:
    inputs: dict = field(default_factory=dict)
    labels: tuple = LABEL_TOKENS
    modalities: tuple = MODALITY_TOKEN_ORDER
    granularities: tuple = GRANULARITIES
    models: tuple = MODEL_ORDER
    tuning_strategy: str = "random"
    tuning_budget: int = 50
    inner_folds: int = 5
    rfe_enabled: bool = True
    rfe_trees: int = 50
    rfe_max_depth: int = 6
    rfe_feature_fraction: float = 0.5
    rfe_folds: int = 3
    rfe_drop_fraction: float = 0.1
    bootstrap_b: int = 1000
    bootstrap_level: float = 0.95
    seed: int = 0
    jobs: int = 1
    tz_offset: int = 0
    gap_cap_hours: float = 6.0
    out_dir: str = "out"

    def validate(self) -> None:
        for name in ("labels", "modalities", "granularities", "models"):
            if not getattr(self, name):
                raise ValueError(f"config {name} must be non-empty")
        for lab in self.labels:
            if lab not in LABEL_TOKENS:
                raise ValueError(f"unknown label {lab!r}")
        for tok in self.modalities:
            if tok not in MODALITY_TOKEN_ORDER:
                raise ValueError(f"unknown modality {tok!r}")
        for g in self.granularities:
            if g not in GRANULARITIES:
                raise ValueError(f"unknown granularity {g!r}")
        for m in self.models:
            if m not in MODEL_ORDER:
                raise ValueError(f"unknown model {m!r}")
        if self.tuning_strategy not in ("random", "tpe"):
            raise ValueError(f"unknown tuning strategy {self.tuning_strategy!r}")
        if not self.inputs:
            raise ValueError("config inputs must name a data directory or files")


_CONFIG_TUPLES = ("labels", "modalities", "granularities", "models")
#: Fields that affect results and belong in the manifest / config hash.
_HASHED_FIELDS = (
    "inputs",
    "labels",
    "modalities",
    "granularities",
    "models",
    "tuning_strategy",
    "tuning_budget",
    "inner_folds",
    "rfe_enabled",
    "rfe_trees",
    "rfe_max_depth",
    "rfe_feature_fraction",
    "rfe_folds",
    "rfe_drop_fraction",
    "bootstrap_b",
    "bootstrap_level",
    "seed",
    "tz_offset",
    "gap_cap_hours",
)


def config_payload(cfg: RunConfig) -> dict:
    """Result-affecting config fields (out_dir and jobs excluded)."""
    full = asdict(cfg)
    payload = {k: full[k] for k in _HASHED_FIELDS}
    for k in _CONFIG_TUPLES:
        payload[k] = list(payload[k])
    return payload


def load_run_config(path: str | Path | None, **overrides) -> RunConfig:
    """RunConfig from a JSON file plus keyword overrides (flags win)."""
    data: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
    data.update({k: v for k, v in overrides.items() if v is not None})
    for k in _CONFIG_TUPLES:
        if k in data:
            data[k] = tuple(data[k])
    if "granularities" in data:
        data["granularities"] = tuple(int(g) for g in data["granularities"])
    return RunConfig(**data)


def cell_id(label: str, modality: str, granularity: int, model: str) -> str:
    return f"{label}_{modality}_{granularity}h_{model}"


@dataclass(slots=True)
class FeatureTable:
    """Per-granularity matrices for every modality token, plus labels."""

    granularity: int
    participants: np.ndarray
    week_starts: np.ndarray
    matrices: dict
    names: dict
    labels: dict  # label token -> float array, 0/1 or NaN when absent


def _resolve_input_paths(cfg: RunConfig) -> tuple[dict[Modality, Path], Path]:
    inputs = dict(cfg.inputs)
    needed: set[Modality] = set()
    for tok in cfg.modalities:
        needed.update(resolve_modalities(tok))
    if "dir" in inputs:
        base = Path(inputs["dir"])
        paths = {m: base / f"{m.value}.csv" for m in needed}
        surveys = Path(inputs.get("surveys", base / "surveys.csv"))
    else:
        paths = {m: Path(inputs[m.value]) for m in needed}
        surveys = Path(inputs["surveys"])
    return paths, surveys


def build_tables(cfg: RunConfig) -> tuple[dict[int, FeatureTable], dict]:
    """Parse, preprocess, segment, and featurize once per granularity."""
    paths, survey_path = _resolve_input_paths(cfg)
    gap_cap_s = int(cfg.gap_cap_hours * 3600)

    surveys, survey_issues = parse_survey_file(survey_path)
    surveys_by_pid: dict[str, list] = {
        pid: list(grp) for pid, grp in groupby(surveys, key=lambda r: r.participant)
    }

    series: dict[str, dict[Modality, object]] = {}
    issue_count = len(survey_issues)
    dropped: list[str] = []
    for mod, path in sorted(paths.items(), key=lambda kv: kv[0].value):
        points, issues = parse_sensor_file(path, mod)
        issue_count += len(issues)
        for pid, grp in groupby(points, key=lambda p: p.participant):
            try:
                s = preprocess_series(list(grp), gap_cap_s)
            except (AllMissingError, EmptyInputError) as exc:
                dropped.append(f"{pid}/{mod.value}: {exc}")
                continue
            series.setdefault(pid, {})[mod] = s

    needed = set(paths)
    usable = sorted(pid for pid, by_mod in series.items() if needed <= set(by_mod))

    tables: dict[int, FeatureTable] = {}
    seg_report = {}
    for g in cfg.granularities:
        segments_by_pid: dict[str, list[WeeklySegment]] = {}
        for pid in usable:
            agg = {
                mod: aggregate_series(series[pid][mod], g, cfg.tz_offset)
                for mod in needed
            }
            segments_by_pid[pid] = build_segments(
                agg, surveys_by_pid.get(pid, []), cfg.tz_offset
            )
        kept, report = inclusion_filter(segments_by_pid)
        seg_report[g] = report
        segments = [
            seg
            for pid in sorted(kept)
            for seg in sorted(kept[pid], key=lambda s: s.week_start)
        ]
        matrices: dict[str, np.ndarray] = {}
        names: dict[str, list[str]] = {}
        per_mod: dict[Modality, tuple] = {}
        for mod in MODALITY_ORDER:
            if mod in needed:
                per_mod[mod] = feature_matrix(segments, (mod,))
        for tok in cfg.modalities:
            mods = resolve_modalities(tok)
            if len(mods) == 1:
                matrices[tok], names[tok] = per_mod[mods[0]]
            else:
                matrices[tok] = (
                    np.hstack([per_mod[m][0] for m in mods])
                    if segments
                    else np.empty((0, sum(len(per_mod[m][1]) for m in mods)))
                )
                names[tok] = [n for m in mods for n in per_mod[m][1]]
        labels = {}
        for lab in LABEL_TOKENS:
            key = LABEL_INSTRUMENTS[lab]
            labels[lab] = np.array(
                [
                    (1.0 if seg.labels[key].positive else 0.0)
                    if key in seg.labels
                    else np.nan
                    for seg in segments
                ]
            )
        tables[g] = FeatureTable(
            granularity=g,
            participants=np.array([seg.participant for seg in segments]),
            week_starts=np.array([seg.week_start for seg in segments], dtype=np.int64),
            matrices=matrices,
            names=names,
            labels=labels,
        )
    info = {
        "participants_usable": len(usable),
        "parse_issues": issue_count,
        "dropped_series": dropped,
        "segments_per_granularity": seg_report,
    }
    return tables, info


def _cell_payload(cfg: RunConfig, tables, li, mi, gi, ki) -> dict:
    label = cfg.labels[li]
    modality = cfg.modalities[mi]
    g = cfg.granularities[gi]
    model = cfg.models[ki]
    table = tables[g]
    present = ~np.isnan(table.labels[label])
    seeds = np.random.SeedSequence([cfg.seed, li, mi, gi, ki]).generate_state(2)
    return {
        "cell_id": cell_id(label, modality, g, model),
        "label": label,
        "modality": modality,
        "granularity": g,
        "model": model,
        "X": table.matrices[modality][present],
        "y": table.labels[label][present].astype(np.int64),
        "groups": table.participants[present],
        "week_starts": table.week_starts[present],
        "names": table.names[modality],
        "pipeline_seed": int(seeds[0]),
        "bootstrap_seed": int(seeds[1]),
        "cfg": {
            "tuning_strategy": cfg.tuning_strategy,
            "tuning_budget": cfg.tuning_budget,
            "inner_folds": cfg.inner_folds,
            "rfe_enabled": cfg.rfe_enabled,
            "rfe_trees": cfg.rfe_trees,
            "rfe_max_depth": cfg.rfe_max_depth,
            "rfe_feature_fraction": cfg.rfe_feature_fraction,
            "rfe_folds": cfg.rfe_folds,
            "rfe_drop_fraction": cfg.rfe_drop_fraction,
            "bootstrap_b": cfg.bootstrap_b,
            "bootstrap_level": cfg.bootstrap_level,
        },
    }


def run_cell(payload: dict) -> dict:
    """Execute one cell; returns status plus artifact text bodies."""
    cid = payload["cell_id"]
    y = payload["y"]
    groups = payload["groups"]
    if len(y) == 0:
        return {"cell_id": cid, "status": "skipped", "reason": "no labeled segments"}
    if len(np.unique(groups)) < 2:
        return {"cell_id": cid, "status": "skipped", "reason": "fewer than 2 participants"}
    c = payload["cfg"]
    pipeline = PipelineConfig(
        family=payload["model"],
        tuning_strategy=c["tuning_strategy"],
        tuning_budget=c["tuning_budget"],
        inner_folds=c["inner_folds"],
        rfe_enabled=c["rfe_enabled"],
        rfe_trees=c["rfe_trees"],
        rfe_max_depth=c["rfe_max_depth"],
        rfe_feature_fraction=c["rfe_feature_fraction"],
        rfe_folds=c["rfe_folds"],
        rfe_drop_fraction=c["rfe_drop_fraction"],
        seed=payload["pipeline_seed"],
    )
    try:
        result = lopo_cv(
            payload["X"],
            y,
            groups,
            payload["names"],
            pipeline,
            week_starts=payload["week_starts"],
        )
        values, flags = compute_metrics(result.counts)
        ci = bootstrap_ci(
            result.pairs(),
            n_bootstrap=c["bootstrap_b"],
            level=c["bootstrap_level"],
            seed=payload["bootstrap_seed"],
        )
        importances = None
        if result.importances is not None:
            importances = {
                name: float(v)
                for name, v in zip(result.feature_names, result.importances)
            }
        metrics_doc = {
            "cell": {
                "label": payload["label"],
                "modality": payload["modality"],
                "granularity": payload["granularity"],
                "model": payload["model"],
            },
            "counts": asdict(result.counts),
            "metrics": values,
            "flags": flags,
            "ci": ci,
            "bootstrap": {
                "n": c["bootstrap_b"],
                "level": c["bootstrap_level"],
                "seed": payload["bootstrap_seed"],
            },
            "n_segments": int(len(y)),
            "n_participants": int(len(np.unique(groups))),
            "folds": [
                {
                    "participant": f.participant,
                    "train_size": f.train_size,
                    "test_size": f.test_size,
                    "constant": f.constant,
                    "n_selected": f.n_selected,
                }
                for f in result.fold_logs
            ],
            "importances": importances,
            "seed": payload["pipeline_seed"],
        }
        return {
            "cell_id": cid,
            "status": "ok",
            "reason": None,
            "metrics_json": json.dumps(metrics_doc, sort_keys=True, indent=1),
            "predictions_csv": predictions_csv(result),
        }
    except WearscreenError as exc:
        return {"cell_id": cid, "status": "failed", "reason": str(exc)}
    except Exception as exc:  # pragma: no cover - defensive
        return {
            "cell_id": cid,
            "status": "failed",
            "reason": f"{exc}\n{traceback.format_exc()}",
        }


def run_sweep(cfg: RunConfig) -> tuple[int, dict]:
    """Run every cell, write per-cell artifacts and the report files.

    Exit status: 0 all cells ok, 2 partial, 1 fatal (nothing succeeded).
    """
    from . import report as report_mod

    cfg.validate()
    out = Path(cfg.out_dir)
    (out / "metrics").mkdir(parents=True, exist_ok=True)
    (out / "predictions").mkdir(parents=True, exist_ok=True)

    tables, info = build_tables(cfg)
    payloads = [
        _cell_payload(cfg, tables, li, mi, gi, ki)
        for li in range(len(cfg.labels))
        for mi in range(len(cfg.modalities))
        for gi in range(len(cfg.granularities))
        for ki in range(len(cfg.models))
    ]

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(run_cell, payloads, chunksize=1))
    else:
        results = [run_cell(p) for p in payloads]

    statuses: dict[str, dict] = {}
    for res in results:
        cid = res["cell_id"]
        statuses[cid] = {"status": res["status"], "reason": res.get("reason")}
        if res["status"] == "ok":
            (out / "metrics" / f"{cid}.json").write_text(res["metrics_json"])
            (out / "predictions" / f"{cid}.csv").write_text(res["predictions_csv"])

    cells = report_mod.load_cells(out / "metrics")
    report_mod.write_report(out, cfg, cells, statuses, info)

    n_ok = sum(1 for s in statuses.values() if s["status"] == "ok")
    if n_ok == 0:
        code = 1
    elif n_ok < len(statuses):
        code = 2
    else:
        code = 0
    summary = {
        "cells_total": len(statuses),
        "cells_ok": n_ok,
        "dataset": info,
        "out_dir": str(out),
    }
    return code, summary
