"""Result-grid assembly and report artifacts.

Every rendered number comes from a metrics JSON written by the sweep, so
tables can be recomputed and checked against the renderings. Grid flags:
bold = best modality within a granularity column, italic = best
granularity within a modality row; ties go to the lower granularity or the
earlier modality in table order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import FamilyAbsentError

GRID_METRICS = {"BA": "balanced_accuracy", "F1": "f1"}

CellKey = tuple[str, str, int, str]  # label, modality, granularity, model


def load_cells(metrics_dir: str | Path) -> dict[CellKey, dict]:
    cells: dict[CellKey, dict] = {}
    for path in sorted(Path(metrics_dir).glob("*.json")):
        doc = json.loads(path.read_text())
        c = doc["cell"]
        cells[(c["label"], c["modality"], int(c["granularity"]), c["model"])] = doc
    return cells


@dataclass(slots=True)
class GridCell:
    value: float
    halfwidth: float
    model: str


@dataclass(slots=True)
class ResultGrid:
    label: str
    metric: str  # "BA" | "F1"
    modalities: tuple
    granularities: tuple
    cells: dict  # (modality, granularity) -> GridCell | None
    row_best: dict  # modality -> granularity
    col_best: dict  # granularity -> modality


def _best_model_cell(
    cells: dict, label: str, modality: str, g: int, metric_key: str, model_order
) -> GridCell | None:
    """Best model for one (label, modality, granularity) by the grid metric."""
    best: GridCell | None = None
    for model in model_order:
        doc = cells.get((label, modality, g, model))
        if doc is None:
            continue
        v = doc["metrics"][metric_key]
        if best is None or v > best.value:
            best = GridCell(v, doc["ci"][metric_key]["halfwidth"], model)
    return best


def build_grid(
    cells: dict, label: str, metric: str, modalities, granularities, model_order
) -> ResultGrid:
    metric_key = GRID_METRICS[metric]
    grid_cells: dict = {}
    for m in modalities:
        for g in granularities:
            grid_cells[(m, g)] = _best_model_cell(
                cells, label, m, g, metric_key, model_order
            )
    row_best: dict = {}
    for m in modalities:
        best_g = None
        best_v = -1.0
        for g in granularities:  # ascending: ties keep the lower granularity
            cell = grid_cells[(m, g)]
            if cell is not None and cell.value > best_v:
                best_v = cell.value
                best_g = g
        if best_g is not None:
            row_best[m] = best_g
    col_best: dict = {}
    for g in granularities:
        best_m = None
        best_v = -1.0
        for m in modalities:  # table order: ties keep the earlier modality
            cell = grid_cells[(m, g)]
            if cell is not None and cell.value > best_v:
                best_v = cell.value
                best_m = m
        if best_m is not None:
            col_best[g] = best_m
    return ResultGrid(label, metric, tuple(modalities), tuple(granularities), grid_cells, row_best, col_best)


def format_value(value: float, halfwidth: float) -> str:
    return f"{value:.2f} ± {halfwidth:.2f}"


def render_markdown_grid(grid: ResultGrid) -> str:
    header = (
        ["Modality"]
        + [f"{g} h" for g in grid.granularities]
        + ["Best Agg.", "Best Model"]
    )
    lines = [
        f"## {grid.label} — {grid.metric}",
        "",
        "| " + " | ".join(header) + " |",
        "|" + "---|" * len(header),
    ]
    for m in grid.modalities:
        row = [m]
        for g in grid.granularities:
            cell = grid.cells[(m, g)]
            if cell is None:
                row.append("—")
                continue
            text = format_value(cell.value, cell.halfwidth)
            if grid.col_best.get(g) == m and grid.row_best.get(m) == g:
                text = f"***{text}***"
            elif grid.col_best.get(g) == m:
                text = f"**{text}**"
            elif grid.row_best.get(m) == g:
                text = f"*{text}*"
            row.append(text)
        best_g = grid.row_best.get(m)
        if best_g is None:
            row += ["—", "—"]
        else:
            best = grid.cells[(m, best_g)]
            row += [format_value(best.value, best.halfwidth), best.model]
        lines.append("| " + " | ".join(row) + " |")
    footer = ["Best Model"]
    for g in grid.granularities:
        m = grid.col_best.get(g)
        footer.append("—" if m is None else f"{grid.cells[(m, g)].model} ({m})")
    footer += ["", ""]
    lines.append("| " + " | ".join(footer) + " |")
    lines.append("")
    lines.append(
        "Bold: best modality in the column. Italic: best aggregation level in the row. "
        "Values are point estimate ± bootstrap halfwidth."
    )
    return "\n".join(lines) + "\n"


def win_count_rows(
    cells: dict, labels, modalities, granularities, model_order
) -> list[dict]:
    """Per (label, modality): how many granularities each model tops by F1."""
    rows = []
    for label in labels:
        for m in modalities:
            counts = {model: 0 for model in model_order}
            for g in granularities:
                best_model = None
                best_v = -1.0
                for model in model_order:  # ties -> earlier model in order
                    doc = cells.get((label, m, g, model))
                    if doc is not None and doc["metrics"]["f1"] > best_v:
                        best_v = doc["metrics"]["f1"]
                        best_model = model
                if best_model is not None:
                    counts[best_model] += 1
            rows.append({"label": label, "modality": m, **counts, "sum": sum(counts.values())})
    return rows


def render_wincounts_csv(rows: list[dict], model_order) -> str:
    header = ["label", "modality"] + list(model_order) + ["sum"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row[h]) for h in header))
    return "\n".join(lines) + "\n"


def importance_rows(
    cells: dict, label: str, modalities, granularities, family: str = "adaboost", top_k: int = 10
) -> list[dict]:
    """Mean per-feature importance across granularities, keeping features
    that rank in the top_k at any single level."""
    found_family = any(key[3] == family for key in cells)
    if not found_family:
        raise FamilyAbsentError(f"no cells for family {family!r}")
    rows = []
    for m in modalities:
        per_level: dict[int, dict[str, float]] = {}
        for g in granularities:
            doc = cells.get((label, m, g, family))
            if doc is None or not doc.get("importances"):
                continue
            per_level[g] = doc["importances"]
        if not per_level:
            continue
        keep: set[str] = set()
        for g, imp in per_level.items():
            ranked = sorted(imp.items(), key=lambda kv: (-kv[1], kv[0]))
            keep.update(name for name, _ in ranked[:top_k])
        all_names = sorted({n for imp in per_level.values() for n in imp})
        means = {
            name: sum(imp.get(name, 0.0) for imp in per_level.values()) / len(per_level)
            for name in all_names
        }
        for name in sorted(keep, key=lambda n: (-means[n], n)):
            rows.append(
                {"label": label, "modality": m, "feature": name, "mean_importance": means[name]}
            )
    return rows


def render_importance_csv(rows: list[dict]) -> str:
    lines = ["label,modality,feature,mean_importance"]
    for row in rows:
        lines.append(
            f"{row['label']},{row['modality']},{row['feature']},{row['mean_importance']!r}"
        )
    return "\n".join(lines) + "\n"


def config_hash(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode()
    ).hexdigest()


def write_report(out_dir, cfg, cells, statuses, info) -> None:
    """Emit grid_*.md, wincounts.csv, importance_*.csv, manifest.json."""
    from .sweep import config_payload

    out = Path(out_dir)
    for label in cfg.labels:
        for metric in GRID_METRICS:
            grid = build_grid(
                cells, label, metric, cfg.modalities, cfg.granularities, cfg.models
            )
            (out / f"grid_{label}_{metric}.md").write_text(render_markdown_grid(grid))
    rows = win_count_rows(cells, cfg.labels, cfg.modalities, cfg.granularities, cfg.models)
    (out / "wincounts.csv").write_text(render_wincounts_csv(rows, cfg.models))
    if "adaboost" in cfg.models:
        for label in cfg.labels:
            imp = importance_rows(cells, label, cfg.modalities, cfg.granularities)
            (out / f"importance_{label}.csv").write_text(render_importance_csv(imp))
    payload = config_payload(cfg)
    manifest = {
        "schema": "wearscreen-run/1",
        "code_version": __version__,
        "config": payload,
        "config_hash": config_hash(payload),
        "seed": cfg.seed,
        "cells": {cid: statuses[cid] for cid in sorted(statuses)},
        "dataset": {
            "participants_usable": info["participants_usable"],
            "parse_issues": info["parse_issues"],
            "segments_per_granularity": {
                str(g): r for g, r in sorted(info["segments_per_granularity"].items())
            },
        },
        "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))
