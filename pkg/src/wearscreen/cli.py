"""Command-line interface: synth / ingest-check / features / run / report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import WearscreenError


def _add_synth(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("synth", help="generate a synthetic dataset with planted effects")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--participants", type=int, default=60)
    p.add_argument("--weeks", default="1:4", help="weeks per participant, LO:HI")
    p.add_argument("--effect", choices=("none", "weak", "strong"), default="strong")
    p.add_argument("--missingness", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--modalities",
        default="calories,distance,steps,heart,sleep",
        help="comma-separated modality subset to emit",
    )
    p.add_argument(
        "--n-complete",
        type=int,
        default=None,
        help="exact number of participants given at least one complete week",
    )


def _add_ingest_check(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("ingest-check", help="parse files and report row issues")
    p.add_argument(
        "--sensor",
        action="append",
        default=[],
        metavar="MODALITY=PATH",
        help="sensor file to check (repeatable)",
    )
    p.add_argument("--surveys", default=None, help="survey CSV to check")


def _add_features(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("features", help="write feature matrices and segment manifests")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--out", required=True, help="output directory")


def _add_run(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("run", help="execute the full experiment sweep")
    p.add_argument("--config", default=None, help="run config JSON")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--inputs", default=None, help="input data directory")
    p.add_argument("--labels", default=None, help="comma-separated label subset")
    p.add_argument("--modalities", default=None)
    p.add_argument("--granularities", default=None)
    p.add_argument("--models", default=None)
    p.add_argument("--budget", type=int, default=None, help="tuning trials per fold")
    p.add_argument("--strategy", choices=("random", "tpe"), default=None)
    p.add_argument("--bootstrap-b", type=int, default=None)


def _add_report(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("report", help="rebuild report files from metrics JSON")
    p.add_argument("--dir", required=True, help="sweep output directory")


def _split(text: str | None) -> tuple | None:
    if text is None:
        return None
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def cmd_synth(args: argparse.Namespace) -> int:
    from .synth import SynthConfig, generate

    lo, _, hi = args.weeks.partition(":")
    cfg = SynthConfig(
        n_participants=args.participants,
        weeks_range=(int(lo), int(hi or lo)),
        effect=args.effect,
        missingness_rate=args.missingness,
        seed=args.seed,
        modalities=_split(args.modalities),
        n_complete=args.n_complete,
    )
    summary = generate(cfg, args.out)
    print(json.dumps(summary, indent=1))
    return 0


def cmd_ingest_check(args: argparse.Namespace) -> int:
    from .ingest import Modality, parse_sensor_file, parse_survey_file

    any_issue = False
    for spec in args.sensor:
        token, _, path = spec.partition("=")
        points, issues = parse_sensor_file(path, Modality(token))
        print(f"{token}: {len(points)} points, {len(issues)} skipped rows")
        for issue in issues[:20]:
            print(f"  line {issue.line}: {issue.reason}")
        any_issue = any_issue or bool(issues)
    if args.surveys:
        responses, issues = parse_survey_file(args.surveys)
        print(f"surveys: {len(responses)} responses, {len(issues)} skipped rows")
        for issue in issues[:20]:
            print(f"  line {issue.line}: {issue.reason}")
        any_issue = any_issue or bool(issues)
    return 2 if any_issue else 0


def cmd_features(args: argparse.Namespace) -> int:
    from .sweep import build_tables, load_run_config

    cfg = load_run_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tables, info = build_tables(cfg)
    for g, table in tables.items():
        for token in cfg.modalities:
            (out / f"features_{token}_{g}h.csv").write_text(_feature_csv(table, token))
    print(json.dumps(info, indent=1, default=str))
    return 0


def _feature_csv(table, token: str) -> str:
    from .timeutil import format_iso_utc

    names = table.names[token]
    header = ["participant", "week_start"] + names + [
        "label_depression",
        "label_anxiety",
        "label_stress",
    ]
    lines = [",".join(header)]
    X = table.matrices[token]
    for i in range(len(X)):
        cols = [str(table.participants[i]), format_iso_utc(int(table.week_starts[i]))]
        cols += [repr(v) for v in X[i]]
        for lab in ("depression", "anxiety", "stress"):
            v = table.labels[lab][i]
            cols.append("" if v != v else str(int(v)))
        lines.append(",".join(cols))
    return "\n".join(lines) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    from .sweep import load_run_config, run_sweep

    overrides = {
        "out_dir": args.out,
        "seed": args.seed,
        "jobs": args.jobs,
        "labels": _split(args.labels),
        "modalities": _split(args.modalities),
        "models": _split(args.models),
        "tuning_budget": args.budget,
        "tuning_strategy": args.strategy,
        "bootstrap_b": args.bootstrap_b,
    }
    if args.granularities is not None:
        overrides["granularities"] = tuple(int(g) for g in _split(args.granularities))
    if args.inputs is not None:
        overrides["inputs"] = {"dir": args.inputs}
    cfg = load_run_config(args.config, **overrides)
    code, summary = run_sweep(cfg)
    print(json.dumps(summary, indent=1, default=str))
    return code


def cmd_report(args: argparse.Namespace) -> int:
    from . import report as report_mod
    from .sweep import load_run_config

    out = Path(args.dir)
    manifest = json.loads((out / "manifest.json").read_text())
    cfg = load_run_config(None, **manifest["config"], out_dir=str(out))
    cells = report_mod.load_cells(out / "metrics")
    statuses = manifest["cells"]
    info = {
        "participants_usable": manifest["dataset"]["participants_usable"],
        "parse_issues": manifest["dataset"]["parse_issues"],
        "segments_per_granularity": {
            int(g): r
            for g, r in manifest["dataset"]["segments_per_granularity"].items()
        },
    }
    report_mod.write_report(out, cfg, cells, statuses, info)
    print(f"report rebuilt in {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="wearscreen",
        description="Wearable-sensor mental-health screening experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_synth(sub)
    _add_ingest_check(sub)
    _add_features(sub)
    _add_run(sub)
    _add_report(sub)
    args = parser.parse_args(argv)
    handlers = {
        "synth": cmd_synth,
        "ingest-check": cmd_ingest_check,
        "features": cmd_features,
        "run": cmd_run,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except WearscreenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
