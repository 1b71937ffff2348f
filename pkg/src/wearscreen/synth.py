"""Seeded synthetic dataset generator with plantable modality-label effects.

Effects are planted on weekly summary statistics and rendered down to
minute (or 5-second) samples, then audited on the realized output before
any file is written:

  depression (CESD10): reduced weekly step sums + fragmented sleep
  anxiety (STAI):      reduced weekly distance sums
  stress (PSS4):       elevated weekly heart-rate standard deviation

Latent prevalence is exact by construction. The generator is an oracle
for the pipeline, not a physiological simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GeneratorSelfCheckError
from .ingest import INSTRUMENTS, STAGE_NAMES
from .timeutil import format_iso_utc, parse_iso_utc

DEFAULT_PREVALENCE = {"CESD10": 0.537, "STAI": 0.606, "PSS4": 0.608}
DEFAULT_START = parse_iso_utc("2020-05-18T00:00:00Z")  # a Monday
ALL_MODALITY_TOKENS = ("calories", "distance", "steps", "heart", "sleep")

EFFECT_SHIFT_SIGMAS = {"none": 0.0, "weak": 0.5, "strong": 4.0}

MINUTES_PER_DAY = 1440
MINUTES_PER_WEEK = 7 * MINUTES_PER_DAY
HEART_PER_DAY = 17280  # 5-second cadence
HEART_PER_WEEK = 7 * HEART_PER_DAY
STUB_DAYS = 3  # participants without a complete week get a Wed-Fri fragment
STUB_OFFSET_MINUTES = 2 * MINUTES_PER_DAY

#: instrument -> (planted modality token, shift direction for positives)
EFFECT_CHANNELS = {
    "CESD10": ("steps", -1.0),
    "STAI": ("distance", -1.0),
    "PSS4": ("heart", +1.0),
}
EFFECT_DESCRIPTIONS = {
    "CESD10": "steps_sum;sleep_fragmentation",
    "STAI": "distance_sum",
    "PSS4": "heart_std",
}

_AUDIT_ATTEMPTS = 5
_MISSING_MEAN_RUN_MIN = 30
_MISSING_CAP_MIN = 300  # < the 6 h imputation gap cap


@dataclass(slots=True)
class SynthConfig:
    n_participants: int = 60
    weeks_range: tuple[int, int] = (1, 4)
    effect: str = "strong"
    prevalence: dict = field(default_factory=lambda: dict(DEFAULT_PREVALENCE))
    missingness_rate: float = 0.0
    seed: int = 0
    modalities: tuple[str, ...] = ALL_MODALITY_TOKENS
    n_complete: int | None = None
    start: int = DEFAULT_START

    def validate(self) -> None:
        if self.n_participants < 0:
            raise ValueError("n_participants must be >= 0")
        lo, hi = self.weeks_range
        if not (0 <= lo <= hi):
            raise ValueError("weeks_range must satisfy 0 <= lo <= hi")
        if self.effect not in EFFECT_SHIFT_SIGMAS:
            raise ValueError(f"effect must be one of {tuple(EFFECT_SHIFT_SIGMAS)}")
        for key, p in self.prevalence.items():
            if key not in INSTRUMENTS or not (0.0 < p < 1.0):
                raise ValueError(f"bad prevalence for {key}: {p}")
        if not (0.0 <= self.missingness_rate < 1.0):
            raise ValueError("missingness_rate must be in [0, 1)")
        for tok in self.modalities:
            if tok not in ALL_MODALITY_TOKENS:
                raise ValueError(f"unknown modality token {tok!r}")
        if self.n_complete is not None and self.n_complete > self.n_participants:
            raise ValueError("n_complete cannot exceed n_participants")


def _seeded(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


def _day_profile_steps() -> np.ndarray:
    """Normalized per-minute step-rate shape: quiet 23:00-07:00, day bumps."""
    minutes = np.arange(MINUTES_PER_DAY)
    day = (minutes >= 7 * 60) & (minutes < 23 * 60)
    prof = np.where(day, 1.0, 0.0)
    hours = minutes / 60.0
    for peak_h, width_h, height in ((9.0, 1.5, 2.5), (13.0, 2.0, 1.5), (18.0, 1.5, 2.5)):
        prof = prof + height * np.exp(-0.5 * ((hours - peak_h) / width_h) ** 2) * day
    return prof / prof.sum()


def _day_profile_heart() -> np.ndarray:
    """Additive circadian heart-rate offset on the 5-second day grid."""
    sod = np.arange(HEART_PER_DAY) * 5
    night = (sod < 7 * 3600) | (sod >= 23 * 3600)
    return np.where(night, -5.0, 2.0)


_STEP_PROFILE = _day_profile_steps()
_HEART_PROFILE = _day_profile_heart()
_HEART_NOISE_SD = 1.5
_HEART_BASE_VAR = float(_HEART_PROFILE.var()) + _HEART_NOISE_SD**2
_HEART_OSC_PERIOD = 480  # 40 minutes of 5-second samples


def _plant_targets(
    labels: np.ndarray,
    mu: float,
    sigma: float,
    direction: float,
    shift_sigmas: float,
    rng: np.random.Generator,
    floor: float,
) -> np.ndarray:
    """Per-participant weekly targets with group means exactly separated.

    Group means are first centered onto the global mean (so effect=none has
    no luck-of-the-draw separation), then positives get shifted by
    direction * shift_sigmas * sigma.
    """
    n = len(labels)
    base = rng.normal(mu, sigma, n)
    if n:
        for g in (0, 1):
            sel = labels == g
            if sel.any():
                base[sel] -= base[sel].mean() - base.mean()
        base[labels == 1] += direction * shift_sigmas * sigma
    return np.maximum(base, floor)


@dataclass(slots=True)
class _Plan:
    pid: str
    weeks: int
    offset_minutes: int
    n_days: int
    labels: dict[str, int]
    steps_target: float
    distance_target: float
    heart_std_target: float
    frag_prob: float


def _render_participant(
    plan: _Plan, seed: int, attempt: int, index: int, modalities: set[str]
) -> dict[str, np.ndarray]:
    """Deterministic sample arrays for one participant, keyed by token.

    Each modality draws from its own seeded stream so rendering any subset
    (the audit pass renders only planted channels) reproduces exactly what
    the full write pass emits.
    """
    n_days = plan.n_days
    n_min = n_days * MINUTES_PER_DAY
    out: dict[str, np.ndarray] = {}

    if {"steps", "distance", "calories"} & modalities:
        rng = _seeded(seed, 2, attempt, index, 0)
        daily_target = plan.steps_target / 7.0 * rng.normal(1.0, 0.03, n_days)
        rate = np.tile(_STEP_PROFILE, n_days) * np.repeat(daily_target, MINUTES_PER_DAY)
        steps = rng.poisson(np.maximum(rate, 0.0)).astype(np.int64)
        if "steps" in modalities:
            out["steps"] = steps
        if "distance" in modalities:
            rng_d = _seeded(seed, 2, attempt, index, 1)
            day_dist = plan.distance_target / 7.0 * rng_d.normal(1.0, 0.03, n_days)
            day_steps = steps.reshape(n_days, MINUTES_PER_DAY).sum(axis=1)
            stride = day_dist / np.maximum(day_steps, 1)
            out["distance"] = steps * np.repeat(stride, MINUTES_PER_DAY)
        if "calories" in modalities:
            rng_c = _seeded(seed, 2, attempt, index, 2)
            out["calories"] = 1.35 + 0.045 * steps + rng_c.uniform(0.0, 0.05, n_min)

    if "heart" in modalities:
        rng_h = _seeded(seed, 2, attempt, index, 3)
        n5 = n_days * HEART_PER_DAY
        base = rng_h.normal(68.0, 4.0)
        amp = math.sqrt(max(2.0 * (plan.heart_std_target**2 - _HEART_BASE_VAR), 0.02))
        osc = amp * np.sin(2.0 * np.pi * np.arange(n5) / _HEART_OSC_PERIOD)
        hr = base + np.tile(_HEART_PROFILE, n_days) + osc + rng_h.normal(0.0, _HEART_NOISE_SD, n5)
        out["heart"] = np.maximum(hr, 35.0)

    if "sleep" in modalities:
        rng_s = _seeded(seed, 2, attempt, index, 4)
        stages = np.zeros(n_min, dtype=np.int8)
        cycle = ((1, 20, 40), (2, 10, 30), (1, 10, 20), (3, 10, 25))
        for d in range(n_days):
            onset = d * MINUTES_PER_DAY + 23 * 60 + int(rng_s.integers(-20, 21))
            wake = (d + 1) * MINUTES_PER_DAY + 7 * 60 + int(rng_s.integers(-20, 21))
            t = max(onset, 0)
            wake = min(wake, n_min)
            ci = 0
            while t < wake:
                if rng_s.random() < plan.frag_prob:
                    stage, run = 0, int(rng_s.integers(1, 5))
                else:
                    stage, lo, hi = cycle[ci % 4]
                    run = int(rng_s.integers(lo, hi + 1))
                    ci += 1
                stages[t : min(t + run, wake)] = stage
                t += run
        out["sleep"] = stages
    return out


def _weekly_summary(token: str, arr: np.ndarray, weeks: int) -> float:
    """Mean weekly planted-channel statistic realized by the rendered data."""
    if token == "heart":
        per_week = arr[: weeks * HEART_PER_WEEK].reshape(weeks, HEART_PER_WEEK)
        return float(per_week.std(axis=1).mean())
    per_week = arr[: weeks * MINUTES_PER_WEEK].reshape(weeks, MINUTES_PER_WEEK)
    return float(per_week.sum(axis=1).mean())


def best_threshold_accuracy(values: np.ndarray, labels: np.ndarray) -> float:
    """Accuracy of the best single threshold (either direction) on values."""
    order = np.argsort(values, kind="stable")
    lab = np.asarray(labels)[order]
    n = len(lab)
    pos = np.concatenate([[0], np.cumsum(lab == 1)])
    neg = np.concatenate([[0], np.cumsum(lab == 0)])
    acc_neg_left = (neg + (pos[-1] - pos)) / n
    acc_pos_left = (pos + (neg[-1] - neg)) / n
    return float(max(acc_neg_left.max(), acc_pos_left.max()))


def _pooled_std(a: np.ndarray, b: np.ndarray) -> float:
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    return math.sqrt(((len(a) - 1) * va + (len(b) - 1) * vb) / (len(a) + len(b) - 2))


def _audit(
    cfg: SynthConfig,
    labels: dict[str, np.ndarray],
    summaries: dict[str, np.ndarray],
) -> tuple[bool, list[str]]:
    """Check realized group separation per planted channel before emission."""
    notes = []
    ok = True
    for key, (token, direction) in EFFECT_CHANNELS.items():
        if token not in summaries:
            continue
        vals = summaries[token]
        lab = labels[key]
        have = ~np.isnan(vals)
        pos = vals[have & (lab == 1)]
        neg = vals[have & (lab == 0)]
        if len(pos) < 2 or len(neg) < 2:
            notes.append(f"{key}/{token}: too few participants to audit")
            continue
        pooled = _pooled_std(pos, neg)
        diff = float(pos.mean() - neg.mean())
        rel = diff / pooled if pooled > 0 else 0.0
        if cfg.effect == "none":
            passed = abs(rel) < 0.2
            notes.append(f"{key}/{token}: |diff|={abs(rel):.3f} pooled-std (< 0.2 req)")
        elif cfg.effect == "strong":
            acc = best_threshold_accuracy(vals[have], lab[have])
            passed = direction * rel >= 1.5 and acc >= 0.9
            notes.append(
                f"{key}/{token}: diff={rel:+.2f} pooled-std (>= 1.5 req), "
                f"threshold acc={acc:.3f} (>= 0.9 req)"
            )
        else:
            passed = True
            notes.append(f"{key}/{token}: diff={rel:+.2f} pooled-std (weak, unaudited)")
        ok = ok and passed
    return ok, notes


def _missing_mask(
    n_slots: int, rate: float, rng: np.random.Generator, slots_per_minute: int
) -> np.ndarray:
    """Boolean drop mask made of sub-6-hour runs totalling ~rate of the data."""
    mask = np.zeros(n_slots, dtype=bool)
    if rate <= 0.0 or n_slots == 0:
        return mask
    target = int(rate * n_slots)
    mean_run = _MISSING_MEAN_RUN_MIN * slots_per_minute
    cap = _MISSING_CAP_MIN * slots_per_minute
    dropped = 0
    for _ in range(4 * n_slots):
        if dropped >= target:
            break
        run = min(int(rng.geometric(1.0 / mean_run)), cap, target - dropped)
        start = int(rng.integers(0, n_slots))
        end = min(start + max(run, 1), n_slots)
        dropped += int((~mask[start:end]).sum())
        mask[start:end] = True
    return mask


def _plans(
    cfg: SynthConfig,
    labels: dict[str, np.ndarray],
    weeks: np.ndarray,
    attempt: int,
) -> list[_Plan]:
    rng_t = _seeded(cfg.seed, 1, attempt)
    shift = EFFECT_SHIFT_SIGMAS[cfg.effect]
    steps_t = _plant_targets(labels["CESD10"], 52000.0, 6000.0, -1.0, shift, rng_t, 5000.0)
    dist_t = _plant_targets(labels["STAI"], 36000.0, 4200.0, -1.0, shift, rng_t, 3000.0)
    hstd_t = _plant_targets(labels["PSS4"], 6.5, 0.5, +1.0, shift, rng_t, 4.2)
    frag = 0.12 + 0.07 * shift * labels["CESD10"]
    plans = []
    for i in range(cfg.n_participants):
        w = int(weeks[i])
        plans.append(
            _Plan(
                pid=f"p{i + 1:04d}",
                weeks=w,
                offset_minutes=0 if w > 0 else STUB_OFFSET_MINUTES,
                n_days=7 * w if w > 0 else STUB_DAYS,
                labels={k: int(labels[k][i]) for k in labels},
                steps_target=float(steps_t[i]),
                distance_target=float(dist_t[i]),
                heart_std_target=float(hstd_t[i]),
                frag_prob=float(frag[i]),
            )
        )
    return plans


def _iso_cache(start: int, n_slots: int, cadence: int) -> list[str]:
    return [format_iso_utc(start + i * cadence) for i in range(n_slots)]


_VALUE_FORMATTERS = {
    "steps": lambda v: str(int(v)),
    "distance": lambda v: f"{v:.3f}",
    "calories": lambda v: f"{v:.2f}",
    "heart": lambda v: f"{v:.1f}",
}


def generate(cfg: SynthConfig, out_dir: str | Path) -> dict:
    """Write sensor CSVs, surveys.csv, and truth_manifest.csv; return a summary.

    Raises GeneratorSelfCheckError if the planted-signal audit keeps failing
    after deterministic retries.
    """
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mods = set(cfg.modalities)
    n = cfg.n_participants

    rng0 = _seeded(cfg.seed, 0)
    labels: dict[str, np.ndarray] = {}
    for key in ("CESD10", "STAI", "PSS4"):
        prev = cfg.prevalence.get(key, DEFAULT_PREVALENCE[key])
        n_pos = int(round(prev * n))
        lab = np.zeros(n, dtype=np.int64)
        lab[rng0.permutation(n)[:n_pos]] = 1
        labels[key] = lab
    lo, hi = cfg.weeks_range
    weeks = rng0.integers(lo, hi + 1, size=n) if n else np.zeros(0, dtype=np.int64)
    if cfg.n_complete is not None:
        complete = np.zeros(n, dtype=bool)
        complete[rng0.permutation(n)[: cfg.n_complete]] = True
        weeks = np.where(complete, np.maximum(weeks, 1), 0)

    audit_tokens = {t for t, _ in EFFECT_CHANNELS.values()} & mods
    plans: list[_Plan] = []
    notes: list[str] = []
    attempt_used = 0
    for attempt in range(_AUDIT_ATTEMPTS):
        plans = _plans(cfg, labels, weeks, attempt)
        summaries = {t: np.full(n, np.nan) for t in audit_tokens}
        if audit_tokens:
            for i, plan in enumerate(plans):
                if plan.weeks == 0:
                    continue
                arrays = _render_participant(plan, cfg.seed, attempt, i, audit_tokens)
                for t in audit_tokens:
                    summaries[t][i] = _weekly_summary(t, arrays[t], plan.weeks)
        ok, notes = _audit(cfg, labels, summaries)
        attempt_used = attempt
        if ok:
            break
    else:
        raise GeneratorSelfCheckError(
            "planted-signal audit failed after retries: " + "; ".join(notes)
        )

    max_minutes = max(
        (p.offset_minutes + p.n_days * MINUTES_PER_DAY for p in plans), default=0
    )
    iso60 = _iso_cache(cfg.start, max_minutes, 60) if mods - {"heart"} else []
    iso5 = _iso_cache(cfg.start, max_minutes * 12, 5) if "heart" in mods else []

    headers = {
        "calories": "participant_id,timestamp,value",
        "distance": "participant_id,timestamp,value",
        "steps": "participant_id,timestamp,value",
        "heart": "participant_id,timestamp,value",
        "sleep": "participant_id,timestamp,stage",
    }
    files = {t: out / f"{t}.csv" for t in cfg.modalities}
    handles = {t: files[t].open("w") for t in cfg.modalities}
    try:
        for t in cfg.modalities:
            handles[t].write(headers[t] + "\n")
        for i, plan in enumerate(plans):
            arrays = _render_participant(plan, cfg.seed, attempt_used, i, mods)
            for mi, t in enumerate(cfg.modalities):
                arr = arrays[t]
                per_min = 12 if t == "heart" else 1
                offset = plan.offset_minutes * per_min
                iso = iso5 if t == "heart" else iso60
                drop = _missing_mask(
                    len(arr),
                    cfg.missingness_rate,
                    _seeded(cfg.seed, 3, attempt_used, i, mi),
                    per_min,
                )
                keep = (
                    np.flatnonzero(~drop).tolist() if drop.any() else range(len(arr))
                )
                vals = arr.tolist()
                pid = plan.pid
                if t == "sleep":
                    rows = [
                        f"{pid},{iso[offset + j]},{STAGE_NAMES[vals[j]]}" for j in keep
                    ]
                else:
                    fmt = _VALUE_FORMATTERS[t]
                    rows = [f"{pid},{iso[offset + j]},{fmt(vals[j])}" for j in keep]
                if rows:
                    handles[t].write("\n".join(rows) + "\n")
    finally:
        for fh in handles.values():
            fh.close()

    survey_lines = ["participant_id,timestamp,instrument,score"]
    manifest_lines = ["participant,instrument,latent_label,effect_channels"]
    for i, plan in enumerate(plans):
        rng_s = _seeded(cfg.seed, 4, i)
        base = cfg.start + plan.offset_minutes * 60
        span_days = plan.n_days
        rows: list[tuple[int, str]] = []
        if plan.weeks > 0:
            for k in range(plan.weeks):
                rows.append(((7 * k + 6) * 86400 + 18 * 3600, "PSS4"))
            d = 6
            while d < span_days:
                rows.append((d * 86400 + 12 * 3600, "CESD10"))
                rows.append((d * 86400 + 12 * 3600 + 1800, "STAI"))
                d += 28
        else:
            rows = [(12 * 3600, "PSS4"), (12 * 3600 + 900, "CESD10"), (12 * 3600 + 1800, "STAI")]
        for offset_s, key in sorted(rows):
            inst = INSTRUMENTS[key]
            if plan.labels[key] == 1:
                score = int(rng_s.integers(inst.cutoff, inst.score_max + 1))
            else:
                score = int(rng_s.integers(inst.score_min, inst.cutoff))
            survey_lines.append(
                f"{plan.pid},{format_iso_utc(base + offset_s)},{key},{score}"
            )
        for key in ("CESD10", "STAI", "PSS4"):
            channels = EFFECT_DESCRIPTIONS[key] if cfg.effect != "none" else ""
            manifest_lines.append(f"{plan.pid},{key},{plan.labels[key]},{channels}")

    (out / "surveys.csv").write_text("\n".join(survey_lines) + "\n")
    (out / "truth_manifest.csv").write_text("\n".join(manifest_lines) + "\n")

    return {
        "out_dir": str(out),
        "files": {t: str(p) for t, p in files.items()}
        | {"surveys": str(out / "surveys.csv"), "truth_manifest": str(out / "truth_manifest.csv")},
        "n_participants": n,
        "n_with_complete_week": int((weeks > 0).sum()),
        "positives": {k: int(v.sum()) for k, v in labels.items()},
        "attempt": attempt_used,
        "audit": notes,
    }
