"""Monday-Sunday segmentation and survey label attachment.

A week qualifies only if every window of every requested modality is
present and unmasked ("continuous week"). Labels come from the survey
closest to the week midpoint (Thursday noon); ties go to the earlier
survey. A segment missing an instrument's surveys is excluded from that
instrument's task only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aggregate import AggregatedSeries
from .ingest import INSTRUMENTS, Modality, SurveyResponse, binarize_label
from .timeutil import (
    SECONDS_PER_WEEK,
    format_iso_utc,
    monday_on_or_after,
    weekday,
)

WEEK_MIDPOINT_S = SECONDS_PER_WEEK // 2
AUDIT_DISTANCE_DAYS = 31


@dataclass(slots=True)
class LabelInfo:
    score: int
    positive: bool
    survey_distance_s: int


@dataclass(slots=True)
class WeeklySegment:
    participant: str
    week_start: int
    granularity: int
    data: dict[Modality, dict[str, np.ndarray]]
    labels: dict[str, LabelInfo] = field(default_factory=dict)

    @property
    def windows_per_week(self) -> int:
        return 7 * 24 // self.granularity


def cut_weeks(agg: AggregatedSeries, tz_offset: int = 0) -> list[tuple[int, dict[str, np.ndarray]]]:
    """All complete, fully-valid Monday-Sunday slices of one aggregated series.

    Returns (week_start_epoch, channel slices) pairs in time order.
    """
    window_s = agg.window_s
    per_week = SECONDS_PER_WEEK // window_s
    out: list[tuple[int, dict[str, np.ndarray]]] = []
    m = monday_on_or_after(agg.window_start, tz_offset)
    end = agg.window_start + agg.n_windows * window_s
    while m + SECONDS_PER_WEEK <= end:
        i0 = (m - agg.window_start) // window_s
        block = slice(i0, i0 + per_week)
        if agg.valid[block].all():
            out.append((m, {name: vals[block].copy() for name, vals in agg.channels.items()}))
        m += SECONDS_PER_WEEK
    return out


def attach_labels(
    participant: str, week_start: int, surveys: list[SurveyResponse]
) -> dict[str, LabelInfo]:
    """Pick, per instrument, the participant's survey nearest the week midpoint."""
    midpoint = week_start + WEEK_MIDPOINT_S
    labels: dict[str, LabelInfo] = {}
    for key in INSTRUMENTS:
        best: SurveyResponse | None = None
        best_dist = None
        for resp in surveys:
            if resp.participant != participant or resp.instrument != key:
                continue
            dist = abs(resp.ts - midpoint)
            if (
                best is None
                or dist < best_dist
                or (dist == best_dist and resp.ts < best.ts)
            ):
                best = resp
                best_dist = dist
        if best is not None:
            labels[key] = LabelInfo(best.score, binarize_label(best), best_dist)
    return labels


def build_segments(
    agg_by_modality: dict[Modality, AggregatedSeries],
    surveys: list[SurveyResponse],
    tz_offset: int = 0,
) -> list[WeeklySegment]:
    """Assemble one participant's weekly segments at one granularity.

    Only weeks complete in every provided modality qualify.
    """
    if not agg_by_modality:
        return []
    participants = {a.participant for a in agg_by_modality.values()}
    granularities = {a.granularity for a in agg_by_modality.values()}
    if len(participants) != 1 or len(granularities) != 1:
        raise ValueError("build_segments expects one participant and one granularity")
    participant = participants.pop()
    granularity = granularities.pop()

    per_modality = {
        mod: dict(cut_weeks(agg, tz_offset)) for mod, agg in agg_by_modality.items()
    }
    common = None
    for weeks in per_modality.values():
        keys = set(weeks)
        common = keys if common is None else common & keys
    segments = []
    for week_start in sorted(common or ()):
        data = {mod: weeks[week_start] for mod, weeks in per_modality.items()}
        labels = attach_labels(participant, week_start, surveys)
        segments.append(WeeklySegment(participant, week_start, granularity, data, labels))
    return segments


def inclusion_filter(
    segments_by_participant: dict[str, list[WeeklySegment]]
) -> tuple[dict[str, list[WeeklySegment]], dict[str, int]]:
    """Keep participants with at least one complete week; report the split."""
    kept = {pid: segs for pid, segs in segments_by_participant.items() if segs}
    report = {
        "participants_in": len(segments_by_participant),
        "participants_kept": len(kept),
        "participants_dropped": len(segments_by_participant) - len(kept),
        "segments": sum(len(s) for s in kept.values()),
    }
    return kept, report


def segment_manifest_csv(segments: list[WeeklySegment], tz_offset: int = 0) -> str:
    """Audit manifest: one row per segment with labels and max survey distance."""
    lines = [
        "participant,week_start,granularity,n_windows,label_cesd,label_stai,label_pss,survey_distance_days"
    ]
    for seg in sorted(segments, key=lambda s: (s.participant, s.week_start, s.granularity)):
        assert weekday(seg.week_start, tz_offset) == 0
        cols = []
        for key in ("CESD10", "STAI", "PSS4"):
            info = seg.labels.get(key)
            cols.append("" if info is None else ("1" if info.positive else "0"))
        dists = [info.survey_distance_s for info in seg.labels.values()]
        max_days = max(dists) / 86400 if dists else float("nan")
        lines.append(
            f"{seg.participant},{format_iso_utc(seg.week_start)},{seg.granularity},"
            f"{seg.windows_per_week},{cols[0]},{cols[1]},{cols[2]},{max_days:.2f}"
        )
    return "\n".join(lines) + "\n"
