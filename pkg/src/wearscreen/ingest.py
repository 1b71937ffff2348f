"""CSV ingestion: sensor streams and survey responses.

File schemas:
  numeric sensor: ``participant_id,timestamp,value``
  sleep sensor:   ``participant_id,timestamp,stage``   (awake/light/deep/rem)
  survey:         ``participant_id,timestamp,instrument,score``

Timestamps are ISO-8601 UTC. Rows that fail validation are skipped and
reported as :class:`RowIssue`; a wrong header is fatal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable

from .errors import SchemaMismatchError
from .timeutil import format_iso_utc, parse_iso_utc


class Modality(str, Enum):
    CALORIES = "calories"
    DISTANCE = "distance"
    STEPS = "steps"
    HEART = "heart"
    SLEEP = "sleep"

    @property
    def cadence_s(self) -> int:
        """Native sampling cadence: 5 s for heart rate, 1 min otherwise."""
        return 5 if self is Modality.HEART else 60

    @property
    def is_sleep(self) -> bool:
        return self is Modality.SLEEP


#: Modalities whose aggregation is a window sum (the rest: heart=mean, sleep=counts).
SUM_MODALITIES = (Modality.CALORIES, Modality.DISTANCE, Modality.STEPS)

#: Canonical ordering used everywhere a modality list is rendered.
MODALITY_ORDER = (
    Modality.CALORIES,
    Modality.DISTANCE,
    Modality.STEPS,
    Modality.HEART,
    Modality.SLEEP,
)


class SleepStage(IntEnum):
    AWAKE = 0
    LIGHT = 1
    DEEP = 2
    REM = 3


STAGE_TOKENS = {"awake": 0, "light": 1, "deep": 2, "rem": 3}
STAGE_NAMES = {v: k for k, v in STAGE_TOKENS.items()}


@dataclass(frozen=True)
class Instrument:
    """A screening instrument with its score range and positive cutoff."""

    key: str
    score_min: int
    score_max: int
    cutoff: int


INSTRUMENTS = {
    "CESD10": Instrument("CESD10", 0, 30, 10),
    "STAI": Instrument("STAI", 20, 80, 40),
    "PSS4": Instrument("PSS4", 0, 16, 6),
}

#: Label task name -> instrument key.
LABEL_INSTRUMENTS = {"depression": "CESD10", "anxiety": "STAI", "stress": "PSS4"}


@dataclass(slots=True)
class SensorPoint:
    """One observed sample. For sleep, `value` holds the integer stage code."""

    participant: str
    modality: Modality
    ts: int
    value: float


@dataclass(slots=True)
class SurveyResponse:
    participant: str
    ts: int
    instrument: str
    score: int


@dataclass(slots=True)
class RowIssue:
    """A skipped input row: 1-based line number plus the reason."""

    line: int
    reason: str


SENSOR_HEADER_NUMERIC = ["participant_id", "timestamp", "value"]
SENSOR_HEADER_SLEEP = ["participant_id", "timestamp", "stage"]
SURVEY_HEADER = ["participant_id", "timestamp", "instrument", "score"]


def _check_header(actual: list[str] | None, expected: list[str], path: Path) -> None:
    got = [c.strip() for c in actual] if actual else []
    if got != expected:
        raise SchemaMismatchError(
            f"{path}: expected header {','.join(expected)!r}, got {','.join(got)!r}"
        )


def _dedup_keep_last(rows: list[tuple[str, int, float, int]]) -> list[tuple[str, int, float]]:
    """Sort by (participant, ts); duplicates keep the row latest in the file."""
    rows.sort(key=lambda r: (r[0], r[1], r[3]))
    out: list[tuple[str, int, float]] = []
    for pid, ts, value, _line in rows:
        if out and out[-1][0] == pid and out[-1][1] == ts:
            out[-1] = (pid, ts, value)
        else:
            out.append((pid, ts, value))
    return out


def parse_sensor_file(
    path: str | Path, modality: Modality
) -> tuple[list[SensorPoint], list[RowIssue]]:
    """Parse one sensor CSV into validated points plus a skipped-row report.

    Output is sorted by (participant, timestamp); duplicate (participant,
    timestamp) pairs keep the last occurrence in the file.
    """
    path = Path(path)
    issues: list[RowIssue] = []
    rows: list[tuple[str, int, float, int]] = []
    expected = SENSOR_HEADER_SLEEP if modality.is_sleep else SENSOR_HEADER_NUMERIC
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), expected, path)
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                issues.append(RowIssue(line_no, f"expected 3 fields, got {len(row)}"))
                continue
            pid = row[0].strip()
            if not pid:
                issues.append(RowIssue(line_no, "empty participant_id"))
                continue
            try:
                ts = parse_iso_utc(row[1])
            except ValueError as exc:
                issues.append(RowIssue(line_no, f"bad timestamp: {exc}"))
                continue
            if modality.is_sleep:
                stage = STAGE_TOKENS.get(row[2].strip().lower())
                if stage is None:
                    issues.append(RowIssue(line_no, f"unknown sleep stage {row[2]!r}"))
                    continue
                value = float(stage)
            else:
                try:
                    value = float(row[2])
                except ValueError:
                    issues.append(RowIssue(line_no, f"non-numeric value {row[2]!r}"))
                    continue
                if not math.isfinite(value):
                    issues.append(RowIssue(line_no, f"non-finite value {row[2]!r}"))
                    continue
                if value < 0:
                    issues.append(RowIssue(line_no, f"negative value {row[2]!r}"))
                    continue
            rows.append((pid, ts, value, line_no))
    points = [
        SensorPoint(pid, modality, ts, value) for pid, ts, value in _dedup_keep_last(rows)
    ]
    return points, issues


def parse_survey_file(path: str | Path) -> tuple[list[SurveyResponse], list[RowIssue]]:
    """Parse the survey CSV; out-of-range scores are rejected and reported."""
    path = Path(path)
    issues: list[RowIssue] = []
    rows: list[tuple[str, int, str, int]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), SURVEY_HEADER, path)
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                issues.append(RowIssue(line_no, f"expected 4 fields, got {len(row)}"))
                continue
            pid = row[0].strip()
            if not pid:
                issues.append(RowIssue(line_no, "empty participant_id"))
                continue
            try:
                ts = parse_iso_utc(row[1])
            except ValueError as exc:
                issues.append(RowIssue(line_no, f"bad timestamp: {exc}"))
                continue
            key = row[2].strip()
            inst = INSTRUMENTS.get(key)
            if inst is None:
                issues.append(RowIssue(line_no, f"unknown instrument {row[2]!r}"))
                continue
            try:
                score = int(row[3])
            except ValueError:
                issues.append(RowIssue(line_no, f"non-integer score {row[3]!r}"))
                continue
            if not (inst.score_min <= score <= inst.score_max):
                issues.append(
                    RowIssue(
                        line_no,
                        f"score {score} outside [{inst.score_min}, {inst.score_max}] for {key}",
                    )
                )
                continue
            rows.append((pid, ts, key, score))
    rows.sort(key=lambda r: (r[0], r[1]))
    return [SurveyResponse(*r) for r in rows], issues


def binarize_label(resp: SurveyResponse) -> bool:
    """True (positive screen) iff score >= the instrument's cutoff."""
    return resp.score >= INSTRUMENTS[resp.instrument].cutoff


def _format_value(value: float) -> str:
    """Shortest exact decimal for a float (round-trips through `float`)."""
    return repr(value)


def serialize_sensor_csv(points: Iterable[SensorPoint], modality: Modality) -> str:
    """Canonical sensor CSV: sorted rows, ISO-Z timestamps, exact values."""
    lines = [",".join(SENSOR_HEADER_SLEEP if modality.is_sleep else SENSOR_HEADER_NUMERIC)]
    ordered = sorted(points, key=lambda p: (p.participant, p.ts))
    for p in ordered:
        field = STAGE_NAMES[int(p.value)] if modality.is_sleep else _format_value(p.value)
        lines.append(f"{p.participant},{format_iso_utc(p.ts)},{field}")
    return "\n".join(lines) + "\n"


def serialize_survey_csv(responses: Iterable[SurveyResponse]) -> str:
    lines = [",".join(SURVEY_HEADER)]
    for r in sorted(responses, key=lambda r: (r.participant, r.ts, r.instrument)):
        lines.append(f"{r.participant},{format_iso_utc(r.ts)},{r.instrument},{r.score}")
    return "\n".join(lines) + "\n"
