"""Cleaning, cadence regularization, and imputation of sensor series.

Numeric series are float64 with NaN for missing; sleep series are int8
stage codes with -1 for missing. Missing runs longer than the gap cap
(default 6 h) are left missing so downstream windows over them get masked.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import AllMissingError, EmptyInputError
from .ingest import Modality, SensorPoint

MISSING_STAGE = -1
DEFAULT_GAP_CAP_S = 6 * 3600

#: Zero is a dropout sentinel only where the quantity has a physical floor.
ZERO_SENTINEL_MODALITIES = (Modality.HEART, Modality.CALORIES)


@dataclass(slots=True)
class RegularSeries:
    """One participant-modality stream on a fixed cadence grid."""

    participant: str
    modality: Modality
    start: int
    cadence: int
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> int:
        """Timestamp of the last grid slot."""
        return self.start + (len(self.values) - 1) * self.cadence

    def slot_ts(self, i: int) -> int:
        return self.start + i * self.cadence

    def missing_mask(self) -> np.ndarray:
        if self.modality.is_sleep:
            return self.values == MISSING_STAGE
        return np.isnan(self.values)


def regularize(points: list[SensorPoint]) -> RegularSeries:
    """Place sorted points of one (participant, modality) onto the native grid.

    The grid spans first..last observed timestamp; each point lands on its
    nearest slot (last write wins); untouched slots are missing.
    """
    if not points:
        raise EmptyInputError("regularize: no points")
    participant = points[0].participant
    modality = points[0].modality
    for p in points:
        if p.participant != participant or p.modality is not modality:
            raise ValueError("regularize expects a single (participant, modality)")
    cadence = modality.cadence_s
    start = points[0].ts
    n = int(round((points[-1].ts - start) / cadence)) + 1
    if modality.is_sleep:
        values = np.full(n, MISSING_STAGE, dtype=np.int8)
    else:
        values = np.full(n, np.nan, dtype=np.float64)
    for p in points:
        slot = int(round((p.ts - start) / cadence))
        slot = min(max(slot, 0), n - 1)
        values[slot] = int(p.value) if modality.is_sleep else p.value
    return RegularSeries(participant, modality, start, cadence, values)


def clean_sentinels(series: RegularSeries) -> RegularSeries:
    """Mark exact-zero heart/calories samples missing; other modalities pass through."""
    if series.modality not in ZERO_SENTINEL_MODALITIES:
        return series
    values = series.values.copy()
    values[values == 0.0] = np.nan
    return replace(series, values=values)


def _missing_runs(missing: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, stop) index runs of consecutive missing slots."""
    runs: list[tuple[int, int]] = []
    i = 0
    n = len(missing)
    while i < n:
        if missing[i]:
            j = i
            while j < n and missing[j]:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def impute_linear(
    series: RegularSeries, gap_cap_s: int = DEFAULT_GAP_CAP_S
) -> RegularSeries:
    """Fill numeric gaps: interior runs linearly, edge runs by nearest value.

    Runs spanning more than `gap_cap_s` stay missing.
    """
    if series.modality.is_sleep:
        raise ValueError("impute_linear expects a numeric modality")
    values = series.values.copy()
    missing = np.isnan(values)
    if missing.all():
        raise AllMissingError(
            f"{series.participant}/{series.modality.value}: no observed value"
        )
    n = len(values)
    for lo, hi in _missing_runs(missing):
        if (hi - lo) * series.cadence > gap_cap_s:
            continue
        if lo == 0:
            values[lo:hi] = values[hi]
        elif hi == n:
            values[lo:hi] = values[lo - 1]
        else:
            a = values[lo - 1]
            b = values[hi]
            span = hi - lo + 1
            for k in range(lo, hi):
                values[k] = a + (k - (lo - 1)) * (b - a) / span
    return replace(series, values=values)


def impute_sleep(
    series: RegularSeries, gap_cap_s: int = DEFAULT_GAP_CAP_S
) -> RegularSeries:
    """Fill sleep gaps: awake-adjacent or boundary runs become awake,
    runs strictly between two sleep stages carry the earlier stage forward.

    Runs spanning more than `gap_cap_s` stay missing.
    """
    if not series.modality.is_sleep:
        raise ValueError("impute_sleep expects the sleep modality")
    values = series.values.copy()
    missing = values == MISSING_STAGE
    n = len(values)
    awake = 0
    for lo, hi in _missing_runs(missing):
        if (hi - lo) * series.cadence > gap_cap_s:
            continue
        left = int(values[lo - 1]) if lo > 0 else None
        right = int(values[hi]) if hi < n else None
        if left is None or right is None or left == awake or right == awake:
            values[lo:hi] = awake
        else:
            values[lo:hi] = left
    return replace(series, values=values)


def preprocess_series(
    points: list[SensorPoint], gap_cap_s: int = DEFAULT_GAP_CAP_S
) -> RegularSeries:
    """regularize -> clean_sentinels -> impute, for one (participant, modality)."""
    series = regularize(points)
    if series.modality.is_sleep:
        return impute_sleep(series, gap_cap_s)
    series = clean_sentinels(series)
    return impute_linear(series, gap_cap_s)
