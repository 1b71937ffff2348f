"""Windowed compression of regular series into coarse granularities.

Windows are anchored at local midnight and step by the granularity (1, 4,
6, 8, 12, or 24 h). Partial windows at the series edges are dropped; a
window containing any missing sample is kept but masked invalid. Standard
deviations are population (divide-by-n) throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import Modality, SUM_MODALITIES
from .preprocess import MISSING_STAGE, RegularSeries
from .timeutil import SECONDS_PER_DAY, SECONDS_PER_HOUR

GRANULARITIES = (1, 4, 6, 8, 12, 24)

#: Channel names per modality kind.
NUMERIC_CHANNELS = ("agg", "std")
SLEEP_CHANNELS = ("count_awake", "count_light", "count_deep", "count_rem", "std_stagecode")


def channels_for(modality: Modality) -> tuple[str, ...]:
    return SLEEP_CHANNELS if modality.is_sleep else NUMERIC_CHANNELS


@dataclass(slots=True)
class AggregatedSeries:
    """Midnight-anchored windows of one participant-modality stream."""

    participant: str
    modality: Modality
    granularity: int
    window_start: int
    channels: dict[str, np.ndarray]
    valid: np.ndarray

    @property
    def n_windows(self) -> int:
        return len(self.valid)

    @property
    def window_s(self) -> int:
        return self.granularity * SECONDS_PER_HOUR

    def window_ts(self, w: int) -> int:
        return self.window_start + w * self.window_s


def _window_slices(
    series: RegularSeries, granularity: int, tz_offset: int
) -> tuple[int, list[tuple[int, int]]]:
    """First aligned window start plus per-window [lo, hi) sample index ranges."""
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}, got {granularity}")
    window_s = granularity * SECONDS_PER_HOUR
    assert SECONDS_PER_DAY % window_s == 0
    local = series.start + tz_offset
    first = -(-local // window_s) * window_s - tz_offset  # ceil to window grid
    slices: list[tuple[int, int]] = []
    n = len(series.values)
    b = first
    while True:
        lo = -(-(b - series.start) // series.cadence)
        hi = -(-(b + window_s - series.start) // series.cadence)
        if hi > n:
            break
        slices.append((lo, hi))
        b += window_s
    return first, slices


def aggregate_sum(
    series: RegularSeries, granularity: int, tz_offset: int = 0
) -> AggregatedSeries:
    """Per-window sum + std for calories / distance / steps."""
    if series.modality not in SUM_MODALITIES:
        raise ValueError(f"aggregate_sum does not apply to {series.modality.value}")
    return _aggregate_numeric(series, granularity, tz_offset, mean=False)


def aggregate_mean(
    series: RegularSeries, granularity: int, tz_offset: int = 0
) -> AggregatedSeries:
    """Per-window mean + std for heart rate."""
    if series.modality is not Modality.HEART:
        raise ValueError(f"aggregate_mean does not apply to {series.modality.value}")
    return _aggregate_numeric(series, granularity, tz_offset, mean=True)


def _aggregate_numeric(
    series: RegularSeries, granularity: int, tz_offset: int, mean: bool
) -> AggregatedSeries:
    first, slices = _window_slices(series, granularity, tz_offset)
    n_w = len(slices)
    agg = np.full(n_w, np.nan)
    std = np.full(n_w, np.nan)
    valid = np.zeros(n_w, dtype=bool)
    for w, (lo, hi) in enumerate(slices):
        vals = series.values[lo:hi]
        if np.isnan(vals).any():
            continue
        agg[w] = vals.mean() if mean else vals.sum()
        std[w] = vals.std()
        valid[w] = True
    return AggregatedSeries(
        series.participant,
        series.modality,
        granularity,
        first,
        {"agg": agg, "std": std},
        valid,
    )


def aggregate_sleep(
    series: RegularSeries, granularity: int, tz_offset: int = 0
) -> AggregatedSeries:
    """Per-window minutes in each stage plus the std of ordinal stage codes."""
    if not series.modality.is_sleep:
        raise ValueError(f"aggregate_sleep does not apply to {series.modality.value}")
    first, slices = _window_slices(series, granularity, tz_offset)
    n_w = len(slices)
    channels = {name: np.full(n_w, np.nan) for name in SLEEP_CHANNELS}
    valid = np.zeros(n_w, dtype=bool)
    for w, (lo, hi) in enumerate(slices):
        codes = series.values[lo:hi]
        if (codes == MISSING_STAGE).any():
            continue
        for stage, name in enumerate(SLEEP_CHANNELS[:4]):
            channels[name][w] = int((codes == stage).sum())
        channels["std_stagecode"][w] = codes.astype(np.float64).std()
        valid[w] = True
    return AggregatedSeries(
        series.participant, series.modality, granularity, first, channels, valid
    )


def aggregate_series(
    series: RegularSeries, granularity: int, tz_offset: int = 0
) -> AggregatedSeries:
    """Dispatch to the modality's aggregation rule (sum / mean / stage counts)."""
    if series.modality.is_sleep:
        return aggregate_sleep(series, granularity, tz_offset)
    if series.modality is Modality.HEART:
        return aggregate_mean(series, granularity, tz_offset)
    return aggregate_sum(series, granularity, tz_offset)


def dump_aggregated_csv(series_list: list[AggregatedSeries]) -> str:
    """Debug dump: participant,modality,granularity,window_start,channel,value."""
    from .timeutil import format_iso_utc

    lines = ["participant,modality,granularity,window_start,channel,value"]
    for s in series_list:
        for name, vals in s.channels.items():
            for w in range(s.n_windows):
                if not s.valid[w]:
                    continue
                lines.append(
                    f"{s.participant},{s.modality.value},{s.granularity},"
                    f"{format_iso_utc(s.window_ts(w))},{name},{vals[w]!r}"
                )
    return "\n".join(lines) + "\n"
