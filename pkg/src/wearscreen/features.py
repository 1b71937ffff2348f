"""Fixed statistical feature records from weekly channel series.

Each channel of each selected modality yields 15 statistics. Quartiles use
the 1-based index (n+1)/4 and 3(n+1)/4 with linear interpolation between
order statistics (clamped to [1, n]); entropy runs over the empirical
frequencies of distinct values with the natural log. Std and variance are
population (divide-by-n). Mode ties pick the smallest value.
"""

from __future__ import annotations

import numpy as np

from .aggregate import channels_for
from .errors import EmptyChannelError
from .ingest import MODALITY_ORDER, Modality
from .segment import WeeklySegment

STAT_NAMES = (
    "mean",
    "mode",
    "median",
    "std",
    "variance",
    "range",
    "iqr",
    "q1",
    "q3",
    "sum",
    "unique",
    "min",
    "max",
    "rms",
    "entropy",
)

#: Token used in feature names and CLI flags, per modality.
MODALITY_TOKENS = {m: m.value for m in Modality}
ALL_MODALITIES_TOKEN = "all"


def _order_stat(sorted_x: np.ndarray, one_based_index: float) -> float:
    """Linearly interpolated order statistic at a (possibly fractional) index."""
    n = len(sorted_x)
    i = min(max(one_based_index, 1.0), float(n))
    lo = int(np.floor(i))
    frac = i - lo
    if frac == 0.0 or lo >= n:
        return float(sorted_x[lo - 1])
    return float(sorted_x[lo - 1] + frac * (sorted_x[lo] - sorted_x[lo - 1]))


def channel_stats(x: np.ndarray) -> np.ndarray:
    """The 15 statistics of one channel, in STAT_NAMES order."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptyChannelError("channel_stats: empty channel")
    if not np.isfinite(x).all():
        raise ValueError("channel_stats: non-finite values")
    n = x.size
    s = np.sort(x)
    uniques, counts = np.unique(x, return_counts=True)
    mean = float(x.mean())
    mode = float(uniques[np.argmax(counts)])  # first max = smallest tied value
    median = float(np.median(x))
    var = float(x.var())
    std = float(np.sqrt(var))
    rng = float(s[-1] - s[0])
    q1 = _order_stat(s, (n + 1) / 4.0)
    q3 = _order_stat(s, 3.0 * (n + 1) / 4.0)
    iqr = q3 - q1
    total = float(x.sum())
    unique = float(len(uniques))
    rms = float(np.sqrt(np.mean(x * x)))
    p = counts / n
    entropy = float(-(p * np.log(p)).sum())
    return np.array(
        [mean, mode, median, std, var, rng, iqr, q1, q3, total, unique, s[0], s[-1], rms, entropy]
    )


def feature_names_for(modalities: tuple[Modality, ...]) -> list[str]:
    """`<modality>_<channel>_<stat>` names in canonical order."""
    names = []
    for mod in modalities:
        for channel in channels_for(mod):
            for stat in STAT_NAMES:
                names.append(f"{mod.value}_{channel}_{stat}")
    return names


def resolve_modalities(token: str) -> tuple[Modality, ...]:
    """CLI token -> modality tuple; 'all' concatenates every modality."""
    if token == ALL_MODALITIES_TOKEN:
        return MODALITY_ORDER
    return (Modality(token),)


def extract_features(segment: WeeklySegment, modalities: tuple[Modality, ...]) -> np.ndarray:
    """Concatenated per-channel statistics for the selected modalities."""
    parts = []
    for mod in modalities:
        if mod not in segment.data:
            raise KeyError(f"segment lacks modality {mod.value}")
        for channel in channels_for(mod):
            parts.append(channel_stats(segment.data[mod][channel]))
    return np.concatenate(parts)


def feature_matrix(
    segments: list[WeeklySegment], modalities: tuple[Modality, ...]
) -> tuple[np.ndarray, list[str]]:
    """Stack segment feature vectors into an (n_segments, n_features) matrix."""
    names = feature_names_for(modalities)
    if not segments:
        return np.empty((0, len(names))), names
    X = np.vstack([extract_features(seg, modalities) for seg in segments])
    return X, names


def feature_matrix_csv(
    segments: list[WeeklySegment], modalities: tuple[Modality, ...]
) -> str:
    """Feature matrix with id and label columns, as CSV text."""
    from .timeutil import format_iso_utc

    X, names = feature_matrix(segments, modalities)
    header = ["participant", "week_start"] + names + [
        "label_depression",
        "label_anxiety",
        "label_stress",
    ]
    lines = [",".join(header)]
    label_keys = ("CESD10", "STAI", "PSS4")
    for row, seg in zip(X, segments):
        cols = [seg.participant, format_iso_utc(seg.week_start)]
        cols += [repr(v) for v in row]
        for key in label_keys:
            info = seg.labels.get(key)
            cols.append("" if info is None else ("1" if info.positive else "0"))
        lines.append(",".join(cols))
    return "\n".join(lines) + "\n"
