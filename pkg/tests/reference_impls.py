"""Naive, independent reference implementations used as test oracles.

Everything here favors obviousness over speed: plain loops, brute-force
enumeration, and textbook formulas. These are written against the intended
behavior, not against the library code they check.
"""

from __future__ import annotations

import math
from collections import Counter


def naive_stats(xs) -> dict:
    """The 15 channel statistics via direct formulas on a Python list."""
    xs = [float(v) for v in xs]
    n = len(xs)
    assert n > 0
    s = sorted(xs)
    mean = sum(xs) / n
    counts = Counter(xs)
    max_count = max(counts.values())
    mode = min(v for v, c in counts.items() if c == max_count)
    if n % 2 == 1:
        median = s[n // 2]
    else:
        median = 0.5 * (s[n // 2 - 1] + s[n // 2])
    variance = sum((v - mean) ** 2 for v in xs) / n
    std = math.sqrt(variance)

    def order_stat(idx: float) -> float:
        idx = min(max(idx, 1.0), float(n))
        lo = math.floor(idx)
        frac = idx - lo
        if frac == 0.0 or lo >= n:
            return s[int(lo) - 1]
        return s[lo - 1] + frac * (s[lo] - s[lo - 1])

    q1 = order_stat((n + 1) / 4.0)
    q3 = order_stat(3.0 * (n + 1) / 4.0)
    total = sum(xs)
    rms = math.sqrt(sum(v * v for v in xs) / n)
    entropy = -sum((c / n) * math.log(c / n) for c in counts.values())
    return {
        "mean": mean,
        "mode": mode,
        "median": median,
        "std": std,
        "variance": variance,
        "range": s[-1] - s[0],
        "iqr": q3 - q1,
        "q1": q1,
        "q3": q3,
        "sum": total,
        "unique": float(len(counts)),
        "min": s[0],
        "max": s[-1],
        "rms": rms,
        "entropy": entropy,
    }


def brute_force_windows(
    timestamps, values, window_s: int, tz_offset: int = 0
) -> dict[int, list[float]]:
    """Bucket (ts, value) samples into complete midnight-anchored windows.

    Returns window_start -> sample list, keeping only windows where no
    sample is missing (value is None) and the span is fully covered by the
    observed timestamp range given the inferred cadence.
    """
    buckets: dict[int, list] = {}
    for ts, v in zip(timestamps, values):
        w = ((ts + tz_offset) // window_s) * window_s - tz_offset
        buckets.setdefault(w, []).append((ts, v))
    cadence = min(b - a for a, b in zip(timestamps, timestamps[1:]))
    out = {}
    for w, samples in buckets.items():
        if len(samples) != window_s // cadence:
            continue
        if any(v is None for _, v in samples):
            continue
        out[w] = [v for _, v in sorted(samples)]
    return out


def naive_information_gain(labels, groups) -> float:
    """IG in bits of a partition given as a group id per label."""

    def h(lab):
        n = len(lab)
        out = 0.0
        for c in set(lab):
            p = sum(1 for v in lab if v == c) / n
            out -= p * math.log2(p)
        return out

    n = len(labels)
    parent = h(labels)
    child = 0.0
    for g in set(groups):
        sub = [l for l, gg in zip(labels, groups) if gg == g]
        child += len(sub) / n * h(sub)
    return parent - child


def svm_dual_reference(K, y, C, steps: int = 50000, lr: float = 1e-2):
    """Projected gradient ascent on the SVM dual for tiny problems.

    maximize sum(a) - 0.5 a^T (yy^T o K) a
    s.t. 0 <= a <= C and sum(a * y) = 0

    The feasible-set projection solves for the multiplier of the equality
    constraint by bisection; adequate as a near-optimal reference at n<=20.
    """
    import numpy as np

    def project(a0):
        span = float(np.abs(a0).max() + C + 1.0)
        lo, hi = -span, span
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            s = float(np.sum(y * np.clip(a0 - mid * y, 0.0, C)))
            if s > 0.0:
                lo = mid
            else:
                hi = mid
        return np.clip(a0 - 0.5 * (lo + hi) * y, 0.0, C)

    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    a = project(np.zeros(n))
    for _ in range(steps):
        grad = 1.0 - Q @ a
        a = project(a + lr * grad)
    obj = float(a.sum() - 0.5 * a @ Q @ a)
    return a, obj


def central_difference_grad(f, x, eps: float = 1e-6):
    """Central finite differences of a scalar function of a vector."""
    import numpy as np

    g = np.zeros_like(x)
    for i in range(len(x)):
        hi = x.copy()
        lo = x.copy()
        hi[i] += eps
        lo[i] -= eps
        g[i] = (f(hi) - f(lo)) / (2.0 * eps)
    return g
