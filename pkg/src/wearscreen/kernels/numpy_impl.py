"""Pure-numpy implementations of the hot training kernels.

These mirror the numba kernels in `numba_impl` operation for operation:
weight accumulations go through `np.cumsum` (sequential, like the numba
scalar loops) so tree construction is bit-identical across the two paths
on tie-free data. The SMO solver matches algorithmically but relies on
`np.dot`, so it is compared by objective value, not bitwise.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407


def lcg_next(state: int) -> int:
    return (state * _LCG_MULT + _LCG_INC) & _MASK64


def lcg_below(state: int, k: int) -> tuple[int, int]:
    """Advance the LCG and draw a uniform integer in [0, k)."""
    state = lcg_next(state)
    return state, (state >> 33) % k


def _feature_subset(p: int, k: int, state: int) -> tuple[np.ndarray, int]:
    """First k entries of a partial Fisher-Yates shuffle of arange(p)."""
    feats = np.arange(p, dtype=np.int64)
    if k >= p:
        return feats, state
    for i in range(k):
        state, r = lcg_below(state, p - i)
        j = i + r
        feats[i], feats[j] = feats[j], feats[i]
    return feats[:k], state


def _binary_entropy_bits(wpos: np.ndarray, wtot: np.ndarray) -> np.ndarray:
    """Elementwise two-class entropy in bits from weighted counts."""
    wpos = np.asarray(wpos, dtype=np.float64)
    wtot = np.asarray(wtot, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = wpos / wtot
        q = 1.0 - p
        h = -(p * np.log2(p) + q * np.log2(q))
    interior = (wpos > 0.0) & (wpos < wtot) & (wtot > 0.0)
    return np.where(interior, h, 0.0)


def build_cls_tree(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    max_depth: int,
    min_samples_split: int,
    n_feats_split: int,
    seed: int,
):
    """Grow a weighted binary classification tree by information gain.

    Returns (feature, threshold, left, right, pos_frac, n_nodes, importances).
    Leaf nodes carry feature == -1 and the weighted positive fraction.
    """
    n, p = X.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)
    importances = np.zeros(p, dtype=np.float64)

    idx = np.arange(n, dtype=np.int64)
    pos_w = w * (y == 1)
    root_w = float(np.cumsum(w)[-1])

    state = seed & _MASK64
    stack = [(0, 0, n, 0)]
    n_nodes = 1
    while stack:
        node, lo, hi, depth = stack.pop()
        node_idx = idx[lo:hi]
        wtot = float(np.cumsum(w[node_idx])[-1])
        wpos = pos_w[node_idx]
        wpos_tot = float(np.cumsum(wpos)[-1]) if len(node_idx) else 0.0
        value[node] = wpos_tot / wtot if wtot > 0.0 else 0.5
        if (
            depth >= max_depth
            or hi - lo < min_samples_split
            or wpos_tot <= 0.0
            or wpos_tot >= wtot
        ):
            continue
        feats, state = _feature_subset(p, n_feats_split, state)
        parent_h = float(_binary_entropy_bits(wpos_tot, wtot))
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        for f in feats:
            xs_all = X[node_idx, f]
            order = np.argsort(xs_all, kind="quicksort")
            xs = xs_all[order]
            if xs[0] == xs[-1]:
                continue
            cw = np.cumsum(w[node_idx][order])
            cp = np.cumsum(wpos[order])
            wl = cw[:-1]
            pl = cp[:-1]
            wr = wtot - wl
            pr = wpos_tot - pl
            gains = (
                parent_h
                - (wl / wtot) * _binary_entropy_bits(pl, wl)
                - (wr / wtot) * _binary_entropy_bits(pr, wr)
            )
            gains = np.where(xs[:-1] < xs[1:], gains, -np.inf)
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best_feat = int(f)
                a = xs[k]
                b = xs[k + 1]
                m = 0.5 * (a + b)
                best_thr = m if a < m < b else a
        if best_feat < 0 or best_gain <= 0.0:
            continue
        mask = X[node_idx, best_feat] <= best_thr
        left_idx = node_idx[mask]
        right_idx = node_idx[~mask]
        idx[lo : lo + len(left_idx)] = left_idx
        idx[lo + len(left_idx) : hi] = right_idx
        importances[best_feat] += (wtot / root_w) * best_gain
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack.append((n_nodes, lo, lo + len(left_idx), depth + 1))
        stack.append((n_nodes + 1, lo + len(left_idx), hi, depth + 1))
        n_nodes += 2
    return feature, threshold, left, right, value, n_nodes, importances


def build_reg_tree(
    X: np.ndarray,
    r: np.ndarray,
    h: np.ndarray,
    max_depth: int,
    min_samples_split: int,
    eps: float,
):
    """Grow a regression tree on residuals with Newton-step leaf values.

    Splits maximize squared-error reduction of r; leaves predict
    sum(r) / (sum(h) + eps). Same return layout as build_cls_tree.
    """
    n, p = X.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)
    importances = np.zeros(p, dtype=np.float64)

    idx = np.arange(n, dtype=np.int64)
    stack = [(0, 0, n, 0)]
    n_nodes = 1
    while stack:
        node, lo, hi, depth = stack.pop()
        node_idx = idx[lo:hi]
        m = hi - lo
        sr = float(np.cumsum(r[node_idx])[-1])
        sh = float(np.cumsum(h[node_idx])[-1])
        value[node] = sr / (sh + eps)
        if depth >= max_depth or m < min_samples_split:
            continue
        sr2 = float(np.cumsum(r[node_idx] * r[node_idx])[-1])
        parent_sse = sr2 - (sr * sr) / m
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        for f in range(p):
            xs_all = X[node_idx, f]
            order = np.argsort(xs_all, kind="quicksort")
            xs = xs_all[order]
            if xs[0] == xs[-1]:
                continue
            rs = r[node_idx][order]
            c1 = np.cumsum(rs)
            c2 = np.cumsum(rs * rs)
            nl = np.arange(1, m, dtype=np.float64)
            sl = c1[:-1]
            s2l = c2[:-1]
            nr = m - nl
            sser = (sr2 - s2l) - (sr - sl) * (sr - sl) / nr
            ssel = s2l - sl * sl / nl
            gains = parent_sse - ssel - sser
            gains = np.where(xs[:-1] < xs[1:], gains, -np.inf)
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best_feat = int(f)
                a = xs[k]
                b = xs[k + 1]
                mid = 0.5 * (a + b)
                best_thr = mid if a < mid < b else a
        if best_feat < 0 or best_gain <= 0.0:
            continue
        mask = X[node_idx, best_feat] <= best_thr
        left_idx = node_idx[mask]
        right_idx = node_idx[~mask]
        idx[lo : lo + len(left_idx)] = left_idx
        idx[lo + len(left_idx) : hi] = right_idx
        importances[best_feat] += (m / n) * best_gain
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack.append((n_nodes, lo, lo + len(left_idx), depth + 1))
        stack.append((n_nodes + 1, lo + len(left_idx), hi, depth + 1))
        n_nodes += 2
    return feature, threshold, left, right, value, n_nodes, importances


def predict_tree(
    feature: np.ndarray,
    threshold: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    value: np.ndarray,
    X: np.ndarray,
) -> np.ndarray:
    """Leaf value for each row of X."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            node = left[node] if X[i, feature[node]] <= threshold[node] else right[node]
        out[i] = value[node]
    return out


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float,
    max_passes: int,
    max_iter: int,
    seed: int,
):
    """Simplified SMO on the precomputed kernel matrix.

    y must be in {-1, +1}. Returns (alpha, b, n_iter, converged) where
    `converged` means max_passes consecutive sweeps made no update.
    """
    n = len(y)
    alpha = np.zeros(n, dtype=np.float64)
    b = 0.0
    state = seed & _MASK64
    passes = 0
    it = 0
    while passes < max_passes and it < max_iter:
        changed = 0
        ay = alpha * y
        for i in range(n):
            ei = float(np.dot(ay, K[:, i])) + b - y[i]
            if (y[i] * ei < -tol and alpha[i] < C) or (y[i] * ei > tol and alpha[i] > 0):
                state, r = lcg_below(state, n - 1)
                j = r if r < i else r + 1
                ej = float(np.dot(ay, K[:, j])) + b - y[j]
                ai_old = alpha[i]
                aj_old = alpha[j]
                if y[i] != y[j]:
                    lo_b = max(0.0, aj_old - ai_old)
                    hi_b = min(C, C + aj_old - ai_old)
                else:
                    lo_b = max(0.0, ai_old + aj_old - C)
                    hi_b = min(C, ai_old + aj_old)
                if lo_b >= hi_b:
                    continue
                eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                if eta >= 0.0:
                    continue
                aj = aj_old - y[j] * (ei - ej) / eta
                aj = min(max(aj, lo_b), hi_b)
                if abs(aj - aj_old) < 1e-7:
                    continue
                ai = ai_old + y[i] * y[j] * (aj_old - aj)
                b1 = b - ei - y[i] * (ai - ai_old) * K[i, i] - y[j] * (aj - aj_old) * K[i, j]
                b2 = b - ej - y[i] * (ai - ai_old) * K[i, j] - y[j] * (aj - aj_old) * K[j, j]
                if 0.0 < ai < C:
                    b = b1
                elif 0.0 < aj < C:
                    b = b2
                else:
                    b = 0.5 * (b1 + b2)
                alpha[i] = ai
                alpha[j] = aj
                ay[i] = ai * y[i]
                ay[j] = aj * y[j]
                changed += 1
        it += 1
        passes = passes + 1 if changed == 0 else 0
    return alpha, b, it, passes >= max_passes
