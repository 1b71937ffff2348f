"""Numba-compiled training kernels.

Scalar-loop twins of `numpy_impl`: running sums here correspond to
np.cumsum there, so tree construction matches the fallback bit for bit on
tie-free data. Compiled lazily with on-disk caching.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_LCG_MULT = np.uint64(6364136223846793005)
_LCG_INC = np.uint64(1442695040888963407)
_SHIFT33 = np.uint64(33)


@njit(cache=True)
def _lcg_below(state, k):
    state = state * _LCG_MULT + _LCG_INC
    return state, np.int64((state >> _SHIFT33) % np.uint64(k))


@njit(cache=True)
def _entropy_bits(wpos, wtot):
    if wpos <= 0.0 or wpos >= wtot or wtot <= 0.0:
        return 0.0
    p = wpos / wtot
    q = 1.0 - p
    return -(p * np.log2(p) + q * np.log2(q))


@njit(cache=True)
def build_cls_tree(X, y, w, max_depth, min_samples_split, n_feats_split, seed):
    n, p = X.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)
    importances = np.zeros(p, dtype=np.float64)

    idx = np.arange(n, dtype=np.int64)
    root_w = 0.0
    for i in range(n):
        root_w += w[i]

    feats = np.empty(p, dtype=np.int64)
    xs = np.empty(n, dtype=np.float64)
    ws = np.empty(n, dtype=np.float64)
    ps = np.empty(n, dtype=np.float64)
    buf = np.empty(n, dtype=np.int64)

    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_lo = np.empty(max_nodes, dtype=np.int64)
    stack_hi = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    top = 0
    stack_node[top] = 0
    stack_lo[top] = 0
    stack_hi[top] = n
    stack_depth[top] = 0
    top += 1
    n_nodes = 1
    state = np.uint64(seed)

    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        depth = stack_depth[top]
        m = hi - lo

        wtot = 0.0
        for k in range(lo, hi):
            wtot += w[idx[k]]
        wpos_tot = 0.0
        for k in range(lo, hi):
            if y[idx[k]] == 1:
                wpos_tot += w[idx[k]]
        value[node] = wpos_tot / wtot if wtot > 0.0 else 0.5
        if (
            depth >= max_depth
            or m < min_samples_split
            or wpos_tot <= 0.0
            or wpos_tot >= wtot
        ):
            continue

        if n_feats_split >= p:
            n_try = p
            for f in range(p):
                feats[f] = f
        else:
            n_try = n_feats_split
            for f in range(p):
                feats[f] = f
            for i in range(n_try):
                state, r = _lcg_below(state, p - i)
                j = i + r
                tmp = feats[i]
                feats[i] = feats[j]
                feats[j] = tmp

        parent_h = _entropy_bits(wpos_tot, wtot)
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        for fi in range(n_try):
            f = feats[fi]
            for k in range(m):
                xs[k] = X[idx[lo + k], f]
            order = np.argsort(xs[:m])
            for k in range(m):
                src = idx[lo + order[k]]
                ws[k] = w[src]
                ps[k] = w[src] if y[src] == 1 else 0.0
            if xs[order[0]] == xs[order[m - 1]]:
                continue
            wl = 0.0
            pl = 0.0
            for k in range(m - 1):
                wl += ws[k]
                pl += ps[k]
                a = xs[order[k]]
                b = xs[order[k + 1]]
                if a >= b:
                    continue
                wr = wtot - wl
                pr = wpos_tot - pl
                gain = (
                    parent_h
                    - (wl / wtot) * _entropy_bits(pl, wl)
                    - (wr / wtot) * _entropy_bits(pr, wr)
                )
                if gain > best_gain:
                    best_gain = gain
                    best_feat = f
                    mid = 0.5 * (a + b)
                    best_thr = mid if a < mid < b else a
        if best_feat < 0 or best_gain <= 0.0:
            continue

        n_left = 0
        for k in range(lo, hi):
            if X[idx[k], best_feat] <= best_thr:
                buf[n_left] = idx[k]
                n_left += 1
        n_right = 0
        for k in range(lo, hi):
            if not (X[idx[k], best_feat] <= best_thr):
                buf[n_left + n_right] = idx[k]
                n_right += 1
        for k in range(m):
            idx[lo + k] = buf[k]

        importances[best_feat] += (wtot / root_w) * best_gain
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack_node[top] = n_nodes
        stack_lo[top] = lo
        stack_hi[top] = lo + n_left
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = n_nodes + 1
        stack_lo[top] = lo + n_left
        stack_hi[top] = hi
        stack_depth[top] = depth + 1
        top += 1
        n_nodes += 2
    return feature, threshold, left, right, value, n_nodes, importances


@njit(cache=True)
def build_reg_tree(X, r, h, max_depth, min_samples_split, eps):
    n, p = X.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)
    importances = np.zeros(p, dtype=np.float64)

    idx = np.arange(n, dtype=np.int64)
    xs = np.empty(n, dtype=np.float64)
    rs = np.empty(n, dtype=np.float64)
    buf = np.empty(n, dtype=np.int64)

    stack_node = np.empty(max_nodes, dtype=np.int64)
    stack_lo = np.empty(max_nodes, dtype=np.int64)
    stack_hi = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    top = 0
    stack_node[top] = 0
    stack_lo[top] = 0
    stack_hi[top] = n
    stack_depth[top] = 0
    top += 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        depth = stack_depth[top]
        m = hi - lo

        sr = 0.0
        sh = 0.0
        for k in range(lo, hi):
            sr += r[idx[k]]
        for k in range(lo, hi):
            sh += h[idx[k]]
        value[node] = sr / (sh + eps)
        if depth >= max_depth or m < min_samples_split:
            continue
        sr2 = 0.0
        for k in range(lo, hi):
            sr2 += r[idx[k]] * r[idx[k]]
        parent_sse = sr2 - (sr * sr) / m

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        for f in range(p):
            for k in range(m):
                xs[k] = X[idx[lo + k], f]
            order = np.argsort(xs[:m])
            if xs[order[0]] == xs[order[m - 1]]:
                continue
            for k in range(m):
                rs[k] = r[idx[lo + order[k]]]
            sl = 0.0
            s2l = 0.0
            for k in range(m - 1):
                sl += rs[k]
                s2l += rs[k] * rs[k]
                a = xs[order[k]]
                b = xs[order[k + 1]]
                if a >= b:
                    continue
                nl = float(k + 1)
                nr = m - nl
                sser = (sr2 - s2l) - (sr - sl) * (sr - sl) / nr
                ssel = s2l - sl * sl / nl
                gain = parent_sse - ssel - sser
                if gain > best_gain:
                    best_gain = gain
                    best_feat = f
                    mid = 0.5 * (a + b)
                    best_thr = mid if a < mid < b else a
        if best_feat < 0 or best_gain <= 0.0:
            continue

        n_left = 0
        for k in range(lo, hi):
            if X[idx[k], best_feat] <= best_thr:
                buf[n_left] = idx[k]
                n_left += 1
        n_right = 0
        for k in range(lo, hi):
            if not (X[idx[k], best_feat] <= best_thr):
                buf[n_left + n_right] = idx[k]
                n_right += 1
        for k in range(m):
            idx[lo + k] = buf[k]

        importances[best_feat] += (m / n) * best_gain
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack_node[top] = n_nodes
        stack_lo[top] = lo
        stack_hi[top] = lo + n_left
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = n_nodes + 1
        stack_lo[top] = lo + n_left
        stack_hi[top] = hi
        stack_depth[top] = depth + 1
        top += 1
        n_nodes += 2
    return feature, threshold, left, right, value, n_nodes, importances


@njit(cache=True)
def predict_tree(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@njit(cache=True)
def smo_solve(K, y, C, tol, max_passes, max_iter, seed):
    n = len(y)
    alpha = np.zeros(n, dtype=np.float64)
    b = 0.0
    if n < 2:
        return alpha, float(y[0]) if n == 1 else 0.0, 0, True
    ay = np.zeros(n, dtype=np.float64)
    state = np.uint64(seed)
    passes = 0
    it = 0
    while passes < max_passes and it < max_iter:
        changed = 0
        for i in range(n):
            fi = b
            for t in range(n):
                fi += ay[t] * K[i, t]
            ei = fi - y[i]
            if (y[i] * ei < -tol and alpha[i] < C) or (y[i] * ei > tol and alpha[i] > 0):
                state, r = _lcg_below(state, n - 1)
                j = r if r < i else r + 1
                fj = b
                for t in range(n):
                    fj += ay[t] * K[j, t]
                ej = fj - y[j]
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
