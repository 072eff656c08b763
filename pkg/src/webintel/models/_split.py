"""Numba kernels for exact regression-tree growth on gradient statistics.

Split search is exact: candidate thresholds are midpoints between
consecutive distinct feature values present in a node, gains use the
second-order loss-reduction formula, and ties resolve to the lower
feature index, then the lower threshold (features are scanned in
ascending order with strictly-greater gain updates).

Features are routed by cardinality. Low-cardinality columns (at most
256 distinct values, the common case for count features) aggregate
gradient pairs into exact per-value bins over each node's rows, which
is cache-local; the remaining columns use a presorted streaming walk.
Nodes whose hessian total is below twice the minimum child weight can
never yield two valid children and are finalized as leaves unscanned.

``X`` and ``sort_idx`` should be Fortran-ordered; ``ranks_t`` is the
transposed dense-rank matrix and stays C-ordered.
"""

import numpy as np
from numba import njit

MAX_BINS = 256


def column_ranks(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense value ranks per column plus the flattened sorted uniques.

    Returns (ranks_t, uniq_flat, uniq_off): ``ranks_t[f, i]`` is the rank
    of ``X[i, f]`` among column f's distinct values, which live at
    ``uniq_flat[uniq_off[f]:uniq_off[f + 1]]`` in ascending order.
    """
    n, d = X.shape
    ranks_t = np.empty((d, n), dtype=np.int32)
    uniq_cols = []
    for f in range(d):
        uniq, inv = np.unique(X[:, f], return_inverse=True)
        ranks_t[f] = inv.astype(np.int32)
        uniq_cols.append(uniq)
    uniq_off = np.zeros(d + 1, dtype=np.int64)
    for f, uniq in enumerate(uniq_cols):
        uniq_off[f + 1] = uniq_off[f] + len(uniq)
    uniq_flat = np.concatenate(uniq_cols) if uniq_cols else np.zeros(0)
    return ranks_t, uniq_flat, uniq_off


@njit(cache=True)
def grow_tree(
    X, sort_idx, ranks_t, uniq_flat, uniq_off, g, h, feat_ids,
    max_depth, min_child_weight, reg_lambda, gamma,
):
    n, d = X.shape
    max_nodes = 2 ** (max_depth + 1)
    node_feature = np.full(max_nodes, -1, np.int64)
    node_thr = np.zeros(max_nodes)
    node_left = np.full(max_nodes, -1, np.int64)
    node_right = np.full(max_nodes, -1, np.int64)
    node_weight = np.zeros(max_nodes)
    node_g = np.zeros(max_nodes)
    node_h = np.zeros(max_nodes)
    node_cnt = np.zeros(max_nodes, np.int64)
    feat_gain = np.zeros(d)

    node_of_row = np.zeros(n, np.int32)
    total_g = 0.0
    total_h = 0.0
    for i in range(n):
        total_g += g[i]
        total_h += h[i]
    node_g[0] = total_g
    node_h[0] = total_h
    node_cnt[0] = n

    n_feat = len(feat_ids)
    bin_g = np.zeros(MAX_BINS)
    bin_h = np.zeros(MAX_BINS)
    bin_cnt = np.zeros(MAX_BINS, np.int64)
    touched = np.empty(MAX_BINS, np.int64)
    grouped = np.empty(n, np.int32)
    starts = np.zeros(max_nodes + 1, np.int64)

    n_nodes = 1
    active_start = 0
    for _depth in range(max_depth):
        n_active = n_nodes - active_start
        if n_active <= 0:
            break
        splittable = np.zeros(n_active, np.bool_)
        m_split = 0
        any_split = False
        for a in range(n_active):
            nd = active_start + a
            if node_h[nd] >= 2.0 * min_child_weight and node_cnt[nd] >= 2:
                splittable[a] = True
                m_split += node_cnt[nd]
                any_split = True
        if not any_split:
            break

        # group rows of splittable nodes into contiguous slices
        pos = 0
        for a in range(n_active):
            starts[a] = pos
            if splittable[a]:
                pos += node_cnt[active_start + a]
        starts[n_active] = pos
        fill = starts[:n_active].copy()
        for i in range(n):
            a = node_of_row[i] - active_start
            if a >= 0 and splittable[a]:
                grouped[fill[a]] = i
                fill[a] += 1

        best_gain = np.full(n_active, -1.0)
        best_feat = np.full(n_active, -1, np.int64)
        best_thr = np.zeros(n_active)
        cum_g = np.zeros(n_active)
        cum_h = np.zeros(n_active)
        prev_val = np.zeros(n_active)

        for fi in range(n_feat):
            f = feat_ids[fi]
            off = uniq_off[f]
            u = uniq_off[f + 1] - off
            if u <= MAX_BINS:
                if u < 2:
                    continue
                for a in range(n_active):
                    if not splittable[a]:
                        continue
                    nd = active_start + a
                    lo = starts[a]
                    hi = starts[a + 1]
                    n_touched = 0
                    for jj in range(lo, hi):
                        r = grouped[jj]
                        s = ranks_t[f, r]
                        if bin_cnt[s] == 0:
                            touched[n_touched] = s
                            n_touched += 1
                        bin_g[s] += g[r]
                        bin_h[s] += h[r]
                        bin_cnt[s] += 1
                    # visit present values in ascending order; sort the
                    # touched slots only when they are sparse in [0, u)
                    if n_touched * 3 < u:
                        slots = np.sort(touched[:n_touched])
                    else:
                        slots = touched[:n_touched]
                        k = 0
                        for s in range(u):
                            if bin_cnt[s] > 0:
                                slots[k] = s
                                k += 1
                    gl = 0.0
                    hl = 0.0
                    seen = 0
                    prev = 0.0
                    for si in range(n_touched):
                        s = slots[si]
                        v = uniq_flat[off + s]
                        if seen > 0:
                            gr = node_g[nd] - gl
                            hr = node_h[nd] - hl
                            if hl >= min_child_weight and hr >= min_child_weight:
                                gain = 0.5 * (
                                    gl * gl / (hl + reg_lambda)
                                    + gr * gr / (hr + reg_lambda)
                                    - (gl + gr) * (gl + gr) / (hl + hr + reg_lambda)
                                )
                                if gain > best_gain[a]:
                                    best_gain[a] = gain
                                    best_feat[a] = f
                                    best_thr[a] = 0.5 * (prev + v)
                        gl += bin_g[s]
                        hl += bin_h[s]
                        seen += 1
                        prev = v
                    for si in range(n_touched):
                        s = slots[si]
                        bin_g[s] = 0.0
                        bin_h[s] = 0.0
                        bin_cnt[s] = 0
            else:
                for a in range(n_active):
                    cum_g[a] = 0.0
                    cum_h[a] = 0.0
                    prev_val[a] = np.nan  # NaN marks "no rows seen yet"
                for ii in range(n):
                    r = sort_idx[ii, f]
                    a = node_of_row[r] - active_start
                    if a < 0 or not splittable[a]:
                        continue
                    v = X[r, f]
                    if v > prev_val[a]:  # false while prev is NaN
                        gl = cum_g[a]
                        hl = cum_h[a]
                        nd = active_start + a
                        gr = node_g[nd] - gl
                        hr = node_h[nd] - hl
                        if hl >= min_child_weight and hr >= min_child_weight:
                            gain = 0.5 * (
                                gl * gl / (hl + reg_lambda)
                                + gr * gr / (hr + reg_lambda)
                                - (gl + gr) * (gl + gr) / (hl + hr + reg_lambda)
                            )
                            if gain > best_gain[a]:
                                best_gain[a] = gain
                                best_feat[a] = f
                                best_thr[a] = 0.5 * (prev_val[a] + v)
                    cum_g[a] += g[r]
                    cum_h[a] += h[r]
                    prev_val[a] = v

        next_start = n_nodes
        for a in range(n_active):
            nd = active_start + a
            if best_feat[a] >= 0 and best_gain[a] > gamma and n_nodes + 2 <= max_nodes:
                node_feature[nd] = best_feat[a]
                node_thr[nd] = best_thr[a]
                node_left[nd] = n_nodes
                node_right[nd] = n_nodes + 1
                feat_gain[best_feat[a]] += best_gain[a]
                n_nodes += 2

        if n_nodes > next_start:
            for i in range(n):
                nd = node_of_row[i]
                if nd >= active_start and node_feature[nd] >= 0:
                    if X[i, node_feature[nd]] <= node_thr[nd]:
                        child = node_left[nd]
                    else:
                        child = node_right[nd]
                    node_of_row[i] = np.int32(child)
                    node_g[child] += g[i]
                    node_h[child] += h[i]
                    node_cnt[child] += 1
        active_start = next_start

    for nd in range(n_nodes):
        if node_feature[nd] < 0:
            node_weight[nd] = -node_g[nd] / (node_h[nd] + reg_lambda)

    return (
        node_feature[:n_nodes].copy(),
        node_thr[:n_nodes].copy(),
        node_left[:n_nodes].copy(),
        node_right[:n_nodes].copy(),
        node_weight[:n_nodes].copy(),
        feat_gain,
    )


@njit(cache=True)
def predict_tree(X, node_feature, node_thr, node_left, node_right, node_weight):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        nd = 0
        while node_feature[nd] >= 0:
            if X[i, node_feature[nd]] <= node_thr[nd]:
                nd = node_left[nd]
            else:
                nd = node_right[nd]
        out[i] = node_weight[nd]
    return out
