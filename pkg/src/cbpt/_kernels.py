"""Numba kernels for tree growth, leaf routing and weakest-link pruning.

All kernels are deterministic: sorts are stable (mergesort), partitions keep
relative order, and ties are resolved by fixed scan order. Node ids are
assigned in depth-first preorder, so every subtree occupies the contiguous
id range [t, subtree_end[t]).
"""

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True, nogil=True)
def grow_tree(X, y, w, n_classes, max_depth):
    """Grow a binary CART tree with sample weights.

    Splits maximize weighted Gini gain; candidate thresholds are midpoints
    between consecutive distinct values among the node's positive-weight
    samples; routing is strictly `value < threshold` to the left. Nodes stop
    when pure among positive-weight samples, unsplittable, or at max_depth
    (max_depth < 0 means unlimited).

    Returns (feature, threshold, left, right, depth, count, cws, gini) arrays
    trimmed to the node count. Leaves have feature == -1.
    """
    n, n_features = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, LEAF, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, LEAF, np.int64)
    right = np.full(cap, LEAF, np.int64)
    depth = np.zeros(cap, np.int64)
    count = np.zeros(cap, np.int64)
    cws = np.zeros((cap, n_classes), np.float64)
    gini = np.zeros(cap, np.float64)

    idx = np.arange(n)
    buf = np.empty(n, np.int64)
    vals = np.empty(n, np.float64)
    lcw = np.empty(n_classes, np.float64)

    # DFS stack; right child pushed first so the left subtree gets the
    # contiguous lower id range (preorder numbering).
    st_parent = np.empty(cap, np.int64)
    st_isleft = np.empty(cap, np.uint8)
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    st_parent[0] = -1
    st_isleft[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    top = 1
    n_nodes = 0

    while top > 0:
        top -= 1
        parent = st_parent[top]
        isleft = st_isleft[top]
        start = st_start[top]
        end = st_end[top]
        dep = st_depth[top]

        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if isleft == 1:
                left[parent] = node
            else:
                right[parent] = node
        depth[node] = dep
        m = end - start
        count[node] = m

        for c in range(n_classes):
            cws[node, c] = 0.0
        for ii in range(start, end):
            i = idx[ii]
            cws[node, y[i]] += w[i]
        tot_w = 0.0
        for c in range(n_classes):
            tot_w += cws[node, c]
        sq = 0.0
        n_pos_classes = 0
        for c in range(n_classes):
            p = cws[node, c] / tot_w
            sq += p * p
            if cws[node, c] > 0.0:
                n_pos_classes += 1
        gini[node] = 1.0 - sq

        if n_pos_classes <= 1:
            continue
        if max_depth >= 0 and dep >= max_depth:
            continue

        best_gain = -1.0
        best_f = -1
        best_thr = 0.0
        for v in range(n_features):
            for ii in range(m):
                vals[ii] = X[idx[start + ii], v]
            order = np.argsort(vals[:m], kind="mergesort")
            for c in range(n_classes):
                lcw[c] = 0.0
            lw = 0.0
            last_pos = 0.0
            have_pos = False
            for ii in range(m):
                pos = order[ii]
                i = idx[start + pos]
                xv = vals[pos]
                wi = w[i]
                if wi > 0.0:
                    # rw can cancel to zero when the suffix weight is below
                    # float resolution of the prefix; such splits carry no
                    # usable signal and are skipped
                    if have_pos and xv > last_pos and lw > 0.0 and tot_w - lw > 0.0:
                        rw = tot_w - lw
                        gl = 0.0
                        gr = 0.0
                        for c in range(n_classes):
                            pl = lcw[c] / lw
                            pr = (cws[node, c] - lcw[c]) / rw
                            gl += pl * pl
                            gr += pr * pr
                        gain = (
                            gini[node]
                            - (lw / tot_w) * (1.0 - gl)
                            - (rw / tot_w) * (1.0 - gr)
                        )
                        if gain > best_gain:
                            thr = 0.5 * (last_pos + xv)
                            # midpoint can collapse onto an endpoint for
                            # adjacent doubles; fall back to the upper value
                            if not (thr > last_pos and thr <= xv):
                                thr = xv
                            best_gain = gain
                            best_f = v
                            best_thr = thr
                    last_pos = xv
                    have_pos = True
                lcw[y[i]] += wi
                lw += wi

        if best_f < 0:
            continue  # unsplittable: every feature constant on positive weight

        feature[node] = best_f
        threshold[node] = best_thr
        nl = 0
        for ii in range(start, end):
            i = idx[ii]
            if X[i, best_f] < best_thr:
                buf[nl] = i
                nl += 1
        nr = nl
        for ii in range(start, end):
            i = idx[ii]
            if not (X[i, best_f] < best_thr):
                buf[nr] = i
                nr += 1
        for ii in range(m):
            idx[start + ii] = buf[ii]

        mid = start + nl
        st_parent[top] = node
        st_isleft[top] = 0
        st_start[top] = mid
        st_end[top] = end
        st_depth[top] = dep + 1
        top += 1
        st_parent[top] = node
        st_isleft[top] = 1
        st_start[top] = start
        st_end[top] = mid
        st_depth[top] = dep + 1
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        depth[:n_nodes].copy(),
        count[:n_nodes].copy(),
        cws[:n_nodes].copy(),
        gini[:n_nodes].copy(),
    )


@njit(cache=True, nogil=True)
def apply_tree(feature, threshold, left, right, X):
    """Route each row of X to its leaf; returns leaf node ids."""
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@njit(cache=True, nogil=True)
def subtree_spans(feature, right):
    """Exclusive end of each node's preorder id range."""
    n = feature.shape[0]
    end = np.empty(n, np.int64)
    for t in range(n - 1, -1, -1):
        if feature[t] < 0:
            end[t] = t + 1
        else:
            end[t] = end[right[t]]
    return end


@njit(cache=True, nogil=True)
def weakest_link_steps(feature, left, right, depth, cost, subtree_end):
    """Iterated weakest-link pruning schedule of a grown tree.

    ``cost`` is the per-node collapse cost (impurity scaled by weight share).
    Step 0 is the unpruned tree at alpha 0. Each later step collapses every
    internal node whose link cost g(t) equals the current minimum (processed
    deepest first, lowest id next) and records that minimum as the step's
    alpha, until only the root remains. Alphas are clamped non-negative and
    non-decreasing against rounding noise.

    Returns (alphas, n_leaves, collapsed_flat, step_offsets): step j collapsed
    the nodes collapsed_flat[step_offsets[j]:step_offsets[j + 1]].
    """
    n = feature.shape[0]
    is_leaf = np.empty(n, np.uint8)
    alive = np.ones(n, np.uint8)
    for t in range(n):
        is_leaf[t] = 1 if feature[t] < 0 else 0

    n_internal = 0
    for t in range(n):
        if is_leaf[t] == 0:
            n_internal += 1
    max_steps = n_internal + 1

    alphas = np.zeros(max_steps, np.float64)
    leaf_counts = np.zeros(max_steps, np.int64)
    collapsed_flat = np.empty(n_internal, np.int64)
    offsets = np.zeros(max_steps + 1, np.int64)

    leaf_cost = np.empty(n, np.float64)
    leaf_cnt = np.empty(n, np.int64)
    g = np.empty(n, np.float64)
    tied = np.empty(n, np.int64)
    keys = np.empty(n, np.int64)

    total_leaves = 0
    for t in range(n):
        if is_leaf[t] == 1:
            total_leaves += 1
    leaf_counts[0] = total_leaves

    n_steps = 1
    n_collapsed = 0
    while is_leaf[0] == 0:
        # children precede parents in a reverse-id scan (parent id < child id)
        for t in range(n - 1, -1, -1):
            if alive[t] == 0:
                continue
            if is_leaf[t] == 1:
                leaf_cost[t] = cost[t]
                leaf_cnt[t] = 1
            else:
                leaf_cost[t] = leaf_cost[left[t]] + leaf_cost[right[t]]
                leaf_cnt[t] = leaf_cnt[left[t]] + leaf_cnt[right[t]]

        min_g = np.inf
        for t in range(n):
            if alive[t] == 1 and is_leaf[t] == 0:
                gt = (cost[t] - leaf_cost[t]) / (leaf_cnt[t] - 1)
                if gt < 0.0:
                    gt = 0.0
                g[t] = gt
                if gt < min_g:
                    min_g = gt

        n_tied = 0
        for t in range(n):
            if alive[t] == 1 and is_leaf[t] == 0 and g[t] == min_g:
                tied[n_tied] = t
                n_tied += 1
        # deepest first, then lowest id
        for q in range(n_tied):
            keys[q] = (n - depth[tied[q]]) * (n + 1) + tied[q]
        order = np.argsort(keys[:n_tied], kind="mergesort")

        for q in range(n_tied):
            t = tied[order[q]]
            if alive[t] == 0:
                continue  # already inside a collapsed tied ancestor
            for u in range(t + 1, subtree_end[t]):
                alive[u] = 0
            is_leaf[t] = 1
            collapsed_flat[n_collapsed] = t
            n_collapsed += 1

        total_leaves = 0
        for t in range(n):
            if alive[t] == 1 and is_leaf[t] == 1:
                total_leaves += 1

        alpha = min_g
        if alpha < alphas[n_steps - 1]:
            alpha = alphas[n_steps - 1]
        alphas[n_steps] = alpha
        leaf_counts[n_steps] = total_leaves
        offsets[n_steps + 1] = n_collapsed
        n_steps += 1

    return (
        alphas[:n_steps].copy(),
        leaf_counts[:n_steps].copy(),
        collapsed_flat[:n_collapsed].copy(),
        offsets[: n_steps + 1].copy(),
    )
