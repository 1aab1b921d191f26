"""Weakest-link cost-complexity pruning and resampled subtree selection.

The prune schedule repeatedly collapses the internal node(s) with the lowest
link cost g(t) = (own Gini - branch leaf cost) / (branch leaves - 1) until
only the root remains, yielding a nested subtree sequence with non-decreasing
alphas. Subtree selection cross-checks candidate alphas on random resampling
folds and keeps the one with the lowest mean weighted test error.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels
from .exceptions import ValidationError
from .tree import Tree, _check_training_arrays, grow_full_tree


def weakest_link_alpha(tree, node_id):
    """Link cost g(t) of an internal node: the per-leaf cost increase of
    collapsing its branch, clamped at zero."""
    node_id = int(node_id)
    if tree.is_leaf(node_id):
        raise ValidationError(f"node {node_id} is a leaf")
    end = int(tree.subtree_end[node_id])
    branch = slice(node_id, end)
    leaf = tree.leaf_mask[branch]
    branch_cost = float(tree.node_cost[branch][leaf].sum())
    n_branch_leaves = int(np.count_nonzero(leaf))
    g = (float(tree.node_cost[node_id]) - branch_cost) / (n_branch_leaves - 1)
    return max(g, 0.0)


class PruneSequence:
    """Nested subtrees produced by iterated weakest-link pruning.

    Entry 0 is the unpruned tree at alpha 0; the last entry is root-only.
    Alphas are non-decreasing and leaf counts strictly decreasing. Subtrees
    are materialized on demand via :meth:`subtree`.
    """

    def __init__(self, tree, alphas, leaf_counts, collapsed, offsets):
        self.tree = tree
        self.alphas = alphas
        self.leaf_counts = leaf_counts
        self._collapsed = collapsed
        self._offsets = offsets
        if alphas[0] != 0.0:
            raise ValidationError("first prune entry must have alpha 0")
        if np.any(np.diff(alphas) < 0):
            raise ValidationError("prune alphas must be non-decreasing")
        if np.any(np.diff(leaf_counts) >= 0):
            raise ValidationError("prune leaf counts must be strictly decreasing")
        if leaf_counts[-1] != 1:
            raise ValidationError("prune sequence must end at the root-only tree")

    def __len__(self):
        return int(self.alphas.shape[0])

    def collapsed_at(self, j):
        """Node ids collapsed when moving to entry j (empty for j = 0)."""
        return self._collapsed[self._offsets[j] : self._offsets[j + 1]]

    def _masks(self, j):
        alive = np.ones(self.tree.n_nodes, dtype=bool)
        leaf = self.tree.leaf_mask.copy()
        end = self.tree.subtree_end
        for step in range(1, j + 1):
            for t in self.collapsed_at(step):
                if alive[t]:
                    alive[t + 1 : end[t]] = False
                    leaf[t] = True
        return alive, leaf

    def subtree(self, j):
        """Materialize entry j as a standalone Tree (ids renumbered)."""
        j = int(j)
        if not 0 <= j < len(self):
            raise ValidationError(f"prune entry {j} out of range")
        if j == 0:
            return self.tree
        base = self.tree
        alive, leaf = self._masks(j)
        new_id = np.cumsum(alive) - 1
        keep = np.flatnonzero(alive)
        is_leaf = leaf[keep]
        feature = np.where(is_leaf, -1, base.feature[keep])
        threshold = np.where(is_leaf, 0.0, base.threshold[keep])
        left = np.where(is_leaf, -1, new_id[base.children_left[keep]])
        right = np.where(is_leaf, -1, new_id[base.children_right[keep]])
        return Tree(
            feature.astype(np.int64),
            threshold.astype(np.float64),
            left.astype(np.int64),
            right.astype(np.int64),
            base.node_depth[keep].copy(),
            base.node_count[keep].copy(),
            base.class_weight_sums[keep].copy(),
            base.node_gini[keep].copy(),
            n_features=base.n_features,
        )

    def entries(self):
        """Iterate (alpha, subtree, n_leaves) triples, materializing each."""
        for j in range(len(self)):
            yield float(self.alphas[j]), self.subtree(j), int(self.leaf_counts[j])


def prune_sequence(tree):
    """Build the weakest-link prune sequence of a grown tree."""
    alphas, leaf_counts, collapsed, offsets = _kernels.weakest_link_steps(
        tree.feature,
        tree.children_left,
        tree.children_right,
        tree.node_depth,
        tree.node_cost,
        tree.subtree_end,
    )
    return PruneSequence(tree, alphas, leaf_counts, collapsed, offsets)


def weighted_test_error(tree, X, y, sample_weight):
    """Weight fraction of misclassified samples (in [0, 1])."""
    y = np.asarray(y, dtype=np.int64)
    w = np.asarray(sample_weight, dtype=np.float64)
    if np.any(w < 0):
        raise ValidationError("test weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise ValidationError("test weights must have a positive total")
    pred = tree.predict(X)
    return float(w[pred != y].sum() / total)


def _error_curve(tree, seq, X_test, y_test, w_test):
    """Weighted test error of every entry of a prune sequence.

    Landing nodes are tracked incrementally: collapsing node t re-lands every
    sample whose current leaf lies in t's preorder range.
    """
    total = w_test.sum()
    landing = tree.apply(X_test)
    pred = tree.node_prediction[landing]
    miss = pred != y_test
    end = tree.subtree_end
    errs = np.empty(len(seq))
    errs[0] = w_test[miss].sum() / total
    for j in range(1, len(seq)):
        for t in np.sort(seq.collapsed_at(j)):
            mask = (landing >= t) & (landing < end[t])
            if mask.any():
                landing[mask] = t
                miss[mask] = tree.node_prediction[t] != y_test[mask]
        errs[j] = w_test[miss].sum() / total
    return errs


def _uniform_folds(n, n_folds, seed):
    """Unstratified random fold assignment, sizes differing by at most 1."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    sizes = np.full(n_folds, n // n_folds)
    sizes[: n % n_folds] += 1
    start = 0
    for s, size in enumerate(sizes):
        assignment[perm[start : start + size]] = s
        start += size
    return assignment


def _candidate_alphas(alphas):
    """One candidate per sequence entry: 0, the geometric means of
    consecutive alphas, then the largest alpha."""
    j = len(alphas)
    cand = np.empty(j)
    cand[0] = 0.0
    for i in range(1, j - 1):
        cand[i] = np.sqrt(alphas[i] * alphas[i + 1])
    cand[j - 1] = alphas[j - 1]
    return cand


def best_pruned_tree(X, y, sample_weight=None, n_classes=None, n_folds=5, seed=0, n_threads=1):
    """Grow a full tree, then prune it at the alpha whose resampled mean
    weighted test error is lowest (ties go to the larger alpha).

    Fold trees are grown on the complement of each random fold with the
    boosting weights restricted and renormalized; their errors are measured
    on the held-out fold with the raw restricted weights.
    """
    X, y, w, n_cls = _check_training_arrays(X, y, sample_weight, n_classes)
    n = X.shape[0]
    if n_folds < 2:
        raise ValidationError("n_folds must be at least 2")
    if n_folds > n:
        raise ValidationError(f"n_folds={n_folds} exceeds the {n} samples")

    tmax = grow_full_tree(X, y, w, n_cls)
    seq = prune_sequence(tmax)
    if len(seq) == 1 or seq.alphas[-1] <= 0.0:
        return tmax
    candidates = _candidate_alphas(seq.alphas)

    assignment = _uniform_folds(n, n_folds, seed)

    def fold_errors(s):
        test = assignment == s
        train = ~test
        w_train = w[train]
        ft = grow_full_tree(X[train], y[train], w_train / w_train.sum(), n_cls)
        fseq = prune_sequence(ft)
        errs = _error_curve(ft, fseq, X[test], y[test], w[test])
        picks = np.searchsorted(fseq.alphas, candidates, side="right") - 1
        return errs[picks]

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            per_fold = list(pool.map(fold_errors, range(n_folds)))
    else:
        per_fold = [fold_errors(s) for s in range(n_folds)]
    mean_err = np.mean(per_fold, axis=0)

    best = 0
    for j in range(1, len(candidates)):
        if mean_err[j] <= mean_err[best]:
            best = j
    alpha_star = candidates[best]
    j_star = int(np.searchsorted(seq.alphas, alpha_star, side="right")) - 1
    return seq.subtree(j_star)
