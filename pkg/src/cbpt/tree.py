"""Sample-weighted CART trees: growth, cost evaluation and landing queries.

A :class:`Tree` stores its nodes as parallel arrays indexed by node id (ids
are depth-first preorder, root is 0). Trees are immutable after construction;
all queries are reentrant.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import ValidationError

LandingNode = namedtuple("LandingNode", ["depth", "sample_count", "node_id", "impurity"])


@dataclass(frozen=True)
class TreeNode:
    """Read-only view of a single node."""

    node_id: int
    depth: int
    is_leaf: bool
    split_feature: int | None
    split_threshold: float | None
    left_child: int | None
    right_child: int | None
    class_weight_sums: np.ndarray
    sample_count: int
    impurity: float


def weighted_gini(class_weight_sums):
    """Gini impurity 1 - sum((w_c / W)^2) of a class weight vector."""
    cws = np.asarray(class_weight_sums, dtype=np.float64)
    if np.any(cws < 0):
        raise ValidationError("class weight sums must be non-negative")
    total = cws.sum()
    if total <= 0:
        raise ValidationError("class weight sums must have a positive total")
    p = cws / total
    return float(1.0 - np.dot(p, p))


def weighted_entropy(class_weight_sums):
    """Shannon entropy (nats) of the normalized class weight vector."""
    cws = np.asarray(class_weight_sums, dtype=np.float64)
    if np.any(cws < 0):
        raise ValidationError("class weight sums must be non-negative")
    total = cws.sum()
    if total <= 0:
        raise ValidationError("class weight sums must have a positive total")
    p = cws / total
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


class Tree:
    """Binary decision tree over numeric features.

    Leaves predict the argmax of their class weight sums (ties to the lowest
    class index). Internal nodes route `value < threshold` to the left.
    """

    __slots__ = (
        "feature",
        "threshold",
        "children_left",
        "children_right",
        "node_depth",
        "node_count",
        "class_weight_sums",
        "node_gini",
        "node_cost",
        "subtree_end",
        "node_prediction",
        "n_features",
        "n_classes",
    )

    def __init__(self, feature, threshold, left, right, depth, count, cws, gini, n_features):
        self.feature = feature
        self.threshold = threshold
        self.children_left = left
        self.children_right = right
        self.node_depth = depth
        self.node_count = count
        self.class_weight_sums = cws
        self.node_gini = gini
        self.n_features = int(n_features)
        self.n_classes = int(cws.shape[1])
        self.subtree_end = _kernels.subtree_spans(feature, right)
        self.node_prediction = np.argmax(cws, axis=1)
        # collapse cost of a node: its Gini scaled by its share of the total
        # training weight, so pruning trades impurity against reach
        node_weight = cws.sum(axis=1)
        self.node_cost = gini * (node_weight / node_weight[0])

    @property
    def n_nodes(self):
        return int(self.feature.shape[0])

    @property
    def leaf_mask(self):
        return self.feature < 0

    @property
    def n_leaves(self):
        return int(np.count_nonzero(self.feature < 0))

    @property
    def max_depth(self):
        return int(self.node_depth.max())

    def is_leaf(self, node_id):
        return bool(self.feature[node_id] < 0)

    def node(self, node_id):
        node_id = int(node_id)
        if not 0 <= node_id < self.n_nodes:
            raise ValidationError(f"node id {node_id} out of range")
        leaf = self.is_leaf(node_id)
        return TreeNode(
            node_id=node_id,
            depth=int(self.node_depth[node_id]),
            is_leaf=leaf,
            split_feature=None if leaf else int(self.feature[node_id]),
            split_threshold=None if leaf else float(self.threshold[node_id]),
            left_child=None if leaf else int(self.children_left[node_id]),
            right_child=None if leaf else int(self.children_right[node_id]),
            class_weight_sums=self.class_weight_sums[node_id].copy(),
            sample_count=int(self.node_count[node_id]),
            impurity=float(self.node_gini[node_id]),
        )

    def nodes(self):
        return [self.node(i) for i in range(self.n_nodes)]

    def node_impurity(self, kind="gini"):
        """Per-node impurity vector of the requested kind."""
        if kind == "gini":
            return self.node_gini.copy()
        if kind == "entropy":
            totals = self.class_weight_sums.sum(axis=1, keepdims=True)
            p = self.class_weight_sums / totals
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(p > 0, p * np.log(p), 0.0)
            return -terms.sum(axis=1)
        raise ValidationError(f"unknown impurity kind: {kind!r}")

    def _check_X(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        X = np.ascontiguousarray(np.atleast_2d(x))
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValidationError(
                f"expected {self.n_features} features, got shape {x.shape}"
            )
        if not np.all(np.isfinite(X)):
            raise ValidationError("input contains non-finite values")
        return X, single

    def apply(self, x):
        """Leaf node id for each input row."""
        X, single = self._check_X(x)
        ids = _kernels.apply_tree(
            self.feature, self.threshold, self.children_left, self.children_right, X
        )
        return int(ids[0]) if single else ids

    def predict(self, x):
        """Majority-vote class index for each input row."""
        X, single = self._check_X(x)
        ids = _kernels.apply_tree(
            self.feature, self.threshold, self.children_left, self.children_right, X
        )
        pred = self.node_prediction[ids]
        return int(pred[0]) if single else pred

    def find_landing_node(self, x):
        """Descend from the root to the leaf that x lands in.

        Returns a LandingNode(depth, sample_count, node_id, impurity); for a
        2-D input returns arrays in the same structure.
        """
        X, single = self._check_X(x)
        ids = _kernels.apply_tree(
            self.feature, self.threshold, self.children_left, self.children_right, X
        )
        if single:
            i = int(ids[0])
            return LandingNode(
                int(self.node_depth[i]),
                int(self.node_count[i]),
                i,
                float(self.node_gini[i]),
            )
        return LandingNode(
            self.node_depth[ids], self.node_count[ids], ids, self.node_gini[ids]
        )

    def audit(self):
        """Check the structural invariants; raises ValidationError on breach."""
        n = self.n_nodes
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        if self.node_depth[0] != 0:
            raise ValidationError("root depth must be 0")
        for t in range(n):
            if self.is_leaf(t):
                continue
            l, r = int(self.children_left[t]), int(self.children_right[t])
            for child in (l, r):
                if not 0 <= child < n:
                    raise ValidationError(f"node {t}: child id {child} out of range")
                if seen[child]:
                    raise ValidationError(f"node {child} has two parents")
                seen[child] = True
                if self.node_depth[child] != self.node_depth[t] + 1:
                    raise ValidationError(f"node {child}: depth mismatch")
            if self.node_count[t] != self.node_count[l] + self.node_count[r]:
                raise ValidationError(f"node {t}: sample count mismatch")
            if not np.allclose(
                self.class_weight_sums[t],
                self.class_weight_sums[l] + self.class_weight_sums[r],
                rtol=1e-9,
                atol=1e-12,
            ):
                raise ValidationError(f"node {t}: class weight sums mismatch")
        if not seen.all():
            raise ValidationError("unreachable nodes present")
        if self.n_leaves != int(np.count_nonzero(self.leaf_mask)):
            raise ValidationError("leaf count mismatch")

    def equals(self, other):
        return (
            self.n_features == other.n_features
            and self.n_classes == other.n_classes
            and np.array_equal(self.feature, other.feature)
            and np.array_equal(self.threshold, other.threshold)
            and np.array_equal(self.children_left, other.children_left)
            and np.array_equal(self.children_right, other.children_right)
            and np.array_equal(self.node_count, other.node_count)
            and np.array_equal(self.class_weight_sums, other.class_weight_sums)
        )


def _check_training_arrays(X, y, sample_weight, n_classes):
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    y = np.ascontiguousarray(np.asarray(y, dtype=np.int64))
    if X.ndim != 2:
        raise ValidationError("X must be a 2-D array")
    n = X.shape[0]
    if y.shape != (n,):
        raise ValidationError("y length does not match X")
    if not np.all(np.isfinite(X)):
        raise ValidationError("X contains non-finite values")
    if sample_weight is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.ascontiguousarray(np.asarray(sample_weight, dtype=np.float64))
        if w.shape != (n,):
            raise ValidationError("sample_weight length does not match X")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("sample_weight must be finite and non-negative")
        if w.sum() <= 0:
            raise ValidationError("sample_weight must not be all zero")
    if n_classes is None:
        n_classes = int(y.max()) + 1 if n else 0
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise ValidationError("labels out of range for n_classes")
    return X, y, w, int(n_classes)


def grow_full_tree(X, y, sample_weight=None, n_classes=None, max_depth=None):
    """Grow a tree until every leaf is pure among positive-weight samples or
    unsplittable (optionally capped at max_depth)."""
    X, y, w, n_classes = _check_training_arrays(X, y, sample_weight, n_classes)
    md = -1 if max_depth is None else int(max_depth)
    arrays = _kernels.grow_tree(X, y, w, n_classes, md)
    return Tree(*arrays, n_features=X.shape[1])


def tree_cost(tree):
    """Total cost of a tree: each leaf's Gini impurity scaled by the leaf's
    share of the training weight, summed over leaves.

    Zero for a fully grown tree whose leaves are pure; invariant under
    uniform scaling of the sample weights.
    """
    return float(tree.node_cost[tree.leaf_mask].sum())


def regularized_cost(tree, alpha):
    """tree_cost plus alpha times the number of leaves."""
    if alpha < 0:
        raise ValidationError("alpha must be non-negative")
    return tree_cost(tree) + alpha * tree.n_leaves
