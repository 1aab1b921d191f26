"""Versioned JSON persistence for trained ensembles.

Trees are stored as node arrays in id order with every field; floats are
serialized with full round-trip precision, so a reloaded model votes
bit-identically to the original. A format_version mismatch is a load error.
"""

import json

import numpy as np

from .boosting import IterationRecord
from .estimators import CBPTClassifier, DiscreteAdaBoostClassifier
from .exceptions import SchemaError, ValidationError
from .tree import Tree
from .utils import atomic_write_text

FORMAT_VERSION = 1

_ALGORITHMS = {
    "cbpt": lambda params: CBPTClassifier(**params),
    "adaboost": lambda params: DiscreteAdaBoostClassifier(**params),
    "adaboost_pt": lambda params: DiscreteAdaBoostClassifier(**params),
}


def _tree_to_nodes(tree):
    nodes = []
    for t in range(tree.n_nodes):
        leaf = tree.is_leaf(t)
        nodes.append(
            {
                "id": t,
                "depth": int(tree.node_depth[t]),
                "feature": None if leaf else int(tree.feature[t]),
                "threshold": None if leaf else float(tree.threshold[t]),
                "left": None if leaf else int(tree.children_left[t]),
                "right": None if leaf else int(tree.children_right[t]),
                "sample_count": int(tree.node_count[t]),
                "class_weight_sums": [float(v) for v in tree.class_weight_sums[t]],
                "impurity": float(tree.node_gini[t]),
            }
        )
    return nodes


def _tree_from_nodes(nodes, n_features, n_classes):
    n = len(nodes)
    feature = np.full(n, -1, dtype=np.int64)
    threshold = np.zeros(n, dtype=np.float64)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    cws = np.zeros((n, n_classes), dtype=np.float64)
    gini = np.zeros(n, dtype=np.float64)
    for node in nodes:
        t = node["id"]
        if node["feature"] is not None:
            feature[t] = node["feature"]
            threshold[t] = node["threshold"]
            left[t] = node["left"]
            right[t] = node["right"]
        depth[t] = node["depth"]
        count[t] = node["sample_count"]
        cws[t] = node["class_weight_sums"]
        gini[t] = node["impurity"]
    tree = Tree(feature, threshold, left, right, depth, count, cws, gini, n_features)
    tree.audit()
    return tree


def to_document(model, feature_names=None):
    """Serialize a fitted classifier into a plain dict."""
    if not hasattr(model, "estimators_"):
        raise ValidationError("model is not fitted")
    if feature_names is not None and len(feature_names) != model.n_features_in_:
        raise ValidationError("feature_names length mismatch")
    class_names = getattr(model, "class_names_", None)
    if class_names is None:
        class_names = [str(c) for c in model.classes_]
    return {
        "format_version": FORMAT_VERSION,
        "algorithm": model._algorithm,
        "params": model.get_params(),
        "classes": np.asarray(model.classes_).tolist(),
        "class_names": list(class_names),
        "feature_names": list(feature_names) if feature_names is not None else None,
        "n_features": model.n_features_in_,
        "stop_reason": model.stop_reason_,
        "estimators": [
            {"theta": float(theta), "tree": _tree_to_nodes(tree)}
            for tree, theta in zip(model.estimators_, model.estimator_weights_)
        ],
        "training_log": [
            {
                "iteration": r.iteration,
                "epsilon": r.epsilon,
                "theta": r.theta,
                "n_leaves": r.n_leaves,
                "train_error": r.train_error,
                "test_error": r.test_error,
            }
            for r in model.training_log_
        ],
    }


def from_document(doc):
    """Rebuild a fitted classifier from a model document."""
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"unsupported model format_version {version!r}, expected {FORMAT_VERSION}"
        )
    algorithm = doc["algorithm"]
    if algorithm not in _ALGORITHMS:
        raise SchemaError(f"unknown algorithm {algorithm!r} in model document")
    model = _ALGORITHMS[algorithm](doc["params"])
    n_features = doc["n_features"]
    class_names = doc["class_names"]
    n_classes = len(class_names)
    model.classes_ = np.asarray(doc["classes"])
    model.n_classes_ = n_classes
    model.n_features_in_ = n_features
    model.estimators_ = [
        _tree_from_nodes(e["tree"], n_features, n_classes) for e in doc["estimators"]
    ]
    model.estimator_weights_ = np.asarray([e["theta"] for e in doc["estimators"]])
    model.training_log_ = [IterationRecord(**r) for r in doc["training_log"]]
    model.stop_reason_ = doc.get("stop_reason", "unknown")
    model.class_names_ = list(class_names)
    model.feature_names_ = list(doc["feature_names"]) if doc["feature_names"] else None
    return model


def save_model(model, path, feature_names=None):
    """Write the model document as JSON (atomic write)."""
    doc = to_document(model, feature_names=feature_names)
    atomic_write_text(path, json.dumps(doc, indent=1) + "\n")


def load_model(path):
    """Load a model document written by save_model."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not a valid model document: {exc}") from exc
    return from_document(doc)
