"""Boosting engines: penalty terms, estimator weights, and training loops.

Two weight-update rules are provided for the cost-sensitive scheme. The
default multiplies each misclassified sample's weight by DP * IP * exp(2 *
theta), which is the form consistent with the normalizer (at unit learning
rate exp(2 * theta) equals (1 - eps) * (C - 1) / eps). The alternative
"log_product" rule uses exp(2 * theta * log(DP) * log(IP)) instead; it is
kept selectable for comparison but degenerates when the penalty floor is 1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import TrainingError, ValidationError, WeakLearnerError
from .pruning import best_pruned_tree
from .tree import _check_training_arrays, grow_full_tree

EPS_FLOOR = 1e-10
WEIGHT_UPDATE_RULES = ("multiplicative", "log_product")


def depth_penalty(depths, psi_d, eta_d):
    """Min-max scale landing depths into [eta_d, eta_d + psi_d].

    All-equal depths map to eta_d everywhere.
    """
    sigma = np.asarray(depths, dtype=np.float64)
    if np.any(sigma < 0):
        raise ValidationError("depths must be non-negative")
    lo, hi = sigma.min(), sigma.max()
    if hi == lo:
        return np.full(sigma.shape, float(eta_d))
    return psi_d * (sigma - lo) / (hi - lo) + eta_d


def inverse_impurity(node_sizes, impurities, n_total):
    """Isolation score of landing nodes: large for samples alone in small or
    mixed leaves, zero for a sample landing in a node holding everyone.

    Computes (N - mu) / (2N) + impurity * (N - mu) / N elementwise.
    """
    mu = np.asarray(node_sizes, dtype=np.float64)
    imp = np.asarray(impurities, dtype=np.float64)
    if np.any(mu < 1) or np.any(mu > n_total):
        raise ValidationError("landing node sizes must lie in [1, N]")
    if np.any(imp < 0):
        raise ValidationError("impurities must be non-negative")
    rest = (n_total - mu) / n_total
    return 0.5 * rest + imp * rest


def impurity_penalty(scores, dp):
    """Min-max scale isolation scores into [min(dp), max(dp)].

    All-equal scores map to min(dp) everywhere.
    """
    oe = np.asarray(scores, dtype=np.float64)
    dp = np.asarray(dp, dtype=np.float64)
    if oe.shape != dp.shape:
        raise ValidationError("score and depth-penalty vectors must match in length")
    lo_dp, hi_dp = dp.min(), dp.max()
    lo, hi = oe.min(), oe.max()
    if hi == lo:
        return np.full(oe.shape, lo_dp)
    return (hi_dp - lo_dp) * (oe - lo) / (hi - lo) + lo_dp


def estimator_weight(epsilon, n_classes, learning_rate=1.0):
    """Vote weight of one estimator from its weighted training error.

    Returns learning_rate * 0.5 * (log((1 - eps) / eps) + log(C - 1)), with
    eps clamped to 1e-10 when zero. Errors strictly worse than chance, i.e.
    above (C - 1) / C, raise WeakLearnerError (the boundary itself evaluates
    to exactly 0).
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError("epsilon must lie in [0, 1]")
    boundary = (n_classes - 1) / n_classes
    if epsilon > boundary:
        raise WeakLearnerError(
            f"weighted error {epsilon:.6f} is no better than chance ({boundary:.6f})"
        )
    eps = max(float(epsilon), EPS_FLOOR)
    return learning_rate * 0.5 * (math.log((1.0 - eps) / eps) + math.log(n_classes - 1))


def update_sample_weights(weights, misclassified, theta, dp, ip, rule="multiplicative"):
    """Reweight samples after one boosting round and renormalize to sum 1.

    Misclassified samples are scaled up by their penalty terms and the
    estimator weight; correctly classified weights change only through the
    normalization.
    """
    w = np.asarray(weights, dtype=np.float64)
    miss = np.asarray(misclassified, dtype=bool)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValidationError("sample weights must sum to 1")
    if rule not in WEIGHT_UPDATE_RULES:
        raise ValidationError(f"unknown weight update rule: {rule!r}")
    if not miss.any():
        return w.copy()
    dp = np.asarray(dp, dtype=np.float64)
    ip = np.asarray(ip, dtype=np.float64)
    out = w.copy()
    if rule == "multiplicative":
        out[miss] *= dp[miss] * ip[miss] * math.exp(2.0 * theta)
    else:
        out[miss] *= np.exp(2.0 * theta * np.log(dp[miss]) * np.log(ip[miss]))
    return out / out.sum()


@dataclass
class IterationRecord:
    """One boosting round of the training log."""

    iteration: int
    epsilon: float
    theta: float
    n_leaves: int
    train_error: float
    test_error: float | None = None


@dataclass
class BoostResult:
    trees: list = field(default_factory=list)
    thetas: list = field(default_factory=list)
    log: list = field(default_factory=list)
    stop_reason: str = "max_iterations"


def _check_invariants(w, dp, ip, psi_d, eta_d):
    if abs(w.sum() - 1.0) > 1e-9 or np.any(w < 0):
        raise ValidationError("boosting weights left the simplex")
    tol = 1e-12
    if dp is not None:
        if dp.min() < eta_d - tol or dp.max() > eta_d + psi_d + tol:
            raise ValidationError("depth penalties out of range")
        if ip.min() < dp.min() - tol or ip.max() > dp.max() + tol:
            raise ValidationError("impurity penalties out of range")


def boost_fit(
    X,
    y,
    n_classes=None,
    *,
    algorithm="cbpt",
    n_estimators=500,
    learning_rate=1.0,
    psi_d=0.5,
    eta_d=1.0,
    resampling_folds=5,
    impurity_kind="gini",
    weight_update="multiplicative",
    seed=0,
    n_threads=1,
    eval_set=None,
    iteration_hook=None,
):
    """Run one boosting training loop over integer-encoded labels.

    ``algorithm`` selects the engine: "cbpt" (penalized reweighting over
    pruned trees), "adaboost" (discrete AdaBoost over depth-1 stumps), or
    "adaboost_pt" (discrete AdaBoost over pruned trees). Setting
    ``resampling_folds=0`` bypasses pruning and boosts full trees.

    ``iteration_hook(k, weights, dp, ip)`` is called after every round with
    the post-update weights (testing aid).
    """
    X, y, _, n_cls = _check_training_arrays(X, y, None, n_classes)
    n = X.shape[0]
    if algorithm not in ("cbpt", "adaboost", "adaboost_pt"):
        raise ValidationError(f"unknown algorithm: {algorithm!r}")
    if n_estimators < 1:
        raise ValidationError("n_estimators must be at least 1")
    if not 0.0 < learning_rate <= 1.0:
        raise ValidationError("learning_rate must lie in (0, 1]")
    if psi_d < 0:
        raise ValidationError("psi_d must be non-negative")
    if eta_d < 1:
        raise ValidationError("eta_d must be at least 1")
    if resampling_folds != 0 and resampling_folds < 2:
        raise ValidationError("resampling_folds must be 0 (off) or at least 2")
    if impurity_kind not in ("gini", "entropy"):
        raise ValidationError(f"unknown impurity kind: {impurity_kind!r}")
    if weight_update not in WEIGHT_UPDATE_RULES:
        raise ValidationError(f"unknown weight update rule: {weight_update!r}")

    boundary = (n_cls - 1) / n_cls
    cost_sensitive = algorithm == "cbpt"
    use_stumps = algorithm == "adaboost"

    w = np.full(n, 1.0 / n)
    votes = np.zeros((n, n_cls))
    if eval_set is not None:
        X_test, y_test = eval_set
        X_test = np.ascontiguousarray(np.asarray(X_test, dtype=np.float64))
        y_test = np.asarray(y_test, dtype=np.int64)
        test_votes = np.zeros((X_test.shape[0], n_cls))

    result = BoostResult()
    for k in range(1, n_estimators + 1):
        if use_stumps:
            tree = grow_full_tree(X, y, w, n_cls, max_depth=1)
        elif resampling_folds == 0:
            tree = grow_full_tree(X, y, w, n_cls)
        else:
            tree = best_pruned_tree(
                X, y, w, n_cls,
                n_folds=min(resampling_folds, n),  # tiny training sets
                seed=seed ^ k,
                n_threads=n_threads,
            )

        landing = tree.apply(X)
        pred = tree.node_prediction[landing]
        miss = pred != y
        epsilon = float(w[miss].sum())

        if epsilon >= boundary:
            if k == 1:
                raise TrainingError(
                    f"first estimator is no better than chance (error {epsilon:.4f})"
                )
            result.stop_reason = "weak_learner"
            break

        dp = ip = None
        if cost_sensitive:
            sigma = tree.node_depth[landing]
            mu = tree.node_count[landing]
            node_imp = tree.node_impurity(impurity_kind)[landing]
            dp = depth_penalty(sigma, psi_d, eta_d)
            oe = inverse_impurity(mu, node_imp, n)
            ip = impurity_penalty(oe, dp)
            theta = estimator_weight(epsilon, n_cls, learning_rate)
            w = update_sample_weights(w, miss, theta, dp, ip, rule=weight_update)
        else:
            # discrete AdaBoost vote weight: log((1 - eps) / eps) plus the
            # multiclass correction, scaled by the learning rate
            eps = max(epsilon, EPS_FLOOR)
            theta = learning_rate * (
                math.log((1.0 - eps) / eps) + math.log(n_cls - 1)
            )
            if miss.any():
                w = w.copy()
                w[miss] *= math.exp(theta)
                w = w / w.sum()

        _check_invariants(w, dp, ip, psi_d, eta_d)
        if iteration_hook is not None:
            iteration_hook(k, w.copy(), dp, ip)

        result.trees.append(tree)
        result.thetas.append(theta)
        votes[np.arange(n), pred] += theta
        record = IterationRecord(
            iteration=k,
            epsilon=epsilon,
            theta=theta,
            n_leaves=tree.n_leaves,
            train_error=float(np.mean(votes.argmax(axis=1) != y)),
        )
        if eval_set is not None:
            test_pred = tree.node_prediction[tree.apply(X_test)]
            test_votes[np.arange(len(y_test)), test_pred] += theta
            record.test_error = float(np.mean(test_votes.argmax(axis=1) != y_test))
        result.log.append(record)

        if epsilon == 0.0:
            result.stop_reason = "converged"
            break

    if not result.trees:
        raise TrainingError("no estimator survived training")
    return result
