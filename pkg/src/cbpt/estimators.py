"""Scikit-learn style classifiers wrapping the boosting engines."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from . import boosting
from .exceptions import ValidationError
from .utils import effective_threads


def check_feature_matrix(X, n_features=None):
    """Validate a 2-D finite feature matrix, returning a float64 C-array."""
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2:
        raise ValidationError("X must be a 2-D array")
    if not np.all(np.isfinite(X)):
        raise ValidationError("X contains non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise ValidationError(
            f"X has {X.shape[1]} features, expected {n_features}"
        )
    return X


def check_classification_targets(y):
    """Validate integer-encodable labels; returns (classes, encoded y)."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError("y must be a 1-D array")
    classes, encoded = np.unique(y, return_inverse=True)
    if classes.shape[0] < 2:
        raise ValidationError("y must contain at least 2 classes")
    return classes, encoded.astype(np.int64)


class _BoostedTreesBase(ClassifierMixin, BaseEstimator):
    """Shared fit/predict plumbing for the boosted-tree classifiers."""

    _algorithm = None  # set by subclasses

    def _engine_params(self):
        raise NotImplementedError

    def fit(self, X, y, eval_set=None):
        """Fit the ensemble.

        ``eval_set=(X_test, y_test)`` additionally logs per-iteration test
        error into ``training_log_`` (labels must use the same label space
        as ``y``).
        """
        X = check_feature_matrix(X)
        classes, encoded = check_classification_targets(y)
        if X.shape[0] != encoded.shape[0]:
            raise ValidationError("X and y lengths differ")
        if eval_set is not None:
            X_t = check_feature_matrix(eval_set[0], X.shape[1])
            y_t = np.asarray(eval_set[1])
            missing = ~np.isin(y_t, classes)
            if missing.any():
                raise ValidationError("eval_set labels outside the training classes")
            eval_set = (X_t, np.searchsorted(classes, y_t).astype(np.int64))

        result = boosting.boost_fit(
            X,
            encoded,
            n_classes=classes.shape[0],
            algorithm=self._algorithm,
            eval_set=eval_set,
            n_threads=effective_threads(),
            **self._engine_params(),
        )
        self.classes_ = classes
        self.n_classes_ = classes.shape[0]
        self.n_features_in_ = X.shape[1]
        self.estimators_ = result.trees
        self.estimator_weights_ = np.asarray(result.thetas)
        self.training_log_ = result.log
        self.stop_reason_ = result.stop_reason
        return self

    def _check_fitted(self):
        if not hasattr(self, "estimators_"):
            raise ValidationError("this estimator is not fitted yet")

    def _vote_matrix(self, X):
        self._check_fitted()
        X = check_feature_matrix(X, self.n_features_in_)
        votes = np.zeros((X.shape[0], self.n_classes_))
        rows = np.arange(X.shape[0])
        for tree, theta in zip(self.estimators_, self.estimator_weights_):
            votes[rows, tree.node_prediction[tree.apply(X)]] += theta
        return votes

    def predict(self, X):
        """Predict class labels by the weighted vote of all trees."""
        votes = self._vote_matrix(X)
        return self.classes_[votes.argmax(axis=1)]

    def predict_proba(self, X):
        """Per-class vote shares (each row sums to 1)."""
        votes = self._vote_matrix(X)
        return votes / votes.sum(axis=1, keepdims=True)

    def staged_predict(self, X):
        """Yield predictions of every ensemble prefix, shortest first."""
        self._check_fitted()
        X = check_feature_matrix(X, self.n_features_in_)
        votes = np.zeros((X.shape[0], self.n_classes_))
        rows = np.arange(X.shape[0])
        for tree, theta in zip(self.estimators_, self.estimator_weights_):
            votes[rows, tree.node_prediction[tree.apply(X)]] += theta
            yield self.classes_[votes.argmax(axis=1)]

    @property
    def feature_importances_(self):
        """Vote-weighted total Gini gain per feature, normalized to sum 1.

        Uniform when no tree contains a split.
        """
        self._check_fitted()
        importances = np.zeros(self.n_features_in_)
        for tree, theta in zip(self.estimators_, self.estimator_weights_):
            internal = np.flatnonzero(~tree.leaf_mask)
            if internal.size == 0:
                continue
            l = tree.children_left[internal]
            r = tree.children_right[internal]
            w_node = tree.class_weight_sums.sum(axis=1)
            gain = (
                w_node[internal] * tree.node_gini[internal]
                - w_node[l] * tree.node_gini[l]
                - w_node[r] * tree.node_gini[r]
            )
            np.add.at(importances, tree.feature[internal], theta * gain)
        total = importances.sum()
        if total <= 0:
            return np.full(self.n_features_in_, 1.0 / self.n_features_in_)
        return importances / total


class CBPTClassifier(_BoostedTreesBase):
    """Cost-sensitive boosting over resampling-pruned trees.

    Each round grows a full tree under the current sample weights, prunes it
    at the alpha minimizing the resampled weighted test error, then boosts
    the weights of misclassified samples, scaled up further for samples whose
    landing leaves are deep (globally hard) or small and impure (locally
    hard).

    Parameters
    ----------
    n_estimators : int, maximum number of boosting rounds.
    learning_rate : float in (0, 1], shrinkage applied to the vote weights
        and, consistently, inside the weight-update exponent.
    psi_d : float >= 0, span of the depth-penalty scaling; 0 makes both
        penalties neutral (1 everywhere).
    eta_d : float >= 1, lower limit of the penalty terms.
    resampling_folds : int, folds used by the pruning selection; 0 disables
        pruning and boosts full trees.
    impurity : "gini" or "entropy", the impurity fed to the isolation score.
    weight_update : "multiplicative" (default, normalizer-consistent) or
        "log_product" (the alternative literal update rule).
    random_state : int seed; each round derives its resampling sub-seed as
        seed XOR round index.
    """

    _algorithm = "cbpt"

    def __init__(
        self,
        n_estimators=500,
        learning_rate=1.0,
        psi_d=0.5,
        eta_d=1.0,
        resampling_folds=5,
        impurity="gini",
        weight_update="multiplicative",
        random_state=0,
    ):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.psi_d = psi_d
        self.eta_d = eta_d
        self.resampling_folds = resampling_folds
        self.impurity = impurity
        self.weight_update = weight_update
        self.random_state = random_state

    def _engine_params(self):
        return dict(
            n_estimators=self.n_estimators,
            learning_rate=self.learning_rate,
            psi_d=self.psi_d,
            eta_d=self.eta_d,
            resampling_folds=self.resampling_folds,
            impurity_kind=self.impurity,
            weight_update=self.weight_update,
            seed=self.random_state,
        )


class DiscreteAdaBoostClassifier(_BoostedTreesBase):
    """Discrete AdaBoost with the multiclass vote-weight correction.

    ``base_learner="stump"`` boosts depth-1 trees (the classical baseline);
    ``base_learner="pruned_tree"`` boosts resampling-pruned trees while
    keeping the plain AdaBoost reweighting (the pruning-only ablation).
    """

    def __init__(
        self,
        n_estimators=500,
        learning_rate=1.0,
        base_learner="stump",
        resampling_folds=5,
        random_state=0,
    ):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.base_learner = base_learner
        self.resampling_folds = resampling_folds
        self.random_state = random_state

    @property
    def _algorithm(self):
        if self.base_learner == "stump":
            return "adaboost"
        if self.base_learner == "pruned_tree":
            return "adaboost_pt"
        raise ValidationError(f"unknown base_learner: {self.base_learner!r}")

    def _engine_params(self):
        return dict(
            n_estimators=self.n_estimators,
            learning_rate=self.learning_rate,
            resampling_folds=self.resampling_folds,
            seed=self.random_state,
        )
