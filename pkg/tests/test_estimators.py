import numpy as np
import pytest
from sklearn.base import clone

from cbpt import CBPTClassifier, DiscreteAdaBoostClassifier, ValidationError
from conftest import make_noisy_grid


class TestSklearnSurface:
    def test_get_set_params_roundtrip(self):
        clf = CBPTClassifier(n_estimators=7, psi_d=0.25)
        params = clf.get_params()
        assert params["n_estimators"] == 7
        assert params["psi_d"] == 0.25
        other = CBPTClassifier().set_params(**params)
        assert other.get_params() == params

    def test_clone_keeps_params(self):
        clf = DiscreteAdaBoostClassifier(base_learner="pruned_tree", n_estimators=3)
        cloned = clone(clf)
        assert cloned.get_params() == clf.get_params()

    def test_fitted_attributes(self, blobs):
        X, y = blobs
        clf = CBPTClassifier(n_estimators=3, random_state=0).fit(X, y)
        assert clf.n_classes_ == 2
        assert clf.n_features_in_ == 2
        assert clf.classes_.tolist() == [0, 1]
        assert len(clf.estimators_) == len(clf.estimator_weights_)
        assert clf.score(X, y) == 1.0

    def test_original_labels_restored(self):
        X, y = make_noisy_grid(n=30, n_classes=2, seed=1)
        labels = np.where(y == 0, 7, 42)
        clf = DiscreteAdaBoostClassifier(n_estimators=5, random_state=0).fit(X, labels)
        assert set(np.unique(clf.predict(X))) <= {7, 42}


class TestPredictions:
    def test_separable_converges_to_single_tree(self, blobs):
        X, y = blobs
        clf = CBPTClassifier(n_estimators=50, random_state=0).fit(X, y)
        assert clf.stop_reason_ == "converged"
        assert len(clf.estimators_) == 1
        assert np.array_equal(clf.predict(X), y)

    def test_vote_shares_sum_to_one(self):
        X, y = make_noisy_grid(n=40, n_classes=3, seed=3)
        clf = CBPTClassifier(n_estimators=8, random_state=1).fit(X, y)
        shares = clf.predict_proba(X)
        assert shares.shape == (40, 3)
        assert shares.sum(axis=1) == pytest.approx(np.ones(40))
        assert np.all(shares >= 0)

    def test_staged_predict_prefixes(self):
        X, y = make_noisy_grid(n=40, n_classes=3, seed=3)
        clf = CBPTClassifier(n_estimators=6, random_state=1).fit(X, y)
        stages = list(clf.staged_predict(X))
        assert len(stages) == len(clf.estimators_)
        assert np.array_equal(stages[-1], clf.predict(X))
        # brute-force prefix oracle: recompute votes from scratch at each k
        for k in range(1, len(stages) + 1):
            votes = np.zeros((len(y), clf.n_classes_))
            for tree, theta in zip(clf.estimators_[:k], clf.estimator_weights_[:k]):
                votes[np.arange(len(y)), tree.predict(X)] += theta
            assert np.array_equal(stages[k - 1], clf.classes_[votes.argmax(axis=1)])

    def test_argmax_invariant_under_weight_scaling(self):
        X, y = make_noisy_grid(n=40, n_classes=3, seed=6)
        clf = CBPTClassifier(n_estimators=5, random_state=2).fit(X, y)
        before = clf.predict(X)
        clf.estimator_weights_ = clf.estimator_weights_ * 37.5
        assert np.array_equal(clf.predict(X), before)

    def test_deterministic_fit(self):
        X, y = make_noisy_grid(n=40, n_classes=3, seed=8)
        a = CBPTClassifier(n_estimators=6, random_state=5).fit(X, y)
        b = CBPTClassifier(n_estimators=6, random_state=5).fit(X, y)
        assert np.array_equal(a.estimator_weights_, b.estimator_weights_)
        for ta, tb in zip(a.estimators_, b.estimators_):
            assert ta.equals(tb)

    def test_eval_set_logging(self, blobs):
        X, y = blobs
        clf = DiscreteAdaBoostClassifier(n_estimators=4, random_state=0)
        clf.fit(X[:30], y[:30], eval_set=(X[30:], y[30:]))
        assert all(r.test_error is not None for r in clf.training_log_)

    def test_monotone_training_error_on_separable(self):
        rng = np.random.default_rng(0)
        X = np.concatenate([rng.normal(-2, 1.0, (30, 2)), rng.normal(2, 1.0, (30, 2))])
        y = np.repeat([0, 1], 30)
        clf = CBPTClassifier(n_estimators=20, random_state=0).fit(X, y)
        errors = [r.train_error for r in clf.training_log_]
        assert errors[-1] == 0.0
        first_zero = errors.index(0.0)
        assert all(e == 0.0 for e in errors[first_zero:])


def constant_tree(class_index, n_classes, n_features=1):
    """Root-only tree always voting one class."""
    from cbpt.tree import Tree

    cws = np.zeros((1, n_classes))
    cws[0, class_index] = 1.0
    return Tree(
        feature=np.array([-1], dtype=np.int64),
        threshold=np.zeros(1),
        left=np.array([-1], dtype=np.int64),
        right=np.array([-1], dtype=np.int64),
        depth=np.zeros(1, dtype=np.int64),
        count=np.array([1], dtype=np.int64),
        cws=cws,
        gini=np.zeros(1),
        n_features=n_features,
    )


def manual_ensemble(votes, thetas, n_classes):
    clf = CBPTClassifier()
    clf.classes_ = np.arange(n_classes)
    clf.n_classes_ = n_classes
    clf.n_features_in_ = 1
    clf.estimators_ = [constant_tree(v, n_classes) for v in votes]
    clf.estimator_weights_ = np.asarray(thetas, dtype=float)
    clf.training_log_ = []
    clf.stop_reason_ = "manual"
    return clf


class TestVoteArithmetic:
    def test_single_estimator_equals_its_tree(self):
        clf = manual_ensemble([1], [0.8], 2)
        assert clf.predict(np.zeros((3, 1))).tolist() == [1, 1, 1]

    def test_larger_weight_wins(self):
        clf = manual_ensemble([1, 0], [1.0, 0.4], 2)
        assert clf.predict(np.zeros((1, 1)))[0] == 1

    def test_summed_votes(self):
        clf = manual_ensemble([0, 1, 1], [0.5, 0.5, 0.3], 2)
        assert clf.predict(np.zeros((1, 1)))[0] == 1  # 0.8 beats 0.5

    def test_tie_goes_to_lowest_class(self):
        clf = manual_ensemble([1, 0], [0.5, 0.5], 2)
        assert clf.predict(np.zeros((1, 1)))[0] == 0


class TestFeatureImportances:
    def test_single_split_concentrates(self):
        X = np.array([[0.0, 5.0], [1.0, 5.0]])
        y = np.array([0, 1])
        clf = CBPTClassifier(n_estimators=1, resampling_folds=0, random_state=0)
        clf.fit(X, y)
        assert clf.feature_importances_.tolist() == [1.0, 0.0]

    def test_sums_to_one(self):
        X, y = make_noisy_grid(n=40, n_classes=3, seed=4)
        clf = CBPTClassifier(n_estimators=5, random_state=1).fit(X, y)
        imp = clf.feature_importances_
        assert imp.sum() == pytest.approx(1.0)
        assert np.all(imp >= 0)

    def test_uniform_when_no_splits(self):
        X = np.zeros((6, 3))
        y = np.array([0, 1, 0, 1, 0, 0])
        clf = DiscreteAdaBoostClassifier(n_estimators=1, random_state=0).fit(X, y)
        assert clf.feature_importances_.tolist() == [1 / 3] * 3

    def test_matches_hand_computed_gains(self):
        X, y = make_noisy_grid(n=30, n_classes=2, seed=12)
        clf = DiscreteAdaBoostClassifier(n_estimators=3, random_state=0).fit(X, y)
        expected = np.zeros(2)
        for tree, theta in zip(clf.estimators_, clf.estimator_weights_):
            for t in range(tree.n_nodes):
                if tree.is_leaf(t):
                    continue
                l, r = tree.children_left[t], tree.children_right[t]
                w_t = tree.class_weight_sums[t].sum()
                w_l = tree.class_weight_sums[l].sum()
                w_r = tree.class_weight_sums[r].sum()
                gain = (
                    w_t * tree.node_gini[t]
                    - w_l * tree.node_gini[l]
                    - w_r * tree.node_gini[r]
                )
                expected[tree.feature[t]] += theta * gain
        expected /= expected.sum()
        assert clf.feature_importances_ == pytest.approx(expected, abs=1e-12)


class TestValidation:
    def test_rejects_bad_inputs(self, blobs):
        X, y = blobs
        clf = CBPTClassifier(n_estimators=2)
        with pytest.raises(ValidationError):
            clf.fit(X[:, 0], y)
        with pytest.raises(ValidationError):
            clf.fit(X, y[:5])
        with pytest.raises(ValidationError):
            clf.fit(np.full_like(X, np.nan), y)
        with pytest.raises(ValidationError):
            clf.fit(X, np.zeros(len(y)))

    def test_predict_before_fit(self, blobs):
        X, _ = blobs
        with pytest.raises(ValidationError):
            CBPTClassifier().predict(X)

    def test_feature_count_mismatch(self, blobs):
        X, y = blobs
        clf = CBPTClassifier(n_estimators=1, random_state=0).fit(X, y)
        with pytest.raises(ValidationError):
            clf.predict(X[:, :1])

    def test_bad_base_learner_name(self, blobs):
        X, y = blobs
        with pytest.raises(ValidationError):
            DiscreteAdaBoostClassifier(base_learner="forest").fit(X, y)

    def test_eval_set_with_unknown_labels(self, blobs):
        X, y = blobs
        clf = CBPTClassifier(n_estimators=1)
        with pytest.raises(ValidationError):
            clf.fit(X, y, eval_set=(X, y + 5))
