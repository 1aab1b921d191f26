"""Evaluation measures and experiment protocols.

Conventions: macro-F1 averages per-class F1 over all classes with 0/0
resolving to 0; one-vs-rest AUC uses average ranks for ties and classes
without positives or negatives are excluded from the macro average;
cross-fold standard deviations are population (divide by n).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .dataset import make_folds, stratified_split
from .exceptions import TrainingError, ValidationError
from .utils import atomic_write_text


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_f1: float
    auc_ovr: float
    confusion: np.ndarray
    per_class_precision_recall: tuple

    def __post_init__(self):
        conf = np.asarray(self.confusion, dtype=np.int64)
        object.__setattr__(self, "confusion", conf)
        total = conf.sum()
        if total and abs(self.accuracy - np.trace(conf) / total) > 1e-12:
            raise ValidationError("accuracy disagrees with the confusion matrix")


@dataclass(frozen=True)
class CurvePoint:
    x: float
    mean: float
    std: float = 0.0

    def __post_init__(self):
        if self.std < 0:
            raise ValidationError("std must be non-negative")


def _rank_auc(scores, positive):
    """Mann-Whitney AUC with average ranks; None when undefined."""
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(positive.size)
    sorted_scores = scores[order]
    i = 0
    while i < positive.size:
        j = i
        while j + 1 < positive.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = ranks[positive].sum()
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def compute_report(y_true, y_pred, scores, n_classes):
    """Build an EvalReport from predictions and per-class score columns."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    total = y_true.size
    accuracy = float(np.trace(confusion) / total)

    pr = []
    f1s = []
    for c in range(n_classes):
        tp = confusion[c, c]
        predicted = confusion[:, c].sum()
        actual = confusion[c, :].sum()
        precision = tp / predicted if predicted else 0.0
        recall = tp / actual if actual else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        pr.append((float(precision), float(recall)))
        f1s.append(f1)

    aucs = []
    for c in range(n_classes):
        auc = _rank_auc(scores[:, c], y_true == c)
        if auc is not None:
            aucs.append(auc)
    auc_ovr = float(np.mean(aucs)) if aucs else math.nan

    return EvalReport(
        accuracy=accuracy,
        macro_f1=float(np.mean(f1s)),
        auc_ovr=auc_ovr,
        confusion=confusion,
        per_class_precision_recall=tuple(pr),
    )


def evaluate(model, dataset):
    """Evaluate a fitted classifier on a labeled dataset."""
    if model.n_classes_ != dataset.n_classes:
        raise ValidationError(
            f"model has {model.n_classes_} classes, dataset has {dataset.n_classes}"
        )
    y_pred = model.predict(dataset.features)
    scores = model.predict_proba(dataset.features)
    return compute_report(dataset.labels, y_pred, scores, dataset.n_classes)


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float


@dataclass(frozen=True)
class CrossValResult:
    accuracy: MetricSummary
    macro_f1: MetricSummary
    auc_ovr: MetricSummary
    fold_reports: tuple


def cross_validate(dataset, estimator, n_folds=5, seed=0, stratified=True):
    """k-fold cross-validation: fit on each fold's complement, evaluate on
    the fold, summarize mean and population std per metric."""
    plan = make_folds(dataset, n_folds, seed, stratified=stratified)
    reports = []
    for j in range(n_folds):
        train_idx = plan.complement_indices(j)
        test_idx = plan.fold_indices(j)
        model = clone(estimator)
        try:
            model.fit(dataset.features[train_idx], dataset.labels[train_idx])
        except Exception as exc:
            raise TrainingError(f"training failed on fold {j}: {exc}") from exc
        y_pred = model.predict(dataset.features[test_idx])
        scores = model.predict_proba(dataset.features[test_idx])
        reports.append(
            compute_report(dataset.labels[test_idx], y_pred, scores, dataset.n_classes)
        )

    def summary(values):
        values = np.asarray(values, dtype=np.float64)
        return MetricSummary(float(values.mean()), float(values.std()))

    return CrossValResult(
        accuracy=summary([r.accuracy for r in reports]),
        macro_f1=summary([r.macro_f1 for r in reports]),
        auc_ovr=summary([r.auc_ovr for r in reports]),
        fold_reports=tuple(reports),
    )


def convergence_curve(train, test, estimator):
    """Test error of every ensemble prefix (one point per iteration)."""
    model = clone(estimator)
    model.fit(train.features, train.labels)
    points = []
    for k, pred in enumerate(model.staged_predict(test.features), start=1):
        err = float(np.mean(pred != test.labels))
        points.append(CurvePoint(x=float(k), mean=err))
    return points


@dataclass(frozen=True)
class LearningCurveResult:
    points: tuple
    skipped: tuple = field(default_factory=tuple)


def learning_curve(dataset, estimator, fractions, repeats=3, seed=0, test_fraction=0.25):
    """Accuracy against training-set size.

    Splits off a fixed test portion, then for each fraction trains on
    stratified subsamples of the training portion (``repeats`` draws) and
    records mean and population std of test accuracy. Fractions whose
    subsample would empty a class are skipped and reported.
    """
    if repeats < 1:
        raise ValidationError("repeats must be at least 1")
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValidationError("fractions must lie in (0, 1]")
    train, test = stratified_split(dataset, test_fraction, seed)
    counts = train.class_counts()
    points = []
    skipped = []
    for i, f in enumerate(fractions):
        takes = np.round(counts * f).astype(np.int64)
        if np.any(takes == 0):
            skipped.append((float(f), "a class would have no samples"))
            continue
        accs = []
        for r in range(repeats):
            rng = np.random.default_rng([seed, i, r])
            chosen = []
            for c in range(train.n_classes):
                members = np.flatnonzero(train.labels == c)
                chosen.append(rng.permutation(members)[: takes[c]])
            idx = np.sort(np.concatenate(chosen))
            model = clone(estimator)
            model.fit(train.features[idx], train.labels[idx])
            accs.append(float(np.mean(model.predict(test.features) == test.labels)))
        accs = np.asarray(accs)
        points.append(CurvePoint(x=float(f), mean=float(accs.mean()), std=float(accs.std())))
    return LearningCurveResult(points=tuple(points), skipped=tuple(skipped))


def write_metrics_csv(path, rows):
    """rows: iterable of (metric_name, mean, std)."""
    lines = ["metric,mean,std"]
    for name, mean, std in rows:
        lines.append(f"{name},{mean!r},{std!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_convergence_csv(path, points):
    lines = ["iteration,test_error"]
    for p in points:
        lines.append(f"{int(p.x)},{p.mean!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_learning_csv(path, points):
    lines = ["fraction,mean_accuracy,std_accuracy"]
    for p in points:
        lines.append(f"{p.x!r},{p.mean!r},{p.std!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_confusion_csv(path, confusion, class_names):
    lines = [",".join(class_names)]
    for row in np.asarray(confusion):
        lines.append(",".join(str(int(v)) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
