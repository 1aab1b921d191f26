"""Tabular dataset loading, validation, and seeded splitting.

CSV contract: UTF-8, comma separated, first row is the header, decimal point
`.`, label column selected by exact header match. Only finite numeric
features are accepted; missing or non-numeric cells are hard errors.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ParseError, SchemaError, ValidationError


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric feature matrix with integer class labels.

    Labels are indices into ``class_names``; every class index appears at
    least once. Invariants are checked at construction.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    class_names: tuple

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if features.ndim != 2:
            raise ValidationError("features must be a 2-D matrix")
        n, v = features.shape
        c = len(self.class_names)
        if n < 2:
            raise ValidationError("a dataset needs at least 2 samples")
        if v < 1:
            raise ValidationError("a dataset needs at least 1 feature")
        if c < 2:
            raise ValidationError("a dataset needs at least 2 classes")
        if len(self.feature_names) != v:
            raise ValidationError("feature_names length does not match features")
        if labels.shape != (n,):
            raise ValidationError("labels length does not match features")
        if not np.all(np.isfinite(features)):
            raise ValidationError("features contain non-finite values")
        if labels.min() < 0 or labels.max() >= c:
            raise ValidationError("labels out of range [0, n_classes)")
        counts = np.bincount(labels, minlength=c)
        if np.any(counts == 0):
            missing = [self.class_names[i] for i in np.flatnonzero(counts == 0)]
            raise ValidationError(f"classes with no samples: {missing}")

    @property
    def n_samples(self):
        return int(self.features.shape[0])

    @property
    def n_features(self):
        return int(self.features.shape[1])

    @property
    def n_classes(self):
        return len(self.class_names)

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    def take(self, indices):
        """Subset by sample indices; raises if a class disappears."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[indices],
            self.labels[indices],
            self.feature_names,
            self.class_names,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and self.class_names == other.class_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True)
class SplitPlan:
    """Fold assignment for k-fold evaluation; deterministic in the seed."""

    fold_assignments: np.ndarray
    seed: int
    stratified: bool
    n_folds: int = field(default=0)

    def __post_init__(self):
        fa = np.asarray(self.fold_assignments, dtype=np.int64)
        object.__setattr__(self, "fold_assignments", fa)
        s = int(fa.max()) + 1 if self.n_folds == 0 else self.n_folds
        object.__setattr__(self, "n_folds", s)
        counts = np.bincount(fa, minlength=s)
        if np.any(counts == 0):
            raise ValidationError("every fold must be non-empty")

    def fold_indices(self, j):
        return np.flatnonzero(self.fold_assignments == j)

    def complement_indices(self, j):
        return np.flatnonzero(self.fold_assignments != j)


def load_csv(path, label_column):
    """Load a labeled dataset from CSV.

    Class indices follow first-appearance order of the distinct label
    strings; feature column order is preserved.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise SchemaError(f"{path}: label column {label_column!r} not found")
        label_idx = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_idx]
        if not feature_names:
            raise SchemaError(f"{path}: no feature columns besides the label")

        rows = []
        label_strings = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}",
                    row=line_no,
                    column=None,
                )
            values = np.empty(len(feature_names))
            k = 0
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    raise ParseError(
                        f"{path}:{line_no}: column {header[i]!r}: "
                        f"{cell!r} is not a finite number",
                        row=line_no,
                        column=header[i],
                    )
                values[k] = value
                k += 1
            rows.append(values)
            label_strings.append(row[label_idx].strip())

    if not rows:
        raise SchemaError(f"{path}: no data rows")
    class_names = list(dict.fromkeys(label_strings))
    index_of = {name: i for i, name in enumerate(class_names)}
    labels = np.array([index_of[s] for s in label_strings], dtype=np.int64)
    return Dataset(np.vstack(rows), labels, tuple(feature_names), tuple(class_names))


def load_feature_matrix(path, feature_names):
    """Load only the named feature columns from a CSV, bound by header name.

    Column order in the file is irrelevant; extra columns (including any
    label) are ignored. Missing columns raise SchemaError naming them.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        missing = [name for name in feature_names if name not in header]
        if missing:
            raise SchemaError(f"{path}: missing feature columns: {missing}")
        positions = [header.index(name) for name in feature_names]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}",
                    row=line_no,
                    column=None,
                )
            values = np.empty(len(positions))
            for k, i in enumerate(positions):
                try:
                    value = float(row[i])
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    raise ParseError(
                        f"{path}:{line_no}: column {header[i]!r}: "
                        f"{row[i]!r} is not a finite number",
                        row=line_no,
                        column=header[i],
                    )
                values[k] = value
            rows.append(values)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return np.vstack(rows)


def save_csv(dataset, path, label_column="class"):
    """Write a dataset back to CSV with round-trip float precision."""
    if label_column in dataset.feature_names:
        raise SchemaError(f"label column {label_column!r} collides with a feature")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + [label_column])
        for x, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in x] + [dataset.class_names[label]])


def stratified_split(dataset, test_fraction, seed):
    """Seeded split preserving per-class proportions within rounding.

    Every class lands in both sides: a class whose rounded test share is 0
    (or its full count) contributes its largest share to train and at least
    one sample to test; no sample is ever dropped.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must lie in (0, 1)")
    counts = dataset.class_counts()
    if np.any(counts < 2):
        raise ValidationError("stratified_split needs at least 2 samples per class")
    # largest-remainder apportionment of the rounded total test size across
    # classes, then clamped so both sides keep every class
    total_test = int(round(dataset.n_samples * test_fraction))
    quotas = counts * test_fraction
    takes = np.floor(quotas).astype(np.int64)
    remainders = quotas - takes
    order = np.lexsort((np.arange(dataset.n_classes), -remainders))
    for c in order[: max(total_test - int(takes.sum()), 0)]:
        takes[c] += 1
    takes = np.clip(takes, 1, counts - 1)

    rng = np.random.default_rng(seed)
    test_parts = []
    train_parts = []
    for c in range(dataset.n_classes):
        members = np.flatnonzero(dataset.labels == c)
        shuffle = rng.permutation(members.size)
        test_parts.append(members[shuffle[: takes[c]]])
        train_parts.append(members[shuffle[takes[c] :]])
    test_idx = np.sort(np.concatenate(test_parts))
    train_idx = np.sort(np.concatenate(train_parts))
    return dataset.take(train_idx), dataset.take(test_idx)


def make_folds(dataset, n_folds, seed, stratified=True):
    """Assign samples to folds; deterministic for a fixed seed.

    Stratified assignment spreads each class across folds so per-class fold
    sizes differ by at most 1, filling the currently lightest folds first.
    """
    n = dataset.n_samples
    if n_folds < 2:
        raise ValidationError("n_folds must be at least 2")
    if n_folds > n:
        raise ValidationError(f"n_folds={n_folds} exceeds the {n} samples")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    if not stratified:
        perm = rng.permutation(n)
        sizes = np.full(n_folds, n // n_folds)
        sizes[: n % n_folds] += 1
        start = 0
        for j, size in enumerate(sizes):
            assignment[perm[start : start + size]] = j
            start += size
    else:
        load = np.zeros(n_folds, dtype=np.int64)
        for c in range(dataset.n_classes):
            members = np.flatnonzero(dataset.labels == c)
            members = members[rng.permutation(members.size)]
            n_c = members.size
            base, extra = divmod(n_c, n_folds)
            # lightest folds (ties by fold id) receive the remainder
            order = np.lexsort((np.arange(n_folds), load))
            sizes = np.full(n_folds, base)
            sizes[order[:extra]] += 1
            start = 0
            for j in range(n_folds):
                take = sizes[j]
                assignment[members[start : start + take]] = j
                start += take
            load += sizes
    return SplitPlan(assignment, seed=seed, stratified=stratified, n_folds=n_folds)
