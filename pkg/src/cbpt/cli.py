"""Command-line interface: train, predict, evaluate, cv, curves, benchmark.

Every command is deterministic for identical flags (including --seed); all
output files are written atomically. Exit codes: 0 success, 1 runtime
failure, 2 usage error. The CBPT_THREADS environment variable caps internal
parallelism (0 = auto).
"""

import sys
from pathlib import Path

import click
import numpy as np

from . import evaluation, model_io
from .dataset import load_csv, load_feature_matrix, stratified_split
from .estimators import CBPTClassifier, DiscreteAdaBoostClassifier
from .exceptions import CBPTError
from .utils import atomic_write_text

ALGORITHMS = ("cbpt", "adaboost", "adaboost-pt")


def _fail(stage, exc):
    click.echo(f"error during {stage}: {exc}", err=True)
    sys.exit(1)


def _build_estimator(algorithm, trees, learning_rate, psi_d, eta_d,
                     resampling_folds, impurity, seed, log_product_update):
    if algorithm == "cbpt":
        return CBPTClassifier(
            n_estimators=trees,
            learning_rate=learning_rate,
            psi_d=psi_d,
            eta_d=eta_d,
            resampling_folds=resampling_folds,
            impurity=impurity,
            weight_update="log_product" if log_product_update else "multiplicative",
            random_state=seed,
        )
    return DiscreteAdaBoostClassifier(
        n_estimators=trees,
        learning_rate=learning_rate,
        base_learner="stump" if algorithm == "adaboost" else "pruned_tree",
        resampling_folds=resampling_folds,
        random_state=seed,
    )


def _config_options(fn):
    decorators = [
        click.option("--algorithm", type=click.Choice(ALGORITHMS), default="cbpt",
                     show_default=True, help="Training algorithm."),
        click.option("--trees", type=int, default=500, show_default=True,
                     help="Maximum number of boosting rounds."),
        click.option("--learning-rate", type=float, default=1.0, show_default=True),
        click.option("--psi-d", type=float, default=0.5, show_default=True,
                     help="Depth-penalty scaling span (0 = neutral penalties)."),
        click.option("--eta-d", type=float, default=1.0, show_default=True,
                     help="Penalty lower limit."),
        click.option("--resampling-folds", type=int, default=5, show_default=True,
                     help="Folds for pruning selection (0 = no pruning)."),
        click.option("--impurity", type=click.Choice(["gini", "entropy"]),
                     default="gini", show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--log-product-update", is_flag=True,
                     help="Use the alternative log-product weight update rule."),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _training_log_csv(log):
    with_test = any(r.test_error is not None for r in log)
    header = "iteration,epsilon,theta,n_leaves,train_error"
    if with_test:
        header += ",test_error"
    lines = [header]
    for r in log:
        line = f"{r.iteration},{r.epsilon!r},{r.theta!r},{r.n_leaves},{r.train_error!r}"
        if with_test:
            line += f",{r.test_error!r}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _labels_in_model_space(dataset, model):
    """Map a dataset's labels onto the model's class indexing by name."""
    name_to_idx = {name: i for i, name in enumerate(model.class_names_)}
    unknown = [c for c in dataset.class_names if c not in name_to_idx]
    if unknown:
        raise CBPTError(f"dataset classes unknown to the model: {unknown}")
    lut = np.array([name_to_idx[c] for c in dataset.class_names], dtype=np.int64)
    return lut[dataset.labels]


@click.group()
def main():
    """Cost-sensitive boosted pruning trees: training, inference and the
    benchmark harness."""


@main.command()
@click.option("--data", required=True, type=click.Path())
@click.option("--label", required=True, help="Label column name.")
@click.option("--out", required=True, type=click.Path(), help="Model file to write.")
@click.option("--test", type=click.Path(), default=None,
              help="Optional labeled CSV for per-iteration test error.")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Training-log CSV path (default: <out>.log.csv).")
@_config_options
def train(data, label, out, test, log_path, algorithm, trees, learning_rate,
          psi_d, eta_d, resampling_folds, impurity, seed, log_product_update):
    """Train a model on a labeled CSV and persist it."""
    try:
        dataset = load_csv(data, label)
        eval_set = None
        if test is not None:
            test_ds = load_csv(test, label)
            X_test = load_feature_matrix(test, dataset.feature_names)
            lut = {name: i for i, name in enumerate(dataset.class_names)}
            unknown = [c for c in test_ds.class_names if c not in lut]
            if unknown:
                raise CBPTError(f"test file has unseen classes: {unknown}")
            remap = np.array([lut[c] for c in test_ds.class_names], dtype=np.int64)
            eval_set = (X_test, remap[test_ds.labels])
    except (CBPTError, OSError) as exc:
        _fail("load", exc)
    try:
        model = _build_estimator(algorithm, trees, learning_rate, psi_d, eta_d,
                                 resampling_folds, impurity, seed, log_product_update)
    except CBPTError as exc:
        _fail("validate", exc)
    try:
        model.fit(dataset.features, dataset.labels, eval_set=eval_set)
        model.class_names_ = list(dataset.class_names)
    except CBPTError as exc:
        _fail("train", exc)
    try:
        model_io.save_model(model, out, feature_names=dataset.feature_names)
        atomic_write_text(log_path or f"{out}.log.csv", _training_log_csv(model.training_log_))
    except (CBPTError, OSError) as exc:
        _fail("serialize", exc)
    click.echo(
        f"trained {algorithm} with {len(model.estimators_)} estimators "
        f"({model.stop_reason_}); model written to {out}"
    )


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--data", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
def predict(model_path, data, out):
    """Predict class names and vote shares for each CSV row."""
    try:
        model = model_io.load_model(model_path)
        if model.feature_names_ is None:
            raise CBPTError("model document carries no feature names")
        X = load_feature_matrix(data, model.feature_names_)
        shares = model.predict_proba(X)
        pred = shares.argmax(axis=1)
    except (CBPTError, OSError) as exc:
        _fail("predict", exc)
    header = "prediction," + ",".join(f"share_{c}" for c in model.class_names_)
    lines = [header]
    for p, row in zip(pred, shares):
        lines.append(model.class_names_[p] + "," + ",".join(repr(float(v)) for v in row))
    atomic_write_text(out, "\n".join(lines) + "\n")
    click.echo(f"wrote {len(lines) - 1} predictions to {out}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--data", required=True, type=click.Path())
@click.option("--label", required=True)
@click.option("--out-metrics", required=True, type=click.Path())
@click.option("--out-confusion", required=True, type=click.Path())
def evaluate(model_path, data, label, out_metrics, out_confusion):
    """Evaluate a model on a labeled CSV."""
    try:
        model = model_io.load_model(model_path)
        if model.feature_names_ is None:
            raise CBPTError("model document carries no feature names")
        dataset = load_csv(data, label)
        X = load_feature_matrix(data, model.feature_names_)
        y_true = _labels_in_model_space(dataset, model)
        shares = model.predict_proba(X)
        report = evaluation.compute_report(
            y_true, shares.argmax(axis=1), shares, model.n_classes_
        )
    except (CBPTError, OSError) as exc:
        _fail("evaluate", exc)
    rows = [
        ("accuracy", report.accuracy, 0.0),
        ("macro_f1", report.macro_f1, 0.0),
        ("auc_ovr", report.auc_ovr, 0.0),
    ]
    for name, (p, r) in zip(model.class_names_, report.per_class_precision_recall):
        rows.append((f"precision_{name}", p, 0.0))
        rows.append((f"recall_{name}", r, 0.0))
    evaluation.write_metrics_csv(out_metrics, rows)
    evaluation.write_confusion_csv(out_confusion, report.confusion, model.class_names_)
    click.echo(f"accuracy {report.accuracy:.4f}, macro-F1 {report.macro_f1:.4f}")


@main.command()
@click.option("--data", required=True, type=click.Path())
@click.option("--label", required=True)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--unstratified", is_flag=True, help="Use unstratified folds.")
@click.option("--out", required=True, type=click.Path())
@_config_options
def cv(data, label, folds, unstratified, out, algorithm, trees, learning_rate,
       psi_d, eta_d, resampling_folds, impurity, seed, log_product_update):
    """k-fold cross-validation; writes metric,mean,std rows."""
    try:
        dataset = load_csv(data, label)
        estimator = _build_estimator(algorithm, trees, learning_rate, psi_d, eta_d,
                                     resampling_folds, impurity, seed, log_product_update)
        result = evaluation.cross_validate(
            dataset, estimator, n_folds=folds, seed=seed, stratified=not unstratified
        )
    except (CBPTError, OSError) as exc:
        _fail("cross-validation", exc)
    evaluation.write_metrics_csv(out, [
        ("accuracy", result.accuracy.mean, result.accuracy.std),
        ("macro_f1", result.macro_f1.mean, result.macro_f1.std),
        ("auc_ovr", result.auc_ovr.mean, result.auc_ovr.std),
    ])
    click.echo(
        f"{algorithm}: accuracy {result.accuracy.mean:.4f}±{result.accuracy.std:.4f}, "
        f"macro-F1 {result.macro_f1.mean:.4f}±{result.macro_f1.std:.4f}"
    )


@main.command()
@click.option("--data", required=True, type=click.Path())
@click.option("--label", required=True)
@click.option("--convergence", "mode", flag_value="convergence",
              help="Test error per iteration.")
@click.option("--learning", "mode", flag_value="learning",
              help="Accuracy per training fraction.")
@click.option("--test", type=click.Path(), default=None,
              help="Labeled test CSV for --convergence (default: internal 75/25 split).")
@click.option("--fractions", default="0.1,0.325,0.55,0.775,1.0", show_default=True,
              help="Training fractions for --learning.")
@click.option("--repeats", type=int, default=3, show_default=True,
              help="Subsample repeats per fraction for --learning.")
@click.option("--out", required=True, type=click.Path())
@_config_options
def curves(data, label, mode, test, fractions, repeats, out, algorithm, trees,
           learning_rate, psi_d, eta_d, resampling_folds, impurity, seed,
           log_product_update):
    """Emit a convergence or learning curve as CSV."""
    if mode is None:
        raise click.UsageError("pass one of --convergence or --learning")
    try:
        dataset = load_csv(data, label)
        estimator = _build_estimator(algorithm, trees, learning_rate, psi_d, eta_d,
                                     resampling_folds, impurity, seed, log_product_update)
        if mode == "convergence":
            if test is not None:
                train_ds = dataset
                test_ds = load_csv(test, label)
            else:
                train_ds, test_ds = stratified_split(dataset, 0.25, seed)
            points = evaluation.convergence_curve(train_ds, test_ds, estimator)
            evaluation.write_convergence_csv(out, points)
        else:
            fracs = [float(f) for f in fractions.split(",") if f.strip()]
            result = evaluation.learning_curve(dataset, estimator, fracs,
                                               repeats=repeats, seed=seed)
            for frac, reason in result.skipped:
                click.echo(f"skipped fraction {frac}: {reason}", err=True)
            evaluation.write_learning_csv(out, result.points)
    except (CBPTError, OSError, ValueError) as exc:
        _fail("curves", exc)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--data", "data_paths", required=True, multiple=True, type=click.Path(),
              help="Labeled CSV; repeat for several datasets.")
@click.option("--label", required=True, help="Label column (shared by all files).")
@click.option("--algorithms", default="adaboost,adaboost-pt,cbpt", show_default=True)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--out", required=True, type=click.Path())
@_config_options
def benchmark(data_paths, label, algorithms, folds, out, algorithm, trees,
              learning_rate, psi_d, eta_d, resampling_folds, impurity, seed,
              log_product_update):
    """Cross-validate every (dataset, algorithm) pair; one CSV row each.

    Failing cells are reported and skipped; the exit code is 1 if any cell
    failed. The --algorithm option is ignored here (use --algorithms).
    """
    algos = [a.strip() for a in algorithms.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise click.UsageError(f"unknown algorithm {a!r}")
    lines = ["dataset,algorithm,accuracy_mean,accuracy_std,f1_mean,f1_std"]
    failures = []
    for path in data_paths:
        name = Path(path).stem
        try:
            dataset = load_csv(path, label)
        except (CBPTError, OSError) as exc:
            failures.append((name, "*", str(exc)))
            click.echo(f"failed to load {path}: {exc}", err=True)
            continue
        for algo in algos:
            estimator = _build_estimator(algo, trees, learning_rate, psi_d, eta_d,
                                         resampling_folds, impurity, seed,
                                         log_product_update)
            try:
                result = evaluation.cross_validate(
                    dataset, estimator, n_folds=folds, seed=seed
                )
            except CBPTError as exc:
                failures.append((name, algo, str(exc)))
                click.echo(f"cell ({name}, {algo}) failed: {exc}", err=True)
                continue
            lines.append(
                f"{name},{algo},{result.accuracy.mean!r},{result.accuracy.std!r},"
                f"{result.macro_f1.mean!r},{result.macro_f1.std!r}"
            )
            click.echo(
                f"{name} / {algo}: accuracy {result.accuracy.mean:.4f}"
                f"±{result.accuracy.std:.4f}"
            )
    atomic_write_text(out, "\n".join(lines) + "\n")
    if failures:
        click.echo(f"{len(failures)} cell(s) failed:", err=True)
        for name, algo, msg in failures:
            click.echo(f"  {name} / {algo}: {msg}", err=True)
        sys.exit(1)
    click.echo(f"wrote {out}")


@main.command()
def datasets():
    """Print fetch and preparation instructions for the benchmark CSVs."""
    click.echo(
        "Benchmark datasets are plain CSVs with a header row and one label\n"
        "column; all other columns must be finite numbers. This repository\n"
        "ships ready-to-use copies under data/ (label column: 'class').\n"
        "\n"
        "To rebuild them from the UCI originals:\n"
        "  Glass identification: https://archive.ics.uci.edu/dataset/42\n"
        "    glass.data is comma-separated with 11 columns: drop column 1\n"
        "    (the row id), name the rest RI,Na,Mg,Al,Si,K,Ca,Ba,Fe,class.\n"
        "  Statlog Landsat satellite: https://archive.ics.uci.edu/dataset/146\n"
        "    Concatenate sat.trn and sat.tst (space-separated, 37 columns),\n"
        "    name the columns f1..f36,class.\n"
        "  LSVT voice rehabilitation: https://archive.ics.uci.edu/dataset/282\n"
        "    Export the spreadsheet to CSV with the binary response as a\n"
        "    'class' column to enable the optional LSVT benchmark rows.\n"
        "\n"
        "scripts/prepare_datasets.py automates the Glass and Statlog steps."
    )


if __name__ == "__main__":
    main()
