import csv
import filecmp
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from cbpt.cli import main

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="module")
def small_csv(tmp_path_factory):
    """36 Glass rows over three classes; quick to boost."""
    rows = list(csv.reader(open(DATA_DIR / "glass.csv")))
    header, data = rows[0], rows[1:]
    by_class = {}
    for r in data:
        by_class.setdefault(r[-1], []).append(r)
    small = [header]
    for c in ("1", "2", "3"):
        small.extend(by_class[c][:12])
    path = tmp_path_factory.mktemp("data") / "small.csv"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(small)
    return path


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False)


def train_args(data, out, **overrides):
    args = ["train", "--data", data, "--label", "class", "--out", out,
            "--trees", 4, "--seed", 3]
    for key, value in overrides.items():
        args += [f"--{key.replace('_', '-')}", value]
    return args


class TestTrain:
    def test_writes_model_and_log(self, small_csv, tmp_path):
        out = tmp_path / "m.json"
        result = run(*train_args(small_csv, out))
        assert result.exit_code == 0, result.output
        assert out.exists()
        log = (tmp_path / "m.json.log.csv").read_text().splitlines()
        assert log[0] == "iteration,epsilon,theta,n_leaves,train_error"
        assert len(log) >= 2

    def test_missing_label_is_usage_error(self, small_csv, tmp_path):
        result = CliRunner().invoke(
            main, ["train", "--data", str(small_csv), "--out", str(tmp_path / "m.json")]
        )
        assert result.exit_code == 2

    def test_missing_file_exits_one(self, tmp_path):
        result = CliRunner().invoke(
            main,
            ["train", "--data", str(tmp_path / "nope.csv"), "--label", "class",
             "--out", str(tmp_path / "m.json")],
        )
        assert result.exit_code == 1
        assert "load" in result.output

    def test_test_set_column_in_log(self, small_csv, tmp_path):
        out = tmp_path / "m.json"
        result = run(*train_args(small_csv, out), "--test", small_csv)
        assert result.exit_code == 0, result.output
        header = (tmp_path / "m.json.log.csv").read_text().splitlines()[0]
        assert header.endswith(",test_error")

    def test_deterministic_outputs(self, small_csv, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(*train_args(small_csv, a)).exit_code == 0
        assert run(*train_args(small_csv, b)).exit_code == 0
        assert filecmp.cmp(a, b, shallow=False)
        assert filecmp.cmp(f"{a}.log.csv", f"{b}.log.csv", shallow=False)

    def test_four_sample_separable_converges_to_one_estimator(self, tmp_path):
        data = tmp_path / "four.csv"
        data.write_text("x,class\n0.0,a\n0.1,a\n0.9,b\n1.0,b\n")
        out = tmp_path / "m.json"
        result = run("train", "--data", data, "--label", "class", "--out", out)
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert len(doc["estimators"]) == 1
        assert doc["stop_reason"] == "converged"

    def test_log_product_update_flag(self, small_csv, tmp_path):
        out = tmp_path / "m.json"
        result = run(*train_args(small_csv, out), "--log-product-update")
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["params"]["weight_update"] == "log_product"


class TestPredict:
    def test_converged_model_reproduces_labels(self, small_csv, tmp_path):
        out = tmp_path / "m.json"
        run(*train_args(small_csv, out, trees=30))
        pred_path = tmp_path / "p.csv"
        result = run("predict", "--model", out, "--data", small_csv,
                     "--out", pred_path)
        assert result.exit_code == 0, result.output
        rows = list(csv.DictReader(open(pred_path)))
        truth = [r["class"] for r in csv.DictReader(open(small_csv))]
        assert [r["prediction"] for r in rows] == truth
        shares = [float(rows[0][k]) for k in rows[0] if k.startswith("share_")]
        assert sum(shares) == pytest.approx(1.0)

    def test_permuted_columns_identical(self, small_csv, tmp_path):
        out = tmp_path / "m.json"
        run(*train_args(small_csv, out))
        rows = list(csv.reader(open(small_csv)))
        order = list(range(len(rows[0])))[::-1]
        permuted = tmp_path / "perm.csv"
        with open(permuted, "w", newline="") as fh:
            csv.writer(fh).writerows([[row[i] for i in order] for row in rows])
        p1, p2 = tmp_path / "p1.csv", tmp_path / "p2.csv"
        assert run("predict", "--model", out, "--data", small_csv, "--out", p1).exit_code == 0
        assert run("predict", "--model", out, "--data", permuted, "--out", p2).exit_code == 0
        assert filecmp.cmp(p1, p2, shallow=False)

    def test_missing_feature_column_names_it(self, small_csv, tmp_path):
        out = tmp_path / "m.json"
        run(*train_args(small_csv, out))
        rows = list(csv.reader(open(small_csv)))
        drop = rows[0].index("Mg")
        broken = tmp_path / "broken.csv"
        with open(broken, "w", newline="") as fh:
            csv.writer(fh).writerows([[c for i, c in enumerate(r) if i != drop] for r in rows])
        result = CliRunner().invoke(
            main, ["predict", "--model", str(out), "--data", str(broken),
                   "--out", str(tmp_path / "p.csv")],
        )
        assert result.exit_code == 1
        assert "Mg" in result.output


class TestEvaluateCommand:
    def test_metrics_and_confusion(self, small_csv, tmp_path):
        out = tmp_path / "m.json"
        run(*train_args(small_csv, out, trees=30))
        metrics_path = tmp_path / "metrics.csv"
        confusion_path = tmp_path / "confusion.csv"
        result = run("evaluate", "--model", out, "--data", small_csv,
                     "--label", "class", "--out-metrics", metrics_path,
                     "--out-confusion", confusion_path)
        assert result.exit_code == 0, result.output
        lines = metrics_path.read_text().splitlines()
        assert lines[0] == "metric,mean,std"
        values = {row.split(",")[0]: float(row.split(",")[1]) for row in lines[1:]}
        assert values["accuracy"] == 1.0
        conf = confusion_path.read_text().splitlines()
        assert conf[0] == "1,2,3"
        counts = np.array([[int(v) for v in row.split(",")] for row in conf[1:]])
        assert counts.sum() == 36
        assert np.trace(counts) == 36


class TestCvCommand:
    def test_byte_identical_reruns(self, small_csv, tmp_path):
        args = ["cv", "--data", small_csv, "--label", "class", "--algorithm",
                "adaboost", "--trees", 10, "--folds", 3, "--seed", 5]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(*args, "--out", a).exit_code == 0
        assert run(*args, "--out", b).exit_code == 0
        assert filecmp.cmp(a, b, shallow=False)
        lines = a.read_text().splitlines()
        assert lines[0] == "metric,mean,std"
        assert {row.split(",")[0] for row in lines[1:]} == {"accuracy", "macro_f1", "auc_ovr"}


class TestCurvesCommand:
    def test_convergence_rows_match_estimators(self, small_csv, tmp_path):
        out = tmp_path / "conv.csv"
        result = run("curves", "--data", small_csv, "--label", "class",
                     "--convergence", "--trees", 6, "--seed", 2, "--out", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "iteration,test_error"
        assert 2 <= len(lines) <= 7
        assert lines[1].startswith("1,")

    def test_learning_curve_csv(self, small_csv, tmp_path):
        out = tmp_path / "lc.csv"
        result = run("curves", "--data", small_csv, "--label", "class",
                     "--learning", "--fractions", "0.5,1.0", "--repeats", 2,
                     "--trees", 4, "--seed", 2, "--out", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "fraction,mean_accuracy,std_accuracy"
        assert len(lines) == 3

    def test_requires_a_mode(self, small_csv, tmp_path):
        result = CliRunner().invoke(
            main, ["curves", "--data", str(small_csv), "--label", "class",
                   "--out", str(tmp_path / "x.csv")],
        )
        assert result.exit_code == 2


class TestBenchmarkCommand:
    def test_rows_per_pair(self, small_csv, tmp_path):
        out = tmp_path / "bench.csv"
        result = run("benchmark", "--data", small_csv, "--label", "class",
                     "--algorithms", "adaboost,cbpt", "--trees", 6,
                     "--folds", 3, "--seed", 1, "--out", out)
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "dataset,algorithm,accuracy_mean,accuracy_std,f1_mean,f1_std"
        assert len(lines) == 3
        assert lines[1].startswith("small,adaboost,")
        assert lines[2].startswith("small,cbpt,")

    def test_failing_cell_continues_and_exits_one(self, small_csv, tmp_path):
        missing = tmp_path / "missing.csv"
        out = tmp_path / "bench.csv"
        result = CliRunner().invoke(
            main, ["benchmark", "--data", str(missing), "--data", str(small_csv),
                   "--label", "class", "--algorithms", "adaboost", "--trees", "4",
                   "--folds", "3", "--seed", "1", "--out", str(out)],
        )
        assert result.exit_code == 1
        lines = out.read_text().splitlines()
        assert len(lines) == 2  # header + the successful cell
        assert "failed" in result.output


class TestDatasetsCommand:
    def test_prints_instructions(self):
        result = run("datasets")
        assert result.exit_code == 0
        assert "glass" in result.output.lower()
        assert "statlog" in result.output.lower()
