"""
Command-line tests
The generate -> sample -> train -> eval/predict pipeline, exit codes and sweeps
"""

import json

import pandas as pd
import pytest

from su_learning.cli import main
from su_learning.core.train import identity_basis, save_model
from su_learning.data.datasets import save_libsvm
from su_learning.models.data_models import LabeledDataset
from su_learning.models.learning_models import LinearModel


@pytest.fixture
def pipeline(tmp_path):
    """Labeled pool, test set and an SU sample written through the CLI"""
    paths = {
        "pool": tmp_path / "pool.libsvm",
        "test": tmp_path / "test.libsvm",
        "su": tmp_path / "su.json",
        "model": tmp_path / "model.json",
    }
    assert main(["generate", "--n", "800", "--separation", "3", "--seed", "1",
                 "--output", str(paths["pool"])]) == 0
    assert main(["generate", "--n", "1000", "--separation", "3", "--seed", "2",
                 "--output", str(paths["test"])]) == 0
    assert main(["sample", "--input", str(paths["pool"]), "--pi-plus", "0.7", "--n-s", "100",
                 "--n-u", "150", "--seed", "3", "--output", str(paths["su"])]) == 0
    return paths


def _read_json_stdout(capsys):
    return json.loads(capsys.readouterr().out)


class TestPipeline:
    def test_train_eval_predict(self, pipeline, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        assert main(["train", "--data", str(pipeline["su"]), "--pi-plus", "0.7", "--lambda", "0.01",
                     "--output", str(pipeline["model"]), "--report", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert report["loss"] == "squared"
        assert report["fit"]["optimality_residual"] <= 1e-6
        assert report["model_path"] == str(pipeline["model"])

        capsys.readouterr()
        assert main(["eval", "--model", str(pipeline["model"]), "--test", str(pipeline["test"])]) == 0
        metrics = _read_json_stdout(capsys)
        assert metrics["accuracy"] > 0.8
        assert metrics["n"] == 1000

        predictions = tmp_path / "predictions.csv"
        assert main(["predict", "--model", str(pipeline["model"]), "--input", str(pipeline["test"]),
                     "--output", str(predictions)]) == 0
        frame = pd.read_csv(predictions)
        assert list(frame.columns) == ["score", "label"]
        assert len(frame) == 1000
        assert set(frame["label"]) <= {1, -1}

    def test_predict_labels_zero_scores_positive(self, tmp_path):
        model = save_model(LinearModel(weights=[0.0, 0.0], basis=identity_basis(1)), tmp_path / "flat.json")
        points = save_libsvm(LabeledDataset(features=[[0.0], [2.0], [-2.0]], labels=[1, -1, -1]),
                             tmp_path / "points.libsvm")
        predictions = tmp_path / "flat.csv"
        assert main(["predict", "--model", str(model), "--input", str(points), "--output", str(predictions)]) == 0
        frame = pd.read_csv(predictions)
        assert frame["score"].tolist() == [0.0, 0.0, 0.0]
        assert frame["label"].tolist() == [1, 1, 1]

    def test_double_hinge_report(self, pipeline, capsys):
        capsys.readouterr()
        assert main(["train", "--data", str(pipeline["su"]), "--pi-plus", "0.7", "--loss", "double-hinge",
                     "--lambda", "0.01", "--output", str(pipeline["model"])]) == 0
        report = _read_json_stdout(capsys)
        assert report["loss"] == "double-hinge"
        assert report["fit"]["status"] == "optimal"
        assert report["fit"]["optimality_residual"] <= 1e-6

    def test_cross_validated_training(self, pipeline, capsys):
        capsys.readouterr()
        assert main(["train", "--data", str(pipeline["su"]), "--pi-plus", "0.7", "--lambda-grid", "0.1,0.0001",
                     "--cv-folds", "3", "--output", str(pipeline["model"])]) == 0
        report = _read_json_stdout(capsys)
        assert report["lambda"] in (0.1, 0.0001)
        assert len(report["cv"]["candidates"]) == 2

    def test_estimate_prior(self, pipeline, capsys):
        capsys.readouterr()
        assert main(["estimate-prior", "--data", str(pipeline["su"]), "--diagnostics"]) == 0
        estimate = _read_json_stdout(capsys)
        assert 0.5 <= estimate["pi_plus_hat"] <= 1.0
        assert estimate["case"] == "assume_plus_larger"
        assert "forward" in estimate["diagnostics"]

    def test_sampling_is_byte_deterministic(self, pipeline, tmp_path):
        again = tmp_path / "again.json"
        assert main(["sample", "--input", str(pipeline["pool"]), "--pi-plus", "0.7", "--n-s", "100",
                     "--n-u", "150", "--seed", "3", "--output", str(again)]) == 0
        assert again.read_bytes() == pipeline["su"].read_bytes()

    def test_generate_is_byte_deterministic(self, pipeline, tmp_path):
        again = tmp_path / "pool_again.libsvm"
        assert main(["generate", "--n", "800", "--separation", "3", "--seed", "1", "--output", str(again)]) == 0
        assert again.read_bytes() == pipeline["pool"].read_bytes()


class TestExitCodes:
    def test_missing_input_file(self, tmp_path, capsys):
        assert main(["train", "--data", str(tmp_path / "missing.json"), "--pi-plus", "0.7",
                     "--output", str(tmp_path / "m.json")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["train"])
        assert exc.value.code == 1

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            main(["fly"])
        assert exc.value.code == 1

    def test_prior_at_one_half(self, pipeline):
        assert main(["train", "--data", str(pipeline["su"]), "--pi-plus", "0.5", "--lambda", "0.01",
                     "--output", str(pipeline["model"])]) == 2

    def test_malformed_libsvm(self, tmp_path):
        bad = tmp_path / "bad.libsvm"
        bad.write_text("+1 1:0.5\n-1 oops\n")
        assert main(["sample", "--input", str(bad), "--pi-plus", "0.7", "--n-s", "2", "--n-u", "2",
                     "--output", str(tmp_path / "su.json")]) == 2

    def test_invalid_sweep_config(self, tmp_path):
        assert main(["sweep-nu", "--trials", "0"]) == 2


class TestSweeps:
    SMALL = ["--trials", "1", "--n-s", "20", "--n-u-grid", "20,40", "--pi-plus-grid", "0.7",
             "--n-test", "200", "--lambda", "0.01", "--separation", "3"]

    def test_sweep_to_stdout(self, capsys):
        capsys.readouterr()
        assert main(["sweep-nu", *self.SMALL]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "pi_plus,n_u,trial,error,error_100,status"
        assert len(lines) == 3

    def test_config_file_with_flag_override(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"trials": 5, "n_s": 20, "n_u_grid": [20], "n_test": 100,
                                      "lam": 0.01, "seed": 9}))
        output = tmp_path / "sweep.csv"
        assert main(["sweep-nu", "--config", str(config), "--trials", "2", "--output", str(output)]) == 0
        assert len(pd.read_csv(output)) == 2
        summary = json.loads((tmp_path / "sweep_summary.json").read_text())
        assert summary["config"]["seed"] == 9
        assert summary["trials"] == 2

    def test_benchmark_summary(self, tmp_path, capsys):
        output = tmp_path / "bench.csv"
        capsys.readouterr()
        assert main(["benchmark", "--trials", "1", "--n-s", "20", "--n-u", "30", "--n-test", "200",
                     "--lambda", "0.01", "--output", str(output), "--print-summary"]) == 0
        summary = _read_json_stdout(capsys)
        assert set(summary["metrics"]["mean_clustering_accuracy"]) == {"su_squared", "su_double_hinge", "kmeans"}

    def test_sweep_losses_flag(self, capsys):
        capsys.readouterr()
        assert main(["benchmark", "--trials", "1", "--n-s", "20", "--n-u", "30", "--n-test", "200",
                     "--lambda", "0.01", "--losses", "squared,logistic", "--print-summary"]) == 0
        out = capsys.readouterr().out
        summary = json.loads(out[out.index("{"):])
        assert set(summary["metrics"]["mean_clustering_accuracy"]) == {"su_squared", "su_logistic", "kmeans"}

    def test_run_single_train(self, tmp_path):
        output = tmp_path / "single.csv"
        assert main(["run", "--kind", "single_train", "--trials", "2", "--n-s", "20", "--n-u", "30",
                     "--n-test", "200", "--lambda", "0.01", "--output", str(output)]) == 0
        frame = pd.read_csv(output)
        assert len(frame) == 2
        assert (frame["loss"] == "squared").all()

    def test_run_takes_kind_from_config(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"kind": "prior_curve", "sizes": [100], "trials": 1, "seed": 2}))
        output = tmp_path / "curve.csv"
        assert main(["run", "--config", str(config), "--output", str(output)]) == 0
        assert pd.read_csv(output).columns.tolist() == ["N", "trial", "pi_plus_hat", "abs_error", "status"]
