"""
Experiment Runner
Single training runs, n_U sweeps, prior-estimation curves and the SU vs k-means
benchmark; every run writes a CSV of per-trial rows plus a JSON run summary
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from su_learning.classifier import SUClassifier, evaluate
from su_learning.core.baseline import clustering_accuracy, kmeans2
from su_learning.core.prior import estimate_prior
from su_learning.data.datasets import (
    bayes_error,
    generate_banana,
    generate_gaussian,
    load_libsvm,
    sample_su,
)
from su_learning.experiments.trial_executor import TrialExecutor
from su_learning.experiments.trial_tracker import TrialTracker
from su_learning.models.data_models import LabeledDataset, SyntheticSpec
from su_learning.models.experiment_models import (
    DataFamily,
    ExperimentConfig,
    ExperimentKind,
    PriorMode,
    RunSummary,
)
from su_learning.models.learning_models import LossKind, MPEConfig, PriorCase

logger = logging.getLogger(__name__)

NU_SWEEP_COLUMNS = ["pi_plus", "n_u", "trial", "error", "error_100", "status"]
PRIOR_CURVE_COLUMNS = ["N", "trial", "pi_plus_hat", "abs_error", "status"]
BENCHMARK_COLUMNS = ["method", "trial", "clustering_accuracy"]
BENCHMARK_METHODS = ["su_squared", "su_double_hinge", "kmeans"]
SINGLE_TRAIN_COLUMNS = ["trial", "loss", "lambda", "pi_plus_used", "accuracy", "clustering_accuracy", "status"]

# Labeled pool size relative to the points one SU sample consumes
POOL_FACTOR = 3


class DataSource:
    """Labeled pools and held-out test sets for one experiment configuration"""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.labeled: Optional[LabeledDataset] = None
        if cfg.input_path is not None:
            cfg.require_inputs()
            self.labeled = load_libsvm(cfg.input_path)

    def synthetic_spec(self, pi_plus: float) -> Optional[SyntheticSpec]:
        if self.labeled is not None or self.cfg.family != DataFamily.GAUSSIAN:
            return None
        return SyntheticSpec.isotropic(self.cfg.d, self.cfg.separation, pi_plus)

    def _generate(self, pi_plus: float, n: int, seed: int) -> LabeledDataset:
        if self.cfg.family == DataFamily.BANANA:
            return generate_banana(pi_plus, n, noise=self.cfg.banana_noise, seed=seed)
        return generate_gaussian(self.synthetic_spec(pi_plus).with_seed(seed), n)

    def draw(self, pi_plus: float, pool_size: int, test_size: int,
             seed: int) -> Tuple[LabeledDataset, LabeledDataset]:
        """(pool, test); file data is split in half with a seeded permutation"""
        pool_seed, test_seed = np.random.SeedSequence(seed).generate_state(2)
        if self.labeled is not None:
            order = np.random.default_rng(int(pool_seed)).permutation(self.labeled.n)
            half = self.labeled.n // 2
            return self.labeled.subset(order[:half]), self.labeled.subset(order[half:])
        return (self._generate(pi_plus, pool_size, int(pool_seed)),
                self._generate(pi_plus, test_size, int(test_seed)))


def _sub_seeds(seed: int, count: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def _draw_su(source: DataSource, pi_plus: float, n_s: int, n_u: int, test_size: int, seed: int):
    data_seed, sample_seed = _sub_seeds(seed, 2)
    pool, test = source.draw(pi_plus, POOL_FACTOR * (2 * n_s + n_u), test_size, data_seed)
    su = sample_su(pool, pi_plus, n_s, n_u, seed=sample_seed, replace=False)
    return su, test


def _classifier(cfg: ExperimentConfig, losses: List[LossKind], seed: int,
                pi_plus: Optional[float] = None, prior_mode: PriorMode = PriorMode.GIVEN) -> SUClassifier:
    return SUClassifier(pi_plus=pi_plus if pi_plus is not None else cfg.pi_plus,
                        prior_mode=prior_mode, losses=losses, lambda_grid=cfg.lambda_grid,
                        lam=cfg.lam, cv_folds=cfg.cv_folds, basis=cfg.basis,
                        n_centers=cfg.n_centers, seed=seed, n_jobs=1)


def _method_name(loss: LossKind) -> str:
    return f"su_{loss.value.replace('-', '_')}"


def _prior_case(cfg: ExperimentConfig) -> PriorCase:
    return (PriorCase.SIGN_KNOWN_MINUS_LARGER if cfg.prior_mode == PriorMode.ESTIMATE_CASE3
            else PriorCase.ASSUME_PLUS_LARGER)


# ---------------------------------------------------------------------------
# Single training run
# ---------------------------------------------------------------------------

def _single_train_trial(cfg: ExperimentConfig, source: DataSource, trial: int, seed: int) -> List[Dict[str, Any]]:
    data_seed, fit_seed = _sub_seeds(seed, 2)
    su, test = _draw_su(source, cfg.pi_plus, cfg.n_s, cfg.n_u, cfg.n_test, data_seed)
    clf = _classifier(cfg, cfg.resolved_losses(), fit_seed % (2**31), prior_mode=cfg.prior_mode).fit(su)
    metrics = evaluate(clf.model_, test)
    return [{"trial": trial, "loss": clf.config_.loss.value, "lambda": clf.config_.lam,
             "pi_plus_used": clf.prior_.pi_plus, "accuracy": metrics["accuracy"],
             "clustering_accuracy": metrics["clustering_accuracy"], "status": "ok"}]


def _single_train_failed(cfg: ExperimentConfig, trial: int) -> List[Dict[str, Any]]:
    return [{"trial": trial, "loss": None, "lambda": np.nan, "pi_plus_used": np.nan, "accuracy": np.nan,
             "clustering_accuracy": np.nan, "status": "failed"}]


def _single_train_metrics(frame: pd.DataFrame, source: DataSource) -> Dict[str, Any]:
    ok = frame[frame["status"] == "ok"]
    return {
        "mean_accuracy": float(ok["accuracy"].mean()) if len(ok) else None,
        "mean_clustering_accuracy": float(ok["clustering_accuracy"].mean()) if len(ok) else None,
        "selected_losses": {str(k): int(v) for k, v in ok["loss"].value_counts().items()},
    }


# ---------------------------------------------------------------------------
# n_U sweep
# ---------------------------------------------------------------------------

def _nu_sweep_trial(cfg: ExperimentConfig, source: DataSource, trial: int, seed: int) -> List[Dict[str, Any]]:
    rows = []
    combos = [(pi, n_u) for pi in cfg.pi_plus_grid for n_u in cfg.n_u_grid]
    for (pi_plus, n_u), combo_seed in zip(combos, _sub_seeds(seed, len(combos))):
        data_seed, fit_seed = _sub_seeds(combo_seed, 2)
        su, test = _draw_su(source, pi_plus, cfg.n_s, n_u, cfg.n_test, data_seed)
        clf = _classifier(cfg, cfg.resolved_losses(), fit_seed % (2**31), pi_plus).fit(su)
        protocol = test.subset(np.arange(min(cfg.protocol_test_size, test.n)))
        rows.append({
            "pi_plus": pi_plus, "n_u": n_u, "trial": trial,
            "error": evaluate(clf.model_, test)["zero_one_risk"],
            "error_100": evaluate(clf.model_, protocol)["zero_one_risk"],
            "status": "ok",
        })
    return rows


def _nu_sweep_failed(cfg: ExperimentConfig, trial: int) -> List[Dict[str, Any]]:
    return [{"pi_plus": pi, "n_u": n_u, "trial": trial, "error": np.nan, "error_100": np.nan,
             "status": "failed"} for pi in cfg.pi_plus_grid for n_u in cfg.n_u_grid]


def excess_error_slope(n_u: np.ndarray, mean_error: np.ndarray, floor: float) -> Optional[float]:
    """Slope of log(mean error - floor) against log(n_U); None when some excess is not positive"""
    excess = np.asarray(mean_error, dtype=float) - floor
    if len(excess) < 2 or np.any(~np.isfinite(excess)) or np.any(excess <= 0):
        return None
    return float(np.polyfit(np.log(np.asarray(n_u, dtype=float)), np.log(excess), 1)[0])


def _nu_sweep_metrics(frame: pd.DataFrame, source: DataSource) -> Dict[str, Any]:
    ok = frame[frame["status"] == "ok"]
    metrics: Dict[str, Any] = {"mean_error": {}, "excess_error_slope": {}, "bayes_error": {}}
    for pi_plus, group in ok.groupby("pi_plus"):
        means = group.groupby("n_u")["error"].mean().sort_index()
        key = f"{pi_plus:g}"
        metrics["mean_error"][key] = {str(n): float(e) for n, e in means.items()}
        spec = source.synthetic_spec(float(pi_plus))
        if spec is not None:
            floor = bayes_error(spec)
            metrics["bayes_error"][key] = floor
            metrics["excess_error_slope"][key] = excess_error_slope(means.index.values, means.values, floor)
    return metrics


# ---------------------------------------------------------------------------
# Prior-estimation curve
# ---------------------------------------------------------------------------

def _prior_curve_trial(cfg: ExperimentConfig, source: DataSource, trial: int, seed: int) -> List[Dict[str, Any]]:
    rows = []
    case = _prior_case(cfg)
    for N, size_seed in zip(cfg.sizes, _sub_seeds(seed, len(cfg.sizes))):
        data_seed, mpe_seed = _sub_seeds(size_seed, 2)
        su, _ = _draw_su(source, cfg.pi_plus, N // 2, N // 2, 1, data_seed)
        estimate = estimate_prior(su, MPEConfig(seed=mpe_seed), case)
        rows.append({"N": N, "trial": trial, "pi_plus_hat": estimate.pi_plus_hat,
                     "abs_error": abs(estimate.pi_plus_hat - cfg.pi_plus), "status": "ok"})
    return rows


def _prior_curve_failed(cfg: ExperimentConfig, trial: int) -> List[Dict[str, Any]]:
    return [{"N": N, "trial": trial, "pi_plus_hat": np.nan, "abs_error": np.nan, "status": "failed"}
            for N in cfg.sizes]


def _prior_curve_metrics(frame: pd.DataFrame, source: DataSource) -> Dict[str, Any]:
    ok = frame[frame["status"] == "ok"]
    medians = ok.groupby("N")["abs_error"].median().sort_index()
    return {"median_abs_error": {str(n): float(e) for n, e in medians.items()}}


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------

def _benchmark_trial(cfg: ExperimentConfig, source: DataSource, trial: int, seed: int) -> List[Dict[str, Any]]:
    data_seed, fit_seed, kmeans_seed = _sub_seeds(seed, 3)
    fit_seed %= 2**31
    su, test = _draw_su(source, cfg.pi_plus, cfg.n_s, cfg.n_u, cfg.n_test, data_seed)

    pi_plus = cfg.pi_plus
    if cfg.prior_mode != PriorMode.GIVEN:
        pi_plus = estimate_prior(su, MPEConfig(seed=fit_seed), _prior_case(cfg)).pi_plus_hat

    rows = []
    for loss in cfg.resolved_losses():
        clf = _classifier(cfg, [loss], fit_seed, pi_plus).fit(su)
        rows.append({"method": _method_name(loss), "trial": trial,
                     "clustering_accuracy": evaluate(clf.model_, test)["clustering_accuracy"]})

    km = kmeans2(su.u_points, seed=kmeans_seed % (2**31))
    rows.append({"method": "kmeans", "trial": trial,
                 "clustering_accuracy": clustering_accuracy(km.classify(test.features), test.labels)})
    return rows


def _benchmark_failed(cfg: ExperimentConfig, trial: int) -> List[Dict[str, Any]]:
    methods = [_method_name(loss) for loss in cfg.resolved_losses()] + ["kmeans"]
    return [{"method": method, "trial": trial, "clustering_accuracy": np.nan} for method in methods]


def _benchmark_metrics(frame: pd.DataFrame, source: DataSource) -> Dict[str, Any]:
    grouped = frame.groupby("method", sort=False)["clustering_accuracy"]
    return {
        "mean_clustering_accuracy": {m: float(v) for m, v in grouped.mean().items()},
        "std_clustering_accuracy": {m: float(v) for m, v in grouped.std().items()},
    }


_EXPERIMENTS = {
    ExperimentKind.NU_SWEEP: (_nu_sweep_trial, _nu_sweep_failed, _nu_sweep_metrics, NU_SWEEP_COLUMNS),
    ExperimentKind.PRIOR_CURVE: (_prior_curve_trial, _prior_curve_failed, _prior_curve_metrics, PRIOR_CURVE_COLUMNS),
    ExperimentKind.BENCHMARK: (_benchmark_trial, _benchmark_failed, _benchmark_metrics, BENCHMARK_COLUMNS),
    ExperimentKind.SINGLE_TRAIN: (_single_train_trial, _single_train_failed, _single_train_metrics,
                                  SINGLE_TRAIN_COLUMNS),
}


def summary_path(output: Path) -> Path:
    return output.with_name(f"{output.stem}_summary.json")


def run_experiment(cfg: ExperimentConfig) -> Tuple[pd.DataFrame, RunSummary]:
    """Run every trial of ``cfg``; rows are ordered by trial index.

    Failed trials contribute NaN rows and are counted in the summary. When
    cfg.output is set the CSV and the summary JSON are written next to each other.
    """
    trial_fn, failed_fn, metrics_fn, columns = _EXPERIMENTS[cfg.kind]
    source = DataSource(cfg)

    tracker = TrialTracker(cfg)
    tracker.start_run()
    executor = TrialExecutor(lambda trial, seed: trial_fn(cfg, source, trial, seed),
                             master_seed=cfg.seed, n_jobs=cfg.n_jobs)
    for result in executor.run(cfg.trials):
        if result.status != "ok":
            result = result.model_copy(update={"rows": failed_fn(cfg, result.trial)})
        tracker.record(result)

    frame = pd.DataFrame(tracker.rows(), columns=columns)
    summary = tracker.end_run(metrics_fn(frame, source))

    if cfg.output is not None:
        output = Path(cfg.output)
        output.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output, index=False)
        tracker.save(summary_path(output))
        logger.info(f"Results written: {output}")
    return frame, summary


def run_nu_sweep(cfg: ExperimentConfig) -> Tuple[pd.DataFrame, RunSummary]:
    return run_experiment(cfg.model_copy(update={"kind": ExperimentKind.NU_SWEEP}))


def run_prior_curve(cfg: ExperimentConfig) -> Tuple[pd.DataFrame, RunSummary]:
    return run_experiment(cfg.model_copy(update={"kind": ExperimentKind.PRIOR_CURVE}))


def run_benchmark(cfg: ExperimentConfig) -> Tuple[pd.DataFrame, RunSummary]:
    return run_experiment(cfg.model_copy(update={"kind": ExperimentKind.BENCHMARK}))


def run_single_train(cfg: ExperimentConfig) -> Tuple[pd.DataFrame, RunSummary]:
    return run_experiment(cfg.model_copy(update={"kind": ExperimentKind.SINGLE_TRAIN}))
