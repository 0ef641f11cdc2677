"""
SU Classifier
Estimator facade: resolves the class prior, picks (loss, lambda) by
cross-validation and trains the final model on all SU data
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from su_learning.core.baseline import clustering_accuracy
from su_learning.core.modelselect import cross_validate
from su_learning.core.prior import estimate_prior
from su_learning.core.train import classify, default_rbf_basis, identity_basis, predict, train
from su_learning.errors import DataError, InvalidPriorError
from su_learning.models.data_models import ClassPrior, LabeledDataset, SUDataset, SUSample, as_training_sample
from su_learning.models.experiment_models import PriorMode
from su_learning.models.learning_models import (
    BasisSpec,
    CVPlan,
    CVResult,
    LinearModel,
    LossKind,
    MPEConfig,
    PriorCase,
    PriorEstimate,
    TrainConfig,
)

logger = logging.getLogger(__name__)

_PRIOR_CASES = {
    PriorMode.ESTIMATE_CASE2: PriorCase.ASSUME_PLUS_LARGER,
    PriorMode.ESTIMATE_CASE3: PriorCase.SIGN_KNOWN_MINUS_LARGER,
}


class SUClassifier:
    """Binary classifier learned from similar pairs and unlabeled points"""

    def __init__(self,
                 pi_plus: Optional[float] = None,
                 prior_mode: Union[PriorMode, str] = PriorMode.GIVEN,
                 losses: Sequence[Union[LossKind, str]] = (LossKind.SQUARED,),
                 lambda_grid: Sequence[float] = (1e-1, 1e-4, 1e-7),
                 lam: Optional[float] = None,
                 cv_folds: int = 5,
                 basis: str = "linear",
                 n_centers: int = 100,
                 mpe_config: Optional[MPEConfig] = None,
                 seed: int = 0,
                 n_jobs: Optional[int] = None):
        logger.info("Initializing SUClassifier.")
        self.prior_mode = PriorMode(prior_mode)
        if self.prior_mode == PriorMode.GIVEN and pi_plus is None:
            raise InvalidPriorError("prior_mode 'given' needs pi_plus")
        if basis not in ("linear", "rbf"):
            raise DataError(f"unknown basis {basis!r}; use 'linear' or 'rbf'")

        self.pi_plus = pi_plus
        self.losses: List[LossKind] = [LossKind.parse(loss) for loss in losses]
        self.lambda_grid = list(lambda_grid)
        self.lam = lam
        self.cv_folds = cv_folds
        self.basis = basis
        self.n_centers = n_centers
        self.mpe_config = mpe_config or MPEConfig(seed=seed)
        self.seed = seed
        self.n_jobs = n_jobs

        self.model_: Optional[LinearModel] = None
        self.prior_: Optional[ClassPrior] = None
        self.prior_estimate_: Optional[PriorEstimate] = None
        self.cv_result_: Optional[CVResult] = None
        self.config_: Optional[TrainConfig] = None
        logger.info(f"SUClassifier initialized (prior={self.prior_mode.value}, "
                    f"losses={[loss.value for loss in self.losses]}, basis={basis}).")

    def _resolve_prior(self, sample: SUSample) -> ClassPrior:
        if self.prior_mode == PriorMode.GIVEN:
            self.prior_estimate_ = None
            return ClassPrior.coerce(self.pi_plus)
        self.prior_estimate_ = estimate_prior(sample, self.mpe_config, _PRIOR_CASES[self.prior_mode])
        return ClassPrior.coerce(self.prior_estimate_.pi_plus_hat)

    def _build_basis(self, sample: SUSample) -> BasisSpec:
        if self.basis == "rbf":
            return default_rbf_basis(sample, n_centers=self.n_centers, seed=self.seed)
        return identity_basis(sample.d)

    def fit(self, su: Union[SUSample, SUDataset]) -> "SUClassifier":
        sample = as_training_sample(su)
        prior = self._resolve_prior(sample).require_identifiable()
        basis = self._build_basis(sample)
        base = TrainConfig(loss=self.losses[0], pi_plus=prior, seed=self.seed)

        if self.lam is not None and len(self.losses) == 1:
            self.cv_result_ = None
            cfg = base.replace(lam=self.lam)
        else:
            grid = [self.lam] if self.lam is not None else self.lambda_grid
            plan = CVPlan(k=self.cv_folds, lambda_grid=grid, losses=self.losses,
                          seed=self.seed, n_jobs=self.n_jobs)
            self.cv_result_ = cross_validate(sample, prior, plan, basis=basis, base_config=base)
            cfg = self.cv_result_.best_config

        self.model_ = train(sample, cfg, basis)
        self.prior_ = prior
        self.config_ = cfg
        logger.info(f"SUClassifier fitted: loss={cfg.loss.value}, lambda={cfg.lam:g}, pi_plus={prior.pi_plus:.4f}")
        return self

    def _require_fitted(self) -> LinearModel:
        if self.model_ is None:
            raise DataError("classifier is not fitted; call fit() first")
        return self.model_

    def decision_function(self, X) -> np.ndarray:
        return predict(self._require_fitted(), X)

    def predict(self, X) -> np.ndarray:
        """Labels in {+1, -1}"""
        return classify(self._require_fitted(), X)

    def score(self, data: LabeledDataset) -> float:
        return evaluate(self._require_fitted(), data)["accuracy"]

    def report(self) -> Dict[str, Any]:
        """Training report: prior provenance, selected configuration and fit diagnostics"""
        model = self._require_fitted()
        report: Dict[str, Any] = {
            "pi_plus": self.prior_.pi_plus,
            "prior_mode": self.prior_mode.value,
            "loss": self.config_.loss.value,
            "lambda": self.config_.lam,
            "basis": model.basis.kind.value,
            "fit": model.fit_info.to_dict() if model.fit_info else None,
        }
        if self.prior_estimate_ is not None:
            report["prior_estimate"] = {
                "pi_s_hat": self.prior_estimate_.pi_s_hat,
                "pi_plus_hat": self.prior_estimate_.pi_plus_hat,
                "case": self.prior_estimate_.case.value,
            }
        if self.cv_result_ is not None:
            report["cv"] = self.cv_result_.to_dict()
        return report


def evaluate(model: LinearModel, data: LabeledDataset) -> Dict[str, Any]:
    """Accuracy, clustering accuracy and zero-one risk on labeled data"""
    predicted = classify(model, data.features)
    accuracy = float(np.mean(predicted == data.labels))
    return {
        "accuracy": accuracy,
        "clustering_accuracy": clustering_accuracy(predicted, data.labels),
        "zero_one_risk": 1.0 - accuracy,
        "n": data.n,
    }
