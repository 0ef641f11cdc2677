"""
Model Selection
k-fold cross-validation over losses and regularization strengths, scored by
the zero-one SU risk on held-out pairs and unlabeled points
"""

import logging
from itertools import product
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import KFold

from su_learning.config import get_settings
from su_learning.core.risk import su_risk_terms
from su_learning.core.train import score_sample, train
from su_learning.errors import InsufficientDataError, NumericalError
from su_learning.models.data_models import ClassPrior, SUDataset, SUSample, as_training_sample
from su_learning.models.learning_models import (
    BasisSpec,
    CVCandidate,
    CVPlan,
    CVResult,
    LinearModel,
    LossKind,
    TrainConfig,
)

logger = logging.getLogger(__name__)

Trainer = Callable[[SUSample, TrainConfig, Optional[BasisSpec]], LinearModel]
Fold = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def make_folds(n_s: int, n_u: int, k: int, seed: int = 0) -> List[Fold]:
    """(train pairs, held-out pairs, train U, held-out U) per fold.

    Pairs and unlabeled points are partitioned independently; fold i of the
    pairs is matched with fold i of the unlabeled points.
    """
    if n_s < k:
        raise InsufficientDataError(f"{k}-fold cross-validation needs at least {k} pairs, got {n_s}")
    if n_u < k:
        raise InsufficientDataError(f"{k}-fold cross-validation needs at least {k} unlabeled points, got {n_u}")
    pair_folds = KFold(n_splits=k, shuffle=True, random_state=seed).split(np.arange(n_s))
    u_folds = KFold(n_splits=k, shuffle=True, random_state=seed).split(np.arange(n_u))
    return [(tr_s, va_s, tr_u, va_u) for (tr_s, va_s), (tr_u, va_u) in zip(pair_folds, u_folds)]


def fold_proxy_terms(model: LinearModel, sample: SUSample, pi_plus: ClassPrior) -> Tuple[float, float]:
    """(S-term, U-term) of the zero-one SU risk of ``model`` on ``sample``"""
    return su_risk_terms(score_sample(model, sample), LossKind.ZERO_ONE, pi_plus)


def pooled_proxy(terms: Sequence[Tuple[float, float]], s_sizes: Sequence[int], u_sizes: Sequence[int]) -> float:
    """Recombine per-fold terms into the proxy on the union of the folds"""
    s_sizes = np.asarray(s_sizes, dtype=float)
    u_sizes = np.asarray(u_sizes, dtype=float)
    s_terms = np.array([t[0] for t in terms])
    u_terms = np.array([t[1] for t in terms])
    return float(s_terms @ s_sizes / s_sizes.sum() + u_terms @ u_sizes / u_sizes.sum())


def _run_fold(sample: SUSample, fold: Fold, cfg: TrainConfig, trainer: Trainer,
              basis: Optional[BasisSpec]) -> float:
    train_s, val_s, train_u, val_u = fold
    try:
        model = trainer(sample.subset(train_s, train_u), cfg, basis)
    except NumericalError as e:
        logger.warning(f"CV fit failed for loss={cfg.loss.value}, lambda={cfg.lam}: {e}")
        return float("inf")
    s_term, u_term = fold_proxy_terms(model, sample.subset(val_s, val_u), cfg.pi_plus)
    return s_term + u_term


def cross_validate(su: Union[SUSample, SUDataset], pi_plus: Union[ClassPrior, float],
                   plan: Optional[CVPlan] = None, trainer: Trainer = train,
                   basis: Optional[BasisSpec] = None,
                   base_config: Optional[TrainConfig] = None) -> CVResult:
    """Pick (loss, lambda) minimizing the mean held-out zero-one SU risk.

    pi_plus is fixed for every fold. Ties prefer the larger lambda, then the
    earlier configuration in (losses x lambda_grid) order.
    """
    plan = plan or CVPlan()
    sample = as_training_sample(su)
    prior = ClassPrior.coerce(pi_plus).require_identifiable()
    folds = make_folds(sample.n_s, sample.n_u, plan.k, plan.seed)

    base = base_config or TrainConfig(pi_plus=prior)
    configs = [base.replace(loss=loss, lam=lam, pi_plus=prior)
               for loss, lam in product(plan.losses, plan.lambda_grid)]
    n_jobs = plan.n_jobs if plan.n_jobs is not None else get_settings().n_jobs

    logger.info(f"Cross-validating {len(configs)} configurations over {plan.k} folds")
    risks = Parallel(n_jobs=n_jobs)(
        delayed(_run_fold)(sample, fold, cfg, trainer, basis)
        for cfg in configs for fold in folds
    )
    risks = np.asarray(risks, dtype=float).reshape(len(configs), plan.k)

    candidates = [
        CVCandidate(index=i, loss=cfg.loss, lam=cfg.lam,
                    mean_risk=float(np.mean(risks[i])), fold_risks=risks[i].tolist())
        for i, cfg in enumerate(configs)
    ]
    if not any(np.isfinite(c.mean_risk) for c in candidates):
        raise NumericalError("every cross-validation configuration failed to train")

    best = min(candidates, key=lambda c: (c.mean_risk, -c.lam, c.index))
    logger.info(f"CV selected loss={best.loss.value}, lambda={best.lam:g} (proxy risk {best.mean_risk:.4f})")
    return CVResult(best=best, best_config=configs[best.index], candidates=candidates)
