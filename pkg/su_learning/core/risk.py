"""
Risk Functionals
Empirical SU risk, its alpha-weighted similar-pair term, and the supervised and
positive/similar/dissimilar oracles used to check it
"""

import logging
from typing import Tuple, Union

import numpy as np
from pydantic import field_validator, model_validator

from su_learning.core.losses import LossSpec, corrected, eval_loss, get_loss, tilde_loss
from su_learning.errors import DataError, EmptyInputError
from su_learning.models.data_models import ClassPrior, FrozenArrayModel, readonly_array
from su_learning.models.learning_models import LossKind

logger = logging.getLogger(__name__)

LossLike = Union[LossSpec, LossKind, str]
PriorLike = Union[ClassPrior, float]


class ScoreVector(FrozenArrayModel):
    """Model outputs on an SU sample.

    s_scores interleaves pair members: (pair 0 left, pair 0 right, pair 1 left, ...).
    """
    s_scores: np.ndarray
    u_scores: np.ndarray

    @field_validator("s_scores", "u_scores", mode="before")
    @classmethod
    def _validate(cls, value, info):
        arr = np.atleast_1d(np.asarray(value, dtype=float))
        if arr.ndim != 1:
            raise ValueError(f"{info.field_name} must be a vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{info.field_name} contains non-finite entries")
        return readonly_array(arr)

    @model_validator(mode="after")
    def _validate_pairs(self):
        if self.s_scores.shape[0] % 2:
            raise ValueError("s_scores must hold two scores per similar pair")
        return self

    @classmethod
    def from_pairs(cls, pair_scores, u_scores) -> "ScoreVector":
        """Build from an (n_S, 2) array of pair scores"""
        return cls(s_scores=np.asarray(pair_scores, dtype=float).reshape(-1), u_scores=u_scores)

    @property
    def n_s(self) -> int:
        return int(self.s_scores.shape[0] // 2)

    @property
    def n_u(self) -> int:
        return int(self.u_scores.shape[0])

    @property
    def pair_scores(self) -> np.ndarray:
        return self.s_scores.reshape(-1, 2)

    def require_nonempty(self) -> "ScoreVector":
        if self.n_s == 0 or self.n_u == 0:
            raise EmptyInputError(f"risk needs at least one pair and one unlabeled score "
                                  f"(got n_S={self.n_s}, n_U={self.n_u})")
        return self


def su_risk_terms(scores: ScoreVector, spec: LossLike, pi_plus: PriorLike) -> Tuple[float, float]:
    """(similar-pair term, unlabeled term); their sum is the empirical SU risk"""
    scores.require_nonempty()
    losses = corrected(spec, pi_plus)
    s_term = losses.pi_plus.pi_s * float(np.mean(losses.l_s(scores.s_scores)))
    u_term = float(np.mean(losses.l_u(scores.u_scores)))
    return s_term, u_term


def empirical_su_risk(scores: ScoreVector, spec: LossLike, pi_plus: PriorLike) -> float:
    """pi_S / (2 n_S) * sum l_s(pooled scores) + 1 / n_U * sum l_u(unlabeled scores).

    The value is signed; it is never clamped.
    """
    s_term, u_term = su_risk_terms(scores, spec, pi_plus)
    return s_term + u_term


def alpha_weighted_s_term(scores: ScoreVector, spec: LossLike, pi_plus: PriorLike, alpha: float) -> float:
    """pi_S / n_S * sum [alpha l_s(left) + (1 - alpha) l_s(right)]"""
    if not 0.0 <= alpha <= 1.0:
        raise DataError(f"alpha must lie in [0, 1], got {alpha}")
    scores.require_nonempty()
    losses = corrected(spec, pi_plus)
    pairs = scores.pair_scores
    weighted = alpha * losses.l_s(pairs[:, 0]) + (1.0 - alpha) * losses.l_s(pairs[:, 1])
    return losses.pi_plus.pi_s * float(np.mean(weighted))


def supervised_risk(scores, labels, spec: LossLike) -> float:
    """Mean of l(score, label) on labeled data"""
    scores = np.atleast_1d(np.asarray(scores, dtype=float))
    labels = np.atleast_1d(np.asarray(labels))
    if scores.size == 0:
        raise EmptyInputError("supervised risk needs at least one labeled score")
    if scores.shape != labels.shape:
        raise DataError(f"{scores.shape[0]} scores but {labels.shape[0]} labels")
    return float(np.mean(eval_loss(spec, scores, labels)))


def psd_risk(positive_scores, s_pair_scores, d_pair_scores, spec: LossLike, pi_plus: PriorLike) -> float:
    """Risk rewritten over positive points, similar pairs and dissimilar pairs.

    Dissimilar pairs must come in random order (either member may be the
    positive one). Oracle for tests; it needs labeled data.
    """
    prior = ClassPrior.coerce(pi_plus)
    positive_scores = np.atleast_1d(np.asarray(positive_scores, dtype=float))
    s_pairs = np.asarray(s_pair_scores, dtype=float).reshape(-1, 2)
    d_pairs = np.asarray(d_pair_scores, dtype=float).reshape(-1, 2)
    if positive_scores.size == 0 or s_pairs.shape[0] == 0 or d_pairs.shape[0] == 0:
        raise EmptyInputError("positive, similar-pair and dissimilar-pair scores must all be non-empty")

    spec = spec if isinstance(spec, LossSpec) else get_loss(spec)
    pi_plus_, pi_minus = prior.pi_plus, prior.pi_minus
    ratio = pi_plus_ / (2.0 * pi_minus)

    positive_term = ratio * float(np.mean(tilde_loss(spec, positive_scores)))

    s_plus = 0.5 * (spec.positive(s_pairs[:, 0]) + spec.positive(s_pairs[:, 1]))
    s_minus = 0.5 * (spec.negative(s_pairs[:, 0]) + spec.negative(s_pairs[:, 1]))
    similar_term = prior.pi_s * float(np.mean(-ratio * s_plus + (1.0 + pi_minus) / (2.0 * pi_minus) * s_minus))

    dissimilar = 0.5 * (spec.negative(d_pairs[:, 0]) + spec.positive(d_pairs[:, 1]))
    dissimilar_term = prior.pi_d * float(np.mean(dissimilar))

    return positive_term + similar_term + dissimilar_term


def su_zero_one_risk(scores: ScoreVector, pi_plus: PriorLike) -> float:
    """Empirical SU risk under the zero-one loss; the model-selection proxy"""
    return empirical_su_risk(scores, LossKind.ZERO_ONE, pi_plus)
