"""
Margin Losses
Surrogate losses psi(t * z), their subderivatives and the SU-corrected losses
"""

import logging
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import expit

from su_learning.errors import DataError
from su_learning.models.data_models import ClassPrior
from su_learning.models.learning_models import LossKind

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _squared(m):
    return 0.25 * (m - 1.0) ** 2


def _squared_grad(m):
    return 0.5 * (m - 1.0)


def _logistic(m):
    return np.logaddexp(0.0, -m)


def _logistic_grad(m):
    return -expit(-m)


def _double_hinge(m):
    return np.maximum(-m, np.maximum(0.0, 0.5 - 0.5 * m))


def _double_hinge_grad(m):
    # midpoints of the one-sided derivatives at the kinks m = -1 and m = 1
    return np.select([m < -1.0, m == -1.0, m < 1.0, m == 1.0], [-1.0, -0.75, -0.5, -0.25], default=0.0)


def _hinge(m):
    return np.maximum(0.0, 1.0 - m)


def _hinge_grad(m):
    return np.select([m < 1.0, m == 1.0], [-1.0, -0.5], default=0.0)


def _zero_one(m):
    return 0.5 * (1.0 - np.sign(m))


def _zero_one_grad(m):
    return np.zeros_like(m)


_MARGIN_FUNCTIONS: Dict[LossKind, Tuple[Callable, Callable, bool]] = {
    LossKind.SQUARED: (_squared, _squared_grad, True),
    LossKind.LOGISTIC: (_logistic, _logistic_grad, True),
    LossKind.DOUBLE_HINGE: (_double_hinge, _double_hinge_grad, True),
    LossKind.HINGE: (_hinge, _hinge_grad, False),
    LossKind.ZERO_ONE: (_zero_one, _zero_one_grad, False),
}


def _unwrap(value: np.ndarray, like) -> ArrayLike:
    return float(value) if np.ndim(like) == 0 else value


class LossSpec(BaseModel):
    """A margin loss l(z, t) = psi(t * z)"""
    model_config = ConfigDict(frozen=True)

    kind: LossKind

    @property
    def satisfies_linear_odd(self) -> bool:
        """psi(-z) - psi(z) = z, which makes the SU objective convex"""
        return _MARGIN_FUNCTIONS[self.kind][2]

    def psi(self, m: ArrayLike) -> ArrayLike:
        return _unwrap(_MARGIN_FUNCTIONS[self.kind][0](np.asarray(m, dtype=float)), m)

    def dpsi(self, m: ArrayLike) -> ArrayLike:
        return _unwrap(_MARGIN_FUNCTIONS[self.kind][1](np.asarray(m, dtype=float)), m)

    def positive(self, z: ArrayLike) -> ArrayLike:
        """l(z, +1)"""
        return self.psi(z)

    def negative(self, z: ArrayLike) -> ArrayLike:
        """l(z, -1)"""
        return self.psi(-np.asarray(z, dtype=float)) if np.ndim(z) else self.psi(-float(z))


@lru_cache(maxsize=None)
def get_loss(kind: Union[LossKind, str]) -> LossSpec:
    return LossSpec(kind=LossKind.parse(kind))


def _as_loss(spec: Union[LossSpec, LossKind, str]) -> LossSpec:
    return spec if isinstance(spec, LossSpec) else get_loss(LossKind.parse(spec))


def eval_loss(spec: Union[LossSpec, LossKind, str], z: ArrayLike, t: ArrayLike) -> ArrayLike:
    """l(z, t) = psi(t * z) for labels t in {+1, -1}"""
    spec = _as_loss(spec)
    t_arr = np.asarray(t)
    if not np.all(np.isin(t_arr, (-1, 1))):
        raise DataError("labels must be +1 or -1")
    margin = t_arr * np.asarray(z, dtype=float)
    return spec.psi(float(margin) if margin.ndim == 0 else margin)


def tilde_loss(spec: Union[LossSpec, LossKind, str], z: ArrayLike) -> ArrayLike:
    """l(z, +1) - l(z, -1); equals -z for losses satisfying the linear-odd condition"""
    spec = _as_loss(spec)
    return spec.positive(z) - spec.negative(z)


class CorrectedLosses(BaseModel):
    """Prior-weighted combinations of l(., +1) and l(., -1) used by the SU risk"""
    model_config = ConfigDict(frozen=True)

    spec: LossSpec
    pi_plus: ClassPrior

    @property
    def scale(self) -> float:
        return 1.0 / (2.0 * self.pi_plus.pi_plus - 1.0)

    def l_s(self, z: ArrayLike) -> ArrayLike:
        return self.scale * (self.spec.positive(z) - self.spec.negative(z))

    def l_u(self, z: ArrayLike) -> ArrayLike:
        pi_plus, pi_minus = self.pi_plus.pi_plus, self.pi_plus.pi_minus
        return self.scale * (-pi_minus * self.spec.positive(z) + pi_plus * self.spec.negative(z))

    def dl_s(self, z: ArrayLike) -> ArrayLike:
        z = np.asarray(z, dtype=float)
        return self.scale * (self.spec.dpsi(z) + self.spec.dpsi(-z))

    def dl_u(self, z: ArrayLike) -> ArrayLike:
        z = np.asarray(z, dtype=float)
        pi_plus, pi_minus = self.pi_plus.pi_plus, self.pi_plus.pi_minus
        return self.scale * (-pi_minus * self.spec.dpsi(z) - pi_plus * self.spec.dpsi(-z))


def corrected(spec: Union[LossSpec, LossKind, str], pi_plus: Union[ClassPrior, float],
              epsilon: Optional[float] = None) -> CorrectedLosses:
    """Build (l_s, l_u); raises DegeneratePriorError near pi_plus = 1/2"""
    prior = ClassPrior.coerce(pi_plus).require_identifiable(epsilon)
    return CorrectedLosses(spec=_as_loss(spec), pi_plus=prior)
