"""
Data Models for SU Learning
Labeled data, SU samples, class priors and synthetic data specifications
"""

from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from su_learning.errors import DegeneratePriorError, InvalidPriorError


def readonly_array(value, dtype=float) -> np.ndarray:
    """Copy into a contiguous array that cannot be modified in place"""
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")


def _check_signed_labels(arr: np.ndarray, name: str) -> np.ndarray:
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.all(np.isin(arr, (-1, 1))):
        raise ValueError(f"every entry of {name} must be +1 or -1")
    return readonly_array(arr, dtype=np.int8)


class FrozenArrayModel(BaseModel):
    """Base class for immutable models holding numpy arrays"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class LabeledDataset(FrozenArrayModel):
    """Feature matrix with labels in {+1, -1}"""
    features: np.ndarray
    labels: np.ndarray

    @field_validator("features", mode="before")
    @classmethod
    def _validate_features(cls, value):
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"features must be an n x d matrix with n, d >= 1, got shape {arr.shape}")
        _check_finite(arr, "features")
        return readonly_array(arr)

    @field_validator("labels", mode="before")
    @classmethod
    def _validate_labels(cls, value):
        return _check_signed_labels(np.asarray(value), "labels")

    @model_validator(mode="after")
    def _validate_lengths(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels")
        return self

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    def positive_fraction(self) -> float:
        return float(np.mean(self.labels == 1))

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=int)
        return LabeledDataset(features=self.features[indices], labels=self.labels[indices])


class HiddenLabels(FrozenArrayModel):
    """Ground truth kept next to an SU sample for evaluation only"""
    s_labels: np.ndarray
    u_labels: np.ndarray

    @field_validator("s_labels", "u_labels", mode="before")
    @classmethod
    def _validate(cls, value, info):
        return _check_signed_labels(np.asarray(value), info.field_name)


class SUSample(FrozenArrayModel):
    """Similar pairs plus unlabeled points: the only view trainers ever receive.

    s_pairs has shape (n_S, 2, d); pooled_s() interleaves members as
    (pair 0 left, pair 0 right, pair 1 left, ...).
    """
    s_pairs: np.ndarray
    u_points: np.ndarray

    @field_validator("s_pairs", mode="before")
    @classmethod
    def _validate_pairs(cls, value):
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 3 or arr.shape[1] != 2 or arr.shape[0] < 1 or arr.shape[2] < 1:
            raise ValueError(f"s_pairs must have shape (n_S >= 1, 2, d), got {arr.shape}")
        _check_finite(arr, "s_pairs")
        return readonly_array(arr)

    @field_validator("u_points", mode="before")
    @classmethod
    def _validate_points(cls, value):
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError(f"u_points must have shape (n_U >= 1, d), got {arr.shape}")
        _check_finite(arr, "u_points")
        return readonly_array(arr)

    @model_validator(mode="after")
    def _validate_dimensions(self):
        if self.s_pairs.shape[2] != self.u_points.shape[1]:
            raise ValueError(
                f"pair dimension {self.s_pairs.shape[2]} != unlabeled dimension {self.u_points.shape[1]}")
        return self

    @property
    def n_s(self) -> int:
        return int(self.s_pairs.shape[0])

    @property
    def n_u(self) -> int:
        return int(self.u_points.shape[0])

    @property
    def d(self) -> int:
        return int(self.u_points.shape[1])

    def pooled_s(self) -> np.ndarray:
        """All 2 n_S pair members, interleaved"""
        return self.s_pairs.reshape(-1, self.d)

    def subset(self, pair_indices: Sequence[int], u_indices: Sequence[int]) -> "SUSample":
        return SUSample(s_pairs=self.s_pairs[np.asarray(pair_indices, dtype=int)],
                        u_points=self.u_points[np.asarray(u_indices, dtype=int)])


class SUDataset(FrozenArrayModel):
    """An SU sample plus optional hidden labels (never passed to trainers)"""
    s_pairs: np.ndarray
    u_points: np.ndarray
    hidden_labels: Optional[HiddenLabels] = None

    @model_validator(mode="before")
    @classmethod
    def _validate_sample(cls, data):
        if isinstance(data, dict):
            sample = SUSample(s_pairs=data.get("s_pairs"), u_points=data.get("u_points"))
            data = {**data, "s_pairs": sample.s_pairs, "u_points": sample.u_points}
        return data

    @model_validator(mode="after")
    def _validate_labels(self):
        hidden = self.hidden_labels
        if hidden is not None and (hidden.s_labels.shape[0] != self.s_pairs.shape[0]
                                   or hidden.u_labels.shape[0] != self.u_points.shape[0]):
            raise ValueError("hidden label counts do not match the sample")
        return self

    @property
    def n_s(self) -> int:
        return int(self.s_pairs.shape[0])

    @property
    def n_u(self) -> int:
        return int(self.u_points.shape[0])

    @property
    def d(self) -> int:
        return int(self.u_points.shape[1])

    @property
    def sample(self) -> SUSample:
        return SUSample(s_pairs=self.s_pairs, u_points=self.u_points)


def as_training_sample(data: Union[SUSample, SUDataset]) -> SUSample:
    """Strip hidden labels; trainers call this on every input"""
    if isinstance(data, SUDataset):
        return data.sample
    if isinstance(data, SUSample):
        return data
    raise TypeError(f"expected SUSample or SUDataset, got {type(data).__name__}")


class ClassPrior(BaseModel):
    """Positive class prior pi_plus in (0, 1)"""
    model_config = ConfigDict(frozen=True)

    pi_plus: float

    @field_validator("pi_plus")
    @classmethod
    def _validate(cls, value: float) -> float:
        if not np.isfinite(value) or not 0.0 < value < 1.0:
            raise ValueError(f"pi_plus must lie in (0, 1), got {value}")
        return float(value)

    @classmethod
    def coerce(cls, value: Union["ClassPrior", float]) -> "ClassPrior":
        if isinstance(value, ClassPrior):
            return value
        try:
            return cls(pi_plus=value)
        except ValidationError as e:
            raise InvalidPriorError(f"invalid class prior {value!r}: pi_plus must lie in (0, 1)") from e

    @property
    def pi_minus(self) -> float:
        return 1.0 - self.pi_plus

    @property
    def pi_s(self) -> float:
        """Probability that two i.i.d. points share a class"""
        return self.pi_plus ** 2 + self.pi_minus ** 2

    @property
    def pi_d(self) -> float:
        return 2.0 * self.pi_plus * self.pi_minus

    def require_identifiable(self, epsilon: Optional[float] = None) -> "ClassPrior":
        """Reject priors inside the guard band around one half"""
        if epsilon is None:
            from su_learning.config import get_settings
            epsilon = get_settings().epsilon_prior
        if abs(2.0 * self.pi_plus - 1.0) < epsilon:
            raise DegeneratePriorError(
                f"pi_plus={self.pi_plus} is within {epsilon} of 1/2; the SU risk estimator is undefined there")
        return self


class SyntheticSpec(FrozenArrayModel):
    """Two Gaussian classes sharing one covariance matrix"""
    mean_plus: np.ndarray
    mean_minus: np.ndarray
    covariance: np.ndarray
    pi_plus: ClassPrior
    seed: int = 0

    @field_validator("mean_plus", "mean_minus", mode="before")
    @classmethod
    def _validate_mean(cls, value, info):
        arr = np.atleast_1d(np.asarray(value, dtype=float))
        if arr.ndim != 1:
            raise ValueError(f"{info.field_name} must be a vector")
        _check_finite(arr, info.field_name)
        return readonly_array(arr)

    @field_validator("covariance", mode="before")
    @classmethod
    def _validate_covariance(cls, value):
        arr = np.atleast_2d(np.asarray(value, dtype=float))
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("covariance must be square")
        _check_finite(arr, "covariance")
        if not np.allclose(arr, arr.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        return readonly_array(arr)

    @field_validator("pi_plus", mode="before")
    @classmethod
    def _validate_prior(cls, value):
        return value if isinstance(value, ClassPrior) else ClassPrior(pi_plus=value)

    @model_validator(mode="after")
    def _validate_shapes(self):
        d = self.mean_plus.shape[0]
        if self.mean_minus.shape[0] != d or self.covariance.shape[0] != d:
            raise ValueError("means and covariance must share one dimension")
        return self

    @property
    def d(self) -> int:
        return int(self.mean_plus.shape[0])

    @classmethod
    def isotropic(cls, d: int, separation: float, pi_plus: float,
                  seed: int = 0, scale: float = 1.0) -> "SyntheticSpec":
        """Means at +/- separation/2 along the first axis, covariance scale * I"""
        offset = np.zeros(d)
        offset[0] = separation / 2.0
        return cls(mean_plus=offset, mean_minus=-offset, covariance=scale * np.eye(d),
                   pi_plus=pi_plus, seed=seed)

    def with_seed(self, seed: int) -> "SyntheticSpec":
        return self.model_copy(update={"seed": int(seed)})

    def with_prior(self, pi_plus: float) -> "SyntheticSpec":
        return self.model_copy(update={"pi_plus": ClassPrior(pi_plus=pi_plus)})
