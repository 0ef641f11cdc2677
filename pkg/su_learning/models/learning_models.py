"""
Learning Models for SU Learning
Loss kinds, bases, linear models, training and solver configuration, prior estimates
"""

from enum import Enum
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from su_learning.models.data_models import ClassPrior, FrozenArrayModel, readonly_array


class LossKind(str, Enum):
    """Margin losses; values are the command-line names"""
    SQUARED = "squared"
    LOGISTIC = "logistic"
    DOUBLE_HINGE = "double-hinge"
    HINGE = "hinge"
    ZERO_ONE = "zero-one"

    @classmethod
    def parse(cls, value: Any) -> "LossKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("_", "-"))
        except ValueError:
            names = ", ".join(kind.value for kind in cls)
            raise ValueError(f"unknown loss {value!r}; expected one of {names}") from None


TRAINABLE_LOSSES = (LossKind.SQUARED, LossKind.LOGISTIC, LossKind.DOUBLE_HINGE)


class BasisKind(str, Enum):
    IDENTITY_WITH_INTERCEPT = "identity_with_intercept"
    GAUSSIAN_RBF = "gaussian_rbf"


class BasisSpec(FrozenArrayModel):
    """Basis functions phi; the intercept is always a constant output column"""
    kind: BasisKind = BasisKind.IDENTITY_WITH_INTERCEPT
    centers: Optional[np.ndarray] = None
    bandwidth: Optional[float] = None
    intercept: bool = True  # only consulted for gaussian_rbf
    input_dim: Optional[int] = None  # recorded at training time for identity bases

    @field_validator("centers", mode="before")
    @classmethod
    def _validate_centers(cls, value):
        if value is None:
            return None
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError(f"centers must be a non-empty matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("centers contain non-finite entries")
        return readonly_array(arr)

    @model_validator(mode="after")
    def _validate_kind(self):
        if self.kind == BasisKind.GAUSSIAN_RBF:
            if self.centers is None:
                raise ValueError("gaussian_rbf basis requires centers")
            if self.bandwidth is None or not self.bandwidth > 0:
                raise ValueError("gaussian_rbf basis requires a positive bandwidth")
        return self

    @property
    def n_inputs(self) -> Optional[int]:
        if self.kind == BasisKind.GAUSSIAN_RBF:
            return int(self.centers.shape[1])
        return self.input_dim

    @property
    def n_outputs(self) -> Optional[int]:
        if self.kind == BasisKind.GAUSSIAN_RBF:
            return int(self.centers.shape[0]) + int(self.intercept)
        return None if self.input_dim is None else self.input_dim + 1

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind == BasisKind.GAUSSIAN_RBF:
            data.update(centers=self.centers.tolist(), bandwidth=self.bandwidth,
                        intercept=self.intercept)
        elif self.input_dim is not None:
            data["input_dim"] = self.input_dim
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BasisSpec":
        return cls(**data)


class FitInfo(BaseModel):
    """Diagnostics attached to a trained model"""
    loss: LossKind
    lam: float
    pi_plus: float
    objective: float
    optimality_residual: float  # gradient inf-norm, or QP KKT residual for double-hinge
    iterations: int = 0
    status: str = "optimal"  # optimal, max_iter, closed_form
    objective_trace: List[float] = Field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class LinearModel(FrozenArrayModel):
    """f(x) = w^T phi(x) with the intercept absorbed in phi"""
    weights: np.ndarray
    basis: BasisSpec
    fit_info: Optional[FitInfo] = None

    @field_validator("weights", mode="before")
    @classmethod
    def _validate_weights(cls, value):
        arr = np.atleast_1d(np.asarray(value, dtype=float))
        if arr.ndim != 1:
            raise ValueError("weights must be a vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("weights contain non-finite entries")
        return readonly_array(arr)

    @model_validator(mode="after")
    def _validate_size(self):
        expected = self.basis.n_outputs
        if expected is not None and expected != self.weights.shape[0]:
            raise ValueError(f"basis produces {expected} features but there are {self.weights.shape[0]} weights")
        return self

    def scaled(self, factor: float) -> "LinearModel":
        return LinearModel(weights=self.weights * factor, basis=self.basis)

    def to_dict(self) -> Dict[str, Any]:
        data = {"basis": self.basis.to_dict(), "weights": self.weights.tolist()}
        if self.fit_info is not None:
            data["fit_info"] = self.fit_info.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LinearModel":
        fit_info = data.get("fit_info")
        return cls(weights=data["weights"], basis=BasisSpec.from_dict(data["basis"]),
                   fit_info=FitInfo(**fit_info) if fit_info else None)


class TrainConfig(BaseModel):
    """Everything a trainer needs besides the data"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    loss: LossKind = LossKind.SQUARED
    lam: float = Field(default=1e-4, ge=0.0, alias="lambda")
    pi_plus: ClassPrior

    # Gradient path
    step_size: float = Field(default=1.0, gt=0.0)
    max_epochs: int = Field(default=10_000, ge=1)
    tol: float = Field(default=1e-6, gt=0.0)
    armijo_c: float = Field(default=1e-4, gt=0.0, lt=1.0)

    # QP path; None falls back to settings
    qp_tol: Optional[float] = Field(default=None, gt=0.0)
    qp_max_iter: Optional[int] = Field(default=None, ge=1)

    seed: int = 0

    @field_validator("loss", mode="before")
    @classmethod
    def _parse_loss(cls, value):
        return LossKind.parse(value)

    @field_validator("pi_plus", mode="before")
    @classmethod
    def _parse_prior(cls, value):
        if isinstance(value, (int, float)):
            return ClassPrior(pi_plus=value)
        return value

    def replace(self, **updates) -> "TrainConfig":
        """Copy with validated updates"""
        data = self.model_dump()
        data.update(updates)
        return TrainConfig.model_validate(data)


class QPStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


class QPProblem(FrozenArrayModel):
    """min 1/2 g^T P g + q^T g  subject to  G g <= h"""
    P: np.ndarray
    q: np.ndarray
    G: np.ndarray
    h: np.ndarray

    @field_validator("P", "G", mode="before")
    @classmethod
    def _validate_matrix(cls, value, info):
        arr = np.atleast_2d(np.asarray(value, dtype=float))
        if arr.ndim != 2:
            raise ValueError(f"{info.field_name} must be a matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{info.field_name} contains non-finite entries")
        return readonly_array(arr)

    @field_validator("q", "h", mode="before")
    @classmethod
    def _validate_vector(cls, value, info):
        arr = np.atleast_1d(np.asarray(value, dtype=float))
        if arr.ndim != 1:
            raise ValueError(f"{info.field_name} must be a vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{info.field_name} contains non-finite entries")
        return readonly_array(arr)

    @model_validator(mode="after")
    def _validate_shapes(self):
        n = self.q.shape[0]
        if self.P.shape != (n, n):
            raise ValueError(f"P has shape {self.P.shape}, expected ({n}, {n})")
        if self.G.shape != (self.h.shape[0], n):
            raise ValueError(f"G has shape {self.G.shape}, expected ({self.h.shape[0]}, {n})")
        scale = max(1.0, float(np.max(np.abs(self.P))))
        if not np.allclose(self.P, self.P.T, rtol=0.0, atol=1e-10 * scale):
            raise ValueError("P must be symmetric")
        return self

    @property
    def n(self) -> int:
        return int(self.q.shape[0])

    @property
    def m(self) -> int:
        return int(self.h.shape[0])

    def objective(self, gamma: np.ndarray) -> float:
        return float(0.5 * gamma @ self.P @ gamma + self.q @ gamma)


class QPSolution(FrozenArrayModel):
    gamma: np.ndarray
    objective: float
    kkt_residual: float
    status: QPStatus
    dual: Optional[np.ndarray] = None
    iterations: int = 0
    duality_gap: float = float("nan")


class PriorCase(str, Enum):
    """How the recovered larger-class prior is assigned to the positive class"""
    EXACT_GIVEN = "exact_given"
    ASSUME_PLUS_LARGER = "assume_plus_larger"
    SIGN_KNOWN_MINUS_LARGER = "sign_known_minus_larger"


class MPEConfig(BaseModel):
    """Kernel mixture proportion estimator settings"""
    model_config = ConfigDict(frozen=True)

    bandwidth: Optional[float] = Field(default=None, gt=0.0)  # None: median heuristic
    lambda_left: float = Field(default=2.0, ge=1.0)
    grid_size: int = Field(default=60, ge=5)
    kappa_max: float = Field(default=0.995, gt=0.0, lt=1.0)
    n_atoms: int = Field(default=200, ge=2)
    max_bandwidth_points: int = Field(default=1_000, ge=2)
    detection_z: float = Field(default=3.0, ge=0.0)
    method: Literal["two_sided", "one_sided"] = "two_sided"
    seed: int = 0

    @property
    def kappa_min(self) -> float:
        """Smallest proportion searched; lambda_left = 1/(1 - kappa_min)"""
        return 1.0 - 1.0 / self.lambda_left


class PriorEstimate(BaseModel):
    pi_s_hat: float = Field(ge=0.5, le=1.0)
    pi_plus_hat: float = Field(ge=0.0, le=1.0)
    case: PriorCase
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class CVPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(default=5, ge=2)
    lambda_grid: List[float] = Field(default_factory=lambda: [1e-1, 1e-4, 1e-7])
    losses: List[LossKind] = Field(default_factory=lambda: [LossKind.SQUARED])
    seed: int = 0
    n_jobs: Optional[int] = None

    @field_validator("lambda_grid")
    @classmethod
    def _validate_grid(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("lambda_grid must not be empty")
        if any(lam < 0 or not np.isfinite(lam) for lam in value):
            raise ValueError("every lambda must be finite and >= 0")
        return [float(lam) for lam in value]

    @field_validator("losses", mode="before")
    @classmethod
    def _parse_losses(cls, value):
        losses = [LossKind.parse(v) for v in value]
        if not losses:
            raise ValueError("losses must not be empty")
        bad = [loss.value for loss in losses if loss not in TRAINABLE_LOSSES]
        if bad:
            raise ValueError(f"losses {bad} have no trainer")
        return losses


class CVCandidate(BaseModel):
    index: int
    loss: LossKind
    lam: float
    mean_risk: float
    fold_risks: List[float] = Field(default_factory=list)


class CVResult(BaseModel):
    best: CVCandidate
    best_config: TrainConfig
    candidates: List[CVCandidate]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best": self.best.model_dump(mode="json"),
            "candidates": [c.model_dump(mode="json") for c in self.candidates],
        }


class KMeansModel(FrozenArrayModel):
    """Two-cluster nearest-center model"""
    centers: np.ndarray
    positive_index: int = Field(ge=0, le=1)
    inertia_trace: List[float] = Field(default_factory=list)
    n_iter: int = 0

    @field_validator("centers", mode="before")
    @classmethod
    def _validate_centers(cls, value):
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != 2:
            raise ValueError(f"centers must have shape (2, d), got {arr.shape}")
        return readonly_array(arr)

    def assign(self, points: np.ndarray) -> np.ndarray:
        """Nearest center index; ties go to center 0"""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.centers.shape[1]:
            raise ValueError(f"expected points of dimension {self.centers.shape[1]}")
        sq = ((points[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=2)
        return np.argmin(sq, axis=1)

    def classify(self, points: np.ndarray) -> np.ndarray:
        return np.where(self.assign(points) == self.positive_index, 1, -1).astype(np.int8)
