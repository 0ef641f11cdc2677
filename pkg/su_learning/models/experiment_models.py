"""
Experiment Models for SU Learning
Experiment configuration, per-trial records and run summaries
"""

from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from su_learning.config import get_settings
from su_learning.models.learning_models import LossKind


class ExperimentKind(str, Enum):
    NU_SWEEP = "nu_sweep"
    PRIOR_CURVE = "prior_curve"
    BENCHMARK = "benchmark"
    SINGLE_TRAIN = "single_train"


class PriorMode(str, Enum):
    GIVEN = "given"
    ESTIMATE_CASE2 = "estimate_case2"
    ESTIMATE_CASE3 = "estimate_case3"


class DataFamily(str, Enum):
    GAUSSIAN = "gaussian"
    BANANA = "banana"


class ExperimentConfig(BaseModel):
    """JSON-configurable experiment; every field can be overridden from the command line"""
    kind: ExperimentKind = ExperimentKind.SINGLE_TRAIN

    # Data source
    family: DataFamily = DataFamily.GAUSSIAN
    input_path: Optional[Path] = None  # labeled LIBSVM file instead of a synthetic family
    d: int = Field(default=2, ge=1)
    separation: float = Field(default=3.0, ge=0.0)  # distance between Gaussian class means
    banana_noise: float = Field(default=0.15, ge=0.0)

    # Class prior
    pi_plus: float = Field(default=0.7, gt=0.0, lt=1.0)
    pi_plus_grid: List[float] = Field(default_factory=lambda: [0.7])
    prior_mode: PriorMode = PriorMode.GIVEN

    # Sample sizes
    n_s: int = Field(default=200, ge=1)
    n_u: int = Field(default=200, ge=1)
    n_u_grid: List[int] = Field(default_factory=lambda: [200, 400, 800, 1600])
    sizes: List[int] = Field(default_factory=lambda: [200, 400, 800, 1600])
    n_test: int = Field(default_factory=lambda: get_settings().test_set_size, ge=1)
    protocol_test_size: int = Field(default=100, ge=1)

    # Training; losses=None picks the experiment's default trainers
    losses: Optional[List[LossKind]] = None
    lambda_grid: List[float] = Field(default_factory=lambda: [1e-1, 1e-4, 1e-7])
    lam: Optional[float] = Field(default=None, ge=0.0)  # fixed lambda skips cross-validation
    cv_folds: int = Field(default=5, ge=2)
    basis: Literal["linear", "rbf"] = "linear"
    n_centers: int = Field(default=100, ge=1)

    # Execution
    trials: int = Field(default=50, ge=1)
    seed: int = 0
    n_jobs: Optional[int] = None
    output: Optional[Path] = None

    @field_validator("losses", mode="before")
    @classmethod
    def _parse_losses(cls, value):
        if value is None:
            return None
        if isinstance(value, (str, LossKind)):
            value = [value]
        losses = [LossKind.parse(v) for v in value]
        if not losses:
            raise ValueError("losses must name at least one trainer")
        return losses

    @field_validator("pi_plus_grid")
    @classmethod
    def _validate_priors(cls, value: List[float]) -> List[float]:
        if not value or any(not 0.0 < p < 1.0 for p in value):
            raise ValueError("pi_plus_grid must hold values in (0, 1)")
        return value

    @field_validator("n_u_grid", "sizes")
    @classmethod
    def _validate_sizes(cls, value: List[int]) -> List[int]:
        if not value or any(n < 2 for n in value):
            raise ValueError("size grids must hold integers >= 2")
        return value

    def resolved_losses(self) -> List[LossKind]:
        """Trainers this run uses; the benchmark compares squared and double-hinge by default"""
        if self.losses is not None:
            return list(self.losses)
        if self.kind == ExperimentKind.BENCHMARK:
            return [LossKind.SQUARED, LossKind.DOUBLE_HINGE]
        return [LossKind.SQUARED]

    def require_inputs(self) -> None:
        """Referenced paths must exist when the experiment starts"""
        if self.input_path is not None and not Path(self.input_path).exists():
            raise FileNotFoundError(f"input file not found: {self.input_path}")


class TrialResult(BaseModel):
    """Outcome of one trial; failed trials carry the error and no metrics"""
    trial: int
    status: str = "ok"  # ok, failed
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    error: Optional[str] = None
    duration_seconds: Optional[float] = None


class RunSummary(BaseModel):
    """Structured record of one experiment run"""
    kind: ExperimentKind
    config: Dict[str, Any] = Field(default_factory=dict)
    trials: int = 0
    failures: int = 0
    failed_trials: List[int] = Field(default_factory=list)
    metrics: Dict[str, Any] = Field(default_factory=dict)

    # Timestamps
    started_at: datetime = Field(default_factory=datetime.now)
    ended_at: Optional[datetime] = None
    duration_seconds: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")
