from su_learning.models.data_models import (
    ClassPrior,
    HiddenLabels,
    LabeledDataset,
    SUDataset,
    SUSample,
    SyntheticSpec,
    as_training_sample,
)
from su_learning.models.experiment_models import (
    DataFamily,
    ExperimentConfig,
    ExperimentKind,
    PriorMode,
    RunSummary,
    TrialResult,
)
from su_learning.models.learning_models import (
    BasisKind,
    BasisSpec,
    CVCandidate,
    CVPlan,
    CVResult,
    FitInfo,
    KMeansModel,
    LinearModel,
    LossKind,
    MPEConfig,
    PriorCase,
    PriorEstimate,
    QPProblem,
    QPSolution,
    QPStatus,
    TrainConfig,
)

__all__ = [
    "BasisKind", "BasisSpec", "CVCandidate", "CVPlan", "CVResult", "ClassPrior",
    "DataFamily", "ExperimentConfig", "ExperimentKind", "FitInfo", "HiddenLabels",
    "KMeansModel", "LabeledDataset", "LinearModel", "LossKind", "MPEConfig",
    "PriorCase", "PriorEstimate", "PriorMode", "QPProblem", "QPSolution",
    "QPStatus", "RunSummary", "SUDataset", "SUSample", "SyntheticSpec",
    "TrainConfig", "TrialResult", "as_training_sample",
]
