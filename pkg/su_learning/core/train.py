"""
SU Trainers
Basis expansion, the regularized SU objective and its three convex trainers
(squared closed form, double-hinge QP, Armijo gradient descent)
"""

import json
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from su_learning.core.losses import corrected
from su_learning.core.numkit import gaussian_kernel, median_pairwise_distance, solve_qp, solve_spd
from su_learning.core.risk import ScoreVector
from su_learning.errors import (
    DataError,
    DataFormatError,
    DivergenceError,
    NotPositiveDefiniteError,
    SingularSystemError,
    SolverError,
)
from su_learning.models.data_models import SUDataset, SUSample, as_training_sample
from su_learning.models.learning_models import (
    BasisKind,
    BasisSpec,
    FitInfo,
    LinearModel,
    LossKind,
    QPProblem,
    QPStatus,
    TrainConfig,
)

logger = logging.getLogger(__name__)

SULike = Union[SUSample, SUDataset]


# ---------------------------------------------------------------------------
# Bases and prediction
# ---------------------------------------------------------------------------

def identity_basis(d: int) -> BasisSpec:
    return BasisSpec(kind=BasisKind.IDENTITY_WITH_INTERCEPT, input_dim=d)


def default_rbf_basis(su: SULike, n_centers: int = 100, seed: int = 0,
                      bandwidth: Optional[float] = None, intercept: bool = True) -> BasisSpec:
    """Gaussian basis on up to ``n_centers`` seeded unlabeled points; median-heuristic bandwidth"""
    sample = as_training_sample(su)
    rng = np.random.default_rng(seed)
    count = min(n_centers, sample.n_u)
    centers = sample.u_points[np.sort(rng.choice(sample.n_u, count, replace=False))]
    if bandwidth is None:
        bandwidth = median_pairwise_distance(sample.u_points, seed=seed)
    return BasisSpec(kind=BasisKind.GAUSSIAN_RBF, centers=centers, bandwidth=bandwidth, intercept=intercept)


def featurize(basis: BasisSpec, X) -> np.ndarray:
    """phi(X); the last column is the constant intercept feature"""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    expected = basis.n_inputs
    if expected is not None and X.shape[1] != expected:
        raise DataError(f"basis expects {expected} input features, got {X.shape[1]}")

    if basis.kind == BasisKind.IDENTITY_WITH_INTERCEPT:
        return np.hstack([X, np.ones((X.shape[0], 1))])
    features = gaussian_kernel(X, basis.centers, basis.bandwidth)
    if basis.intercept:
        features = np.hstack([features, np.ones((X.shape[0], 1))])
    return features


def predict(model: LinearModel, X) -> np.ndarray:
    features = featurize(model.basis, X)
    if features.shape[1] != model.weights.shape[0]:
        raise DataError(f"model has {model.weights.shape[0]} weights but the basis produced {features.shape[1]} features")
    return features @ model.weights


def classify(model: LinearModel, X) -> np.ndarray:
    """sign(f(x)) with ties at zero labelled +1"""
    return np.where(predict(model, X) >= 0.0, 1, -1).astype(np.int8)


def score_sample(model: LinearModel, su: SULike) -> ScoreVector:
    sample = as_training_sample(su)
    return ScoreVector(s_scores=predict(model, sample.pooled_s()), u_scores=predict(model, sample.u_points))


# ---------------------------------------------------------------------------
# Objective
# ---------------------------------------------------------------------------

class SUObjective:
    """Regularized empirical SU risk J(w) on a fixed, featurized sample"""

    def __init__(self, features_s: np.ndarray, features_u: np.ndarray,
                 loss: LossKind, pi_plus, lam: float):
        self.features_s = features_s
        self.features_u = features_u
        self.losses = corrected(loss, pi_plus)
        self.lam = lam
        self.pi_s = self.losses.pi_plus.pi_s

    @classmethod
    def from_sample(cls, su: SULike, cfg: TrainConfig, basis: BasisSpec) -> "SUObjective":
        sample = as_training_sample(su)
        return cls(featurize(basis, sample.pooled_s()), featurize(basis, sample.u_points),
                   cfg.loss, cfg.pi_plus, cfg.lam)

    def value(self, w: np.ndarray) -> float:
        z_s = self.features_s @ w
        z_u = self.features_u @ w
        risk = self.pi_s * np.mean(self.losses.l_s(z_s)) + np.mean(self.losses.l_u(z_u))
        return float(risk + 0.5 * self.lam * (w @ w))

    def gradient(self, w: np.ndarray) -> np.ndarray:
        z_s = self.features_s @ w
        z_u = self.features_u @ w
        grad_s = self.features_s.T @ self.losses.dl_s(z_s) * (self.pi_s / z_s.shape[0])
        grad_u = self.features_u.T @ self.losses.dl_u(z_u) / z_u.shape[0]
        return grad_s + grad_u + self.lam * w


def _resolve_basis(sample: SUSample, basis: Optional[BasisSpec]) -> BasisSpec:
    return identity_basis(sample.d) if basis is None else basis


def objective(model: LinearModel, su: SULike, cfg: TrainConfig) -> float:
    """Empirical SU risk of the model under cfg.loss plus lam/2 ||w||^2"""
    return SUObjective.from_sample(su, cfg, model.basis).value(model.weights)


def objective_gradient(model: LinearModel, su: SULike, cfg: TrainConfig) -> np.ndarray:
    return SUObjective.from_sample(su, cfg, model.basis).gradient(model.weights)


def _require_loss(cfg: TrainConfig, *kinds: LossKind) -> None:
    if cfg.loss not in kinds:
        names = ", ".join(kind.value for kind in kinds)
        raise DataError(f"trainer handles loss {names}, got {cfg.loss.value}")


# ---------------------------------------------------------------------------
# Trainers
# ---------------------------------------------------------------------------

def train_squared_closed_form(su: SULike, cfg: TrainConfig,
                              basis: Optional[BasisSpec] = None) -> LinearModel:
    """w = n_U/(2 pi_+ - 1) (X_U^T X_U + 2 lam n_U I)^-1 (pi_S/n_S X_S^T 1 - 1/n_U X_U^T 1)"""
    _require_loss(cfg, LossKind.SQUARED)
    sample = as_training_sample(su)
    prior = cfg.pi_plus.require_identifiable()
    basis = _resolve_basis(sample, basis)

    features_s = featurize(basis, sample.pooled_s())
    features_u = featurize(basis, sample.u_points)
    n_s, n_u = sample.n_s, sample.n_u

    gram = features_u.T @ features_u
    gram[np.diag_indices_from(gram)] += 2.0 * cfg.lam * n_u
    rhs = (prior.pi_s / n_s) * features_s.sum(axis=0) - features_u.sum(axis=0) / n_u
    try:
        weights = n_u / (2.0 * prior.pi_plus - 1.0) * solve_spd(gram, rhs)
    except NotPositiveDefiniteError as e:
        if cfg.lam == 0:
            raise SingularSystemError("X_U^T X_U is singular at lambda=0; use lambda > 0") from e
        raise

    obj = SUObjective(features_s, features_u, cfg.loss, prior, cfg.lam)
    residual = float(np.max(np.abs(obj.gradient(weights))))
    value = obj.value(weights)
    logger.info(f"Squared-loss closed form: lambda={cfg.lam}, objective={value:.6g}, gradient={residual:.3g}")
    return LinearModel(weights=weights, basis=basis, fit_info=FitInfo(
        loss=cfg.loss, lam=cfg.lam, pi_plus=prior.pi_plus, objective=value,
        optimality_residual=residual, status="closed_form"))


def build_double_hinge_qp(su: SULike, cfg: TrainConfig,
                          basis: Optional[BasisSpec] = None) -> Tuple[QPProblem, BasisSpec]:
    """Standard-form QP over gamma = (w, xi, eta).

    xi_i bounds l(z_i, -1) and eta_i bounds l(z_i, +1) for z_i = w^T phi(x_U,i),
    through the six constraint blocks xi >= 0, xi >= 1/2 + z/2, xi >= z,
    eta >= 0, eta >= 1/2 - z/2, eta >= -z. Both slacks carry weight 1/(2 n_U),
    so each is tight at the optimum.
    """
    sample = as_training_sample(su)
    prior = cfg.pi_plus.require_identifiable()
    basis = _resolve_basis(sample, basis)

    features_s = featurize(basis, sample.pooled_s())
    X_u = featurize(basis, sample.u_points)
    n_s, n_u, b = sample.n_s, sample.n_u, X_u.shape[1]
    contrast = 2.0 * prior.pi_plus - 1.0

    P = np.zeros((b + 2 * n_u, b + 2 * n_u))
    P[:b, :b] = cfg.lam * np.eye(b)

    q = np.concatenate([
        -prior.pi_s / (2.0 * n_s * contrast) * features_s.sum(axis=0)
        + X_u.sum(axis=0) / (2.0 * n_u * contrast),
        np.full(n_u, 1.0 / (2.0 * n_u)),
        np.full(n_u, 1.0 / (2.0 * n_u)),
    ])

    zero_w = np.zeros((n_u, b))
    zero_s = np.zeros((n_u, n_u))
    eye = np.eye(n_u)
    G = np.block([
        [zero_w, -eye, zero_s],
        [0.5 * X_u, -eye, zero_s],
        [X_u, -eye, zero_s],
        [zero_w, zero_s, -eye],
        [-0.5 * X_u, zero_s, -eye],
        [-X_u, zero_s, -eye],
    ])
    h = np.concatenate([
        np.zeros(n_u), np.full(n_u, -0.5), np.zeros(n_u),
        np.zeros(n_u), np.full(n_u, -0.5), np.zeros(n_u),
    ])
    return QPProblem(P=P, q=q, G=G, h=h), basis


def train_double_hinge(su: SULike, cfg: TrainConfig,
                       basis: Optional[BasisSpec] = None) -> LinearModel:
    _require_loss(cfg, LossKind.DOUBLE_HINGE)
    if cfg.lam <= 0:
        raise DataError("double-hinge training needs lambda > 0")
    problem, basis = build_double_hinge_qp(su, cfg, basis)
    solution = solve_qp(problem, tol=cfg.qp_tol, max_iter=cfg.qp_max_iter)
    if solution.status != QPStatus.OPTIMAL:
        raise SolverError("double-hinge QP did not reach an optimum", status=solution.status.value)

    b = problem.n - 2 * as_training_sample(su).n_u
    weights = solution.gamma[:b]
    value = objective(LinearModel(weights=weights, basis=basis), su, cfg)
    logger.info(f"Double-hinge QP: lambda={cfg.lam}, objective={value:.6g}, "
                f"kkt={solution.kkt_residual:.3g}, iterations={solution.iterations}")
    return LinearModel(weights=weights, basis=basis, fit_info=FitInfo(
        loss=cfg.loss, lam=cfg.lam, pi_plus=cfg.pi_plus.pi_plus, objective=value,
        optimality_residual=solution.kkt_residual, iterations=solution.iterations,
        status=solution.status.value))


def train_gradient(su: SULike, cfg: TrainConfig, basis: Optional[BasisSpec] = None,
                   w0: Optional[np.ndarray] = None) -> LinearModel:
    """Full-batch gradient descent with Armijo backtracking on J(w).

    Each epoch starts its line search from twice the last accepted step.
    Stops when the gradient inf-norm reaches cfg.tol or after cfg.max_epochs.
    """
    _require_loss(cfg, LossKind.LOGISTIC, LossKind.SQUARED)
    sample = as_training_sample(su)
    cfg.pi_plus.require_identifiable()
    basis = _resolve_basis(sample, basis)
    obj = SUObjective.from_sample(sample, cfg, basis)

    w = np.zeros(obj.features_u.shape[1]) if w0 is None else np.array(w0, dtype=float)
    value = obj.value(w)
    if not np.isfinite(value):
        raise DivergenceError("objective is not finite at the starting point")
    grad = obj.gradient(w)
    step = cfg.step_size
    trace = [value]
    status = "max_iter"
    epoch = 0

    for epoch in range(1, cfg.max_epochs + 1):
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm <= cfg.tol:
            status = "optimal"
            epoch -= 1
            break
        decrease = cfg.armijo_c * float(grad @ grad)
        t = step
        while True:
            candidate = w - t * grad
            candidate_value = obj.value(candidate)
            if np.isfinite(candidate_value) and candidate_value <= value - t * decrease:
                break
            t *= 0.5
            if t < 1e-20:
                raise DivergenceError(f"line search failed at epoch {epoch} (objective={value:.6g})")
        w, value = candidate, candidate_value
        grad = obj.gradient(w)
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(f"gradient became non-finite at epoch {epoch}")
        trace.append(value)
        step = 2.0 * t
    else:
        if float(np.max(np.abs(grad))) <= cfg.tol:
            status = "optimal"

    residual = float(np.max(np.abs(grad)))
    if status != "optimal":
        logger.warning(f"Gradient descent hit max_epochs={cfg.max_epochs} with gradient {residual:.3g}")
    logger.info(f"Gradient descent ({cfg.loss.value}): lambda={cfg.lam}, objective={value:.6g}, "
                f"gradient={residual:.3g}, epochs={epoch}")
    return LinearModel(weights=w, basis=basis, fit_info=FitInfo(
        loss=cfg.loss, lam=cfg.lam, pi_plus=cfg.pi_plus.pi_plus, objective=value,
        optimality_residual=residual, iterations=epoch, status=status, objective_trace=trace))


def train_logistic(su: SULike, cfg: TrainConfig, basis: Optional[BasisSpec] = None) -> LinearModel:
    _require_loss(cfg, LossKind.LOGISTIC)
    return train_gradient(su, cfg, basis)


def train(su: SULike, cfg: TrainConfig, basis: Optional[BasisSpec] = None) -> LinearModel:
    """Dispatch to the trainer for cfg.loss"""
    if cfg.loss == LossKind.SQUARED:
        return train_squared_closed_form(su, cfg, basis)
    if cfg.loss == LossKind.DOUBLE_HINGE:
        return train_double_hinge(su, cfg, basis)
    if cfg.loss == LossKind.LOGISTIC:
        return train_logistic(su, cfg, basis)
    raise DataError(f"no trainer for loss {cfg.loss.value}; the SU objective is not convex for it")


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

def model_to_json(model: LinearModel) -> str:
    return json.dumps(model.to_dict(), indent=2)


def model_from_json(text: str) -> LinearModel:
    try:
        return LinearModel.from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid model JSON: {e.msg}", e.lineno) from e
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"invalid model file: {e}") from e


def save_model(model: LinearModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model_to_json(model), encoding="utf-8")
    logger.info(f"Model saved: {path}")
    return path


def load_model(path: Union[str, Path]) -> LinearModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {path}")
    return model_from_json(path.read_text(encoding="utf-8"))
