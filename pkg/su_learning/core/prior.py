"""
Class-Prior Estimation
Kernel mean embedding mixture proportion estimation between unlabeled points
and pooled similar-pair members, and the inversion pi_S -> pi_plus
"""

import logging
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from sklearn.preprocessing import KernelCenterer

from su_learning.core.numkit import gaussian_kernel, median_pairwise_distance, solve_qp
from su_learning.errors import DataError, DegenerateKernelError, EmptyInputError
from su_learning.models.data_models import SUDataset, SUSample, as_training_sample
from su_learning.models.learning_models import (
    MPEConfig,
    PriorCase,
    PriorEstimate,
    QPProblem,
    QPStatus,
)

logger = logging.getLogger(__name__)

# Smallest proportion searched when the mixture is the pooled similar sample
REVERSE_KAPPA_MIN = 0.01
MPE_QP_TOL = 1e-9
MPE_QP_MAX_ITER = 200


def _as_points(points, name: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise EmptyInputError(f"{name} must be a non-empty point matrix")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite entries")
    return arr


def _check_pair(mixture: np.ndarray, component: np.ndarray) -> None:
    if mixture.shape[1] != component.shape[1]:
        raise DataError(f"samples have different dimensions ({mixture.shape[1]} vs {component.shape[1]})")
    merged = np.vstack([mixture, component])
    if np.all(np.ptp(merged, axis=0) == 0):
        raise DegenerateKernelError("all points are identical; the kernel matrix is degenerate")


def resolve_bandwidth(mixture: np.ndarray, component: np.ndarray, cfg: MPEConfig) -> float:
    if cfg.bandwidth is not None:
        return cfg.bandwidth
    merged = np.vstack([mixture, component])
    return median_pairwise_distance(merged, max_points=cfg.max_bandwidth_points, seed=cfg.seed)


class _HullDistance:
    """Distance from lam*mu_F + (1 - lam)*mu_H to the convex hull of atom embeddings.

    The simplex weights over m atoms are written alpha = E a + e_m with
    E = [I; -1^T], which leaves the box a >= 0, 1^T a <= 1 as the only
    constraints.
    """

    def __init__(self, mixture: np.ndarray, component: np.ndarray, atoms: np.ndarray, bandwidth: float):
        K_atoms = gaussian_kernel(atoms, atoms, bandwidth)
        self.mean_af = gaussian_kernel(atoms, mixture, bandwidth).mean(axis=1)
        self.mean_ah = gaussian_kernel(atoms, component, bandwidth).mean(axis=1)
        self.ff = float(gaussian_kernel(mixture, mixture, bandwidth).mean())
        self.hh = float(gaussian_kernel(component, component, bandwidth).mean())
        self.fh = float(gaussian_kernel(mixture, component, bandwidth).mean())

        m = atoms.shape[0]
        self.m = m
        self.K_last = K_atoms[:, -1]
        self.k_mm = float(K_atoms[-1, -1])
        if m > 1:
            E = np.vstack([np.eye(m - 1), -np.ones((1, m - 1))])
            P = 2.0 * E.T @ K_atoms @ E
            self.E = E
            self.P = 0.5 * (P + P.T)
            self.G = np.vstack([-np.eye(m - 1), np.ones((1, m - 1))])
            self.h = np.concatenate([np.zeros(m - 1), [1.0]])
        self.solver_failures = 0

    @property
    def embedding_gap(self) -> float:
        """||mu_F - mu_H|| in the kernel feature space"""
        return float(np.sqrt(max(self.ff - 2.0 * self.fh + self.hh, 0.0)))

    def __call__(self, lam: float) -> float:
        b = lam * self.mean_af + (1.0 - lam) * self.mean_ah
        c = lam ** 2 * self.ff + 2.0 * lam * (1.0 - lam) * self.fh + (1.0 - lam) ** 2 * self.hh
        const = self.k_mm - 2.0 * b[-1] + c
        if self.m == 1:
            return float(np.sqrt(max(const, 0.0)))

        q = 2.0 * self.E.T @ (self.K_last - b)
        solution = solve_qp(QPProblem(P=self.P, q=q, G=self.G, h=self.h),
                            tol=MPE_QP_TOL, max_iter=MPE_QP_MAX_ITER)
        if solution.status != QPStatus.OPTIMAL:
            self.solver_failures += 1
        return float(np.sqrt(max(solution.objective + const, 0.0)))


def _unbiased_self_mean(mean_with_diagonal: float, n: int) -> float:
    # k(x, x) = 1 for the Gaussian kernel
    if n < 2:
        return mean_with_diagonal
    return (n * mean_with_diagonal - 1.0) / (n - 1)


def _identity_test(mixture: np.ndarray, component: np.ndarray, distance: _HullDistance,
                   bandwidth: float, cfg: MPEConfig) -> Tuple[float, float]:
    """Unbiased MMD^2 between the samples and its standard deviation when they share a distribution.

    Under the null MMD^2 behaves like rho * sum_l lambda_l (chi2_1 - 1) with
    rho = 1/n1 + 1/n2 and lambda_l the eigenvalues of the centred kernel, so
    its sd is rho * sqrt(2 * sum lambda_l^2). sum lambda_l^2 is the mean
    squared entry of the centred Gram matrix of a merged subsample.
    """
    n1, n2 = mixture.shape[0], component.shape[0]
    mmd2 = (_unbiased_self_mean(distance.ff, n1) + _unbiased_self_mean(distance.hh, n2)
            - 2.0 * distance.fh)

    merged = np.vstack([mixture, component])
    if merged.shape[0] > cfg.max_bandwidth_points:
        rng = np.random.default_rng([cfg.seed, 1])
        merged = merged[rng.choice(merged.shape[0], cfg.max_bandwidth_points, replace=False)]
    centred = KernelCenterer().fit_transform(gaussian_kernel(merged, merged, bandwidth))
    null_sd = (1.0 / n1 + 1.0 / n2) * np.sqrt(2.0 * np.mean(centred ** 2))
    return float(mmd2), float(null_sd)


def estimate_mixture_proportion(mixture, component, cfg: Optional[MPEConfig] = None,
                                kappa_range: Optional[Tuple[float, float]] = None,
                                bandwidth: Optional[float] = None) -> Tuple[float, Dict[str, Any]]:
    """Largest kappa with mixture = kappa * component + (1 - kappa) * rest.

    Scans kappa over an even grid, maps it to lam = 1/(1 - kappa) and tracks the
    distance curve d(lam). The estimate is the first grid point whose right-hand
    slope exceeds half of ||mu_F - mu_H||. When the unbiased MMD^2 between the
    samples is within detection_z null standard deviations of zero the
    proportion is 1.
    """
    cfg = cfg or MPEConfig()
    mixture = _as_points(mixture, "mixture")
    component = _as_points(component, "component")
    _check_pair(mixture, component)

    kappa_min, kappa_max = kappa_range or (cfg.kappa_min, cfg.kappa_max)
    if not 0.0 <= kappa_min < kappa_max < 1.0:
        raise DataError(f"invalid kappa range ({kappa_min}, {kappa_max})")
    bandwidth = bandwidth or resolve_bandwidth(mixture, component, cfg)

    rng = np.random.default_rng(cfg.seed)
    n_atoms = min(cfg.n_atoms, mixture.shape[0])
    atoms = mixture[np.sort(rng.choice(mixture.shape[0], n_atoms, replace=False))]
    distance = _HullDistance(mixture, component, atoms, bandwidth)

    gap = distance.embedding_gap
    mmd2, null_sd = _identity_test(mixture, component, distance, bandwidth, cfg)
    diagnostics: Dict[str, Any] = {
        "bandwidth": bandwidth,
        "embedding_gap": gap,
        "mmd2_unbiased": mmd2,
        "null_sd": null_sd,
        "n_atoms": n_atoms,
    }
    if mmd2 <= cfg.detection_z * null_sd:
        logger.debug(f"Samples indistinguishable (mmd2={mmd2:.4g}, null sd={null_sd:.4g}); proportion is 1")
        diagnostics.update(kappa=1.0, detected_identical=True)
        return 1.0, diagnostics

    kappas = np.linspace(kappa_min, kappa_max, cfg.grid_size)
    lams = 1.0 / (1.0 - kappas)
    curve = np.array([distance(lam) for lam in lams])
    slopes = np.diff(curve) / np.diff(lams)
    threshold = 0.5 * gap

    above = np.flatnonzero(slopes > threshold)
    kappa = float(kappas[above[0]]) if above.size else float(kappa_max)
    diagnostics.update(
        kappa=kappa,
        detected_identical=False,
        slope_threshold=threshold,
        solver_failures=distance.solver_failures,
        distance_curve=[[float(k), float(d)] for k, d in zip(kappas, curve)],
    )
    logger.debug(f"Mixture proportion {kappa:.4f} (bandwidth={bandwidth:.4g}, threshold={threshold:.4g})")
    return kappa, diagnostics


def _estimate_pi_s(u_points, pooled_s_points, cfg: MPEConfig) -> Tuple[float, Dict[str, Any]]:
    u_points = _as_points(u_points, "unlabeled points")
    pooled_s_points = _as_points(pooled_s_points, "pooled similar points")
    _check_pair(u_points, pooled_s_points)
    bandwidth = resolve_bandwidth(u_points, pooled_s_points, cfg)

    kappa, forward = estimate_mixture_proportion(u_points, pooled_s_points, cfg, bandwidth=bandwidth)
    diagnostics: Dict[str, Any] = {"method": cfg.method, "bandwidth": bandwidth, "forward": forward}
    if cfg.method == "one_sided":
        pi_s = kappa
    else:
        kappa_reverse, reverse = estimate_mixture_proportion(
            pooled_s_points, u_points, cfg, kappa_range=(REVERSE_KAPPA_MIN, cfg.kappa_max), bandwidth=bandwidth)
        larger = 1.0 / (1.0 + kappa * kappa_reverse)
        pi_s = larger ** 2 + (1.0 - larger) ** 2
        diagnostics.update(reverse=reverse, larger_class_prior=larger)

    pi_s = float(np.clip(pi_s, 0.5, 1.0))
    diagnostics["pi_s_hat"] = pi_s
    return pi_s, diagnostics


def estimate_pi_s(u_points, pooled_s_points, cfg: Optional[MPEConfig] = None) -> float:
    """Estimate pi_S, the probability that two independent points share a class"""
    pi_s, _ = _estimate_pi_s(u_points, pooled_s_points, cfg or MPEConfig())
    return pi_s


def pi_plus_from_pi_s(pi_s_hat: float, case: Union[PriorCase, str] = PriorCase.ASSUME_PLUS_LARGER,
                      diagnostics: Optional[Dict[str, Any]] = None) -> PriorEstimate:
    """Invert pi_S = pi_+^2 + pi_-^2 for the larger class prior.

    pi_s_hat is clamped to [1/2, 1] first; the reported prior is the larger
    one unless the minus class is known to be larger.
    """
    case = PriorCase(case)
    pi_s = float(np.clip(pi_s_hat, 0.5, 1.0))
    larger = (np.sqrt(max(2.0 * pi_s - 1.0, 0.0)) + 1.0) / 2.0
    pi_plus = 1.0 - larger if case == PriorCase.SIGN_KNOWN_MINUS_LARGER else larger
    return PriorEstimate(pi_s_hat=pi_s, pi_plus_hat=float(pi_plus), case=case,
                         diagnostics=diagnostics or {})


def estimate_prior(su: Union[SUSample, SUDataset], cfg: Optional[MPEConfig] = None,
                   case: Union[PriorCase, str] = PriorCase.ASSUME_PLUS_LARGER) -> PriorEstimate:
    """Estimate pi_+ from SU data alone; similar-pair members are pooled"""
    cfg = cfg or MPEConfig()
    sample = as_training_sample(su)
    pi_s, diagnostics = _estimate_pi_s(sample.u_points, sample.pooled_s(), cfg)
    estimate = pi_plus_from_pi_s(pi_s, case, diagnostics)
    logger.info(f"Estimated class prior: pi_S={estimate.pi_s_hat:.4f}, "
                f"pi_plus={estimate.pi_plus_hat:.4f} ({estimate.case.value})")
    return estimate
