"""
Numerical Kit
Cholesky solves, Gaussian kernels and a dense primal-dual interior-point solver for convex QPs
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import linprog
from scipy.spatial.distance import pdist
from sklearn.metrics.pairwise import rbf_kernel

from su_learning.config import get_settings
from su_learning.errors import DataError, DegenerateKernelError, NotPositiveDefiniteError
from su_learning.models.learning_models import QPProblem, QPSolution, QPStatus

logger = logging.getLogger(__name__)

# Static diagonal added to the Newton matrix; P may be singular (zero slack block)
NEWTON_REGULARIZATION = 1e-10
PSD_TOLERANCE = 1e-8
STEP_FRACTION = 0.99
STALL_WINDOW = 50
POLISH_MU = 1e-7


def solve_spd(A, b) -> np.ndarray:
    """Solve A x = b for symmetric positive-definite A by Cholesky factorization"""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape[0] != A.shape[0]:
        raise DataError(f"incompatible shapes A{A.shape}, b{b.shape}")
    try:
        factor = linalg.cho_factor(A, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {e}") from e
    return linalg.cho_solve(factor, b)


def check_psd(P: np.ndarray, tol: float = PSD_TOLERANCE) -> None:
    """Raise NotPositiveDefiniteError when P has an eigenvalue below -tol"""
    diagonal = np.diag(P)
    if not np.any(P - np.diag(diagonal)):
        if diagonal.size and diagonal.min() < -tol:
            raise NotPositiveDefiniteError(f"P has a negative diagonal entry {diagonal.min():.3g}")
        return
    try:
        linalg.cho_factor(P + tol * np.eye(P.shape[0]), lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError("P is not positive semidefinite") from e


def gaussian_kernel(X, Y, bandwidth: float) -> np.ndarray:
    """exp(-||x - y||^2 / (2 bandwidth^2)) for every row pair"""
    return rbf_kernel(np.asarray(X, dtype=float), np.asarray(Y, dtype=float),
                      gamma=1.0 / (2.0 * bandwidth ** 2))


def median_pairwise_distance(points, max_points: int = 1_000, seed: int = 0) -> float:
    """Median heuristic bandwidth over at most ``max_points`` seeded rows.

    Falls back to the median of the nonzero distances when duplicates
    dominate; raises DegenerateKernelError when every point is identical.
    """
    points = np.asarray(points, dtype=float)
    if points.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        points = points[rng.choice(points.shape[0], max_points, replace=False)]
    distances = pdist(points)
    positive = distances[distances > 0]
    if positive.size == 0:
        raise DegenerateKernelError("all points are identical; the kernel bandwidth would be zero")
    median = float(np.median(distances))
    return median if median > 0 else float(np.median(positive))


def kkt_residual(problem: QPProblem, gamma: np.ndarray, dual: np.ndarray) -> float:
    """Largest violation among stationarity, primal feasibility, dual sign and complementarity"""
    slack = problem.h - problem.G @ gamma
    parts = [
        np.max(np.abs(problem.P @ gamma + problem.q + problem.G.T @ dual), initial=0.0),
        np.max(-slack, initial=0.0),
        np.max(-dual, initial=0.0),
        np.max(np.abs(dual * slack), initial=0.0),
    ]
    return float(max(parts))


def duality_gap(problem: QPProblem, gamma: np.ndarray, dual: np.ndarray) -> float:
    return float(abs(dual @ (problem.h - problem.G @ gamma)))


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    negative = dv < 0
    if not np.any(negative):
        return np.inf
    return float(np.min(-v[negative] / dv[negative]))


def _factorize(K: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    try:
        factor = linalg.cho_factor(K, lower=True)
        return lambda rhs: linalg.cho_solve(factor, rhs)
    except linalg.LinAlgError:
        lu = linalg.lu_factor(K)
        return lambda rhs: linalg.lu_solve(lu, rhs)


def _polish(problem: QPProblem, gamma: np.ndarray, dual: np.ndarray,
            slack: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Solve the equality-constrained KKT system on the apparent active set"""
    active = dual > slack
    n, n_active = problem.n, int(active.sum())
    G_active = problem.G[active]
    kkt = np.zeros((n + n_active, n + n_active))
    kkt[:n, :n] = problem.P
    kkt[:n, n:] = G_active.T
    kkt[n:, :n] = G_active
    rhs = np.concatenate([-problem.q, problem.h[active]])
    try:
        solution = linalg.solve(kkt, rhs, assume_a="sym")
    except (linalg.LinAlgError, ValueError):
        solution = linalg.lstsq(kkt, rhs)[0]
    if not np.all(np.isfinite(solution)):
        return None

    polished_dual = np.zeros(problem.m)
    polished_dual[active] = solution[n:]
    if polished_dual.min(initial=0.0) < -PSD_TOLERANCE:
        return None
    return solution[:n], np.maximum(polished_dual, 0.0)


def _is_infeasible(problem: QPProblem) -> bool:
    """Phase-one LP: minimise t subject to G g - t <= h, t >= 0"""
    n, m = problem.n, problem.m
    c = np.zeros(n + 1)
    c[-1] = 1.0
    A_ub = np.hstack([problem.G, -np.ones((m, 1))])
    bounds = [(None, None)] * n + [(0.0, None)]
    result = linprog(c, A_ub=A_ub, b_ub=problem.h, bounds=bounds, method="highs")
    if result.status != 0:
        return False
    return result.fun > 1e-7 * (1.0 + np.max(np.abs(problem.h), initial=0.0))


def solve_qp(problem: QPProblem, tol: Optional[float] = None,
             max_iter: Optional[int] = None) -> QPSolution:
    """Mehrotra predictor-corrector interior point with an infeasible start.

    Newton systems use P + G^T W G plus a 1e-10 diagonal, so a singular P is
    accepted. Near convergence the active set is polished by a direct KKT
    solve. Optimal means KKT residual and duality gap both at most ``tol``.
    """
    settings = get_settings()
    tol = settings.qp_tol if tol is None else tol
    max_iter = settings.qp_max_iter if max_iter is None else max_iter
    check_psd(problem.P)

    P, q, G, h = problem.P, problem.q, problem.G, problem.h
    n, m = problem.n, problem.m

    if m == 0:
        gamma = linalg.lstsq(P, -q)[0]
        dual = np.zeros(0)
        residual = kkt_residual(problem, gamma, dual)
        status = QPStatus.OPTIMAL if residual <= tol else QPStatus.MAX_ITER
        return QPSolution(gamma=gamma, objective=problem.objective(gamma), kkt_residual=residual,
                          status=status, dual=dual, iterations=0, duality_gap=0.0)

    x = np.zeros(n)
    s = np.maximum(h - G @ x, 1.0)
    z = 1.0 / s

    def converged(gamma, dual) -> Tuple[bool, float, float]:
        residual = kkt_residual(problem, gamma, dual)
        gap = duality_gap(problem, gamma, dual)
        return residual <= tol and gap <= tol, residual, gap

    best = (np.inf, x.copy(), z.copy())
    status = QPStatus.MAX_ITER
    last_improvement = 0
    last_polish = -np.inf
    iteration = 0

    for iteration in range(1, max_iter + 1):
        r_d = P @ x + q + G.T @ z
        r_p = G @ x + s - h
        mu = float(s @ z) / m

        done, residual, gap = converged(x, z)
        score = max(residual, gap)
        if score < best[0]:
            best = (score, x.copy(), z.copy())
            last_improvement = iteration
        if done:
            status = QPStatus.OPTIMAL
            break

        if mu <= POLISH_MU and iteration - last_polish >= 5:
            last_polish = iteration
            polished = _polish(problem, x, z, s)
            if polished is not None:
                done, residual, gap = converged(*polished)
                if done:
                    x, z = polished
                    best = (max(residual, gap), x.copy(), z.copy())
                    status = QPStatus.OPTIMAL
                    logger.debug(f"QP polished at iteration {iteration}: residual={residual:.3g}")
                    break

        z_sum = z.sum()
        if z_sum > 0:
            z_hat = z / z_sum
            if h @ z_hat < -1e-7 and np.max(np.abs(G.T @ z_hat)) <= 1e-9:
                status = QPStatus.INFEASIBLE
                break

        if iteration - last_improvement >= STALL_WINDOW:
            logger.debug(f"QP stalled at iteration {iteration}")
            break

        w = z / s
        K = P + G.T @ (w[:, None] * G)
        K[np.diag_indices_from(K)] += NEWTON_REGULARIZATION
        solve = _factorize(K)

        def direction(r_c):
            rhs = -r_d - G.T @ (w * r_p - r_c / s)
            dx = solve(rhs)
            g_dx = G @ dx
            return dx, -r_p - g_dx, w * (g_dx + r_p) - r_c / s

        # Predictor
        dx_a, ds_a, dz_a = direction(s * z)
        alpha_a = min(1.0, _max_step(s, ds_a), _max_step(z, dz_a))
        mu_a = float((s + alpha_a * ds_a) @ (z + alpha_a * dz_a)) / m
        sigma = (mu_a / mu) ** 3 if mu > 0 else 0.0

        # Corrector
        dx, ds, dz = direction(s * z + ds_a * dz_a - sigma * mu)
        alpha = min(1.0, STEP_FRACTION * min(_max_step(s, ds), _max_step(z, dz)))
        x = x + alpha * dx
        s = s + alpha * ds
        z = z + alpha * dz

        if iteration % 10 == 0:
            logger.debug(f"QP iteration {iteration}: mu={mu:.3g}, residual={residual:.3g}, step={alpha:.3g}")

    if status == QPStatus.MAX_ITER:
        x, z = best[1], best[2]
        if _is_infeasible(problem):
            status = QPStatus.INFEASIBLE

    residual = kkt_residual(problem, x, z)
    gap = duality_gap(problem, x, z)
    logger.debug(f"QP finished: status={status.value}, iterations={iteration}, residual={residual:.3g}")
    return QPSolution(gamma=x, objective=problem.objective(x), kkt_residual=residual,
                      status=status, dual=z, iterations=iteration, duality_gap=gap)
