"""
Clustering Baseline
Two-cluster k-means on unlabeled points and the flip-invariant clustering accuracy
"""

import logging

import numpy as np
from sklearn.cluster import kmeans_plusplus

from su_learning.errors import DataError, EmptyInputError, InsufficientDataError
from su_learning.models.learning_models import KMeansModel

logger = logging.getLogger(__name__)


def _squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def kmeans2(points, seed: int = 0, max_iter: int = 300) -> KMeansModel:
    """Lloyd iterations from a k-means++ start until the assignment stops changing.

    An empty cluster keeps its previous center. The larger cluster is
    reported as the positive one (ties: center 0).
    """
    if max_iter < 1:
        raise DataError(f"max_iter must be at least 1, got {max_iter}")
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[0] == 0:
        raise EmptyInputError("k-means needs a non-empty point matrix")
    if np.unique(points, axis=0).shape[0] < 2:
        raise InsufficientDataError("k-means with two clusters needs at least two distinct points")

    centers, _ = kmeans_plusplus(points, n_clusters=2, random_state=seed)
    assignment = None
    inertia_trace = []
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        sq = _squared_distances(points, centers)
        new_assignment = np.argmin(sq, axis=1)
        inertia_trace.append(float(sq[np.arange(points.shape[0]), new_assignment].sum()))
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for j in range(2):
            members = assignment == j
            if np.any(members):
                centers[j] = points[members].mean(axis=0)

    sizes = np.bincount(assignment, minlength=2)
    positive_index = 0 if sizes[0] >= sizes[1] else 1
    logger.debug(f"k-means converged after {n_iter} iterations (cluster sizes {sizes.tolist()})")
    return KMeansModel(centers=centers, positive_index=positive_index,
                       inertia_trace=inertia_trace, n_iter=n_iter)


def clustering_accuracy(predicted, truth) -> float:
    """1 - min(r, 1 - r) for error rate r; invariant to a global label flip"""
    predicted = np.asarray(predicted).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if predicted.size == 0:
        raise EmptyInputError("clustering accuracy needs at least one prediction")
    if predicted.shape != truth.shape:
        raise DataError(f"{predicted.size} predictions but {truth.size} labels")
    if not (np.all(np.isin(predicted, (-1, 1))) and np.all(np.isin(truth, (-1, 1)))):
        raise DataError("labels must be +1 or -1")
    error = float(np.mean(predicted != truth))
    return 1.0 - min(error, 1.0 - error)
