"""
Clustering baseline tests
"""

import numpy as np
import pytest

from su_learning.core.baseline import clustering_accuracy, kmeans2
from su_learning.errors import DataError, EmptyInputError, InsufficientDataError


def _blobs(rng, n_plus=140, n_minus=60, gap=10.0):
    points = np.vstack([rng.normal(loc=gap, scale=0.5, size=(n_plus, 2)),
                        rng.normal(loc=0.0, scale=0.5, size=(n_minus, 2))])
    labels = np.concatenate([np.ones(n_plus, dtype=int), -np.ones(n_minus, dtype=int)])
    return points, labels


class TestKMeans:
    def test_two_point_clusters(self):
        points = np.array([[0.0], [0.0], [0.0], [10.0], [10.0]])
        model = kmeans2(points, seed=0)
        np.testing.assert_allclose(np.sort(model.centers.ravel()), [0.0, 10.0])
        assert model.centers[model.positive_index, 0] == 0.0

    def test_inertia_never_increases(self, rng):
        model = kmeans2(rng.normal(size=(300, 3)), seed=4)
        assert np.all(np.diff(model.inertia_trace) <= 1e-9)
        assert model.n_iter == len(model.inertia_trace)

    def test_separated_blobs(self, rng):
        points, labels = _blobs(rng)
        model = kmeans2(points, seed=1)
        assert clustering_accuracy(model.classify(points), labels) >= 0.99
        assert model.centers[model.positive_index, 0] > 5.0

    def test_seeded(self, rng):
        points = rng.normal(size=(100, 2))
        np.testing.assert_array_equal(kmeans2(points, seed=2).centers, kmeans2(points, seed=2).centers)

    def test_single_distinct_point(self):
        with pytest.raises(InsufficientDataError):
            kmeans2(np.ones((5, 2)))

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            kmeans2(np.empty((0, 2)))

    def test_iteration_budget(self, rng):
        points = rng.normal(size=(20, 2))
        with pytest.raises(DataError):
            kmeans2(points, max_iter=0)
        assert kmeans2(points, max_iter=1).n_iter == 1


class TestClusteringAccuracy:
    def test_values(self):
        truth = np.array([1, 1, -1, -1])
        assert clustering_accuracy(truth, truth) == 1.0
        assert clustering_accuracy(-truth, truth) == 1.0
        assert clustering_accuracy([1, -1, -1, -1], truth) == pytest.approx(0.75)
        assert clustering_accuracy([1, -1, 1, -1], truth) == pytest.approx(0.5)

    def test_flip_invariance(self, rng):
        predicted = np.where(rng.random(50) < 0.5, 1, -1)
        truth = np.where(rng.random(50) < 0.5, 1, -1)
        assert clustering_accuracy(predicted, truth) == clustering_accuracy(-predicted, truth)

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            clustering_accuracy([], [])

    def test_invalid_inputs(self):
        with pytest.raises(DataError):
            clustering_accuracy([1, -1], [1])
        with pytest.raises(DataError):
            clustering_accuracy([1, 0], [1, -1])
