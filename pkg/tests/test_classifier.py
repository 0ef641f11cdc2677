"""
SUClassifier tests
Given and estimated priors, cross-validated and fixed regularization, reporting
"""

import numpy as np
import pytest

from su_learning import SUClassifier, evaluate
from su_learning.data.datasets import generate_gaussian, sample_su
from su_learning.errors import DataError, DegeneratePriorError, InvalidPriorError
from su_learning.models.data_models import SyntheticSpec
from su_learning.models.learning_models import LinearModel, LossKind, MPEConfig


class TestGivenPrior:
    def test_fixed_lambda_skips_cross_validation(self, su_data, test_set):
        clf = SUClassifier(pi_plus=0.7, lam=1e-3).fit(su_data)
        assert clf.cv_result_ is None
        assert clf.config_.lam == 1e-3
        assert clf.score(test_set) > 0.8

    def test_cross_validation_selects_from_the_grid(self, su_data):
        clf = SUClassifier(pi_plus=0.7, lambda_grid=[1e-1, 1e-4], cv_folds=3).fit(su_data)
        assert clf.cv_result_ is not None
        assert clf.config_.lam in (1e-1, 1e-4)
        assert len(clf.cv_result_.candidates) == 2

    def test_several_losses_with_a_fixed_lambda(self, small_su):
        clf = SUClassifier(pi_plus=0.7, losses=["squared", "double-hinge"], lam=1e-2, cv_folds=3).fit(small_su)
        assert clf.config_.loss in (LossKind.SQUARED, LossKind.DOUBLE_HINGE)
        assert [c.lam for c in clf.cv_result_.candidates] == [1e-2, 1e-2]

    def test_report(self, su_data):
        report = SUClassifier(pi_plus=0.7, lam=1e-2).fit(su_data).report()
        assert report["pi_plus"] == 0.7
        assert report["prior_mode"] == "given"
        assert report["loss"] == "squared"
        assert report["lambda"] == 1e-2
        assert report["basis"] == "identity_with_intercept"
        assert report["fit"]["optimality_residual"] <= 1e-6
        assert "cv" not in report and "prior_estimate" not in report

    def test_decision_function_and_predict_agree(self, su_data, test_set):
        clf = SUClassifier(pi_plus=0.7, lam=1e-2).fit(su_data)
        scores = clf.decision_function(test_set.features)
        np.testing.assert_array_equal(clf.predict(test_set.features), np.where(scores >= 0, 1, -1))

    def test_rbf_basis(self, su_data, test_set):
        clf = SUClassifier(pi_plus=0.7, lam=1e-3, basis="rbf", n_centers=30).fit(su_data)
        assert clf.model_.weights.shape == (31,)
        assert clf.score(test_set) > 0.8

    def test_prior_at_one_half(self, small_su):
        with pytest.raises(DegeneratePriorError):
            SUClassifier(pi_plus=0.5, lam=1e-2).fit(small_su)


class TestValidation:
    def test_given_mode_needs_a_prior(self):
        with pytest.raises(InvalidPriorError):
            SUClassifier()

    def test_unknown_basis(self):
        with pytest.raises(DataError):
            SUClassifier(pi_plus=0.7, basis="polynomial")

    def test_not_fitted(self, test_set):
        clf = SUClassifier(pi_plus=0.7)
        with pytest.raises(DataError):
            clf.predict(test_set.features)
        with pytest.raises(DataError):
            clf.report()


class TestEvaluate:
    def test_flipped_model(self, su_data, test_set):
        model = SUClassifier(pi_plus=0.7, lam=1e-2).fit(su_data).model_
        flipped = LinearModel(weights=-model.weights, basis=model.basis)
        metrics, flipped_metrics = evaluate(model, test_set), evaluate(flipped, test_set)
        assert metrics["clustering_accuracy"] == pytest.approx(flipped_metrics["clustering_accuracy"])
        assert metrics["zero_one_risk"] == pytest.approx(1.0 - metrics["accuracy"])
        assert metrics["n"] == test_set.n


@pytest.mark.slow
class TestEstimatedPrior:
    def test_estimated_prior_trains_a_usable_classifier(self):
        spec = SyntheticSpec.isotropic(d=2, separation=6.0, pi_plus=0.7, seed=31)
        su = sample_su(generate_gaussian(spec, 6_000), 0.7, n_s=500, n_u=500, seed=2)
        test = generate_gaussian(spec.with_seed(32), 5_000)
        clf = SUClassifier(prior_mode="estimate_case2", lam=1e-3, mpe_config=MPEConfig(seed=1)).fit(su)
        assert abs(clf.prior_.pi_plus - 0.7) <= 0.1
        assert clf.score(test) > 0.9
        assert clf.report()["prior_estimate"]["case"] == "assume_plus_larger"
