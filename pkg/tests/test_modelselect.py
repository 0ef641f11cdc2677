"""
Model selection tests
Fold construction, the pooled zero-one proxy and the tie-breaking rules
"""

import numpy as np
import pytest

from su_learning.core.modelselect import cross_validate, fold_proxy_terms, make_folds, pooled_proxy
from su_learning.core.risk import su_risk_terms
from su_learning.core.train import identity_basis, score_sample, train
from su_learning.errors import DegeneratePriorError, InsufficientDataError, NumericalError, SingularSystemError
from su_learning.models.data_models import ClassPrior
from su_learning.models.learning_models import CVPlan, LinearModel, LossKind, TrainConfig

GOOD_WEIGHTS = np.array([1.0, 0.0, 0.0])  # classes differ along the first axis


def constant_trainer(sample, cfg, basis=None):
    return LinearModel(weights=np.zeros(sample.d + 1), basis=identity_basis(sample.d))


class TestFolds:
    def test_partition(self):
        folds = make_folds(23, 31, 5, seed=1)
        assert len(folds) == 5
        held_out_s = np.concatenate([f[1] for f in folds])
        held_out_u = np.concatenate([f[3] for f in folds])
        np.testing.assert_array_equal(np.sort(held_out_s), np.arange(23))
        np.testing.assert_array_equal(np.sort(held_out_u), np.arange(31))
        for train_s, val_s, train_u, val_u in folds:
            assert not set(train_s) & set(val_s)
            assert len(train_u) + len(val_u) == 31

    def test_seeded(self):
        a = make_folds(20, 20, 4, seed=3)
        b = make_folds(20, 20, 4, seed=3)
        for fa, fb in zip(a, b):
            for x, y in zip(fa, fb):
                np.testing.assert_array_equal(x, y)

    def test_too_few_pairs(self):
        with pytest.raises(InsufficientDataError):
            make_folds(3, 100, 5)
        with pytest.raises(InsufficientDataError):
            make_folds(100, 4, 5)


class TestProxy:
    def test_pooled_folds_equal_the_full_sample_proxy(self, su_data):
        model = LinearModel(weights=GOOD_WEIGHTS, basis=identity_basis(2))
        prior = ClassPrior(pi_plus=0.7)
        sample = su_data.sample
        folds = make_folds(sample.n_s, sample.n_u, 5, seed=0)
        terms = [fold_proxy_terms(model, sample.subset(f[1], f[3]), prior) for f in folds]
        pooled = pooled_proxy(terms, [len(f[1]) for f in folds], [len(f[3]) for f in folds])
        full = sum(su_risk_terms(score_sample(model, sample), LossKind.ZERO_ONE, prior))
        assert pooled == pytest.approx(full, abs=1e-12)


class TestCrossValidate:
    def test_single_configuration(self, su_data):
        result = cross_validate(su_data, 0.7, CVPlan(lambda_grid=[1e-2]))
        assert result.best.index == 0
        assert result.best_config.lam == 1e-2
        assert len(result.best.fold_risks) == 5

    def test_candidates_follow_grid_order(self, su_data):
        plan = CVPlan(losses=["squared", "logistic"], lambda_grid=[1e-1, 1e-3], k=3)
        result = cross_validate(su_data, 0.7, plan)
        assert [(c.loss, c.lam) for c in result.candidates] == [
            (LossKind.SQUARED, 1e-1), (LossKind.SQUARED, 1e-3),
            (LossKind.LOGISTIC, 1e-1), (LossKind.LOGISTIC, 1e-3),
        ]
        assert result.best_config.pi_plus.pi_plus == 0.7

    def test_ties_prefer_larger_lambda(self, small_su):
        result = cross_validate(small_su, 0.7, CVPlan(lambda_grid=[1e-4, 1e-1, 1e-2], k=3),
                                trainer=constant_trainer)
        assert result.best.lam == 1e-1

    def test_duplicate_configurations_pick_the_first(self, small_su):
        result = cross_validate(small_su, 0.7, CVPlan(lambda_grid=[1e-2, 1e-2], k=3),
                                trainer=constant_trainer)
        assert result.best.index == 0

    def test_prefers_the_lower_proxy(self, su_data):
        def trainer(sample, cfg, basis=None):
            sign = -1.0 if cfg.lam == 1e-1 else 1.0
            return LinearModel(weights=sign * GOOD_WEIGHTS, basis=identity_basis(sample.d))

        result = cross_validate(su_data, 0.7, CVPlan(lambda_grid=[1e-1, 1e-4]), trainer=trainer)
        assert result.best.lam == 1e-4
        assert result.candidates[0].mean_risk > result.candidates[1].mean_risk

    def test_failed_fits_score_infinity(self, small_su):
        def trainer(sample, cfg, basis=None):
            if cfg.lam == 0.0:
                raise SingularSystemError("singular")
            return constant_trainer(sample, cfg)

        result = cross_validate(small_su, 0.7, CVPlan(lambda_grid=[0.0, 1e-2], k=3), trainer=trainer)
        assert result.candidates[0].mean_risk == float("inf")
        assert result.best.lam == 1e-2

    def test_every_fit_failing(self, small_su):
        def trainer(sample, cfg, basis=None):
            raise SingularSystemError("singular")

        with pytest.raises(NumericalError):
            cross_validate(small_su, 0.7, CVPlan(k=3), trainer=trainer)

    def test_base_config_settings_are_kept(self, small_su):
        base = TrainConfig(pi_plus=0.7, max_epochs=7)
        result = cross_validate(small_su, 0.7, CVPlan(k=3, lambda_grid=[1e-2]), base_config=base, trainer=train)
        assert result.best_config.max_epochs == 7

    def test_degenerate_prior(self, small_su):
        with pytest.raises(DegeneratePriorError):
            cross_validate(small_su, 0.5)
