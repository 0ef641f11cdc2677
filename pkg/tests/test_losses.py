"""
Loss tests
Margin losses, the linear-odd condition and the prior-corrected SU losses
"""

import numpy as np
import pytest

from su_learning.core.losses import corrected, eval_loss, get_loss, tilde_loss
from su_learning.errors import DataError, DegeneratePriorError, InvalidPriorError
from su_learning.models.learning_models import LossKind

GRID = np.linspace(-4.0, 4.0, 161)
CONVEX_LOSSES = [LossKind.SQUARED, LossKind.LOGISTIC, LossKind.DOUBLE_HINGE]


class TestMarginLosses:
    @pytest.mark.parametrize("kind, margin, expected", [
        (LossKind.SQUARED, 1.0, 0.0),
        (LossKind.SQUARED, -1.0, 1.0),
        (LossKind.LOGISTIC, 0.0, np.log(2.0)),
        (LossKind.DOUBLE_HINGE, -2.0, 2.0),
        (LossKind.DOUBLE_HINGE, 0.0, 0.5),
        (LossKind.DOUBLE_HINGE, 2.0, 0.0),
        (LossKind.HINGE, 0.0, 1.0),
        (LossKind.ZERO_ONE, -0.1, 1.0),
        (LossKind.ZERO_ONE, 0.0, 0.5),
        (LossKind.ZERO_ONE, 0.1, 0.0),
    ])
    def test_values(self, kind, margin, expected):
        assert get_loss(kind).psi(margin) == pytest.approx(expected)

    def test_scalar_in_scalar_out(self):
        assert isinstance(get_loss("squared").psi(0.3), float)

    def test_eval_loss_uses_label_times_score(self):
        spec = get_loss(LossKind.LOGISTIC)
        assert eval_loss(spec, 0.7, -1) == pytest.approx(spec.psi(-0.7))

    def test_eval_loss_rejects_other_labels(self):
        with pytest.raises(DataError):
            eval_loss("squared", np.zeros(3), np.array([1, 0, -1]))

    def test_parse_accepts_underscores(self):
        assert LossKind.parse("double_hinge") is LossKind.DOUBLE_HINGE
        with pytest.raises(ValueError):
            LossKind.parse("exponential")

    @pytest.mark.parametrize("kind", CONVEX_LOSSES + [LossKind.HINGE])
    def test_subgradient_matches_finite_difference_away_from_kinks(self, kind):
        spec = get_loss(kind)
        margins = np.array([-2.5, -0.4, 0.3, 0.6, 2.2])
        h = 1e-6
        numeric = (spec.psi(margins + h) - spec.psi(margins - h)) / (2 * h)
        np.testing.assert_allclose(spec.dpsi(margins), numeric, atol=1e-6)


class TestLinearOdd:
    @pytest.mark.parametrize("kind", CONVEX_LOSSES)
    def test_tilde_loss_is_minus_identity(self, kind):
        assert get_loss(kind).satisfies_linear_odd
        np.testing.assert_allclose(tilde_loss(kind, GRID), -GRID, atol=1e-12)

    def test_hinge_is_a_counterexample(self):
        spec = get_loss(LossKind.HINGE)
        assert not spec.satisfies_linear_odd
        assert tilde_loss(spec, 2.0) == pytest.approx(-3.0)
        assert tilde_loss(spec, 2.0) != pytest.approx(-2.0)


class TestCorrectedLosses:
    def test_formulas(self):
        losses = corrected(LossKind.LOGISTIC, 0.7)
        spec = get_loss(LossKind.LOGISTIC)
        z = np.array([-1.3, 0.2, 2.5])
        np.testing.assert_allclose(losses.l_s(z), (spec.psi(z) - spec.psi(-z)) / 0.4)
        np.testing.assert_allclose(losses.l_u(z), (-0.3 * spec.psi(z) + 0.7 * spec.psi(-z)) / 0.4)

    @pytest.mark.parametrize("kind", CONVEX_LOSSES)
    def test_similar_loss_is_linear(self, kind):
        losses = corrected(kind, 0.8)
        np.testing.assert_allclose(losses.l_s(GRID), -GRID / 0.6, atol=1e-12)

    def test_derivatives(self):
        losses = corrected(LossKind.LOGISTIC, 0.3)
        z = np.linspace(-3, 3, 13)
        h = 1e-6
        np.testing.assert_allclose(losses.dl_s(z), (losses.l_s(z + h) - losses.l_s(z - h)) / (2 * h), atol=1e-6)
        np.testing.assert_allclose(losses.dl_u(z), (losses.l_u(z + h) - losses.l_u(z - h)) / (2 * h), atol=1e-6)

    def test_prior_near_one_half(self):
        with pytest.raises(DegeneratePriorError):
            corrected(LossKind.SQUARED, 0.5)
        with pytest.raises(DegeneratePriorError):
            corrected(LossKind.SQUARED, 0.5002)

    def test_guard_band_is_configurable(self, monkeypatch):
        monkeypatch.setenv("SU_EPSILON_PRIOR", "0.2")
        with pytest.raises(DegeneratePriorError):
            corrected(LossKind.SQUARED, 0.55)

    def test_prior_outside_unit_interval(self):
        with pytest.raises(InvalidPriorError):
            corrected(LossKind.SQUARED, 1.0)
