"""
Dataset tests
LIBSVM parsing, synthetic generators, SU sampling and SU JSON files
"""

import numpy as np
import pytest
from scipy.stats import norm

from su_learning.data.datasets import (
    bayes_error,
    generate_banana,
    generate_gaussian,
    load_su,
    parse_libsvm,
    sample_su,
    save_su,
    su_from_json,
    su_to_json,
    write_libsvm,
)
from su_learning.errors import DataError, DataFormatError, EmptyInputError, InsufficientDataError
from su_learning.models.data_models import LabeledDataset, SUDataset, SyntheticSpec, as_training_sample


class TestParseLibsvm:
    def test_dense_matrix_from_sparse_lines(self):
        data = parse_libsvm("+1 1:0.5 3:2\n-1 2:1\n")
        assert data.features.shape == (2, 3)
        np.testing.assert_array_equal(data.features, [[0.5, 0.0, 2.0], [0.0, 1.0, 0.0]])
        np.testing.assert_array_equal(data.labels, [1, -1])

    def test_larger_raw_label_becomes_positive(self):
        data = parse_libsvm("1 1:1\n0 1:2\n")
        np.testing.assert_array_equal(data.labels, [1, -1])

    def test_single_label_keeps_its_sign(self):
        assert parse_libsvm("-1 1:1\n-1 1:2\n").labels.tolist() == [-1, -1]

    def test_comments_and_blank_lines_are_skipped(self):
        data = parse_libsvm("# header\n\n+1 1:1  # trailing\n-1 1:2\n")
        assert data.n == 2

    def test_bytes_input(self):
        assert parse_libsvm(b"+1 1:1\n-1 1:2\n").n == 2

    def test_malformed_entry_reports_line_number(self):
        with pytest.raises(DataFormatError) as exc:
            parse_libsvm("+1 1:1\n-1 2-3\n")
        assert exc.value.line_number == 2
        assert "line 2" in str(exc.value)

    def test_duplicate_index_rejected(self):
        with pytest.raises(DataFormatError):
            parse_libsvm("+1 1:1 1:2\n")

    def test_zero_index_rejected(self):
        with pytest.raises(DataFormatError):
            parse_libsvm("+1 0:1\n")

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            parse_libsvm("# nothing here\n\n")

    def test_more_than_two_labels(self):
        with pytest.raises(DataFormatError):
            parse_libsvm("1 1:1\n2 1:1\n3 1:1\n")

    def test_n_features_pads_trailing_columns(self):
        data = parse_libsvm("+1 1:1\n-1 2:1\n", n_features=4)
        assert data.d == 4

    def test_n_features_smaller_than_index(self):
        with pytest.raises(DataFormatError):
            parse_libsvm("+1 3:1\n", n_features=2)

    def test_write_then_parse_preserves_values(self, rng):
        features = rng.normal(size=(20, 3))
        features[:, 2] = 0.0
        data = LabeledDataset(features=features, labels=np.where(rng.random(20) < 0.5, 1, -1))
        parsed = parse_libsvm(write_libsvm(data), n_features=3)
        np.testing.assert_array_equal(parsed.features, data.features)
        np.testing.assert_array_equal(parsed.labels, data.labels)


class TestGenerators:
    def test_gaussian_is_seeded(self, gaussian_spec):
        a = generate_gaussian(gaussian_spec, 100)
        b = generate_gaussian(gaussian_spec, 100)
        np.testing.assert_array_equal(a.features, b.features)
        assert a.d == 2

    def test_gaussian_class_balance(self, gaussian_spec):
        data = generate_gaussian(gaussian_spec, 5_000)
        assert abs(data.positive_fraction() - 0.7) < 0.03

    def test_gaussian_rejects_bad_n(self, gaussian_spec):
        with pytest.raises(DataError):
            generate_gaussian(gaussian_spec, 0)

    def test_banana_shape_and_balance(self):
        data = generate_banana(0.7, 2_000, seed=1)
        assert data.features.shape == (2_000, 2)
        assert abs(data.positive_fraction() - 0.7) < 0.04

    def test_bayes_error_without_separation(self):
        spec = SyntheticSpec.isotropic(d=2, separation=0.0, pi_plus=0.7)
        assert bayes_error(spec) == pytest.approx(0.3)

    def test_bayes_error_balanced(self):
        spec = SyntheticSpec.isotropic(d=3, separation=2.0, pi_plus=0.5)
        assert bayes_error(spec) == pytest.approx(norm.cdf(-1.0))


def _label_lookup(data: LabeledDataset):
    return {tuple(row): int(label) for row, label in zip(data.features, data.labels)}


class TestSampleSU:
    def test_counts(self, labeled_pool):
        su = sample_su(labeled_pool, 0.7, n_s=200, n_u=400, seed=0)
        assert su.s_pairs.shape == (200, 2, 2)
        assert su.u_points.shape == (400, 2)

    def test_pairs_share_their_class(self, labeled_pool):
        lookup = _label_lookup(labeled_pool)
        su = sample_su(labeled_pool, 0.7, n_s=100, n_u=100, seed=1)
        for pair, label in zip(su.s_pairs, su.hidden_labels.s_labels):
            assert lookup[tuple(pair[0])] == label
            assert lookup[tuple(pair[1])] == label
            assert not np.array_equal(pair[0], pair[1])
        for point, label in zip(su.u_points, su.hidden_labels.u_labels):
            assert lookup[tuple(point)] == label

    def test_without_replacement_never_reuses_points(self, labeled_pool):
        su = sample_su(labeled_pool, 0.7, n_s=200, n_u=300, seed=2, replace=False)
        rows = np.vstack([su.s_pairs.reshape(-1, 2), su.u_points])
        assert np.unique(rows, axis=0).shape[0] == rows.shape[0]

    def test_positive_pair_share(self, labeled_pool):
        su = sample_su(labeled_pool, 0.7, n_s=4_000, n_u=10, seed=4, method="stratified")
        share = float(np.mean(su.hidden_labels.s_labels == 1))
        assert share == pytest.approx(0.49 / 0.58, abs=0.03)

    def test_missing_class_is_reported(self):
        only_positive = LabeledDataset(features=np.arange(10.0).reshape(-1, 1), labels=np.ones(10))
        with pytest.raises(InsufficientDataError) as exc:
            sample_su(only_positive, 0.7, n_s=20, n_u=20, seed=0)
        assert exc.value.deficient_class == -1

    def test_seeded(self, labeled_pool):
        a = sample_su(labeled_pool, 0.7, n_s=50, n_u=50, seed=9)
        b = sample_su(labeled_pool, 0.7, n_s=50, n_u=50, seed=9)
        assert su_to_json(a) == su_to_json(b)

    def test_unknown_method(self, labeled_pool):
        with pytest.raises(DataError):
            sample_su(labeled_pool, 0.7, n_s=5, n_u=5, method="magic")

    def test_training_view_drops_labels(self, su_data):
        sample = as_training_sample(su_data)
        assert not hasattr(sample, "hidden_labels")
        assert sample.pooled_s().shape == (2 * su_data.n_s, su_data.d)


class TestSUJson:
    def test_round_trip_with_labels(self, small_su):
        restored = su_from_json(su_to_json(small_su))
        np.testing.assert_array_equal(restored.s_pairs, small_su.s_pairs)
        np.testing.assert_array_equal(restored.hidden_labels.u_labels, small_su.hidden_labels.u_labels)

    def test_labels_can_be_omitted(self, small_su):
        assert su_from_json(su_to_json(small_su, include_labels=False)).hidden_labels is None

    def test_invalid_json(self):
        with pytest.raises(DataFormatError):
            su_from_json("{not json")

    def test_missing_keys(self):
        with pytest.raises(DataFormatError):
            su_from_json('{"s_pairs": [[[0.0], [1.0]]]}')

    def test_declared_dimension_must_match(self):
        with pytest.raises(DataFormatError):
            su_from_json('{"s_pairs": [[[0.0], [1.0]]], "u_points": [[2.0]], "d": 3}')

    def test_file_helpers(self, small_su, tmp_path):
        path = save_su(small_su, tmp_path / "su.json")
        assert isinstance(load_su(path), SUDataset)
        with pytest.raises(FileNotFoundError):
            load_su(tmp_path / "missing.json")
