import pytest

import numpy as np

from .fixtures import *
from .oracles import entropy, leave_one_out

from pydqc.errors import DQCNumericalError
from pydqc.filter import svd_entropy, feature_contributions, afeature_contributions, filter_features, afilter_features
from pydqc.schemas import DataMatrix, RetentionRule

# ===========================
# Testing svd_entropy
# ===========================

def test_entropy_equal_singular_values():
    assert svd_entropy(np.eye(3)) == pytest.approx(1.0)

def test_entropy_rank_one():
    assert svd_entropy(np.outer([1.0, 2.0, 3.0], [1.0, 0.5, -1.0])) == pytest.approx(0.0, abs = 1e-12)

def test_entropy_single_row():
    assert svd_entropy(np.array([[1.0, 2.0, 3.0]])) == 0.0

def test_entropy_zero_matrix():
    with pytest.raises(DQCNumericalError) as exc:
        svd_entropy(np.zeros((3, 2)))
    assert exc.value.code == "UNDEFINED_ENTROPY"

def test_entropy_diagonal_example():
    assert svd_entropy(np.diag([2.0, 1.0])) == pytest.approx(0.72193, abs = 1e-5)

def test_entropy_invariant_to_permutation_and_scale(rng):
    values = rng.standard_normal((8, 5))
    e = svd_entropy(values)
    shuffled = values[rng.permutation(8)][:, rng.permutation(5)]
    assert svd_entropy(shuffled) == pytest.approx(e, abs = 1e-12)
    assert svd_entropy(37.5 * values) == pytest.approx(e, abs = 1e-12)
    assert svd_entropy(1e-4 * values) == pytest.approx(e, abs = 1e-12)

def test_entropy_matches_reference(rng):
    for _ in range(20):
        values = rng.standard_normal((rng.integers(2, 9), rng.integers(2, 7)))
        e = svd_entropy(values)
        assert 0.0 <= e <= 1.0
        assert e == pytest.approx(entropy(values), abs = 1e-12)

# ===========================
# Testing feature_contributions
# ===========================

def test_contributions_match_reference(rng):
    values = rng.standard_normal((12, 6))
    scores = feature_contributions(values, stage = 3)
    np.testing.assert_allclose(scores.contributions, leave_one_out(values), atol = 1e-12)
    assert scores.entropy_full == pytest.approx(entropy(values), abs = 1e-12)
    assert scores.stage == 3

def test_contributions_carry_names(signal_and_noise):
    scores = feature_contributions(signal_and_noise)
    assert scores.feature_names == signal_and_noise.feature_names

def test_contributions_of_noise(signal_and_noise):
    c = feature_contributions(signal_and_noise).contributions
    assert c[4] == pytest.approx(-0.069, abs = 2e-3)
    np.testing.assert_allclose(c[:4], -0.0285, atol = 2e-3)
    assert c[4] < c.mean() < c[0]

def test_contributions_need_two_features():
    with pytest.raises(ValueError):
        feature_contributions(np.ones((4, 1)))

async def test_async_contributions(rng):
    values = rng.standard_normal((10, 5))
    scores = await afeature_contributions(values)
    np.testing.assert_array_equal(scores.contributions, feature_contributions(values).contributions)

# ===========================
# Testing filter_features
# ===========================

def test_filter_removes_noise(signal_and_noise):
    result = filter_features(signal_and_noise, stages = 3)
    assert result.removed == [4]
    assert result.matrix.feature_names == ("a1", "a2", "b1", "b2")
    assert result.stop_reason == "all-retained"
    assert len(result.stages) == 1

    stage = result.stages[0]
    assert stage.kept == [0, 1, 2, 3]
    assert stage.removed_names == ["noise"]
    assert stage.entropy_after == pytest.approx(0.5, abs = 1e-9)
    assert stage.to_record()["removed"] == [4]

def test_filter_keeps_labels_and_ids(signal_and_noise):
    m = DataMatrix(signal_and_noise.values, signal_and_noise.feature_names, labels = np.arange(20) % 2)
    result = filter_features(m, 1)
    np.testing.assert_array_equal(result.matrix.labels, m.labels)
    np.testing.assert_array_equal(result.matrix.ids, m.ids)

def test_filter_too_few_features(signal_and_noise):
    m = DataMatrix(signal_and_noise.values[:, [0, 2, 4]])
    result = filter_features(m, 2, RetentionRule(multiplier = 1.0))
    assert result.stop_reason == "too-few-features"
    assert result.stages == []
    assert result.matrix is m

def test_filter_identical_columns(rng):
    m = DataMatrix(np.outer(rng.standard_normal(12), np.ones(4)))
    result = filter_features(m, 3)
    assert result.stop_reason == "all-retained"
    assert result.removed == []
    assert result.stages == []
    assert result.matrix is m

def test_filter_bad_stages(signal_and_noise):
    with pytest.raises(ValueError):
        filter_features(signal_and_noise, 0)

def test_retention_rule():
    rule = RetentionRule(multiplier = 0.5)
    c = np.array([0.0, 1.0, 2.0, 3.0])
    # mean 1.5, std 1.118
    np.testing.assert_array_equal(rule.keep(c), [False, False, False, True])
    np.testing.assert_array_equal(RetentionRule().keep(np.full(4, 0.25)), [True] * 4)

async def test_async_filter(signal_and_noise):
    expected = filter_features(signal_and_noise, 3)
    result = await afilter_features(signal_and_noise, 3)
    assert result.removed == expected.removed
    assert result.stop_reason == expected.stop_reason
    np.testing.assert_array_equal(result.stages[0].scores.contributions, expected.stages[0].scores.contributions)
