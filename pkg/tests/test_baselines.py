import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsor.baselines import FISHER_CAP, correlation_score, fisher_score
from fsor.dataset import Dataset


def two_class(values0, values1):
    x = np.array([list(values0) + list(values1)], dtype=float)
    labels = [0] * len(values0) + [1] * len(values1)
    return Dataset(x, labels)


class TestFisher:
    def test_constant_feature(self):
        assert fisher_score(two_class([3, 3], [3, 3])).scores[0] == 0.0

    def test_perfect_separator_is_capped(self):
        assert fisher_score(two_class([0, 0], [1, 1])).scores[0] == FISHER_CAP

    def test_hand_example(self):
        assert fisher_score(two_class([0, 2], [3, 5])).scores[0] == pytest.approx(2.25)

    def test_ranking(self):
        rng = np.random.default_rng(0)
        labels = np.repeat([0, 1], 50)
        x = rng.standard_normal((3, 100))
        x[1] += 3 * labels
        x[2] += labels
        np.testing.assert_array_equal(fisher_score(Dataset(x, labels)).ranking, [1, 2, 0])


class TestCorrelation:
    def test_indicator_feature(self):
        labels = np.array([0, 1, 2, 0, 1, 2, 0])
        x = np.vstack([(labels == 0).astype(float), np.arange(7.0)])
        assert correlation_score(Dataset(x, labels)).scores[0] == pytest.approx(1.0)

    def test_constant_feature(self):
        x = np.full((1, 6), 0.1)
        assert correlation_score(Dataset(x, [0, 1, 0, 1, 0, 1])).scores[0] == 0.0

    def test_random_feature(self):
        rng = np.random.default_rng(99)
        labels = rng.integers(0, 2, 1000)
        score = correlation_score(Dataset(rng.standard_normal((1, 1000)), labels)).scores[0]
        assert score < 0.15

    def test_method_name(self):
        assert correlation_score(two_class([0, 1], [2, 4])).method_name == "cc"


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.1, 100.0), st.floats(-50.0, 50.0))
def test_scores_invariant_to_permutation_and_affine_maps(seed, scale, shift):
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.arange(3), rng.integers(0, 3, 27)])
    x = rng.standard_normal((4, 30)) + labels
    ds = Dataset(x, labels)
    perm = rng.permutation(30)
    moved = Dataset(scale * x[:, perm] + shift, labels[perm])
    for scorer in (fisher_score, correlation_score):
        np.testing.assert_allclose(scorer(moved).scores, scorer(ds).scores, rtol=1e-8, atol=1e-12)


def test_ties_break_by_index():
    x = np.vstack([np.zeros(4), np.zeros(4)])
    np.testing.assert_array_equal(fisher_score(Dataset(x, [0, 1, 0, 1])).ranking, [0, 1])
