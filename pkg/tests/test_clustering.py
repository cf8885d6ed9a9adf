"""Pivot-based sequential grouping."""

import numpy as np
import pytest

from spda.clustering import group_patches
from spda.images import extract_patches, gaussian_kernel


def as_sets(groups):
    return [set(int(i) for i in g) for g in groups]


class TestHandTraces:
    def test_four_value_trace(self):
        # pivot 0 admits 0,1; candidate 2 fails and seeds the second group
        img = np.array([[0.0, 0.1, 0.9, 1.0]])
        groups = group_patches(img, 1, 1, kernel=None, epsilon=0.0)
        assert as_sets(groups) == [{0, 1}, {2, 3}]

    def test_identical_patches_extend_through_ties(self):
        img = np.full((1, 6), 0.7)
        groups = group_patches(img, 1, 2, kernel=None, epsilon=0.0)
        assert as_sets(groups) == [{0, 1, 2, 3, 4, 5}]

    def test_small_trailing_group_merges_backward(self):
        # candidate 3 fails admission, then stands alone and gets merged
        img = np.array([[0.0, 1.0, 2.0, 10.0]])
        groups = group_patches(img, 1, 2, kernel=None, epsilon=0.0)
        assert as_sets(groups) == [{0, 1, 2, 3}]

    def test_epsilon_widens_admission(self):
        img = np.array([[0.0, 0.1, 0.9, 1.0]])
        wide = group_patches(img, 1, 1, kernel=None, epsilon=2.0)
        assert as_sets(wide) == [{0, 1, 2, 3}]


class TestPartitionProperties:
    @pytest.mark.parametrize("seed", range(30))
    def test_disjoint_covering_floor(self, seed):
        rng = np.random.default_rng(seed)
        img = rng.random((14, 14)) * 5
        groups = group_patches(img, 3, 6, kernel=None, epsilon=0.0)
        flat = np.concatenate(groups)
        n = extract_patches(img, 3).n_patches
        assert len(flat) == n
        assert len(np.unique(flat)) == n
        assert all(len(g) >= 6 for g in groups)

    def test_deterministic(self):
        rng = np.random.default_rng(99)
        img = rng.random((16, 16)) * 3
        a = group_patches(img, 4, 8, kernel=gaussian_kernel(), epsilon=0.0)
        b = group_patches(img, 4, 8, kernel=gaussian_kernel(), epsilon=0.0)
        assert len(a) == len(b)
        for ga, gb in zip(a, b):
            np.testing.assert_array_equal(ga, gb)

    def test_first_pivot_minimizes_filtered_norm(self):
        rng = np.random.default_rng(17)
        img = rng.random((12, 12)) * 4
        kern = gaussian_kernel(5, 1.0)
        groups = group_patches(img, 3, 5, kernel=kern, epsilon=0.0)
        from spda.images import convolve_same
        feats = extract_patches(convolve_same(img, kern), 3).data
        norms = np.sum(feats ** 2, axis=0)
        assert int(groups[0][0]) == int(np.argmin(norms))

    def test_smoothing_changes_grouping(self):
        rng = np.random.default_rng(23)
        img = rng.poisson(2.0, size=(16, 16)).astype(float)
        plain = group_patches(img, 4, 10, kernel=None)
        smooth = group_patches(img, 4, 10, kernel=gaussian_kernel())
        same = len(plain) == len(smooth) and all(
            np.array_equal(a, b) for a, b in zip(plain, smooth))
        assert not same


class TestErrors:
    def test_too_few_patches_for_one_group(self):
        with pytest.raises(ValueError):
            group_patches(np.ones((3, 3)), 3, 2, kernel=None)

    def test_patch_side_too_large(self):
        with pytest.raises(ValueError):
            group_patches(np.ones((3, 3)), 5, 1, kernel=None)

    def test_group_floor_below_one(self):
        with pytest.raises(ValueError):
            group_patches(np.ones((6, 6)), 2, 0, kernel=None)
