"""Patch extraction, re-projection, scaling, PSNR, convolution, binning."""

import numpy as np
import pytest

from spda.images import (PatchMatrix, bin_image, convolve_same,
                         extract_patches, gaussian_kernel, psnr,
                         reproject_average, scale_to_peak, upscale_bilinear)


class TestExtractPatches:
    def test_single_full_patch_column_stacks(self):
        img = np.array([[1.0, 2.0], [3.0, 4.0]])
        pm = extract_patches(img, 2)
        assert pm.n_patches == 1
        np.testing.assert_array_equal(pm.data[:, 0], [1, 3, 2, 4])

    def test_constant_image_gives_constant_patches(self):
        pm = extract_patches(np.ones((3, 3)), 2)
        assert pm.n_patches == 4
        np.testing.assert_array_equal(pm.data, np.ones((4, 4)))

    def test_count_formula_large_image(self):
        pm = extract_patches(np.zeros((256, 256)), 20)
        assert pm.n_patches == 237 * 237 == 56169

    def test_anchors_enumerate_column_major(self):
        pm = extract_patches(np.zeros((4, 5)), 2)
        # first column of anchors before the second
        np.testing.assert_array_equal(pm.positions[0], [0, 0])
        np.testing.assert_array_equal(pm.positions[1], [1, 0])
        np.testing.assert_array_equal(pm.positions[3], [0, 1])

    def test_patch_content_matches_window(self):
        rng = np.random.default_rng(7)
        img = rng.random((9, 11))
        pm = extract_patches(img, 3)
        for i in (0, 5, pm.n_patches - 1):
            r, c = pm.positions[i]
            win = img[r:r + 3, c:c + 3]
            np.testing.assert_array_equal(pm.data[:, i], win.ravel(order="F"))

    def test_patch_larger_than_image_rejected(self):
        with pytest.raises(ValueError):
            extract_patches(np.ones((4, 4)), 5)

    def test_negative_pixels_rejected(self):
        with pytest.raises(ValueError):
            extract_patches(np.array([[1.0, -0.5], [0.0, 2.0]]), 2)


class TestReprojectAverage:
    def test_hand_counted_coverage(self):
        # 1x3 image from two 1x2 patches: middle pixel averages b and c
        pm = PatchMatrix(
            data=np.array([[1.0, 5.0], [3.0, 7.0]]),
            positions=np.array([[0, 0], [0, 1]]),
            patch_shape=(1, 2),
        )
        out = reproject_average(pm, 1, 3)
        np.testing.assert_allclose(out, [[1.0, 4.0, 7.0]])

    def test_constant_patches_average_to_constant(self):
        pm = extract_patches(np.zeros((5, 6)), 2)
        pm = PatchMatrix(np.full_like(pm.data, 2.5), pm.positions,
                         pm.patch_shape)
        np.testing.assert_array_equal(reproject_average(pm, 5, 6),
                                      np.full((5, 6), 2.5))

    def test_round_trip_is_exact(self):
        rng = np.random.default_rng(11)
        for side in (1, 2, 3, 5):
            img = rng.random((8, 9)) * 10
            pm = extract_patches(img, side)
            back = reproject_average(pm, 8, 9)
            assert np.max(np.abs(back - img)) <= 1e-12

    def test_output_within_contributor_range(self):
        rng = np.random.default_rng(12)
        img = rng.random((7, 7))
        pm = extract_patches(img, 3)
        noisy = PatchMatrix(pm.data + rng.random(pm.data.shape),
                            pm.positions, pm.patch_shape)
        out = reproject_average(noisy, 7, 7)
        assert np.all(out >= noisy.data.min() - 1e-12)
        assert np.all(out <= noisy.data.max() + 1e-12)

    def test_uncovered_pixel_rejected(self):
        pm = PatchMatrix(np.array([[1.0], [1.0], [1.0], [1.0]]),
                         np.array([[0, 0]]), (2, 2))
        with pytest.raises(ValueError):
            reproject_average(pm, 3, 3)


class TestScaleToPeak:
    def test_linear_rescale(self):
        out = scale_to_peak(np.array([[0.0, 5.0], [10.0, 10.0]]), 1.0)
        np.testing.assert_allclose(out, [[0.0, 0.5], [1.0, 1.0]])

    def test_already_at_peak_is_identity(self):
        img = np.array([[0.5, 2.0], [1.0, 0.0]])
        np.testing.assert_array_equal(scale_to_peak(img, 2.0), img)

    def test_single_pixel(self):
        np.testing.assert_allclose(scale_to_peak(np.array([[255.0]]), 0.1),
                                   [[0.1]])

    def test_max_hits_peak_exactly(self):
        rng = np.random.default_rng(3)
        img = rng.random((16, 16)) * 7
        out = scale_to_peak(img, 0.2)
        assert out.max() == 0.2

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            scale_to_peak(np.zeros((4, 4)), 1.0)


class TestPsnr:
    def test_identical_images_infinite(self):
        img = np.ones((5, 5))
        assert psnr(img, img) == np.inf

    def test_peak_one_mse_hundredth(self):
        ref = np.zeros((10, 10))
        ref[0, 0] = 1.0
        est = ref + 0.1
        np.testing.assert_allclose(psnr(ref, est), 20.0, rtol=1e-12)

    def test_peak_255_mse_one(self):
        ref = np.zeros((4, 4))
        ref[0, 0] = 255.0
        est = ref + 1.0
        np.testing.assert_allclose(psnr(ref, est), 48.1308, atol=1e-4)

    def test_depends_only_on_peak_and_mean_square_error(self):
        rng = np.random.default_rng(8)
        ref = rng.random((6, 6))
        ref[0, 0] = 1.0
        e1 = np.full((6, 6), 0.05)
        e2 = np.zeros((6, 6))
        e2[2, 3] = np.sqrt(36 * 0.05 ** 2)  # same mean(e^2), one spike
        np.testing.assert_allclose(psnr(ref, ref + e1), psnr(ref, ref + e2),
                                   rtol=1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            psnr(np.ones((3, 3)), np.ones((3, 4)))


class TestConvolveSame:
    def test_identity_kernel(self):
        rng = np.random.default_rng(19)
        img = rng.random((6, 6))
        np.testing.assert_array_equal(convolve_same(img, np.array([[1.0]])),
                                      img)

    def test_ones_kernel_center(self):
        out = convolve_same(np.ones((3, 3)), np.ones((3, 3)))
        assert out[1, 1] == 9.0

    def test_replicate_padding_preserves_constants(self):
        kern = gaussian_kernel(7, 1.5)
        out = convolve_same(np.full((10, 12), 3.25), kern)
        np.testing.assert_allclose(out, 3.25, rtol=1e-12)

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            convolve_same(np.ones((5, 5)), np.ones((2, 2)))


class TestGaussianKernel:
    def test_normalized_and_symmetric(self):
        k = gaussian_kernel(7, 1.5)
        np.testing.assert_allclose(k.sum(), 1.0, rtol=1e-12)
        np.testing.assert_allclose(k, k.T)
        np.testing.assert_allclose(k, k[::-1, ::-1])
        assert k[3, 3] == k.max()


class TestBinImage:
    def test_block_sums(self):
        out = bin_image(np.ones((6, 6)), 3)
        np.testing.assert_array_equal(out, np.full((2, 2), 9.0))

    def test_single_block_total(self):
        img = np.arange(9, dtype=float).reshape(3, 3)
        np.testing.assert_allclose(bin_image(img, 3), [[img.sum()]])

    def test_peak_multiplier_nine_on_constants(self):
        out = bin_image(np.full((9, 9), 2.0), 3)
        assert out.max() == 9 * 2.0

    def test_photon_count_preserved_when_divisible(self):
        rng = np.random.default_rng(5)
        img = rng.random((12, 9)) * 4
        np.testing.assert_allclose(bin_image(img, 3).sum(), img.sum(),
                                   rtol=1e-12)

    def test_padding_replicates_edges(self):
        img = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = bin_image(img, 3)
        # pad to 3x3 by repeating last row/col: total = 1+2+2+3+4+4+3+4+4
        np.testing.assert_allclose(out, [[27.0]])

    def test_factor_below_two_rejected(self):
        with pytest.raises(ValueError):
            bin_image(np.ones((6, 6)), 1)


class TestUpscaleBilinear:
    def test_constant_nine_becomes_constant_one(self):
        out = upscale_bilinear(np.full((2, 2), 9.0), 3, 6, 6)
        np.testing.assert_allclose(out, 1.0, rtol=1e-12)

    def test_factor_one_is_identity(self):
        rng = np.random.default_rng(2)
        img = rng.random((4, 5))
        np.testing.assert_allclose(upscale_bilinear(img, 1, 4, 5), img)

    def test_ramp_stays_monotone(self):
        out = upscale_bilinear(np.array([[0.0, 9.0]]), 3, 1, 6)
        assert np.all(np.diff(out[0]) >= 0)

    def test_output_smaller_than_input_rejected(self):
        with pytest.raises(ValueError):
            upscale_bilinear(np.ones((4, 4)), 2, 3, 8)
