"""Overlapping patches and their averaging inverse, plus binning.

Every denoiser here works patch-by-patch, so the two primitives are
extract (image -> d x N column matrix) and reproject (average the
overlapping estimates back into an image).
"""

import numpy as np

from spda import (bin_image, extract_patches, psnr, reproject_average,
                  sample_poisson, scale_to_peak, upscale_bilinear)
from spda.testimages import flag_like

img = scale_to_peak(flag_like(48), 4.0)
pm = extract_patches(img, 8)
print(f"48x48 image, 8x8 patches: {pm.n_patches} patches "
      f"({pm.data.shape[0]} pixels each)")

# extract -> reproject is exact: every pixel is averaged with copies of
# itself.
back = reproject_average(pm, *img.shape)
print(f"round-trip max error: {np.max(np.abs(back - img)):.2e}")

# Averaging overlapping noisy patches already denoises a little. Replace
# each patch by its own mean value and reproject:
noisy = sample_poisson(img, seed=2)
npm = extract_patches(noisy, 8)
flat = np.tile(npm.data.mean(axis=0), (npm.data.shape[0], 1))
smoothed = reproject_average(
    type(npm)(data=flat, positions=npm.positions, patch_shape=npm.patch_shape),
    *img.shape)
print(f"noisy {psnr(img, noisy):.2f} dB -> patch-mean smoother "
      f"{psnr(img, smoothed):.2f} dB (blurry but quieter)")

# Binning trades resolution for counts: 3x3 sums have 9x the mean, so the
# relative Poisson noise drops by 3x. Upscaling divides the total back out.
binned = bin_image(noisy, 3)
print(f"\nbinned {noisy.shape} -> {binned.shape}, "
      f"peak {noisy.max():.0f} -> {binned.max():.0f}")
restored = upscale_bilinear(binned, 3, *noisy.shape)
print(f"bin -> bilinear upscale PSNR: {psnr(img, restored):.2f} dB")
